#!/usr/bin/env python3
"""Generates the 50-article test corpus (ids 100-149, 8 topics, 120 topic links).

Article 100 has no topics and exactly one lexicon word ("good"). Article 101
repeats its body with one word swapped so the two embeddings have cosine
near 0.99; 101 carries topics 1 and 5. Article 149 has an empty body.

Usage: scripts/make_fixture.py [output.jsonl]
"""

import json
import math
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
LEXICON = ROOT / "crates/core/data/lexicon.tsv"
DEFAULT_OUT = ROOT / "crates/core/tests/fixtures/articles.jsonl"
DIM = 64

TOPICS = [
    (1, "Machine Learning"),
    (2, "Robotics"),
    (3, "Healthcare AI"),
    (4, "Regulation"),
    (5, "Generative AI"),
    (6, "Computer Vision"),
    (7, "NLP"),
    (8, "Ethics"),
]

VOCAB = {
    1: "model training dataset gradient neural network parameters inference benchmark tuning cluster".split(),
    2: "robot arm gripper warehouse actuator sensor locomotion drone factory assembly".split(),
    3: "hospital clinical diagnosis patient radiology scan trial physician genome triage".split(),
    4: "lawmakers parliament regulator policy compliance act commission hearing statute audit".split(),
    5: "chatbot diffusion prompt image generator text synthesis assistant llm multimodal".split(),
    6: "camera pixel detection segmentation video lidar recognition frame vision tracking".split(),
    7: "language translation tokenizer corpus speech grammar summarization dialogue parsing vocabulary".split(),
    8: "consent accountability governance privacy oversight rights disclosure stakeholders provenance society".split(),
}
FILLER = "the a of and to in on for with by from at as company researchers team report said new year week this that".split()
SENTIMENT = "great strong promising concern risk problem success growth fear breakthrough".split()
NEGATIONS = ["not", "never", "no"]
PUBLISHERS = ["TechWire", "AI Daily", "Signal Post", "Data Ledger", "Compute Times"]
COUNTRIES = ["United States", "Ireland", "Germany", "India", "Japan", "Canada"]

BASE_TEXT = (
    "The company said its new model training cluster went online this week. "
    "Researchers from the team report that the benchmark run took nine days on the dataset. "
    "A good share of the parameters came from an earlier network release. "
    "The report adds that inference tuning will continue through the year."
)


def load_lexicon():
    terms = set()
    for line in LEXICON.read_text(encoding="utf-8").splitlines():
        if line.strip() and not line.startswith("#"):
            terms.add(line.split("\t")[0].strip().lower())
    return terms


def tokens(text):
    out, cur = [], []
    for ch in text.lower():
        if "a" <= ch <= "z" or "0" <= ch <= "9":
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


def fnv(data):
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def embed(text):
    v = [0.0] * DIM
    for tok in tokens(text):
        bounded = "<" + tok + ">"
        feats = [tok] + [bounded[i:i + n] for n in (3, 4, 5) for i in range(len(bounded) - n + 1)]
        for f in feats:
            h = fnv(f.encode("utf-8"))
            v[h % DIM] += 1.0 if h >> 63 == 0 else -1.0
    norm = math.sqrt(sum(x * x for x in v))
    return [x / norm for x in v] if norm else v


def cos(a, b):
    na, nb = math.sqrt(sum(x * x for x in a)), math.sqrt(sum(x * x for x in b))
    return sum(x * y for x, y in zip(a, b)) / (na * nb) if na and nb else 0.0


def body(rng, topic_ids, lexicon_free):
    words = []
    for _ in range(rng.randint(3, 5)):
        sentence = [rng.choice(FILLER)]
        for _ in range(rng.randint(5, 9)):
            pool = VOCAB[rng.choice(topic_ids)] if rng.random() < 0.7 else FILLER
            sentence.append(rng.choice(pool))
        if not lexicon_free and rng.random() < 0.5:
            if rng.random() < 0.3:
                sentence.insert(rng.randint(0, len(sentence)), rng.choice(NEGATIONS))
            sentence.insert(rng.randint(0, len(sentence)), rng.choice(SENTIMENT))
        words.append(" ".join(sentence).capitalize() + ".")
    return " ".join(words)


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_OUT
    lexicon = load_lexicon()
    for group in list(VOCAB.values()) + [FILLER]:
        clash = [w for w in group if w in lexicon]
        assert not clash, f"vocabulary words in lexicon: {clash}"
    assert [t for t in tokens(BASE_TEXT) if t in lexicon] == ["good"]

    base = embed(BASE_TEXT)
    twin_text, twin_score = None, None
    for i, word in enumerate(BASE_TEXT.split(" ")):
        for repl in VOCAB[1] + VOCAB[5]:
            if word.strip(".").lower() in ("good",) or repl in word:
                continue
            candidate = BASE_TEXT.split(" ")
            candidate[i] = repl + ("." if word.endswith(".") else "")
            text = " ".join(candidate)
            score = cos(base, embed(text))
            if 0.985 <= score < 0.995 and (twin_score is None or abs(score - 0.99) < abs(twin_score - 0.99)):
                twin_text, twin_score = text, score
    assert twin_text is not None, "no single-word edit lands near 0.99"

    rng = random.Random(20231101)
    others = list(range(102, 150))
    three = set(rng.sample(others, 22))
    records = []
    for aid in range(100, 150):
        if aid == 100:
            topic_ids, content = [], BASE_TEXT
        elif aid == 101:
            topic_ids, content = [1, 5], twin_text
        else:
            k = 3 if aid in three else 2
            topic_ids = sorted(rng.sample([t for t, _ in TOPICS], k))
            content = "" if aid == 149 else body(rng, topic_ids, lexicon_free=False)
        names = dict(TOPICS)
        records.append({
            "article_id": aid,
            "title": f"{names[topic_ids[0]] if topic_ids else 'AI'} update {aid}",
            "content": content,
            "published_date": f"2023-{(aid % 12) + 1:02d}-{(aid % 27) + 1:02d}",
            "publisher": PUBLISHERS[aid % len(PUBLISHERS)],
            "country": COUNTRIES[aid % len(COUNTRIES)],
            "topics": [{"topic_id": t, "name": names[t]} for t in topic_ids],
        })

    edges = sum(len(r["topics"]) for r in records)
    used = {t["topic_id"] for r in records for t in r["topics"]}
    assert edges == 120 and len(used) == 8, (edges, used)
    best_other = max(cos(base, embed(r["content"])) for r in records[2:])
    assert best_other < 0.9, best_other

    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    print(f"wrote {len(records)} articles, {len(used)} topics, {edges} edges to {out}")
    print(f"cosine(100, 101) = {twin_score:.6f}; best other = {best_other:.6f}")


if __name__ == "__main__":
    main()
