use crate::capabilities::Capability;
use crate::cypher::ResultTable;
use crate::graph::PropertyValue;

pub const NO_DATA_MESSAGE: &str = "No matching data was found in the knowledge graph.";

/// Deterministic, human-readable presentation of capability rows.
pub fn render_insights(capability: &Capability, rows: &ResultTable) -> String {
    if rows.is_empty() {
        return NO_DATA_MESSAGE.to_string();
    }
    let typed = match capability {
        Capability::SimilarArticles { .. } => similar(rows),
        Capability::SentimentLookup { article_id } => sentiment(*article_id, rows),
        Capability::TopicPrediction { article_id, .. } => topic(*article_id, rows),
        _ => None,
    };
    typed.unwrap_or_else(|| table(rows))
}

fn similar(rows: &ResultTable) -> Option<String> {
    let items = (0..rows.len())
        .map(|i| {
            let id = rows.get(i, "a2.article_id")?.as_integer()?;
            let score = rows.get(i, "similarity_score")?.as_float()?;
            Some(format!("#{id} (score {score:.2})"))
        })
        .collect::<Option<Vec<_>>>()?;
    Some(format!("Top similar articles: {}", items.join(", ")))
}

fn sentiment(article_id: i64, rows: &ResultTable) -> Option<String> {
    let label = rows.get(0, "n.sentiment")?.as_text()?;
    Some(match rows.get(0, "n.compound").and_then(PropertyValue::as_float) {
        Some(c) => format!("Article {article_id} sentiment: {label} (compound {c:.2})."),
        None => format!("Article {article_id} sentiment: {label}."),
    })
}

fn topic(article_id: i64, rows: &ResultTable) -> Option<String> {
    let name = rows.get(0, "predicted_topic")?.as_text()?;
    let via = rows.get(0, "similar_article")?.as_integer()?;
    let score = rows.get(0, "similarity_score")?.as_float()?;
    Some(format!("Predicted topic for article {article_id}: {name} (via article {via}, similarity {score:.2})."))
}

fn table(rows: &ResultTable) -> String {
    let mut out = format!("{} row{}:", rows.len(), if rows.len() == 1 { "" } else { "s" });
    for row in &rows.rows {
        let cells: Vec<String> =
            rows.columns.iter().zip(row).map(|(c, v)| format!("{c}: {}", render_value(v))).collect();
        out.push('\n');
        out.push_str(&cells.join(", "));
    }
    out
}

/// Short display form of a cell; vectors are summarized by dimension.
pub fn render_value(value: &PropertyValue) -> String {
    match value {
        PropertyValue::Integer(i) => i.to_string(),
        PropertyValue::Float(f) => f.to_string(),
        PropertyValue::Text(s) => s.clone(),
        PropertyValue::FloatVector(v) => format!("[{}-dim vector]", v.len()),
        PropertyValue::Boolean(b) => b.to_string(),
        PropertyValue::Null => "null".to_string(),
    }
}
