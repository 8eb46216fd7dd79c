use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Integer,
    Float,
    Text,
    Symbol,
}

/// A lexical token. `text` is the exact source slice, so string literals
/// keep their quotes and escapes, and keywords keep their original case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub offset: usize,
}

impl Token {
    /// True for a keyword matching `word` case-insensitively.
    pub fn is_keyword(&self, word: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text.eq_ignore_ascii_case(word)
    }

    pub fn is_symbol(&self, sym: &str) -> bool {
        self.kind == TokenKind::Symbol && self.text == sym
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}'", self.text)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unexpected character {found:?} at offset {offset}")]
pub struct LexError {
    pub offset: usize,
    pub found: String,
}

/// Keywords of the supported read-only grammar.
pub const READ_KEYWORDS: &[&str] = &[
    "MATCH", "WHERE", "WITH", "RETURN", "ORDER", "BY", "ASC", "ASCENDING", "DESC", "DESCENDING", "LIMIT",
    "AS", "TRUE", "FALSE", "NULL",
];

/// Clauses that mutate the graph or reach outside it.
pub const WRITE_KEYWORDS: &[&str] = &[
    "CREATE", "MERGE", "DELETE", "DETACH", "SET", "REMOVE", "DROP", "CALL", "LOAD",
];

/// Recognized so that they surface as parse errors rather than identifiers.
const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "OPTIONAL", "UNWIND", "UNION", "SKIP", "DISTINCT", "AND", "OR", "NOT", "XOR", "FOREACH", "CASE",
];

pub fn is_keyword(word: &str) -> bool {
    let upper = word.to_ascii_uppercase();
    [READ_KEYWORDS, WRITE_KEYWORDS, UNSUPPORTED_KEYWORDS]
        .iter()
        .any(|set| set.contains(&upper.as_str()))
}

pub fn is_write_keyword(word: &str) -> bool {
    let upper = word.to_ascii_uppercase();
    WRITE_KEYWORDS.contains(&upper.as_str())
}

const TWO_CHAR_SYMBOLS: &[&str] = &["->", "<-", "<>", "<=", ">="];
const ONE_CHAR_SYMBOLS: &str = "()[]{}:,.=<>-";

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let (tokens, err) = tokenize_partial(text);
    match err {
        Some(e) => Err(e),
        None => Ok(tokens),
    }
}

/// Tokenizes as far as possible, returning the tokens read before the
/// first error together with that error.
pub fn tokenize_partial(text: &str) -> (Vec<Token>, Option<LexError>) {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let start = pos;
        let kind = if c.is_ascii_alphabetic() || c == b'_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            if is_keyword(&text[start..pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() {
            lex_number(bytes, &mut pos)
        } else if c == b'\'' || c == b'"' {
            match lex_string(bytes, &mut pos) {
                Some(kind) => kind,
                None => return (tokens, Some(error_at(text, start))),
            }
        } else if pos + 1 < bytes.len() && TWO_CHAR_SYMBOLS.contains(&&text[pos..pos + 2]) {
            pos += 2;
            TokenKind::Symbol
        } else if ONE_CHAR_SYMBOLS.as_bytes().contains(&c) {
            pos += 1;
            TokenKind::Symbol
        } else {
            return (tokens, Some(error_at(text, start)));
        };
        tokens.push(Token { kind, text: text[start..pos].to_string(), offset: start });
    }
    (tokens, None)
}

fn error_at(text: &str, offset: usize) -> LexError {
    let found = text[offset..].chars().next().map(String::from).unwrap_or_default();
    LexError { offset, found }
}

fn lex_number(bytes: &[u8], pos: &mut usize) -> TokenKind {
    let digits = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
    };
    digits(pos);
    let mut kind = TokenKind::Integer;
    if *pos + 1 < bytes.len() && bytes[*pos] == b'.' && bytes[*pos + 1].is_ascii_digit() {
        *pos += 1;
        digits(pos);
        kind = TokenKind::Float;
    }
    if *pos < bytes.len() && (bytes[*pos] == b'e' || bytes[*pos] == b'E') {
        let mut look = *pos + 1;
        if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
            look += 1;
        }
        if look < bytes.len() && bytes[look].is_ascii_digit() {
            *pos = look;
            digits(pos);
            kind = TokenKind::Float;
        }
    }
    kind
}

fn lex_string(bytes: &[u8], pos: &mut usize) -> Option<TokenKind> {
    let quote = bytes[*pos];
    *pos += 1;
    while *pos < bytes.len() {
        match bytes[*pos] {
            b'\\' => *pos += 2,
            b if b == quote => {
                *pos += 1;
                return Some(TokenKind::Text);
            }
            _ => *pos += 1,
        }
    }
    None
}
