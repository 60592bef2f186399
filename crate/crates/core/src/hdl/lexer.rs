// SPDX-License-Identifier: Apache-2.0

//! Tokenizer for preprocessed Verilog text.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Literal text of a number, including size and base (`8'hff`).
    Number(String),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Number(s) => write!(f, "number `{s}`"),
            TokenKind::Str(s) => write!(f, "string \"{s}\""),
            TokenKind::Sym(s) => write!(f, "`{s}`"),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

// longest first
const SYMBOLS: &[&str] = &[
    "<<<", ">>>", "===", "!==", "**", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "~^", "^~", "~&", "~|", "+:",
    "-:", "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "=", "?", ":", ";", ",", ".", "(", ")", "[", "]",
    "{", "}", "@", "#",
];

pub fn lex(text: &str) -> Result<Vec<Token>, LexError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut line_start = 0;

    while i < bytes.len() {
        let c = bytes[i];
        let column = i - line_start + 1;
        if c == b'\n' {
            line += 1;
            i += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = if c.is_ascii_alphabetic() || c == b'_' || c == b'$' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$') {
                i += 1;
            }
            TokenKind::Ident(text[start..i].to_string())
        } else if c.is_ascii_digit() || c == b'\'' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                i += 1;
            }
            let mut literal: String = text[start..i].chars().filter(|&c| c != '_').collect();
            let mut j = i;
            while j < bytes.len() && (bytes[j] == b' ' || bytes[j] == b'\t') {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'\'' {
                i = j + 1;
                literal.push('\'');
                if i < bytes.len() && (bytes[i] == b's' || bytes[i] == b'S') {
                    literal.push('s');
                    i += 1;
                }
                if i >= bytes.len() || !b"bBoOdDhH".contains(&bytes[i]) {
                    return Err(LexError { line, column, message: "malformed based literal".into() });
                }
                literal.push(bytes[i].to_ascii_lowercase() as char);
                i += 1;
                while i < bytes.len() && (bytes[i] == b' ' || bytes[i] == b'\t') {
                    i += 1;
                }
                let digits_start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'?') {
                    i += 1;
                }
                if digits_start == i {
                    return Err(LexError { line, column, message: "based literal without digits".into() });
                }
                literal.extend(text[digits_start..i].chars().filter(|&c| c != '_').map(|c| c.to_ascii_lowercase()));
            } else if i < bytes.len() && bytes[i] == b'.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit()) {
                return Err(LexError { line, column, message: "real literals are not supported".into() });
            }
            TokenKind::Number(literal)
        } else if c == b'"' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' && bytes[i] != b'\n' {
                if bytes[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            if i >= bytes.len() || bytes[i] != b'"' {
                return Err(LexError { line, column, message: "unterminated string".into() });
            }
            i += 1;
            TokenKind::Str(text[start + 1..i - 1].to_string())
        } else if let Some(sym) = SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            i += sym.len();
            TokenKind::Sym(sym)
        } else {
            let ch = text[i..].chars().next().unwrap();
            return Err(LexError { line, column, message: format!("unexpected character `{ch}`") });
        };
        tokens.push(Token { kind, line, column });
    }
    tokens.push(Token { kind: TokenKind::Eof, line, column: i - line_start + 1 });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        lex(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn numbers_and_symbols() {
        use TokenKind::*;
        assert_eq!(
            kinds("a<=8'hF_F>>>4 'b1 32 'sd 3"),
            vec![
                Ident("a".into()),
                Sym("<="),
                Number("8'hff".into()),
                Sym(">>>"),
                Number("4'b1".into()),
                Number("32'sd3".into()),
                Eof
            ]
        );
    }

    #[test]
    fn positions() {
        let toks = lex("module m;\n  wire w;").unwrap();
        assert_eq!((toks[3].line, toks[3].column), (2, 3));
    }

    #[test]
    fn rejects_garbage() {
        assert!(lex("a ` b").is_err());
        assert!(lex("1.5").is_err());
    }
}
