//! Tokenizer shared by the Verilog and VHDL front ends.

use super::HdlError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Raw literal text, e.g. `8'hff`, `42`, or a VHDL `'1'`.
    Number(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl Token {
    pub fn text(&self) -> String {
        match &self.kind {
            TokenKind::Ident(s) | TokenKind::Number(s) => s.clone(),
            TokenKind::Punct(p) => (*p).to_string(),
            TokenKind::Eof => "<end of input>".to_string(),
        }
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(self.kind, TokenKind::Punct(q) if q == p)
    }

    pub fn is_ident(&self, word: &str) -> bool {
        matches!(&self.kind, TokenKind::Ident(s) if s == word)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Verilog,
    Vhdl,
}

const VERILOG_PUNCT: &[&str] = &[
    "<<<", ">>>", "===", "!==", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "~&", "~|", "~^",
    "^~", "(", ")", "[", "]", "{", "}", ",", ";", ":", ".", "=", "@", "#", "*", "?", "+", "-",
    "&", "|", "^", "~", "!", "<", ">", "/", "%",
];

const VHDL_PUNCT: &[&str] = &[
    "<=", ":=", "=>", "/=", ">=", "(", ")", ",", ";", ":", ".", "=", "<", ">", "+", "-", "&", "*",
    "/",
];

/// Line/column (1-based) of a byte offset.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, ch) in source.char_indices() {
        if i >= offset {
            break;
        }
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

pub fn tokenize(source: &str, dialect: Dialect) -> Result<Vec<Token>, HdlError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    let mut line = 1;
    let mut line_start = 0;

    let puncts = match dialect {
        Dialect::Verilog => VERILOG_PUNCT,
        Dialect::Vhdl => VHDL_PUNCT,
    };

    while pos < bytes.len() {
        let c = bytes[pos];
        if c == b'\n' {
            pos += 1;
            line += 1;
            line_start = pos;
            continue;
        }
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        // comments
        let comment_start = match dialect {
            Dialect::Verilog => source[pos..].starts_with("//"),
            Dialect::Vhdl => source[pos..].starts_with("--"),
        };
        if comment_start {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        if dialect == Dialect::Verilog && source[pos..].starts_with("/*") {
            let Some(close) = source[pos + 2..].find("*/") else {
                return Err(HdlError::Syntax {
                    line,
                    col: pos - line_start + 1,
                    token: "/*".into(),
                    message: "unterminated block comment".into(),
                });
            };
            let end = pos + 2 + close + 2;
            for &b in &bytes[pos..end] {
                if b == b'\n' {
                    line += 1;
                }
            }
            if let Some(nl) = source[..end].rfind('\n') {
                if nl >= pos {
                    line_start = nl + 1;
                }
            }
            pos = end;
            continue;
        }

        let start = pos;
        let col = source[line_start..start].chars().count() + 1;
        let kind = if c.is_ascii_alphabetic() || c == b'_' || (c == b'$' && dialect == Dialect::Verilog)
        {
            pos += 1;
            while pos < bytes.len()
                && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_' || bytes[pos] == b'$')
            {
                pos += 1;
            }
            let word = &source[start..pos];
            match dialect {
                Dialect::Verilog => TokenKind::Ident(word.to_string()),
                // VHDL is case-insensitive
                Dialect::Vhdl => TokenKind::Ident(word.to_ascii_lowercase()),
            }
        } else if c.is_ascii_digit() || (c == b'\'' && dialect == Dialect::Verilog) {
            pos = lex_verilog_number(source, pos, dialect);
            if pos == start {
                return Err(HdlError::Syntax {
                    line,
                    col,
                    token: "'".into(),
                    message: "malformed literal".into(),
                });
            }
            TokenKind::Number(source[start..pos].to_string())
        } else if c == b'\'' && dialect == Dialect::Vhdl {
            // character literal '0' / '1'
            if pos + 2 < bytes.len() && bytes[pos + 2] == b'\'' {
                pos += 3;
                TokenKind::Number(source[start..pos].to_string())
            } else {
                return Err(HdlError::Syntax {
                    line,
                    col,
                    token: "'".into(),
                    message: "malformed character literal".into(),
                });
            }
        } else if c == b'"' && dialect == Dialect::Vhdl {
            let Some(close) = source[pos + 1..].find('"') else {
                return Err(HdlError::Syntax {
                    line,
                    col,
                    token: "\"".into(),
                    message: "unterminated string literal".into(),
                });
            };
            pos += close + 2;
            TokenKind::Number(source[start..pos].to_string())
        } else if let Some(p) = puncts.iter().find(|p| source[pos..].starts_with(**p)) {
            pos += p.len();
            TokenKind::Punct(p)
        } else {
            let ch = source[pos..].chars().next().unwrap_or('?');
            return Err(HdlError::Syntax {
                line,
                col,
                token: ch.to_string(),
                message: "unexpected character".into(),
            });
        };
        tokens.push(Token {
            kind,
            start,
            end: pos,
            line,
            col,
        });
    }

    let (eline, ecol) = line_col(source, source.len());
    tokens.push(Token {
        kind: TokenKind::Eof,
        start: source.len(),
        end: source.len(),
        line: eline,
        col: ecol,
    });
    Ok(tokens)
}

fn lex_verilog_number(source: &str, mut pos: usize, dialect: Dialect) -> usize {
    let bytes = source.as_bytes();
    while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'_') {
        pos += 1;
    }
    if dialect == Dialect::Vhdl {
        return pos;
    }
    // based literal: [size]'[s]<base><digits>
    if pos < bytes.len() && bytes[pos] == b'\'' {
        let mut p = pos + 1;
        if p < bytes.len() && (bytes[p] == b's' || bytes[p] == b'S') {
            p += 1;
        }
        if p < bytes.len() && matches!(bytes[p].to_ascii_lowercase(), b'b' | b'o' | b'd' | b'h') {
            p += 1;
            let digits_start = p;
            while p < bytes.len() && (bytes[p].is_ascii_hexdigit() || b"xXzZ_?".contains(&bytes[p]))
            {
                p += 1;
            }
            if p > digits_start {
                return p;
            }
        }
    }
    pos
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src, Dialect::Verilog)
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    #[test]
    fn sized_literals_and_operators() {
        assert_eq!(
            kinds("a <= 8'hFF ~^ b;"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Punct("<="),
                TokenKind::Number("8'hFF".into()),
                TokenKind::Punct("~^"),
                TokenKind::Ident("b".into()),
                TokenKind::Punct(";"),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn comments_are_skipped_and_lines_tracked() {
        let toks = tokenize("// hi\n/* a\n b */ x", Dialect::Verilog).unwrap();
        assert_eq!(toks[0].kind, TokenKind::Ident("x".into()));
        assert_eq!((toks[0].line, toks[0].col), (3, 7));
    }

    #[test]
    fn vhdl_is_case_folded() {
        let toks = tokenize("SUM <= A XOR b; -- c", Dialect::Vhdl).unwrap();
        assert_eq!(toks[0].kind, TokenKind::Ident("sum".into()));
        assert_eq!(toks[3].kind, TokenKind::Ident("xor".into()));
        assert_eq!(toks.len(), 7);
    }

    #[test]
    fn stray_character_is_reported() {
        let err = tokenize("a ` b", Dialect::Verilog).unwrap_err();
        assert!(matches!(err, HdlError::Syntax { col: 3, .. }));
    }
}
