use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Newline,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

/// Longest symbols first.
const SYMBOLS: [&str; 30] = [
    ":=", "..", "->", "=>", "==", "!=", "<=", ">=", "&&", "||", "{", "}", "(", ")", "[", "]",
    ",", ";", ":", "<", ">", "=", "!", "?", "+", "-", "*", "/", "%", "@",
];

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

/// Splits `text` into tokens. `//` and `#` start line comments; newlines
/// are significant.
pub fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let at = |tok| Token {
                tok,
                line: ln + 1,
                column,
            };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
                break;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse::<i64>().map_err(|_| Error::Syntax {
                    line: ln + 1,
                    column,
                    message: format!("integer `{s}` out of range"),
                })?;
                out.push(at(Tok::Int(v)));
                continue;
            }
            if ident_start(c) {
                let start = i;
                // dots join name parts (`V1.vote`) but never form `..`
                while i < chars.len()
                    && (ident_char(chars[i])
                        || (chars[i] == '.'
                            && chars.get(i + 1).is_some_and(|&n| ident_start(n))))
                {
                    i += 1;
                }
                out.push(at(Tok::Ident(chars[start..i].iter().collect())));
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    out.push(at(Tok::Sym(s)));
                    i += s.len();
                }
                None => {
                    return Err(Error::Syntax {
                        line: ln + 1,
                        column,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        }
        out.push(Token {
            tok: Tok::Newline,
            line: ln + 1,
            column: chars.len() + 1,
        });
    }
    let line = out.last().map_or(1, |t| t.line);
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: 1,
    });
    Ok(out)
}
