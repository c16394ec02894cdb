use super::DslError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(f64),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
    Semi,
    Assign,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Number(v) => format!("number `{v}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Splits source into tokens. Line breaks inside parentheses are
/// insignificant, so long calls may wrap. `#` starts a comment.
pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, DslError> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: start_line,
                col: start_col,
            })
        };
        match c {
            '\n' => {
                if depth == 0 {
                    push(&mut out, Tok::Newline);
                }
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_whitespace() => {}
            '+' => push(&mut out, Tok::Plus),
            '-' | '\u{2212}' => push(&mut out, Tok::Minus),
            '*' => push(&mut out, Tok::Star),
            '/' => push(&mut out, Tok::Slash),
            '(' => {
                depth += 1;
                push(&mut out, Tok::LParen)
            }
            ')' => {
                depth = depth.saturating_sub(1);
                push(&mut out, Tok::RParen)
            }
            ',' => push(&mut out, Tok::Comma),
            ';' => push(&mut out, Tok::Semi),
            '=' => push(&mut out, Tok::Assign),
            c if c.is_ascii_digit() || c == '.' => {
                let begin = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[begin..i].iter().collect();
                let value: f64 = text.parse().map_err(|_| DslError::Syntax {
                    line: start_line,
                    col: start_col,
                    message: format!("malformed number `{text}`"),
                })?;
                if !value.is_finite() {
                    return Err(DslError::Syntax {
                        line: start_line,
                        col: start_col,
                        message: format!("number `{text}` is out of range"),
                    });
                }
                push(&mut out, Tok::Number(value));
                col += i - begin;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let begin = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                push(&mut out, Tok::Ident(chars[begin..i].iter().collect()));
                col += i - begin;
                continue;
            }
            other => {
                return Err(DslError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_and_exponents() {
        assert_eq!(
            toks("1e-7 2.5E3 .5"),
            vec![
                Tok::Number(1e-7),
                Tok::Number(2500.0),
                Tok::Number(0.5),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_wrapped_calls() {
        assert_eq!(
            toks("a = max(1,\n 2) # tail\n"),
            vec![
                Tok::Ident("a".into()),
                Tok::Assign,
                Tok::Ident("max".into()),
                Tok::LParen,
                Tok::Number(1.0),
                Tok::Comma,
                Tok::Number(2.0),
                Tok::RParen,
                Tok::Newline,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("a\n  $").unwrap_err();
        assert_eq!(
            t,
            DslError::Syntax {
                line: 2,
                col: 3,
                message: "unexpected character `$`".into()
            }
        );
    }
}
