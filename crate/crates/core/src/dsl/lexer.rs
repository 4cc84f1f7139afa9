use super::ast::Span;
use super::{ParseError, SourceMap};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    LParen,
    RParen,
    Symbol(String),
    Number(f64),
    Str(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';')
}

fn looks_numeric(s: &str) -> bool {
    let rest = s.strip_prefix(['-', '+']).unwrap_or(s);
    let rest = rest.strip_prefix('.').unwrap_or(rest);
    rest.starts_with(|c: char| c.is_ascii_digit())
}

/// Splits source text into parentheses, symbols, numbers and strings.
/// `;` starts a comment that runs to end of line.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let map = SourceMap::new("<input>", text);
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        match c {
            _ if c.is_whitespace() => {
                chars.next();
            }
            ';' => {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' | ')' => {
                chars.next();
                let kind = if c == '(' { TokenKind::LParen } else { TokenKind::RParen };
                tokens.push(Token {
                    kind,
                    span: Span::new(start, start + 1),
                });
            }
            '"' => {
                chars.next();
                let mut value = String::new();
                let mut end = None;
                while let Some((i, c)) = chars.next() {
                    match c {
                        '"' => {
                            end = Some(i + 1);
                            break;
                        }
                        '\\' => match chars.next() {
                            Some((_, 'n')) => value.push('\n'),
                            Some((_, 't')) => value.push('\t'),
                            Some((_, '"')) => value.push('"'),
                            Some((_, '\\')) => value.push('\\'),
                            Some((i, other)) => {
                                return Err(map.error(
                                    format!("unknown escape sequence `\\{other}` in string"),
                                    Span::new(i - 1, i + other.len_utf8()),
                                ))
                            }
                            None => break,
                        },
                        _ => value.push(c),
                    }
                }
                let Some(end) = end else {
                    return Err(map.error("unterminated string literal", Span::new(start, text.len())));
                };
                tokens.push(Token {
                    kind: TokenKind::Str(value),
                    span: Span::new(start, end),
                });
            }
            _ => {
                let mut end = start;
                while let Some(&(i, c)) = chars.peek() {
                    if is_delimiter(c) {
                        break;
                    }
                    end = i + c.len_utf8();
                    chars.next();
                }
                let s = &text[start..end];
                let span = Span::new(start, end);
                let kind = if looks_numeric(s) {
                    match s.parse::<f64>() {
                        Ok(v) if v.is_finite() => TokenKind::Number(v),
                        Ok(_) => return Err(map.error(format!("number `{s}` is out of range"), span)),
                        Err(_) => return Err(map.error(format!("malformed number `{s}`"), span)),
                    }
                } else {
                    TokenKind::Symbol(s.to_string())
                };
                tokens.push(Token { kind, span });
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn bind_form_tokens() {
        assert_eq!(
            kinds("(bind \"a\" x)"),
            vec![
                TokenKind::LParen,
                TokenKind::Symbol("bind".into()),
                TokenKind::Str("a".into()),
                TokenKind::Symbol("x".into()),
                TokenKind::RParen,
            ]
        );
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(kinds("; comment\n()"), vec![TokenKind::LParen, TokenKind::RParen]);
        assert_eq!(kinds("(a ; trailing ) still comment\n)").len(), 3);
    }

    #[test]
    fn scientific_number() {
        let expected: f64 = "1500".parse().unwrap();
        assert_eq!(kinds("1.5e3"), vec![TokenKind::Number(expected)]);
        assert_eq!(kinds("-0.25 .5 -.5"), vec![
            TokenKind::Number(-0.25),
            TokenKind::Number(0.5),
            TokenKind::Number(-0.5)
        ]);
    }

    #[test]
    fn operators_are_symbols() {
        assert_eq!(
            kinds("- + * / <= @"),
            ["-", "+", "*", "/", "<=", "@"]
                .iter()
                .map(|s| TokenKind::Symbol(s.to_string()))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn string_escapes() {
        assert_eq!(kinds(r#""a\"b\\c""#), vec![TokenKind::Str("a\"b\\c".into())]);
    }

    #[test]
    fn unterminated_string_reports_position() {
        let err = tokenize("(bind\n  \"oops)").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        assert!(err.message.contains("unterminated"));
    }

    #[test]
    fn malformed_number() {
        assert!(tokenize("12abc").is_err());
        assert!(tokenize("1e999").is_err());
    }

    #[test]
    fn spans_cover_tokens() {
        let toks = tokenize("(call \"w\")").unwrap();
        assert_eq!(toks[1].span, Span::new(1, 5));
        assert_eq!(toks[2].span, Span::new(6, 9));
    }
}
