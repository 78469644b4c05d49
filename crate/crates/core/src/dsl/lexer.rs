use crate::diagnostic::{codes, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Comma,
    Arrow,
    Dot,
    Star,
    Plus,
    Minus,
    Slash,
    Eq,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(_) => "string".into(),
            Tok::Num(v) => format!("number {v}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Star => "`*`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

pub(crate) struct Lexed {
    pub tokens: Vec<Token>,
    pub diagnostics: Vec<Diagnostic>,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits source text into tokens. Never fails: bad characters and
/// unterminated strings become diagnostics.
pub(crate) fn lex(text: &str, file: &str) -> Lexed {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut diagnostics = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut column = 1u32;

    let span = |line: u32, column: u32, length: u32| SourceSpan::new(file, line, column, length);

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        let start = i;
        let push = |tok: Tok, len: usize, tokens: &mut Vec<Token>| {
            tokens.push(Token {
                tok,
                line: start_line,
                column: start_col,
                length: len as u32,
            });
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                column = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                column += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '"' => {
                let mut value = String::new();
                let mut j = i + 1;
                let mut l = line;
                let mut col = column + 1;
                let mut closed = false;
                while j < chars.len() {
                    let ch = chars[j];
                    if ch == '"' {
                        closed = true;
                        j += 1;
                        col += 1;
                        break;
                    }
                    if ch == '\\' {
                        let escaped = chars.get(j + 1).copied();
                        match escaped {
                            Some('n') => value.push('\n'),
                            Some('t') => value.push('\t'),
                            Some('r') => value.push('\r'),
                            Some('"') => value.push('"'),
                            Some('\\') => value.push('\\'),
                            Some(other) => {
                                diagnostics.push(
                                    Diagnostic::error(
                                        codes::UNEXPECTED_TOKEN,
                                        format!("unknown escape `\\{other}` in string"),
                                    )
                                    .with_span(Some(span(l, col, 2))),
                                );
                                value.push(other);
                            }
                            None => {
                                j += 1;
                                break;
                            }
                        }
                        if escaped == Some('\n') {
                            l += 1;
                            col = 1;
                        } else {
                            col += 2;
                        }
                        j += 2;
                        continue;
                    }
                    if ch == '\n' {
                        l += 1;
                        col = 1;
                    } else {
                        col += 1;
                    }
                    value.push(ch);
                    j += 1;
                }
                if !closed {
                    diagnostics.push(
                        Diagnostic::error(codes::UNTERMINATED_STRING, "unterminated string")
                            .with_span(Some(span(start_line, start_col, 1))),
                    );
                }
                push(Tok::Str(value), j - start, &mut tokens);
                i = j;
                line = l;
                column = col;
                continue;
            }
            c if is_ident_start(c) => {
                let mut j = i + 1;
                while j < chars.len() {
                    let ch = chars[j];
                    // Dots join identifier segments, as in `BO1.1.1`.
                    let dotted = ch == '.' && chars.get(j + 1).is_some_and(|n| is_ident_char(*n));
                    if is_ident_char(ch) || dotted {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let word: String = chars[i..j].iter().collect();
                push(Tok::Ident(word), j - i, &mut tokens);
                column += (j - i) as u32;
                i = j;
                continue;
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let digits: String = chars[i..j].iter().collect();
                match digits.parse::<f64>() {
                    Ok(v) if v.is_finite() => push(Tok::Num(v), j - i, &mut tokens),
                    _ => diagnostics.push(
                        Diagnostic::error(
                            codes::UNEXPECTED_TOKEN,
                            format!("number `{digits}` is out of range"),
                        )
                        .with_span(Some(span(start_line, start_col, (j - i) as u32))),
                    ),
                }
                column += (j - i) as u32;
                i = j;
                continue;
            }
            _ => {}
        }
        let (tok, len) = match c {
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ':' => (Tok::Colon, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            '*' => (Tok::Star, 1),
            '+' => (Tok::Plus, 1),
            '/' => (Tok::Slash, 1),
            '=' => (Tok::Eq, 1),
            '-' if chars.get(i + 1) == Some(&'>') => (Tok::Arrow, 2),
            '-' => (Tok::Minus, 1),
            other => {
                diagnostics.push(
                    Diagnostic::error(
                        codes::UNEXPECTED_TOKEN,
                        format!("unexpected character {other:?}"),
                    )
                    .with_span(Some(span(line, column, 1))),
                );
                i += 1;
                column += 1;
                continue;
            }
        };
        push(tok, len, &mut tokens);
        i += len;
        column += len as u32;
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        column,
        length: 0,
    });
    Lexed {
        tokens,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<Tok> {
        lex(text, "t").tokens.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn dotted_identifiers_and_scope_star() {
        assert_eq!(
            toks("BO1.1.1 org.* org.{a}"),
            vec![
                Tok::Ident("BO1.1.1".into()),
                Tok::Ident("org".into()),
                Tok::Dot,
                Tok::Star,
                Tok::Ident("org".into()),
                Tok::Dot,
                Tok::LBrace,
                Tok::Ident("a".into()),
                Tok::RBrace,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn numbers_arrows_and_comments() {
        assert_eq!(
            toks("[0, 60.5] -> x # trailing\n-3"),
            vec![
                Tok::LBracket,
                Tok::Num(0.0),
                Tok::Comma,
                Tok::Num(60.5),
                Tok::RBracket,
                Tok::Arrow,
                Tok::Ident("x".into()),
                Tok::Minus,
                Tok::Num(3.0),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn string_escapes() {
        assert_eq!(
            toks(r#""a\"b\\c\nd""#),
            vec![Tok::Str("a\"b\\c\nd".into()), Tok::Eof]
        );
    }

    #[test]
    fn unterminated_string_reports_opening_quote() {
        let lexed = lex("x: \"abc", "f.sym");
        assert_eq!(lexed.diagnostics.len(), 1);
        let d = &lexed.diagnostics[0];
        assert_eq!(d.code, codes::UNTERMINATED_STRING);
        let span = d.span.as_ref().unwrap();
        assert_eq!((span.line, span.column), (1, 4));
    }

    #[test]
    fn positions_track_lines_and_columns() {
        let lexed = lex("a\n  b", "f");
        assert_eq!((lexed.tokens[1].line, lexed.tokens[1].column), (2, 3));
    }

    #[test]
    fn stray_character() {
        let lexed = lex("a @ b", "f");
        assert_eq!(lexed.diagnostics[0].code, codes::UNEXPECTED_TOKEN);
        assert_eq!(lexed.tokens.len(), 3);
    }
}
