use crate::ast::Span;

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Unquoted identifier or keyword; keywords are recognized by the parser.
    Ident(String),
    /// Backtick-quoted identifier; never a keyword.
    Quoted(String),
    /// Unsigned integer digits.
    Int(String),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    DotDot,
    Pipe,
    Star,
    Dash,
    /// `->`
    Arrow,
    /// `<-`
    LeftArrow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Quoted(s) => format!("`{s}`"),
            Tok::Int(s) => format!("integer {s}"),
            Tok::Str(_) => "string literal".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Pipe => "|",
            Tok::Star => "*",
            Tok::Dash => "-",
            Tok::Arrow => "->",
            Tok::LeftArrow => "<-",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Eq => "=",
            Tok::Ne => "<>",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(src[start..i].to_string())
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                return Err(ParseError::new(
                    "invalid number literal",
                    Span::new(start, i + 1),
                    "digits",
                ));
            }
            Tok::Int(src[start..i].to_string())
        } else if c == b'`' {
            let mut name = String::new();
            i += 1;
            loop {
                match src[i..].chars().next() {
                    None => {
                        return Err(ParseError::new(
                            "unterminated quoted name",
                            Span::new(start, src.len()),
                            "closing backtick",
                        ))
                    }
                    Some('`') if bytes.get(i + 1) == Some(&b'`') => {
                        name.push('`');
                        i += 2;
                    }
                    Some('`') => {
                        i += 1;
                        break;
                    }
                    Some(ch) => {
                        name.push(ch);
                        i += ch.len_utf8();
                    }
                }
            }
            Tok::Quoted(name)
        } else if c == b'"' || c == b'\'' {
            let (s, next) = lex_string(src, i)?;
            i = next;
            Tok::Str(s)
        } else {
            let two = bytes.get(i + 1).copied();
            let (tok, len) = match (c, two) {
                (b'.', Some(b'.')) => (Tok::DotDot, 2),
                (b'-', Some(b'>')) => (Tok::Arrow, 2),
                (b'<', Some(b'-')) => (Tok::LeftArrow, 2),
                (b'<', Some(b'=')) => (Tok::Le, 2),
                (b'<', Some(b'>')) => (Tok::Ne, 2),
                (b'>', Some(b'=')) => (Tok::Ge, 2),
                (b'(', _) => (Tok::LParen, 1),
                (b')', _) => (Tok::RParen, 1),
                (b'[', _) => (Tok::LBracket, 1),
                (b']', _) => (Tok::RBracket, 1),
                (b'{', _) => (Tok::LBrace, 1),
                (b'}', _) => (Tok::RBrace, 1),
                (b',', _) => (Tok::Comma, 1),
                (b':', _) => (Tok::Colon, 1),
                (b'.', _) => (Tok::Dot, 1),
                (b'|', _) => (Tok::Pipe, 1),
                (b'*', _) => (Tok::Star, 1),
                (b'-', _) => (Tok::Dash, 1),
                (b'<', _) => (Tok::Lt, 1),
                (b'>', _) => (Tok::Gt, 1),
                (b'=', _) => (Tok::Eq, 1),
                _ => {
                    let ch = src[i..].chars().next().unwrap_or('?');
                    return Err(ParseError::new(
                        format!("unexpected character `{ch}`"),
                        Span::new(i, i + ch.len_utf8()),
                        "a token",
                    ));
                }
            };
            i += len;
            tok
        };
        out.push(Token {
            tok,
            span: Span::new(start, i),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(src.len(), src.len()),
    });
    Ok(out)
}

fn lex_string(src: &str, start: usize) -> Result<(String, usize), ParseError> {
    let quote = src.as_bytes()[start] as char;
    let mut out = String::new();
    let mut chars = src[start + 1..].char_indices();
    let unterminated = || {
        ParseError::new(
            "unterminated string literal",
            Span::new(start, src.len()),
            "closing quote",
        )
    };
    while let Some((off, ch)) = chars.next() {
        let pos = start + 1 + off;
        match ch {
            c if c == quote => return Ok((out, pos + 1)),
            '\\' => {
                let (_, esc) = chars.next().ok_or_else(unterminated)?;
                match esc {
                    'n' => out.push('\n'),
                    't' => out.push('\t'),
                    'r' => out.push('\r'),
                    '\\' => out.push('\\'),
                    '\'' => out.push('\''),
                    '"' => out.push('"'),
                    'u' => {
                        let hex: String = (0..4)
                            .filter_map(|_| chars.next().map(|(_, c)| c))
                            .collect();
                        let ch = u32::from_str_radix(&hex, 16)
                            .ok()
                            .filter(|_| hex.len() == 4)
                            .and_then(char::from_u32)
                            .ok_or_else(|| {
                                ParseError::new(
                                    "invalid unicode escape",
                                    Span::new(pos, pos + 6),
                                    "four hex digits",
                                )
                            })?;
                        out.push(ch);
                    }
                    other => {
                        return Err(ParseError::new(
                            format!("unknown escape `\\{other}`"),
                            Span::new(pos, pos + 1 + other.len_utf8()),
                            "one of \\n \\t \\r \\\\ \\' \\\" \\uXXXX",
                        ))
                    }
                }
            }
            c => out.push(c),
        }
    }
    Err(unterminated())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_and_ranges() {
        assert_eq!(
            toks("-[*1..2]->"),
            vec![
                Tok::Dash,
                Tok::LBracket,
                Tok::Star,
                Tok::Int("1".into()),
                Tok::DotDot,
                Tok::Int("2".into()),
                Tok::RBracket,
                Tok::Arrow,
                Tok::Eof
            ]
        );
        assert_eq!(toks("<-[]-")[0], Tok::LeftArrow);
        assert_eq!(toks("a <> b")[1], Tok::Ne);
    }

    #[test]
    fn strings_and_escapes() {
        assert_eq!(toks(r#""a\"b\n""#)[0], Tok::Str("a\"b\n".into()));
        assert_eq!(toks(r"'it\'s'")[0], Tok::Str("it's".into()));
        assert_eq!(toks(r#""é""#)[0], Tok::Str("é".into()));
        assert!(tokenize("'open").is_err());
        assert!(tokenize(r#""\q""#).is_err());
    }

    #[test]
    fn quoted_names() {
        assert_eq!(toks("`a``b c`")[0], Tok::Quoted("a`b c".into()));
    }
}
