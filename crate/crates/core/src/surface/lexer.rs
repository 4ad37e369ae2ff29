use super::ast::SourceSpan;
use super::SurfaceError;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Nat(u64),
    Str(String),
    Arrow,     // ->
    Question,  // ?
    Bar,       // |
    BarBar,    // ||
    AmpAmp,    // &&
    Bang,      // !
    FatArrow,  // =>
    Dot,       // .
    Comma,     // ,
    Colon,     // :
    LParen,    // (
    RParen,    // )
    LBrace,    // {
    RBrace,    // }
    LBracket,  // [
    RBracket,  // ]
    Minus,     // -
    Plus,      // +
    Star,      // *
    Eq,        // =
    Ne,        // <>
    Lt,        // <
    Gt,        // >
    Le,        // <=
    Ge,        // >=
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Nat(n) => format!("number `{n}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Eof => "end of file".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Arrow => "->",
            Tok::Question => "?",
            Tok::Bar => "|",
            Tok::BarBar => "||",
            Tok::AmpAmp => "&&",
            Tok::Bang => "!",
            Tok::FatArrow => "=>",
            Tok::Dot => ".",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Minus => "-",
            Tok::Plus => "+",
            Tok::Star => "*",
            Tok::Eq => "=",
            Tok::Ne => "<>",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            _ => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub fn tokenize(source: &str, file: &Arc<str>) -> Result<Vec<Token>, SurfaceError> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let span = |line, col| SourceSpan::new(file.clone(), line, col);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let start = span(line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            out.push(Token { tok: Tok::Ident(s), span: start });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                bump!();
            }
            let n = s.parse::<u64>().map_err(|_| SurfaceError::Syntax {
                span: start.clone(),
                message: format!("number `{s}` out of range"),
            })?;
            out.push(Token { tok: Tok::Nat(n), span: start });
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => {
                        return Err(SurfaceError::Syntax {
                            span: start,
                            message: "unterminated string literal".into(),
                        })
                    }
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        let esc = match chars.get(i) {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('r') => '\r',
                            Some(other) => {
                                return Err(SurfaceError::Syntax {
                                    span: span(line, col),
                                    message: format!("unknown escape `\\{other}`"),
                                })
                            }
                            None => continue,
                        };
                        s.push(esc);
                        bump!();
                    }
                    Some(&ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), span: start });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('|', Some('|')) => (Tok::BarBar, 2),
            ('&', Some('&')) => (Tok::AmpAmp, 2),
            ('=', Some('>')) => (Tok::FatArrow, 2),
            ('<', Some('>')) => (Tok::Ne, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('?', _) => (Tok::Question, 1),
            ('|', _) => (Tok::Bar, 1),
            ('!', _) => (Tok::Bang, 1),
            ('.', _) => (Tok::Dot, 1),
            (',', _) => (Tok::Comma, 1),
            (':', _) => (Tok::Colon, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('-', _) => (Tok::Minus, 1),
            ('+', _) => (Tok::Plus, 1),
            ('*', _) => (Tok::Star, 1),
            ('=', _) => (Tok::Eq, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            _ => {
                return Err(SurfaceError::Syntax {
                    span: start,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        for _ in 0..width {
            bump!();
        }
        out.push(Token { tok, span: start });
    }
    out.push(Token { tok: Tok::Eof, span: span(line, col) });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s, &Arc::from("t")).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn char_range_tokens() {
        assert_eq!(
            toks(r#"["0"-"9"]"#),
            vec![
                Tok::LBracket,
                Tok::Str("0".into()),
                Tok::Minus,
                Tok::Str("9".into()),
                Tok::RBracket,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_escapes() {
        assert_eq!(
            toks("A // hi\n\"\\n\\\"\""),
            vec![Tok::Ident("A".into()), Tok::Str("\n\"".into()), Tok::Eof]
        );
    }

    #[test]
    fn spans_are_one_based() {
        let t = tokenize("\n  A", &Arc::from("f")).unwrap();
        assert_eq!((t[0].span.line, t[0].span.column), (2, 3));
    }

    #[test]
    fn unterminated_string() {
        assert!(tokenize("\"abc", &Arc::from("f")).is_err());
    }
}
