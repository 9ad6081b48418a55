use std::fmt;

/// 1-based line and column of a token's first character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Colon,
    Star,
    Lolli,
    Plus,
    Minus,
    Slash,
    LParen,
    RParen,
    Comma,
    Dot,
    Dollar,
    Bang,
    Cmp(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Var(s) => write!(f, "variable `{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Lolli => f.write_str("`-o`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Dollar => f.write_str("`$`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Cmp(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits source into tokens. Lexing never stops at the first bad character:
/// it is reported and skipped so the parser can still produce diagnostics
/// for the rest of the file.
pub fn tokenize(src: &str) -> (Vec<Token>, Vec<LexError>) {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_lowercase() || c.is_ascii_uppercase() || c == '_' => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                let tok = if c.is_ascii_lowercase() { Tok::Ident(text) } else { Tok::Var(text) };
                tokens.push(Token { tok, span });
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                match text.parse::<i64>() {
                    Ok(n) if n <= 1_000_000 => tokens.push(Token { tok: Tok::Int(n), span }),
                    _ => errors.push(LexError { span, message: format!("integer literal `{text}` is too large") }),
                }
            }
            '-' if chars.get(i + 1) == Some(&'o')
                && !chars.get(i + 2).copied().is_some_and(is_ident_char) =>
            {
                advance(2, &mut i, &mut col);
                tokens.push(Token { tok: Tok::Lolli, span });
            }
            '<' | '>' => {
                let eq = chars.get(i + 1) == Some(&'=');
                let text = match (c, eq) {
                    ('<', true) => "<=",
                    ('<', false) => "<",
                    (_, true) => ">=",
                    _ => ">",
                };
                advance(if eq { 2 } else { 1 }, &mut i, &mut col);
                tokens.push(Token { tok: Tok::Cmp(text), span });
            }
            '≤' | '≥' => {
                advance(1, &mut i, &mut col);
                tokens.push(Token { tok: Tok::Cmp(if c == '≤' { "<=" } else { ">=" }), span });
            }
            _ => {
                let tok = match c {
                    ':' => Some(Tok::Colon),
                    '*' => Some(Tok::Star),
                    '+' => Some(Tok::Plus),
                    '-' => Some(Tok::Minus),
                    '/' => Some(Tok::Slash),
                    '(' => Some(Tok::LParen),
                    ')' => Some(Tok::RParen),
                    ',' => Some(Tok::Comma),
                    '.' => Some(Tok::Dot),
                    '$' => Some(Tok::Dollar),
                    '!' => Some(Tok::Bang),
                    '=' => Some(Tok::Cmp("=")),
                    _ => None,
                };
                match tok {
                    Some(tok) => tokens.push(Token { tok, span }),
                    None => errors.push(LexError { span, message: format!("unexpected character {c:?}") }),
                }
                advance(1, &mut i, &mut col);
            }
        }
    }
    tokens.push(Token { tok: Tok::Eof, span: Span { line, col } });
    (tokens, errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).0.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lolli_is_one_token() {
        assert_eq!(
            toks("a -o b"),
            vec![Tok::Ident("a".into()), Tok::Lolli, Tok::Ident("b".into()), Tok::Eof]
        );
        // `-order` is a minus followed by an identifier.
        assert_eq!(toks("-order")[0], Tok::Minus);
    }

    #[test]
    fn comments_and_positions() {
        let (tokens, errors) = tokenize("% header\n  rule x");
        assert!(errors.is_empty());
        assert_eq!(tokens[0].span, Span { line: 2, col: 3 });
        assert_eq!(tokens[1].span, Span { line: 2, col: 8 });
    }

    #[test]
    fn bad_character_is_reported_and_skipped() {
        let (tokens, errors) = tokenize("a # b");
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].span, Span { line: 1, col: 3 });
        assert_eq!(tokens.len(), 3);
    }
}
