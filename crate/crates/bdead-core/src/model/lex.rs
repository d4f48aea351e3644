//! Tokenizer for the machine language.

use super::ast::Span;
use super::parse::ParseError;

/// Keywords are lexed as `Word` just like identifiers; the parser decides
/// which words are reserved in which position. Operators and punctuation are
/// lexed as `Op` with their exact spelling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Word(String),
    Int(i64),
    Op(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// Multi-character operators, longest first so maximal munch is a linear scan.
const OPS: &[&str] = &[
    "<=>", ":=", "||", "..", "/=", "/:", "/\\", "\\/", "<=", ">=", "=>", "<:", "&", "=", "<",
    ">", "+", "-", "*", "/", "\\", "(", ")", "{", "}", ",", ";", ".", ":", "#", "!",
];

/// Split source text into tokens. `//` starts a comment running to end of
/// line. Integer literals are non-negative; unary minus is an operator.
pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let span = Span { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text = &src[start..i];
            let n: i64 = text.parse().map_err(|_| ParseError {
                span,
                msg: format!("integer literal `{text}` out of range"),
            })?;
            col += (i - start) as u32;
            tokens.push(Token {
                kind: TokenKind::Int(n),
                span,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            col += (i - start) as u32;
            tokens.push(Token {
                kind: TokenKind::Word(src[start..i].to_string()),
                span,
            });
            continue;
        }
        match OPS.iter().find(|op| src[i..].starts_with(**op)) {
            Some(op) => {
                i += op.len();
                col += op.len() as u32;
                tokens.push(Token {
                    kind: TokenKind::Op(op),
                    span,
                });
            }
            None => {
                return Err(ParseError {
                    span,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        lex(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn maximal_munch_on_slash_family() {
        assert_eq!(
            kinds("a /= b /: s /\\ t \\/ u \\ v / w"),
            vec![
                TokenKind::Word("a".into()),
                TokenKind::Op("/="),
                TokenKind::Word("b".into()),
                TokenKind::Op("/:"),
                TokenKind::Word("s".into()),
                TokenKind::Op("/\\"),
                TokenKind::Word("t".into()),
                TokenKind::Op("\\/"),
                TokenKind::Word("u".into()),
                TokenKind::Op("\\"),
                TokenKind::Word("v".into()),
                TokenKind::Op("/"),
                TokenKind::Word("w".into()),
            ]
        );
    }

    #[test]
    fn colon_family_and_ranges() {
        assert_eq!(
            kinds("x := 0 .. 3 <=> y <: z <= 9"),
            vec![
                TokenKind::Word("x".into()),
                TokenKind::Op(":="),
                TokenKind::Int(0),
                TokenKind::Op(".."),
                TokenKind::Int(3),
                TokenKind::Op("<=>"),
                TokenKind::Word("y".into()),
                TokenKind::Op("<:"),
                TokenKind::Word("z".into()),
                TokenKind::Op("<="),
                TokenKind::Int(9),
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let toks = lex("a // rest ignored\n  b").unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[1].span, Span { line: 2, col: 3 });
    }

    #[test]
    fn rejects_stray_character() {
        assert!(lex("x @ y").is_err());
    }

    #[test]
    fn rejects_oversized_integer() {
        assert!(lex("99999999999999999999999999").is_err());
    }
}
