//! Tokenizer: parentheses and case-normalized symbols, with positions.
//! Comments run from `;` to end of line.

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    LParen,
    RParen,
    Sym(String),
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                tokens.push(Token {
                    tok: Tok::LParen,
                    line,
                    col,
                });
                chars.next();
                col += 1;
            }
            ')' => {
                tokens.push(Token {
                    tok: Tok::RParen,
                    line,
                    col,
                });
                chars.next();
                col += 1;
            }
            _ => {
                let start_col = col;
                let mut sym = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    sym.push(c.to_ascii_lowercase());
                    chars.next();
                    col += 1;
                }
                tokens.push(Token {
                    tok: Tok::Sym(sym),
                    line,
                    col: start_col,
                });
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_case_folding() {
        let toks = lex("(Define ; comment\n  (domain D))").unwrap();
        assert_eq!(toks.len(), 7);
        assert_eq!(toks[0].tok, Tok::LParen);
        assert_eq!(toks[1].tok, Tok::Sym("define".into()));
        match &toks[3].tok {
            Tok::Sym(s) => assert_eq!(s, "domain"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(toks[2].line, 2);
        assert_eq!(toks[2].col, 3);
    }
}
