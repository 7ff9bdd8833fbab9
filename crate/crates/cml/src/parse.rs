//! Recursive-descent parser for the formula surface syntax.
//!
//! ```text
//! phi  ::= "T" | "F" | "~" phi | phi "&" phi | phi "|" phi | phi "->" phi
//!        | "L[" label "," rational "]" phi | "M[" ... "]" phi | "E[" ... "]" phi
//!        | "(" phi ")"
//! ```
//!
//! Precedence `~` > `&` > `|` > `->` (implication right-associative);
//! modalities bind like `~`. `F`, `|`, `->` and `E` are sugar and expand
//! during parsing, so the resulting AST uses core nodes only.

use std::fmt;

use thiserror::Error;

use crate::formula::{Formula, Label};
use crate::rational::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Top,
    Bottom,
    Not,
    AndOp,
    OrOp,
    ArrowOp,
    Modality(char),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Slash,
    Ident(String),
    Int(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Top => write!(f, "`T`"),
            Tok::Bottom => write!(f, "`F`"),
            Tok::Not => write!(f, "`~`"),
            Tok::AndOp => write!(f, "`&`"),
            Tok::OrOp => write!(f, "`|`"),
            Tok::ArrowOp => write!(f, "`->`"),
            Tok::Modality(c) => write!(f, "`{}[`", c),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Ident(s) => write!(f, "identifier `{}`", s),
            Tok::Int(s) => write!(f, "number `{}`", s),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek_byte()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek_byte(), Some(b) if b.is_ascii_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let Some(b) = self.peek_byte() else {
                out.push(Spanned {
                    tok: Tok::Eof,
                    line,
                    col,
                });
                return Ok(out);
            };
            let tok = match b {
                b'~' => {
                    self.bump();
                    Tok::Not
                }
                b'&' => {
                    self.bump();
                    Tok::AndOp
                }
                b'|' => {
                    self.bump();
                    Tok::OrOp
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'[' => {
                    self.bump();
                    Tok::LBracket
                }
                b']' => {
                    self.bump();
                    Tok::RBracket
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'/' => {
                    self.bump();
                    Tok::Slash
                }
                b'-' => {
                    self.bump();
                    match self.peek_byte() {
                        Some(b'>') => {
                            self.bump();
                            Tok::ArrowOp
                        }
                        Some(d) if d.is_ascii_digit() => {
                            let mut digits = String::from("-");
                            while matches!(self.peek_byte(), Some(d) if d.is_ascii_digit()) {
                                digits.push(self.bump().unwrap() as char);
                            }
                            Tok::Int(digits)
                        }
                        _ => return Err(self.err("expected `>` or digits after `-`")),
                    }
                }
                d if d.is_ascii_digit() => {
                    let mut digits = String::new();
                    while matches!(self.peek_byte(), Some(d) if d.is_ascii_digit()) {
                        digits.push(self.bump().unwrap() as char);
                    }
                    Tok::Int(digits)
                }
                c if c.is_ascii_alphabetic() => {
                    let mut name = String::new();
                    while matches!(self.peek_byte(), Some(c) if c.is_ascii_alphanumeric() || c == b'_')
                    {
                        name.push(self.bump().unwrap() as char);
                    }
                    // A bare L/M/E immediately followed by `[` opens a modality;
                    // in every other position these letters are ordinary idents.
                    if (name == "L" || name == "M" || name == "E") && self.peek_byte() == Some(b'[')
                    {
                        self.bump();
                        Tok::Modality(name.as_bytes()[0] as char)
                    } else if name == "T" {
                        Tok::Top
                    } else if name == "F" {
                        Tok::Bottom
                    } else {
                        Tok::Ident(name)
                    }
                }
                other => {
                    return Err(self.err(format!("unexpected character `{}`", other as char)));
                }
            };
            out.push(Spanned { tok, line, col });
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if self.peek() == &want {
            self.bump();
            Ok(())
        } else {
            Err(self.err_here(format!("expected {}, found {}", want, self.peek())))
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.peek() == &Tok::ArrowOp {
            self.bump();
            let rhs = self.implication()?;
            Ok(lhs.implies(rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == &Tok::OrOp {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == &Tok::AndOp {
            self.bump();
            let rhs = self.unary()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn rational(&mut self) -> Result<Rat, ParseError> {
        let at = self.here();
        let numer = match self.bump() {
            Tok::Int(s) => s,
            other => {
                return Err(ParseError {
                    line: at.0,
                    col: at.1,
                    message: format!("expected rational, found {}", other),
                })
            }
        };
        let text = if self.peek() == &Tok::Slash {
            self.bump();
            let at2 = self.here();
            match self.bump() {
                Tok::Int(s) => {
                    if s.starts_with('-') || s == "0" {
                        return Err(ParseError {
                            line: at2.0,
                            col: at2.1,
                            message: format!("denominator must be a positive integer, found `{}`", s),
                        });
                    }
                    format!("{}/{}", numer, s)
                }
                other => {
                    return Err(ParseError {
                        line: at2.0,
                        col: at2.1,
                        message: format!("expected denominator, found {}", other),
                    })
                }
            }
        } else {
            numer
        };
        let r = Rat::parse(&text).map_err(|e| ParseError {
            line: at.0,
            col: at.1,
            message: e.to_string(),
        })?;
        if r.is_negative() {
            return Err(ParseError {
                line: at.0,
                col: at.1,
                message: format!("negative modal index `{}`", r),
            });
        }
        Ok(r)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Top => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Bottom => {
                self.bump();
                Ok(Formula::bottom())
            }
            Tok::Not => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Tok::Modality(kind) => {
                self.bump();
                let at = self.here();
                let label = match self.bump() {
                    Tok::Ident(name) if Label::is_valid_name(&name) => Label::new(name),
                    other => {
                        return Err(ParseError {
                            line: at.0,
                            col: at.1,
                            message: format!("expected label, found {}", other),
                        })
                    }
                };
                self.expect(Tok::Comma)?;
                let index = self.rational()?;
                self.expect(Tok::RBracket)?;
                let arg = self.unary()?;
                Ok(match kind {
                    'L' => Formula::l(label, index, arg),
                    'M' => Formula::m(label, index, arg),
                    'E' => Formula::exactly(label, index, arg),
                    _ => unreachable!(),
                })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.implication()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => Err(self.err_here(format!("expected formula, found {}", other))),
        }
    }
}

/// Parse a formula from text, expanding all sugar.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let mut parser = Parser { toks, pos: 0 };
    let phi = parser.implication()?;
    parser.expect(Tok::Eof)?;
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn direct_grammar_productions() {
        assert_eq!(
            parse("L[a,1/2] T").unwrap(),
            Formula::l("a", Rat::new(1, 2), Formula::Top)
        );
        assert_eq!(parse("T").unwrap(), Formula::Top);
        assert_eq!(parse("~T").unwrap(), Formula::Top.neg());
        assert_eq!(parse("F").unwrap(), Formula::Top.neg());
        assert_eq!(
            parse("(T & T)").unwrap(),
            Formula::Top.and(Formula::Top)
        );
    }

    #[test]
    fn exactly_expands_to_l_and_m() {
        assert_eq!(
            parse("E[a,3/2] T").unwrap(),
            Formula::l("a", Rat::new(3, 2), Formula::Top)
                .and(Formula::m("a", Rat::new(3, 2), Formula::Top))
        );
    }

    #[test]
    fn negative_index_is_rejected() {
        let err = parse("L[a,-1] T").unwrap_err();
        assert!(err.message.contains("negative modal index"), "{}", err);
        assert_eq!((err.line, err.col), (1, 5));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse("T &\n& T").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.col, 1);
        assert!(parse("L[a,1/0] T").is_err());
        assert!(parse("L[a,1] !").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        // `~` binds tighter than `&`, `&` tighter than `|`, `|` tighter than `->`.
        assert_eq!(
            parse("~T & T").unwrap(),
            Formula::Top.neg().and(Formula::Top)
        );
        assert_eq!(
            parse("T | T & T").unwrap(),
            Formula::Top.or(Formula::Top.and(Formula::Top))
        );
        assert_eq!(
            parse("T -> T -> F").unwrap(),
            Formula::Top.implies(Formula::Top.implies(Formula::bottom()))
        );
        // Modalities bind tighter than binary connectives.
        assert_eq!(
            parse("L[a,1] T & F").unwrap(),
            Formula::l("a", Rat::one(), Formula::Top).and(Formula::bottom())
        );
        // Labels may start with modality letters.
        assert_eq!(
            parse("L[Loop,1] T").unwrap(),
            Formula::l("Loop", Rat::one(), Formula::Top)
        );
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![Just(Formula::Top)];
        leaf.prop_recursive(4, 32, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::neg),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (inner.clone(), 0i64..8, 1i64..6, "[ab]")
                    .prop_map(|(p, n, d, l)| Formula::l(l.as_str(), Rat::new(n, d), p)),
                (inner, 0i64..8, 1i64..6, "[ab]")
                    .prop_map(|(p, n, d, l)| Formula::m(l.as_str(), Rat::new(n, d), p)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(phi in arb_formula()) {
            let text = phi.print();
            let back = parse(&text).unwrap();
            prop_assert_eq!(back, phi);
        }
    }
}
