//! Recursive-descent parser for the ASCII formula syntax.
//!
//! Precedence from loosest to tightest: `->` (right associative), `|`, `&`,
//! the prefix operators `!`, `X`, `G`, `F`, and finally `U` (right
//! associative). So `G a U b` reads as `G (a U b)` and `a U b & c` as
//! `(a U b) & c`.

use alloc::string::{String, ToString};
use core::fmt;

use super::alphabet::is_identifier;
use super::{Alphabet, Formula};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    EmptyInput,
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: &'static str },
    UnexpectedEnd { expected: &'static str },
    UnknownProposition(String),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::EmptyInput => write!(f, "empty formula"),
            ParseErrorKind::UnexpectedChar(c) => {
                write!(f, "unexpected character `{c}` at position {}", self.position)
            }
            ParseErrorKind::UnexpectedToken { found, expected } => write!(
                f,
                "expected {expected} at position {}, found `{found}`",
                self.position
            ),
            ParseErrorKind::UnexpectedEnd { expected } => {
                write!(f, "expected {expected} at position {}, found end of input", self.position)
            }
            ParseErrorKind::UnknownProposition(name) => {
                write!(f, "unknown proposition `{name}` at position {}", self.position)
            }
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token<'a> {
    Ident(&'a str),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Next,
    Always,
    Eventually,
    Until,
    LParen,
    RParen,
}

impl Token<'_> {
    fn text(&self) -> &str {
        match self {
            Token::Ident(s) => s,
            Token::True => "true",
            Token::False => "false",
            Token::Not => "!",
            Token::And => "&",
            Token::Or => "|",
            Token::Implies => "->",
            Token::Next => "X",
            Token::Always => "G",
            Token::Eventually => "F",
            Token::Until => "U",
            Token::LParen => "(",
            Token::RParen => ")",
        }
    }
}

fn tokenize(text: &str) -> Result<alloc::vec::Vec<(usize, Token<'_>)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = alloc::vec::Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'!' => Token::Not,
            b'&' => Token::And,
            b'|' => Token::Or,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Token::Implies
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                match &text[start..=i] {
                    "true" => Token::True,
                    "false" => Token::False,
                    "X" => Token::Next,
                    "G" => Token::Always,
                    "F" => Token::Eventually,
                    "U" => Token::Until,
                    ident => {
                        debug_assert!(is_identifier(ident));
                        Token::Ident(ident)
                    }
                }
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError { position: start, kind: ParseErrorKind::UnexpectedChar(ch) });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: alloc::vec::Vec<(usize, Token<'a>)>,
    pos: usize,
    end: usize,
    alphabet: Option<&'a Alphabet>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error(&self, expected: &'static str) -> ParseError {
        match self.tokens.get(self.pos) {
            Some((o, t)) => ParseError {
                position: *o,
                kind: ParseErrorKind::UnexpectedToken { found: t.text().to_string(), expected },
            },
            None => ParseError { position: self.end, kind: ParseErrorKind::UnexpectedEnd { expected } },
        }
    }

    fn eat(&mut self, tok: &Token<'_>) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Token::Implies) {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Token::Or) {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Token::And) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let op: fn(Formula) -> Formula = match self.peek() {
            Some(Token::Not) => Formula::not,
            Some(Token::Next) => Formula::next,
            Some(Token::Always) => Formula::always,
            Some(Token::Eventually) => Formula::eventually,
            _ => return self.until(),
        };
        self.pos += 1;
        Ok(op(self.unary()?))
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.atom()?;
        if self.eat(&Token::Until) {
            let rhs = self.unary()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let offset = self.offset();
        match self.peek() {
            Some(Token::True) => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Token::False) => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Some(Token::Ident(name)) => {
                let name = *name;
                if let Some(ab) = self.alphabet {
                    if !ab.contains(name) {
                        return Err(ParseError {
                            position: offset,
                            kind: ParseErrorKind::UnknownProposition(name.to_string()),
                        });
                    }
                }
                self.pos += 1;
                Ok(Formula::prop(name))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.implication()?;
                if !self.eat(&Token::RParen) {
                    return Err(self.error("`)`"));
                }
                Ok(inner)
            }
            _ => Err(self.error("a formula")),
        }
    }
}

fn parse_with(text: &str, alphabet: Option<&Alphabet>) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError { position: 0, kind: ParseErrorKind::EmptyInput });
    }
    let mut p = Parser { tokens, pos: 0, end: text.len(), alphabet };
    let f = p.implication()?;
    if p.pos != p.tokens.len() {
        return Err(p.error("end of input"));
    }
    Ok(f)
}

/// Parses `text`, requiring every proposition to belong to `alphabet`.
pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Formula, ParseError> {
    parse_with(text, Some(alphabet))
}

pub(super) fn parse_unchecked(text: &str) -> Result<Formula, ParseError> {
    parse_with(text, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn ab() -> Alphabet {
        Alphabet::new(["good", "vacuum", "roomClean", "p", "q", "r"]).unwrap()
    }

    #[test]
    fn parses_always() {
        let f = parse("G good", &ab()).unwrap();
        assert_eq!(f, Formula::always(Formula::prop("good")));
    }

    #[test]
    fn parses_cleaning_spec() {
        let f = parse("G ((X vacuum) U roomClean)", &ab()).unwrap();
        let expected = Formula::always(Formula::until(
            Formula::next(Formula::prop("vacuum")),
            Formula::prop("roomClean"),
        ));
        assert_eq!(f, expected);
    }

    #[test]
    fn until_without_left_operand_fails() {
        let err = parse("U good", &ab()).unwrap_err();
        assert_eq!(err.position, 0);
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedToken { .. }));
    }

    #[test]
    fn unknown_proposition_reports_position() {
        let err = parse("G (p & zz)", &ab()).unwrap_err();
        assert_eq!(err.position, 7);
        assert_eq!(err.kind, ParseErrorKind::UnknownProposition("zz".into()));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse("", &ab()).unwrap_err().kind, ParseErrorKind::EmptyInput);
        assert_eq!(parse("p # q", &ab()).unwrap_err().position, 2);
        let e = parse("(p & q", &ab()).unwrap_err();
        assert_eq!(e.position, 6);
        assert!(matches!(e.kind, ParseErrorKind::UnexpectedEnd { .. }));
        assert_eq!(parse("p q", &ab()).unwrap_err().position, 2);
    }

    #[test]
    fn precedence_and_associativity() {
        let a = ab();
        let render = |s: &str| parse(s, &a).unwrap().to_string();
        assert_eq!(render("p -> q -> r"), "(p) -> ((q) -> (r))");
        assert_eq!(render("p | q & r"), "(p) | ((q) & (r))");
        assert_eq!(render("p & q & r"), "((p) & (q)) & (r)");
        assert_eq!(render("p U q U r"), "(p) U ((q) U (r))");
        assert_eq!(render("G p U q"), "G ((p) U (q))");
        assert_eq!(render("p U q & r"), "((p) U (q)) & (r)");
        assert_eq!(render("p U !q"), "(p) U (! (q))");
        assert_eq!(render("!p & X q"), "(! (p)) & (X (q))");
        assert_eq!(render("F G true | false"), "(F (G (true))) | (false)");
    }

    #[test]
    fn canonical_text_round_trips() {
        let a = ab();
        for s in ["G (good)", "(p) U (q)", "G ((X (vacuum)) U (roomClean))", "! (! (p))", "true"] {
            assert_eq!(parse(s, &a).unwrap().to_string(), s);
        }
    }
}
