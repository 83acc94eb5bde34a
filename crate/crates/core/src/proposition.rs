//! Causal propositions and their surface syntax.
//!
//! ```text
//! A<B          precedence of party A before party B
//! chi          named atom
//! false        bottom
//! ~p           sugar for p -> false
//! p & q, p | q, p -> q (right associative), parentheses
//! ```

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Proposition {
    Atom(String),
    Prec(String, String),
    Bottom,
    And(Box<Proposition>, Box<Proposition>),
    Or(Box<Proposition>, Box<Proposition>),
    Implies(Box<Proposition>, Box<Proposition>),
}

impl Proposition {
    pub fn atom(name: impl Into<String>) -> Self {
        Proposition::Atom(name.into())
    }

    pub fn prec(a: impl Into<String>, b: impl Into<String>) -> Self {
        Proposition::Prec(a.into(), b.into())
    }

    pub fn and(l: Proposition, r: Proposition) -> Self {
        Proposition::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Proposition, r: Proposition) -> Self {
        Proposition::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Proposition, r: Proposition) -> Self {
        Proposition::Implies(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Proposition) -> Self {
        Proposition::implies(p, Proposition::Bottom)
    }

    pub fn depth(&self) -> usize {
        match self {
            Proposition::Atom(_) | Proposition::Prec(..) | Proposition::Bottom => 0,
            Proposition::And(l, r) | Proposition::Or(l, r) | Proposition::Implies(l, r) => {
                1 + l.depth().max(r.depth())
            }
        }
    }

    /// Leaves other than `Bottom`, left to right.
    pub fn leaves(&self) -> Vec<&Proposition> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Proposition>) {
        match self {
            Proposition::Atom(_) | Proposition::Prec(..) => out.push(self),
            Proposition::Bottom => {}
            Proposition::And(l, r) | Proposition::Or(l, r) | Proposition::Implies(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Proposition::Implies(_, r) if **r == Proposition::Bottom => 4,
            Proposition::Implies(..) => 1,
            Proposition::Or(..) => 2,
            Proposition::And(..) => 3,
            _ => 5,
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, p: &Proposition, min: u8| {
            if p.precedence() < min {
                write!(f, "({p})")
            } else {
                write!(f, "{p}")
            }
        };
        match self {
            Proposition::Atom(name) => write!(f, "{name}"),
            Proposition::Prec(a, b) => write!(f, "{a}<{b}"),
            Proposition::Bottom => write!(f, "false"),
            Proposition::Implies(l, r) if **r == Proposition::Bottom => {
                write!(f, "~")?;
                wrap(f, l, 4)
            }
            Proposition::And(l, r) => {
                wrap(f, l, 3)?;
                write!(f, " & ")?;
                wrap(f, r, 4)
            }
            Proposition::Or(l, r) => {
                wrap(f, l, 2)?;
                write!(f, " | ")?;
                wrap(f, r, 3)
            }
            Proposition::Implies(l, r) => {
                wrap(f, l, 2)?;
                write!(f, " -> ")?;
                wrap(f, r, 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct PropParseError {
    /// 1-based character column in the input.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Lt,
    Not,
    And,
    Or,
    Arrow,
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>, PropParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' => {
                i += 1;
                continue;
            }
            '<' => out.push((Token::Lt, col)),
            '~' => out.push((Token::Not, col)),
            '&' => out.push((Token::And, col)),
            '|' => out.push((Token::Or, col)),
            '(' => out.push((Token::Open, col)),
            ')' => out.push((Token::Close, col)),
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Token::Arrow, col));
                i += 2;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Token::Ident(chars[start..i].iter().collect()), col));
                continue;
            }
            other => {
                return Err(PropParseError {
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end_column: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.end_column)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, PropParseError> {
        Err(PropParseError {
            column: self.column(),
            message: message.into(),
        })
    }

    fn implication(&mut self) -> Result<Proposition, PropParseError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Token::Arrow) {
            self.pos += 1;
            let rhs = self.implication()?;
            return Ok(Proposition::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Proposition, PropParseError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            lhs = Proposition::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Proposition, PropParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            lhs = Proposition::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Proposition, PropParseError> {
        match self.peek().cloned() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(Proposition::not(self.unary()?))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.implication()?;
                if self.peek() != Some(&Token::Close) {
                    return self.error("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Token::Lt) {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Token::Ident(rhs)) => {
                            self.pos += 1;
                            Ok(Proposition::Prec(name, rhs))
                        }
                        _ => self.error("expected party name after `<`"),
                    }
                } else if name == "false" {
                    Ok(Proposition::Bottom)
                } else {
                    Ok(Proposition::Atom(name))
                }
            }
            Some(_) => self.error("expected a proposition"),
            None => self.error("unexpected end of input"),
        }
    }
}

pub fn parse_proposition(src: &str) -> Result<Proposition, PropParseError> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end_column: src.chars().count() + 1,
    };
    let prop = parser.implication()?;
    if parser.pos != parser.tokens.len() {
        return parser.error("trailing input");
    }
    Ok(prop)
}

impl std::str::FromStr for Proposition {
    type Err = PropParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_proposition(s)
    }
}
