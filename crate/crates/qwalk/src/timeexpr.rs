//! Tiny closed-form time expressions in the walk parameter q.
//!
//! Transfer claims carry times like `pi/(2q)` or `pi/(q*sqrt(2))` that only
//! become numbers once q is chosen. The grammar is deliberately small:
//! numbers, `pi`, `q`, `sqrt(...)`, parentheses, `*`, `/`, unary minus, and
//! implicit multiplication by adjacency (`2q`, `3pi/4`).

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TimeExprError {
    #[error("empty time expression")]
    Empty,
    #[error("unexpected character {0:?} in time expression")]
    UnexpectedChar(char),
    #[error("unknown identifier {0:?} in time expression")]
    UnknownIdent(String),
    #[error("malformed time expression near {0:?}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Pi,
    Q,
    Sqrt(Box<Node>),
    Neg(Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
}

impl Node {
    fn eval(&self, q: f64) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Pi => std::f64::consts::PI,
            Node::Q => q,
            Node::Sqrt(a) => a.eval(q).sqrt(),
            Node::Neg(a) => -a.eval(q),
            Node::Mul(a, b) => a.eval(q) * b.eval(q),
            Node::Div(a, b) => a.eval(q) / b.eval(q),
        }
    }
}

/// A parsed time expression; keeps its source text for display and serde.
#[derive(Debug, Clone)]
pub struct TimeExpr {
    src: String,
    ast: Node,
}

impl PartialEq for TimeExpr {
    fn eq(&self, other: &Self) -> bool {
        self.src == other.src
    }
}

impl TimeExpr {
    pub fn parse(src: &str) -> Result<Self, TimeExprError> {
        let tokens = tokenize(src)?;
        if tokens.is_empty() {
            return Err(TimeExprError::Empty);
        }
        let mut p = Parser { tokens, pos: 0 };
        let ast = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(TimeExprError::Malformed(format!("{:?}", p.tokens[p.pos])));
        }
        Ok(TimeExpr {
            src: src.trim().to_string(),
            ast,
        })
    }

    /// A fixed numeric time, printed in round-trip form.
    pub fn constant(v: f64) -> Self {
        let src = format!("{v:?}");
        TimeExpr {
            ast: Node::Num(v),
            src,
        }
    }

    /// pi/(2q), the workhorse transfer time of the corpus.
    pub fn pi_over_2q() -> Self {
        TimeExpr::parse("pi/(2q)").unwrap()
    }

    /// pi/(q*sqrt(2)).
    pub fn pi_over_q_sqrt2() -> Self {
        TimeExpr::parse("pi/(q*sqrt(2))").unwrap()
    }

    pub fn eval(&self, q: f64) -> f64 {
        self.ast.eval(q)
    }

    pub fn src(&self) -> &str {
        &self.src
    }
}

impl fmt::Display for TimeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

impl std::str::FromStr for TimeExpr {
    type Err = TimeExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TimeExpr::parse(s)
    }
}

impl Serialize for TimeExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.src)
    }
}

impl<'de> Deserialize<'de> for TimeExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        TimeExpr::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Pi,
    Q,
    Sqrt,
    LParen,
    RParen,
    Star,
    Slash,
    Minus,
}

fn tokenize(src: &str) -> Result<Vec<Token>, TimeExprError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                tokens.push(Token::LParen);
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '/' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '+' || chars[i] == '-')
                            && i > start
                            && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let v: f64 = text
                    .parse()
                    .map_err(|_| TimeExprError::Malformed(text.clone()))?;
                tokens.push(Token::Num(v));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
                let ident: String = chars[start..i].iter().collect();
                match ident.as_str() {
                    "pi" => tokens.push(Token::Pi),
                    "q" => tokens.push(Token::Q),
                    "sqrt" => tokens.push(Token::Sqrt),
                    _ => return Err(TimeExprError::UnknownIdent(ident)),
                }
            }
            other => return Err(TimeExprError::UnexpectedChar(other)),
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    /// expr := term { ('*' | '/') term }
    fn expr(&mut self) -> Result<Node, TimeExprError> {
        let mut node = self.term()?;
        while let Some(tok) = self.peek() {
            match tok {
                Token::Star => {
                    self.pos += 1;
                    node = Node::Mul(Box::new(node), Box::new(self.term()?));
                }
                Token::Slash => {
                    self.pos += 1;
                    node = Node::Div(Box::new(node), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(node)
    }

    /// term := factor { factor }  (implicit multiplication)
    fn term(&mut self) -> Result<Node, TimeExprError> {
        let mut node = self.factor()?;
        while matches!(
            self.peek(),
            Some(Token::Num(_)) | Some(Token::Pi) | Some(Token::Q) | Some(Token::Sqrt)
                | Some(Token::LParen)
        ) {
            node = Node::Mul(Box::new(node), Box::new(self.factor()?));
        }
        Ok(node)
    }

    fn factor(&mut self) -> Result<Node, TimeExprError> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| TimeExprError::Malformed("end of input".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::Pi => Ok(Node::Pi),
            Token::Q => Ok(Node::Q),
            Token::Minus => Ok(Node::Neg(Box::new(self.factor()?))),
            Token::Sqrt => {
                self.expect(Token::LParen)?;
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(Node::Sqrt(Box::new(inner)))
            }
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            other => Err(TimeExprError::Malformed(format!("{other:?}"))),
        }
    }

    fn expect(&mut self, want: Token) -> Result<(), TimeExprError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(TimeExprError::Malformed(format!("expected {want:?}")))
        }
    }
}
