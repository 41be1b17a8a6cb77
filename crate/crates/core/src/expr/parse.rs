//! Recursive-descent parser for the defining-function language.
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor (("*"|"/") factor)* ;
//! factor := ("-")? power ;
//! power  := atom ("^" factor)? ;
//! atom   := NUMBER | "x" | "pi" | "e" | IDENT "(" expr ")" | "(" expr ")" ;
//! IDENT  := "sin"|"cos"|"exp"|"ln"|"sqrt"|"abs" ;
//! ```

use super::ast::{BinOp, Constant, Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("`{name}` at byte {offset} takes {expected} argument(s), got {found}")]
    Arity {
        offset: usize,
        name: String,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::Arity { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // An exponent is only consumed when digits follow, so "2e" is
                // the literal 2 followed by the constant e.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                tokens.push(Token {
                    tok: Tok::Num(text[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push(Token {
                    tok: Tok::Ident(text[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => tokens.push(Token {
                tok: Tok::Op(c as char),
                offset: start,
            }),
            b'(' => tokens.push(Token {
                tok: Tok::LParen,
                offset: start,
            }),
            b')' => tokens.push(Token {
                tok: Tok::RParen,
                offset: start,
            }),
            b',' => tokens.push(Token {
                tok: Tok::Comma,
                offset: start,
            }),
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
        i += 1;
    }
    tokens.push(Token {
        tok: Tok::End,
        offset: text.len(),
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek().tok {
            Tok::Op(c) if ops.contains(&c) => {
                self.bump();
                Some(c)
            }
            _ => None,
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let token = self.peek();
        let found = match &token.tok {
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Ident(name) => format!("`{name}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::End => "end of input".to_string(),
        };
        ParseError::Syntax {
            offset: token.offset,
            message: format!("expected {wanted}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(op) = self.eat_op(&['*', '/']) {
            let rhs = self.factor()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op(&['-']).is_some() {
            Ok(Expr::neg(self.power()?))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exponent = self.factor()?;
            Ok(Expr::binary(BinOp::Pow, base, exponent))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let token = self.peek().clone();
        match token.tok {
            Tok::Num(text) => {
                self.bump();
                Ok(Expr::Num(text))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "x" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Const(Constant::Pi)),
                    "e" => Ok(Expr::Const(Constant::E)),
                    _ => match Func::from_name(&name) {
                        Some(func) => self.call(func, name, token.offset),
                        None => Err(ParseError::UnknownIdentifier {
                            offset: token.offset,
                            name,
                        }),
                    },
                }
            }
            _ => Err(self.unexpected("a number, `x`, a constant, a function call or `(`")),
        }
    }

    fn call(&mut self, func: Func, name: String, offset: usize) -> Result<Expr, ParseError> {
        if self.peek().tok != Tok::LParen {
            return Err(self.unexpected(&format!("`(` after `{name}`")));
        }
        self.bump();
        let mut args = Vec::new();
        if self.peek().tok != Tok::RParen {
            args.push(self.expr()?);
            while self.peek().tok == Tok::Comma {
                self.bump();
                args.push(self.expr()?);
            }
        }
        self.expect_rparen()?;
        if args.len() != func.arity() {
            return Err(ParseError::Arity {
                offset,
                name,
                expected: func.arity(),
                found: args.len(),
            });
        }
        let arg = args.pop().expect("arity checked");
        Ok(Expr::call(func, arg))
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }
}

/// Parses `text` into an expression tree.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Syntax {
            offset: 0,
            message: "empty expression".to_string(),
        });
    }
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    if parser.peek().tok != Tok::End {
        return Err(parser.unexpected("an operator or end of input"));
    }
    Ok(expr)
}
