//! Infix parser for rules and expressions.
//!
//! Precedence, loosest first: `OR`, `AND`, comparisons, `+ -`, `* /`, unary
//! `NOT` / `-`. Binary operators associate to the left. Keywords are
//! case-insensitive and `=` is accepted as a synonym for `==`.

use super::render::{PREC_ADD, PREC_MUL, PREC_OR};
use super::{BinaryOp, Expr, Rule, UnaryOp};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Bin(BinaryOp),
    Minus,
    Not,
    If,
    Then,
    Else,
    LParen,
    RParen,
    End,
}

struct Token {
    tok: Tok,
    /// 1-based column of the first character.
    col: usize,
}

fn syntax(col: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        position: col,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| syntax(col, format!("malformed number `{s}`")))?;
            out.push(Token { tok: Tok::Num(v), col });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.to_ascii_uppercase().as_str() {
                "IF" => Tok::If,
                "THEN" => Tok::Then,
                "ELSE" => Tok::Else,
                "AND" => Tok::Bin(BinaryOp::And),
                "OR" => Tok::Bin(BinaryOp::Or),
                "NOT" => Tok::Not,
                _ => Tok::Ident(word),
            };
            out.push(Token { tok, col });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('>', Some('=')) => (Tok::Bin(BinaryOp::Ge), 2),
            ('<', Some('=')) => (Tok::Bin(BinaryOp::Le), 2),
            ('=', Some('=')) => (Tok::Bin(BinaryOp::Eq), 2),
            ('!', Some('=')) => (Tok::Bin(BinaryOp::Ne), 2),
            ('>', _) => (Tok::Bin(BinaryOp::Gt), 1),
            ('<', _) => (Tok::Bin(BinaryOp::Lt), 1),
            ('=', _) => (Tok::Bin(BinaryOp::Eq), 1),
            ('+', _) => (Tok::Bin(BinaryOp::Add), 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Bin(BinaryOp::Mul), 1),
            ('/', _) => (Tok::Bin(BinaryOp::Div), 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            _ => return Err(syntax(col, format!("unexpected character `{c}`"))),
        };
        out.push(Token { tok, col });
        i += len;
    }
    out.push(Token {
        tok: Tok::End,
        col: chars.len() + 1,
    });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    known: Option<&'a [&'a str]>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn col(&self) -> usize {
        self.tokens[self.pos].col
    }

    fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.col(), format!("expected {what}")))
        }
    }

    fn binary_op_at(&self, level: u8) -> Option<BinaryOp> {
        match self.peek() {
            Tok::Bin(op) if op.precedence() == level => Some(*op),
            Tok::Minus if level == PREC_ADD => Some(BinaryOp::Sub),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        self.level(PREC_OR)
    }

    fn level(&mut self, level: u8) -> Result<Expr> {
        let next = |p: &mut Self| {
            if level == PREC_MUL {
                p.unary()
            } else {
                p.level(level + 1)
            }
        };
        let mut lhs = next(self)?;
        while let Some(op) = self.binary_op_at(level) {
            self.bump();
            let rhs = next(self)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Expr::unary(UnaryOp::Not, self.unary()?))
            }
            Tok::Minus => {
                self.bump();
                if let Tok::Num(v) = *self.peek() {
                    self.bump();
                    Ok(Expr::Const(-v))
                } else {
                    Ok(Expr::unary(UnaryOp::Neg, self.unary()?))
                }
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(known) = self.known {
                    if !known.contains(&name.as_str()) {
                        return Err(Error::UnknownIdentifier { name, position: col });
                    }
                }
                Ok(Expr::var(&name))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::End => Err(syntax(col, "unexpected end of input")),
            other => Err(syntax(col, format!("unexpected token {other:?}"))),
        }
    }

    fn rule(&mut self) -> Result<Rule> {
        let rule = if *self.peek() == Tok::If {
            self.bump();
            let cond = self.expr()?;
            self.expect(Tok::Then, "THEN")?;
            let then_action = self.expr()?;
            if *self.peek() == Tok::Else {
                self.bump();
                Rule::if_then_else(cond, then_action, self.expr()?)
            } else {
                Rule::if_then(cond, then_action)
            }
        } else {
            Rule::bare(self.expr()?)
        };
        self.finish()?;
        Ok(rule)
    }

    fn finish(&mut self) -> Result<()> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(syntax(self.col(), "trailing input"))
        }
    }
}

fn parser<'a>(text: &str, known: Option<&'a [&'a str]>) -> Result<Parser<'a>> {
    Ok(Parser {
        tokens: lex(text)?,
        pos: 0,
        known,
    })
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = parser(text, None)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_rule(text: &str) -> Result<Rule> {
    parser(text, None)?.rule()
}

/// Parses a rule whose identifiers must all appear in `known`.
pub fn parse_rule_checked(text: &str, known: &[&str]) -> Result<Rule> {
    parser(text, Some(known))?.rule()
}

/// One rule per line; `#` starts a comment, blank lines are skipped.
pub fn parse_rule_file(text: &str) -> Result<Vec<Rule>> {
    let mut rules = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let rule = parse_rule(body).map_err(|e| match e {
            Error::Syntax { position, message } => Error::Syntax {
                position,
                message: format!("line {}: {message}", n + 1),
            },
            other => other,
        })?;
        rules.push(rule);
    }
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_matches_convention() {
        let e = parse_expr("1 + 2 * 3 > 4 AND NOT x OR y").unwrap();
        assert_eq!(e.to_string(), "1 + 2 * 3 > 4 AND NOT x OR y");
        let Expr::Binary(BinaryOp::Or, lhs, _) = &e else {
            panic!("{e:?}")
        };
        assert!(matches!(**lhs, Expr::Binary(BinaryOp::And, ..)));
    }

    #[test]
    fn mixed_type_rule() {
        let r = parse_rule(
            "IF (previousResource - previousResource) * (previousResource - previousResource) >= \
             (previousTook - resource) - (totalResource - agents) THEN 1",
        )
        .unwrap();
        assert!(r.branches.as_ref().unwrap().else_action.is_none());
        assert_eq!(r.variables().len(), 5);
    }

    #[test]
    fn negative_literals_and_negation() {
        assert_eq!(parse_expr("-3").unwrap(), Expr::Const(-3.0));
        assert_eq!(parse_expr("-(3)").unwrap(), Expr::unary(UnaryOp::Neg, Expr::Const(3.0)));
        assert_eq!(
            parse_expr("x - -3").unwrap(),
            Expr::binary(BinaryOp::Sub, Expr::var("x"), Expr::Const(-3.0))
        );
        assert_eq!(parse_expr("1.5e-3").unwrap(), Expr::Const(0.0015));
    }

    #[test]
    fn single_equals_is_equality() {
        assert_eq!(parse_expr("a = 0").unwrap(), parse_expr("a == 0").unwrap());
    }

    #[test]
    fn malformed_input() {
        let err = parse_rule("previousTook >").unwrap_err();
        assert!(matches!(err, Error::Syntax { position: 15, .. }), "{err}");
        assert!(parse_rule("IF x THEN").is_err());
        assert!(parse_rule("(x + 1").is_err());
        assert!(parse_rule("x y").is_err());
        assert!(parse_rule("x $ 2").is_err());
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_rule_checked("agents + ghost", &["agents"]).unwrap_err();
        assert!(matches!(err, Error::UnknownIdentifier { ref name, position: 10 } if name == "ghost"));
    }

    #[test]
    fn rule_file_comments() {
        let rules = parse_rule_file("# header\n\nx > 1  # trailing\nIF y THEN 1 ELSE 2\n").unwrap();
        assert_eq!(rules.len(), 2);
        let err = parse_rule_file("x\n(y\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
