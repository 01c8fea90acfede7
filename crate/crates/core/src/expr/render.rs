use std::fmt;

use super::{BinaryOp, Expr, Rule, UnaryOp};

pub(super) const PREC_OR: u8 = 1;
pub(super) const PREC_AND: u8 = 2;
pub(super) const PREC_CMP: u8 = 3;
pub(super) const PREC_ADD: u8 = 4;
pub(super) const PREC_MUL: u8 = 5;
const PREC_UNARY: u8 = 6;
const PREC_ATOM: u8 = 7;

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "AND",
            BinaryOp::Or => "OR",
        }
    }

    pub(super) fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => PREC_OR,
            BinaryOp::And => PREC_AND,
            BinaryOp::Add | BinaryOp::Sub => PREC_ADD,
            BinaryOp::Mul | BinaryOp::Div => PREC_MUL,
            _ => PREC_CMP,
        }
    }
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => PREC_UNARY,
        Expr::Const(_) | Expr::Var(_) => PREC_ATOM,
        Expr::Unary(..) => PREC_UNARY,
        Expr::Binary(op, ..) => op.precedence(),
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Unary(op, a) => {
                match op {
                    UnaryOp::Not => f.write_str("NOT ")?,
                    UnaryOp::Neg => f.write_str("-")?,
                }
                // `-(3)` stays a negation node; a bare `-3` reads back as a literal.
                let parens = precedence(a) < PREC_UNARY
                    || (*op == UnaryOp::Neg && matches!(**a, Expr::Const(_)));
                write_child(f, a, parens)
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                write_child(f, a, precedence(a) < p)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, b, precedence(b) <= p)
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.branches {
            None => write!(f, "{}", self.condition),
            Some(b) => {
                write!(f, "IF {} THEN {}", self.condition, b.then_action)?;
                if let Some(e) = &b.else_action {
                    write!(f, " ELSE {e}")?;
                }
                Ok(())
            }
        }
    }
}
