//! Expression trees used as agent behaviour rules.
//!
//! Values are numbers throughout. Comparison and boolean operators yield
//! `1.0` or `0.0`, and any number is true in a boolean position iff it is
//! nonzero. Division is protected: `x / 0 = 1`.

mod compile;
mod equiv;
mod grammar;
mod parse;
mod prune;
mod random;
mod ranges;
mod render;

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use compile::{CompiledRule, Program, CHUNK};
pub use equiv::{equivalent_sampled, sample_bindings, Evaluate};
pub use grammar::{ConstantPool, Grammar};
pub use parse::{parse_expr, parse_rule, parse_rule_checked, parse_rule_file};
pub use prune::{prune, prune_rule};
pub use random::{full, grow, random_expr, random_terminal};
pub use ranges::{prune_rule_with_ranges, prune_with_ranges, Interval, VarRange, VarRanges};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnaryOp {
    #[serde(rename = "NOT")]
    Not,
    #[serde(rename = "NEG")]
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryOp {
    #[serde(rename = "+")]
    Add,
    #[serde(rename = "-")]
    Sub,
    #[serde(rename = "*")]
    Mul,
    #[serde(rename = "/")]
    Div,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "AND")]
    And,
    #[serde(rename = "OR")]
    Or,
}

/// An operator that a grammar may use to build trees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Operator {
    Unary(UnaryOp),
    Binary(BinaryOp),
}

impl Operator {
    pub const ALL: [Operator; 14] = [
        Operator::Unary(UnaryOp::Not),
        Operator::Unary(UnaryOp::Neg),
        Operator::Binary(BinaryOp::Add),
        Operator::Binary(BinaryOp::Sub),
        Operator::Binary(BinaryOp::Mul),
        Operator::Binary(BinaryOp::Div),
        Operator::Binary(BinaryOp::Gt),
        Operator::Binary(BinaryOp::Ge),
        Operator::Binary(BinaryOp::Lt),
        Operator::Binary(BinaryOp::Le),
        Operator::Binary(BinaryOp::Eq),
        Operator::Binary(BinaryOp::Ne),
        Operator::Binary(BinaryOp::And),
        Operator::Binary(BinaryOp::Or),
    ];

    pub fn arity(self) -> usize {
        match self {
            Operator::Unary(_) => 1,
            Operator::Binary(_) => 2,
        }
    }
}

#[inline]
pub fn truthy(x: f64) -> bool {
    x != 0.0
}

#[inline]
fn from_bool(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl UnaryOp {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::Not => from_bool(!truthy(x)),
            UnaryOp::Neg => -x,
        }
    }
}

impl BinaryOp {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b == 0.0 {
                    1.0
                } else {
                    a / b
                }
            }
            BinaryOp::Gt => from_bool(a > b),
            BinaryOp::Ge => from_bool(a >= b),
            BinaryOp::Lt => from_bool(a < b),
            BinaryOp::Le => from_bool(a <= b),
            BinaryOp::Eq => from_bool(a == b),
            BinaryOp::Ne => from_bool(a != b),
            BinaryOp::And => from_bool(truthy(a) && truthy(b)),
            BinaryOp::Or => from_bool(truthy(a) || truthy(b)),
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Gt | BinaryOp::Ge | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Eq | BinaryOp::Ne
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::And | BinaryOp::Or)
    }
}

/// Expression tree node. Arity is fixed by the variant.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Arc<str>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(Arc::from(name))
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Self {
        Expr::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Depth counted in nodes; a single leaf has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn eval(&self, bindings: &VarBindings) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(name) => bindings
                .get(name)
                .ok_or_else(|| Error::UnboundVariable(name.to_string()))?,
            Expr::Unary(op, a) => op.apply(a.eval(bindings)?),
            Expr::Binary(op, a, b) => op.apply(a.eval(bindings)?, b.eval(bindings)?),
        })
    }

    /// Evaluates a variable-free tree.
    pub fn eval_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Var(_) => None,
            Expr::Unary(op, a) => Some(op.apply(a.eval_const()?)),
            Expr::Binary(op, a, b) => Some(op.apply(a.eval_const()?, b.eval_const()?)),
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.to_string());
            }
            Expr::Unary(_, a) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Whether the value is always exactly 0 or 1.
    pub fn is_boolean(&self) -> bool {
        match self {
            Expr::Const(c) => *c == 0.0 || *c == 1.0,
            Expr::Var(_) => false,
            Expr::Unary(op, _) => *op == UnaryOp::Not,
            Expr::Binary(op, _, _) => op.is_comparison() || op.is_logical(),
        }
    }

    /// Returns the subtree at preorder position `index`.
    pub fn node(&self, index: usize) -> Option<&Expr> {
        let mut i = index;
        self.node_inner(&mut i)
    }

    fn node_inner(&self, i: &mut usize) -> Option<&Expr> {
        if *i == 0 {
            return Some(self);
        }
        *i -= 1;
        match self {
            Expr::Const(_) | Expr::Var(_) => None,
            Expr::Unary(_, a) => a.node_inner(i),
            Expr::Binary(_, a, b) => a.node_inner(i).or_else(|| b.node_inner(i)),
        }
    }

    pub fn node_mut(&mut self, index: usize) -> Option<&mut Expr> {
        let mut i = index;
        self.node_mut_inner(&mut i)
    }

    fn node_mut_inner(&mut self, i: &mut usize) -> Option<&mut Expr> {
        if *i == 0 {
            return Some(self);
        }
        *i -= 1;
        match self {
            Expr::Const(_) | Expr::Var(_) => None,
            Expr::Unary(_, a) => a.node_mut_inner(i),
            Expr::Binary(_, a, b) => {
                let left = a.size();
                if *i < left {
                    a.node_mut_inner(i)
                } else {
                    *i -= left;
                    b.node_mut_inner(i)
                }
            }
        }
    }

    /// Depth (1-based) at which the node at preorder `index` sits.
    pub fn node_level(&self, index: usize) -> Option<usize> {
        fn walk(e: &Expr, i: &mut usize, level: usize) -> Option<usize> {
            if *i == 0 {
                return Some(level);
            }
            *i -= 1;
            match e {
                Expr::Const(_) | Expr::Var(_) => None,
                Expr::Unary(_, a) => walk(a, i, level + 1),
                Expr::Binary(_, a, b) => walk(a, i, level + 1).or_else(|| walk(b, i, level + 1)),
            }
        }
        let mut i = index;
        walk(self, &mut i, 1)
    }

    /// Replaces the subtree at preorder `index`, returning the old subtree.
    pub fn replace_node(&mut self, index: usize, with: Expr) -> Option<Expr> {
        self.node_mut(index).map(|slot| std::mem::replace(slot, with))
    }
}

/// Variable name to value mapping used for evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VarBindings(HashMap<String, f64>);

impl VarBindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn contains_all<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> bool {
        names.into_iter().all(|n| self.0.contains_key(n))
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for VarBindings {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        VarBindings(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// The two branch actions of a conditional rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Branches {
    pub then_action: Expr,
    /// Missing else means "0".
    pub else_action: Option<Expr>,
}

/// A behaviour rule: `IF condition THEN a ELSE b`, or a bare expression whose
/// value is the rule's value (classifiers, unconditional actions).
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub condition: Expr,
    pub branches: Option<Branches>,
}

impl Rule {
    pub fn bare(expr: Expr) -> Self {
        Rule {
            condition: expr,
            branches: None,
        }
    }

    pub fn if_then(condition: Expr, then_action: Expr) -> Self {
        Rule {
            condition,
            branches: Some(Branches {
                then_action,
                else_action: None,
            }),
        }
    }

    pub fn if_then_else(condition: Expr, then_action: Expr, else_action: Expr) -> Self {
        Rule {
            condition,
            branches: Some(Branches {
                then_action,
                else_action: Some(else_action),
            }),
        }
    }

    pub fn is_bare(&self) -> bool {
        self.branches.is_none()
    }

    pub fn eval(&self, bindings: &VarBindings) -> Result<f64> {
        let c = self.condition.eval(bindings)?;
        match &self.branches {
            None => Ok(c),
            Some(b) if truthy(c) => b.then_action.eval(bindings),
            Some(Branches {
                else_action: Some(e),
                ..
            }) => e.eval(bindings),
            Some(_) => Ok(0.0),
        }
    }

    /// Boolean reading of the rule's value, for classifier use.
    pub fn decide(&self, bindings: &VarBindings) -> Result<bool> {
        self.eval(bindings).map(truthy)
    }

    /// Trees making up the rule: condition, then, else.
    pub fn trees(&self) -> Vec<&Expr> {
        let mut out = vec![&self.condition];
        if let Some(b) = &self.branches {
            out.push(&b.then_action);
            if let Some(e) = &b.else_action {
                out.push(e);
            }
        }
        out
    }

    pub fn trees_mut(&mut self) -> Vec<&mut Expr> {
        let mut out = vec![&mut self.condition];
        if let Some(b) = &mut self.branches {
            out.push(&mut b.then_action);
            if let Some(e) = &mut b.else_action {
                out.push(e);
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        self.trees().iter().map(|t| t.size()).sum()
    }

    pub fn depth(&self) -> usize {
        self.trees().iter().map(|t| t.depth()).max().unwrap_or(0)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.trees()
            .into_iter()
            .flat_map(|t| t.variables())
            .collect()
    }
}

impl From<Expr> for Rule {
    fn from(e: Expr) -> Self {
        Rule::bare(e)
    }
}
