//! Postfix programs with variables resolved to slot indices.
//!
//! Compiled programs give bit-identical results to [`Expr::eval`]: the same
//! operations are applied to the same operands in the same order.

use super::{truthy, BinaryOp, Expr, Rule, UnaryOp};
use crate::error::{Error, Result};

/// Rows processed per block in column-wise evaluation.
pub const CHUNK: usize = 256;

#[derive(Clone, Debug, PartialEq)]
enum Instr {
    Const(f64),
    Load(usize),
    Unary(UnaryOp),
    Binary(BinaryOp),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    code: Vec<Instr>,
    max_stack: usize,
}

impl Program {
    /// Resolves each variable through `slot`; unknown names fail.
    pub fn compile(expr: &Expr, slot: &impl Fn(&str) -> Option<usize>) -> Result<Program> {
        let mut code = Vec::with_capacity(expr.size());
        let mut depth = 0usize;
        let mut max_stack = 0usize;
        emit(expr, slot, &mut code, &mut depth, &mut max_stack)?;
        Ok(Program { code, max_stack })
    }

    pub fn compile_with_names(expr: &Expr, names: &[impl AsRef<str>]) -> Result<Program> {
        Self::compile(expr, &|n| names.iter().position(|m| m.as_ref() == n))
    }

    /// Evaluates against a row whose slots were fixed at compile time.
    pub fn eval(&self, row: &[f64]) -> f64 {
        let mut stack: smallstack::Stack = smallstack::Stack::new(self.max_stack);
        for ins in &self.code {
            match *ins {
                Instr::Const(c) => stack.push(c),
                Instr::Load(i) => stack.push(row[i]),
                Instr::Unary(op) => {
                    let a = stack.pop();
                    stack.push(op.apply(a));
                }
                Instr::Binary(op) => {
                    let b = stack.pop();
                    let a = stack.pop();
                    stack.push(op.apply(a, b));
                }
            }
        }
        stack.pop()
    }

    /// Evaluates over column-major data. `columns[i]` supplies slot `i`;
    /// `out` receives one value per row.
    pub fn eval_columns(&self, columns: &[&[f64]], rows: usize, out: &mut Vec<f64>) {
        out.clear();
        out.reserve(rows);
        let mut stack = vec![[0.0f64; CHUNK]; self.max_stack.max(1)];
        let mut start = 0;
        while start < rows {
            let n = CHUNK.min(rows - start);
            let mut top = 0usize;
            for ins in &self.code {
                match *ins {
                    Instr::Const(c) => {
                        stack[top][..n].fill(c);
                        top += 1;
                    }
                    Instr::Load(i) => {
                        stack[top][..n].copy_from_slice(&columns[i][start..start + n]);
                        top += 1;
                    }
                    Instr::Unary(op) => {
                        let a = &mut stack[top - 1][..n];
                        match op {
                            UnaryOp::Neg => a.iter_mut().for_each(|x| *x = -*x),
                            UnaryOp::Not => a.iter_mut().for_each(|x| *x = op.apply(*x)),
                        }
                    }
                    Instr::Binary(op) => {
                        top -= 1;
                        let (lo, hi) = stack.split_at_mut(top);
                        let a = &mut lo[top - 1][..n];
                        let b = &hi[0][..n];
                        apply_block(op, a, b);
                    }
                }
            }
            out.extend_from_slice(&stack[0][..n]);
            start += n;
        }
    }
}

#[inline]
fn apply_block(op: BinaryOp, a: &mut [f64], b: &[f64]) {
    macro_rules! zip {
        ($f:expr) => {
            a.iter_mut().zip(b).for_each(|(x, &y)| *x = $f(*x, y))
        };
    }
    match op {
        BinaryOp::Add => zip!(|x, y| x + y),
        BinaryOp::Sub => zip!(|x, y| x - y),
        BinaryOp::Mul => zip!(|x, y| x * y),
        BinaryOp::Div => zip!(|x: f64, y: f64| if y == 0.0 { 1.0 } else { x / y }),
        BinaryOp::Gt => zip!(|x: f64, y: f64| (x > y) as u8 as f64),
        BinaryOp::Ge => zip!(|x: f64, y: f64| (x >= y) as u8 as f64),
        BinaryOp::Lt => zip!(|x: f64, y: f64| (x < y) as u8 as f64),
        BinaryOp::Le => zip!(|x: f64, y: f64| (x <= y) as u8 as f64),
        BinaryOp::Eq => zip!(|x: f64, y: f64| (x == y) as u8 as f64),
        BinaryOp::Ne => zip!(|x: f64, y: f64| (x != y) as u8 as f64),
        BinaryOp::And => zip!(|x: f64, y: f64| (x != 0.0 && y != 0.0) as u8 as f64),
        BinaryOp::Or => zip!(|x: f64, y: f64| (x != 0.0 || y != 0.0) as u8 as f64),
    }
}

fn emit(
    e: &Expr,
    slot: &impl Fn(&str) -> Option<usize>,
    code: &mut Vec<Instr>,
    depth: &mut usize,
    max: &mut usize,
) -> Result<()> {
    match e {
        Expr::Const(c) => {
            code.push(Instr::Const(*c));
            *depth += 1;
        }
        Expr::Var(name) => {
            let i = slot(name).ok_or_else(|| Error::UnboundVariable(name.to_string()))?;
            code.push(Instr::Load(i));
            *depth += 1;
        }
        Expr::Unary(op, a) => {
            emit(a, slot, code, depth, max)?;
            code.push(Instr::Unary(*op));
        }
        Expr::Binary(op, a, b) => {
            emit(a, slot, code, depth, max)?;
            emit(b, slot, code, depth, max)?;
            code.push(Instr::Binary(*op));
            *depth -= 1;
        }
    }
    *max = (*max).max(*depth);
    Ok(())
}

/// A rule compiled against a fixed slot layout.
#[derive(Clone, Debug)]
pub struct CompiledRule {
    condition: Program,
    then_action: Option<Program>,
    else_action: Option<Program>,
}

impl CompiledRule {
    pub fn compile(rule: &Rule, slot: &impl Fn(&str) -> Option<usize>) -> Result<Self> {
        let (then_action, else_action) = match &rule.branches {
            None => (None, None),
            Some(b) => (
                Some(Program::compile(&b.then_action, slot)?),
                b.else_action
                    .as_ref()
                    .map(|e| Program::compile(e, slot))
                    .transpose()?,
            ),
        };
        Ok(CompiledRule {
            condition: Program::compile(&rule.condition, slot)?,
            then_action,
            else_action,
        })
    }

    pub fn compile_with_names(rule: &Rule, names: &[impl AsRef<str>]) -> Result<Self> {
        Self::compile(rule, &|n| names.iter().position(|m| m.as_ref() == n))
    }

    pub fn eval(&self, row: &[f64]) -> f64 {
        let c = self.condition.eval(row);
        match &self.then_action {
            None => c,
            Some(t) if truthy(c) => t.eval(row),
            Some(_) => self.else_action.as_ref().map_or(0.0, |e| e.eval(row)),
        }
    }

    pub fn decide(&self, row: &[f64]) -> bool {
        truthy(self.eval(row))
    }

    pub fn eval_columns(&self, columns: &[&[f64]], rows: usize, out: &mut Vec<f64>) {
        self.condition.eval_columns(columns, rows, out);
        let Some(t) = &self.then_action else { return };
        let mut then_vals = Vec::new();
        t.eval_columns(columns, rows, &mut then_vals);
        let else_vals = self.else_action.as_ref().map(|e| {
            let mut v = Vec::new();
            e.eval_columns(columns, rows, &mut v);
            v
        });
        for (i, c) in out.iter_mut().enumerate() {
            *c = if truthy(*c) {
                then_vals[i]
            } else {
                else_vals.as_ref().map_or(0.0, |v| v[i])
            };
        }
    }
}

mod smallstack {
    /// Fixed-capacity value stack; inline for typical rule sizes.
    pub struct Stack {
        inline: [f64; 32],
        heap: Vec<f64>,
        len: usize,
        spill: bool,
    }

    impl Stack {
        #[inline]
        pub fn new(capacity: usize) -> Self {
            let spill = capacity > 32;
            Stack {
                inline: [0.0; 32],
                heap: if spill { vec![0.0; capacity] } else { Vec::new() },
                len: 0,
                spill,
            }
        }

        #[inline]
        pub fn push(&mut self, v: f64) {
            if self.spill {
                self.heap[self.len] = v;
            } else {
                self.inline[self.len] = v;
            }
            self.len += 1;
        }

        #[inline]
        pub fn pop(&mut self) -> f64 {
            self.len -= 1;
            if self.spill {
                self.heap[self.len]
            } else {
                self.inline[self.len]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_rule, random_expr, ConstantPool, Grammar, VarBindings};
    use crate::seed;
    use rand::Rng;

    #[test]
    fn compiled_matches_tree_evaluation() {
        let names = ["a", "b", "c"];
        let g = Grammar::new(names, ConstantPool::Integers { min: -3, max: 9 });
        let mut rng = seed::stream(5, &[]);
        for _ in 0..300 {
            let e = random_expr(&g, &mut rng);
            let p = Program::compile_with_names(&e, &names).unwrap();
            let rows: Vec<[f64; 3]> = (0..CHUNK + 17)
                .map(|_| [rng.gen_range(-5..=5) as f64, rng.gen_range(0..=3) as f64, rng.gen::<f64>()])
                .collect();
            let cols: Vec<Vec<f64>> = (0..3).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
            let col_refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
            let mut out = Vec::new();
            p.eval_columns(&col_refs, rows.len(), &mut out);
            for (row, v) in rows.iter().zip(&out) {
                let b: VarBindings = names.iter().zip(row).map(|(n, x)| (*n, *x)).collect();
                let want = e.eval(&b).unwrap();
                assert!(want.to_bits() == p.eval(row).to_bits() || (want.is_nan() && p.eval(row).is_nan()));
                assert!(want.to_bits() == v.to_bits() || (want.is_nan() && v.is_nan()), "{e}");
            }
        }
    }

    #[test]
    fn compiled_rule_branches() {
        let r = parse_rule("IF x >= 1 THEN 1 ELSE 9").unwrap();
        let c = CompiledRule::compile_with_names(&r, &["x"]).unwrap();
        assert_eq!(c.eval(&[0.0]), 9.0);
        assert_eq!(c.eval(&[2.0]), 1.0);
        let mut out = Vec::new();
        c.eval_columns(&[&[0.0, 2.0, 1.0]], 3, &mut out);
        assert_eq!(out, vec![9.0, 1.0, 1.0]);
    }

    #[test]
    fn unknown_slot_fails() {
        let r = parse_rule("ghost + 1").unwrap();
        assert!(CompiledRule::compile_with_names(&r, &["x"]).is_err());
    }
}
