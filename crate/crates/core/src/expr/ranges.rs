//! Simplification under known variable ranges.
//!
//! Each subtree is bounded by interval arithmetic. Comparisons between
//! linear subtrees are additionally bounded through their difference as a
//! linear form, which can exploit declared orderings between variables
//! (`previousTook <= totalResource`, for instance). A comparison or boolean
//! test whose bounds settle its truth value is replaced by that constant.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::prune::{fixpoint, resolve_branches, simplify};
use super::{prune_rule, BinaryOp, Expr, Rule, UnaryOp};
use crate::error::{Error, Result};

/// Closed interval; endpoints may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

const EXACT_LIMIT: f64 = 4_503_599_627_370_496.0; // 2^52

impl Interval {
    pub const ANY: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    const BOOL: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    fn exact(&self) -> bool {
        [self.lo, self.hi]
            .iter()
            .all(|v| v.is_infinite() || (v.fract() == 0.0 && v.abs() < EXACT_LIMIT))
    }

    /// Pads outward unless every endpoint is a small integer, in which case
    /// the float operation that produced it was exact.
    fn rounded(self, inputs_exact: bool) -> Self {
        if inputs_exact && self.exact() {
            return self;
        }
        let pad = |v: f64| v.abs() * 1e-12 + 1e-300;
        Interval {
            lo: self.lo - pad(self.lo),
            hi: self.hi + pad(self.hi),
        }
    }

    fn intersect(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    /// `Some(true)` if zero is excluded, `Some(false)` if the interval is {0}.
    fn truth(&self) -> Option<bool> {
        if self.lo == 0.0 && self.hi == 0.0 {
            Some(false)
        } else if self.lo > 0.0 || self.hi < 0.0 {
            Some(true)
        } else {
            None
        }
    }

    fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi).rounded(self.exact() && o.exact())
    }

    fn sub(self, o: Interval) -> Interval {
        Interval::new(self.lo - o.hi, self.hi - o.lo).rounded(self.exact() && o.exact())
    }

    fn mul(self, o: Interval) -> Interval {
        let prod = |a: f64, b: f64| if a == 0.0 || b == 0.0 { 0.0 } else { a * b };
        let c = [
            prod(self.lo, o.lo),
            prod(self.lo, o.hi),
            prod(self.hi, o.lo),
            prod(self.hi, o.hi),
        ];
        Interval::new(
            c.iter().copied().fold(f64::INFINITY, f64::min),
            c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
        .rounded(self.exact() && o.exact())
    }

    fn div(self, o: Interval) -> Interval {
        if o.lo == 0.0 && o.hi == 0.0 {
            return Interval::point(1.0);
        }
        if o.contains(0.0) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Interval::ANY;
        }
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        Interval::new(
            c.iter().copied().fold(f64::INFINITY, f64::min),
            c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
        .rounded(false)
    }
}

fn bool_interval(t: Option<bool>) -> Interval {
    match t {
        Some(true) => Interval::point(1.0),
        Some(false) => Interval::point(0.0),
        None => Interval::BOOL,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarRange {
    pub lo: f64,
    pub hi: f64,
    /// Variable only takes integer values (used when sampling).
    #[serde(default)]
    pub integral: bool,
}

/// Per-variable bounds, plus optional orderings `lesser <= greater`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VarRanges {
    pub vars: BTreeMap<String, VarRange>,
    #[serde(default)]
    pub orderings: Vec<(String, String)>,
}

impl VarRanges {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.vars.insert(name.into(), VarRange { lo, hi, integral: false });
        self
    }

    pub fn with_integral(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.vars.insert(name.into(), VarRange { lo, hi, integral: true });
        self
    }

    /// Declares `lesser <= greater` for every admissible binding.
    pub fn with_ordering(mut self, lesser: &str, greater: &str) -> Self {
        self.orderings.push((lesser.into(), greater.into()));
        self
    }

    pub fn get(&self, name: &str) -> Option<Interval> {
        self.vars.get(name).map(|r| Interval::new(r.lo, r.hi))
    }

    fn check_covers(&self, vars: impl IntoIterator<Item = String>) -> Result<()> {
        for v in vars {
            if !self.vars.contains_key(&v) {
                return Err(Error::MissingRange(v));
            }
        }
        Ok(())
    }

    pub fn bounds(&self, e: &Expr) -> Interval {
        match e {
            Expr::Const(c) => Interval::point(*c),
            Expr::Var(v) => self.get(v).unwrap_or(Interval::ANY),
            Expr::Unary(UnaryOp::Neg, a) => {
                let i = self.bounds(a);
                Interval::new(-i.hi, -i.lo)
            }
            Expr::Unary(UnaryOp::Not, a) => bool_interval(self.bounds(a).truth().map(|t| !t)),
            Expr::Binary(op, a, b) => match op {
                BinaryOp::Add => self.bounds(a).add(self.bounds(b)),
                BinaryOp::Sub => self.bounds(a).sub(self.bounds(b)),
                BinaryOp::Mul => self.bounds(a).mul(self.bounds(b)),
                BinaryOp::Div => self.bounds(a).div(self.bounds(b)),
                BinaryOp::And => {
                    let (x, y) = (self.bounds(a).truth(), self.bounds(b).truth());
                    bool_interval(match (x, y) {
                        (Some(false), _) | (_, Some(false)) => Some(false),
                        (Some(true), Some(true)) => Some(true),
                        _ => None,
                    })
                }
                BinaryOp::Or => {
                    let (x, y) = (self.bounds(a).truth(), self.bounds(b).truth());
                    bool_interval(match (x, y) {
                        (Some(true), _) | (_, Some(true)) => Some(true),
                        (Some(false), Some(false)) => Some(false),
                        _ => None,
                    })
                }
                cmp => bool_interval(self.compare(*cmp, a, b)),
            },
        }
    }

    /// Bounds on `a - b` as the values the evaluator will compare.
    fn difference(&self, a: &Expr, b: &Expr) -> Interval {
        let plain = self.bounds(a).sub(self.bounds(b));
        match (linear(a), linear(b)) {
            (Some(la), Some(lb)) => plain.intersect(self.bound_linear(la.minus(&lb))),
            _ => plain,
        }
    }

    fn compare(&self, op: BinaryOp, a: &Expr, b: &Expr) -> Option<bool> {
        let d = self.difference(a, b);
        if d.lo > d.hi {
            return None;
        }
        match op {
            BinaryOp::Gt => decide(d.lo > 0.0, d.hi <= 0.0),
            BinaryOp::Ge => decide(d.lo >= 0.0, d.hi < 0.0),
            BinaryOp::Lt => decide(d.hi < 0.0, d.lo >= 0.0),
            BinaryOp::Le => decide(d.hi <= 0.0, d.lo > 0.0),
            BinaryOp::Eq => decide(d.lo == 0.0 && d.hi == 0.0, !d.contains(0.0)),
            BinaryOp::Ne => decide(!d.contains(0.0), d.lo == 0.0 && d.hi == 0.0),
            _ => None,
        }
    }

    fn bound_linear(&self, mut form: Linear) -> Interval {
        let mut total = Interval::point(form.constant);
        for (lesser, greater) in &self.orderings {
            let (Some(&l), Some(&g)) = (form.coef.get(lesser), form.coef.get(greater)) else {
                continue;
            };
            let (Some(li), Some(gi)) = (self.get(lesser), self.get(greater)) else {
                continue;
            };
            // greater - lesser lies in [max(0, glo - lhi), ghi - llo].
            let gap = Interval::new((gi.lo - li.hi).max(0.0), gi.hi - li.lo);
            if g > 0.0 && l < 0.0 {
                let m = g.min(-l);
                total = total.add(Interval::point(m).mul(gap));
                *form.coef.get_mut(greater).unwrap() -= m;
                *form.coef.get_mut(lesser).unwrap() += m;
            } else if g < 0.0 && l > 0.0 {
                let m = (-g).min(l);
                total = total.sub(Interval::point(m).mul(gap));
                *form.coef.get_mut(greater).unwrap() += m;
                *form.coef.get_mut(lesser).unwrap() -= m;
            }
        }
        for (name, c) in &form.coef {
            if *c != 0.0 {
                total = total.add(Interval::point(*c).mul(self.get(name).unwrap_or(Interval::ANY)));
            }
        }
        // The form reasons in exact arithmetic (cancellation, reordering);
        // the evaluator does not, so leave room for rounding.
        let scale = 1.0 + total.lo.abs().max(total.hi.abs());
        Interval::new(total.lo - scale * 1e-9, total.hi + scale * 1e-9)
    }
}

fn decide(is_true: bool, is_false: bool) -> Option<bool> {
    if is_true {
        Some(true)
    } else if is_false {
        Some(false)
    } else {
        None
    }
}

/// `Σ coef·var + constant`.
#[derive(Clone, Debug)]
struct Linear {
    coef: BTreeMap<String, f64>,
    constant: f64,
}

impl Linear {
    fn scaled(mut self, k: f64) -> Linear {
        self.coef.values_mut().for_each(|c| *c *= k);
        self.constant *= k;
        self
    }

    fn plus(mut self, other: &Linear) -> Linear {
        for (k, c) in &other.coef {
            *self.coef.entry(k.clone()).or_insert(0.0) += c;
        }
        self.constant += other.constant;
        self
    }

    fn minus(self, other: &Linear) -> Linear {
        self.plus(&other.clone().scaled(-1.0))
    }
}

fn linear(e: &Expr) -> Option<Linear> {
    Some(match e {
        Expr::Const(c) => Linear {
            coef: BTreeMap::new(),
            constant: *c,
        },
        Expr::Var(v) => Linear {
            coef: BTreeMap::from([(v.to_string(), 1.0)]),
            constant: 0.0,
        },
        Expr::Unary(UnaryOp::Neg, a) => linear(a)?.scaled(-1.0),
        Expr::Binary(BinaryOp::Add, a, b) => linear(a)?.plus(&linear(b)?),
        Expr::Binary(BinaryOp::Sub, a, b) => linear(a)?.minus(&linear(b)?),
        Expr::Binary(BinaryOp::Mul, a, b) => match (a.as_const(), b.as_const()) {
            (Some(k), _) => linear(b)?.scaled(k),
            (_, Some(k)) => linear(a)?.scaled(k),
            _ => return None,
        },
        _ => return None,
    })
}

fn substitute_points(e: Expr, ranges: &VarRanges) -> Expr {
    match e {
        Expr::Var(v) => match ranges.get(&v) {
            Some(i) if i.is_point() && i.lo.is_finite() => Expr::Const(i.lo),
            _ => Expr::Var(v),
        },
        Expr::Unary(op, a) => Expr::unary(op, substitute_points(*a, ranges)),
        Expr::Binary(op, a, b) => {
            Expr::binary(op, substitute_points(*a, ranges), substitute_points(*b, ranges))
        }
        c => c,
    }
}

/// Replaces comparisons and boolean tests that are settled by the ranges.
fn fold_settled(e: Expr, ranges: &VarRanges, in_bool: bool) -> Expr {
    let e = match e {
        Expr::Unary(op, a) => Expr::unary(op, fold_settled(*a, ranges, op == UnaryOp::Not)),
        Expr::Binary(op, a, b) => {
            let child_bool = op.is_logical();
            Expr::binary(
                op,
                fold_settled(*a, ranges, child_bool),
                fold_settled(*b, ranges, child_bool),
            )
        }
        leaf => leaf,
    };
    if matches!(e, Expr::Const(_)) {
        return e;
    }
    let b = ranges.bounds(&e);
    let settled = match &e {
        Expr::Binary(op, ..) if op.is_comparison() || op.is_logical() => b.truth(),
        Expr::Unary(UnaryOp::Not, _) => b.truth(),
        _ if in_bool => b.truth(),
        _ => None,
    };
    match settled {
        Some(t) => Expr::Const(if t { 1.0 } else { 0.0 }),
        None => e,
    }
}

fn range_step(e: Expr, ranges: &VarRanges, in_bool: bool) -> Expr {
    let e = simplify(substitute_points(e, ranges), in_bool);
    simplify(fold_settled(e, ranges, in_bool), in_bool)
}

/// Simplifies `expr` assuming every variable lies within `ranges`. The
/// result agrees with `expr` on every admissible binding.
pub fn prune_with_ranges(expr: &Expr, ranges: &VarRanges) -> Result<Expr> {
    ranges.check_covers(expr.variables())?;
    Ok(fixpoint(expr.clone(), |e| range_step(e, ranges, false)))
}

pub fn prune_rule_with_ranges(rule: &Rule, ranges: &VarRanges) -> Result<Rule> {
    ranges.check_covers(rule.variables())?;
    let mut current = prune_rule(rule);
    loop {
        let next = match &current.branches {
            None => Rule::bare(fixpoint(current.condition.clone(), |e| range_step(e, ranges, false))),
            Some(b) => {
                let cond = fixpoint(current.condition.clone(), |e| range_step(e, ranges, true));
                let cond = match ranges.bounds(&cond).truth() {
                    Some(t) => Expr::Const(if t { 1.0 } else { 0.0 }),
                    None => cond,
                };
                let then_action = fixpoint(b.then_action.clone(), |e| range_step(e, ranges, false));
                let else_action = b
                    .else_action
                    .as_ref()
                    .map(|x| fixpoint(x.clone(), |e| range_step(e, ranges, false)));
                resolve_branches(cond, then_action, else_action)
            }
        };
        let next = prune_rule(&next);
        if next == current {
            return Ok(next);
        }
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, parse_rule};

    #[test]
    fn disjoint_comparison_folds() {
        let r = VarRanges::new().with("x", 10.0, 20.0);
        assert_eq!(prune_with_ranges(&parse_expr("x > 5").unwrap(), &r).unwrap(), Expr::Const(1.0));
        let r = VarRanges::new().with("x", 0.0, 20.0);
        let e = parse_expr("x > 5").unwrap();
        assert_eq!(prune_with_ranges(&e, &r).unwrap(), e);
    }

    #[test]
    fn missing_range_is_an_error() {
        let r = VarRanges::new().with("x", 0.0, 1.0);
        let err = prune_with_ranges(&parse_expr("x + y").unwrap(), &r).unwrap_err();
        assert!(matches!(err, Error::MissingRange(ref v) if v == "y"));
    }

    #[test]
    fn ordering_settles_linear_comparison() {
        let e = parse_expr("0 >= a - b + 1").unwrap();
        let loose = VarRanges::new().with("a", 0.0, 10.0).with("b", 0.0, 100.0);
        assert_eq!(prune_with_ranges(&e, &loose).unwrap(), e);
        let tight = loose.clone().with_ordering("b", "a");
        // a - b >= 0 so 0 >= a - b + 1 is never true.
        assert_eq!(prune_with_ranges(&e, &tight).unwrap(), Expr::Const(0.0));
    }

    #[test]
    fn truthy_condition_selects_then() {
        let r = VarRanges::new().with("agents", 1.0, 2.0).with("x", 0.0, 5.0);
        let rule = parse_rule("IF agents THEN x ELSE 9").unwrap();
        assert_eq!(prune_rule_with_ranges(&rule, &r).unwrap().to_string(), "x");
    }

    #[test]
    fn interval_products_with_infinity() {
        let a = Interval::new(0.0, f64::INFINITY);
        let b = Interval::new(0.0, 0.0);
        assert_eq!(a.mul(b), Interval::point(0.0));
    }
}
