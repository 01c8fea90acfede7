use rand::Rng;

use super::{Expr, Rule, VarBindings, VarRanges};
use crate::error::Result;

/// Anything that can be evaluated against bindings.
pub trait Evaluate {
    fn evaluate(&self, bindings: &VarBindings) -> Result<f64>;
}

impl Evaluate for Expr {
    fn evaluate(&self, bindings: &VarBindings) -> Result<f64> {
        self.eval(bindings)
    }
}

impl Evaluate for Rule {
    fn evaluate(&self, bindings: &VarBindings) -> Result<f64> {
        self.eval(bindings)
    }
}

/// Draws one admissible binding: uniform per variable, then each declared
/// ordering is restored by redrawing the greater variable above the lesser.
pub fn sample_bindings<R: Rng + ?Sized>(ranges: &VarRanges, rng: &mut R) -> VarBindings {
    let draw = |lo: f64, hi: f64, integral: bool, rng: &mut R| -> f64 {
        if integral {
            let (lo, hi) = (lo.ceil() as i64, hi.floor() as i64);
            if lo >= hi {
                lo as f64
            } else {
                rng.gen_range(lo..=hi) as f64
            }
        } else if lo >= hi {
            lo
        } else {
            rng.gen_range(lo..=hi)
        }
    };
    let mut b = VarBindings::new();
    for (name, r) in &ranges.vars {
        let v = draw(r.lo, r.hi, r.integral, rng);
        b.set(name.clone(), v);
    }
    for (lesser, greater) in &ranges.orderings {
        let (Some(l), Some(g), Some(gr)) = (b.get(lesser), b.get(greater), ranges.vars.get(greater)) else {
            continue;
        };
        if g < l {
            let v = draw(l.max(gr.lo), gr.hi, gr.integral, rng);
            b.set(greater.clone(), v);
        }
    }
    b
}

fn agree(x: f64, y: f64, exact: bool) -> bool {
    if x == y || (x.is_nan() && y.is_nan()) {
        return true;
    }
    !exact && (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0)
}

/// True iff `a` and `b` agree on `n` bindings sampled within `ranges`.
/// Comparison is exact when every variable is integral, otherwise within a
/// relative tolerance of 1e-9. Evaluation failures count as disagreement.
pub fn equivalent_sampled<A, B, R>(a: &A, b: &B, ranges: &VarRanges, n: usize, rng: &mut R) -> bool
where
    A: Evaluate + ?Sized,
    B: Evaluate + ?Sized,
    R: Rng + ?Sized,
{
    let exact = ranges.vars.values().all(|r| r.integral);
    (0..n).all(|_| {
        let bindings = sample_bindings(ranges, rng);
        match (a.evaluate(&bindings), b.evaluate(&bindings)) {
            (Ok(x), Ok(y)) => agree(x, y, exact),
            _ => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, prune};
    use crate::seed;

    fn ranges() -> VarRanges {
        VarRanges::new().with_integral("x", -50.0, 50.0)
    }

    #[test]
    fn distinguishes_offsets() {
        let a = parse_expr("x + 1").unwrap();
        let b = parse_expr("x + 2").unwrap();
        assert!(!equivalent_sampled(&a, &b, &ranges(), 100, &mut seed::stream(0, &[])));
    }

    #[test]
    fn doubling_identity() {
        let a = parse_expr("x * 2").unwrap();
        let b = parse_expr("x + x").unwrap();
        assert!(equivalent_sampled(&a, &b, &ranges(), 100, &mut seed::stream(0, &[])));
    }

    #[test]
    fn pruned_matches_original() {
        let e = parse_expr("(x - x) * 3 + x / x + (x > x)").unwrap();
        assert!(equivalent_sampled(&e, &prune(&e), &ranges(), 100, &mut seed::stream(1, &[])));
    }

    #[test]
    fn orderings_are_respected() {
        let r = VarRanges::new()
            .with_integral("a", 0.0, 10.0)
            .with_integral("b", 0.0, 10.0)
            .with_ordering("a", "b");
        let mut rng = seed::stream(4, &[]);
        for _ in 0..500 {
            let s = sample_bindings(&r, &mut rng);
            assert!(s.get("a").unwrap() <= s.get("b").unwrap());
        }
    }

    #[test]
    fn unbound_variables_disagree() {
        let a = parse_expr("y").unwrap();
        assert!(!equivalent_sampled(&a, &a, &ranges(), 5, &mut seed::stream(0, &[])));
    }
}
