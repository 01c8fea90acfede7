use rand::seq::SliceRandom;
use rand::Rng;

use super::{ConstantPool, Expr, Grammar, Operator};

pub fn random_terminal<R: Rng + ?Sized>(grammar: &Grammar, rng: &mut R) -> Expr {
    let use_const = grammar.has_constants()
        && (grammar.variables.is_empty() || rng.gen_bool(grammar.constant_probability));
    if use_const {
        return Expr::Const(match grammar.constants {
            ConstantPool::Integers { min, max } => rng.gen_range(min..=max) as f64,
            ConstantPool::Reals { min, max, decimals } => {
                let scale = 10f64.powi(decimals as i32);
                let v = if min == max { min } else { rng.gen_range(min..=max) };
                (v * scale).round() / scale
            }
            ConstantPool::None => unreachable!(),
        });
    }
    Expr::var(grammar.variables.choose(rng).expect("terminal set is non-empty"))
}

fn with_operator<R: Rng + ?Sized>(op: Operator, mut child: impl FnMut(&mut R) -> Expr, rng: &mut R) -> Expr {
    match op {
        Operator::Unary(u) => Expr::unary(u, child(rng)),
        Operator::Binary(b) => {
            let a = child(rng);
            Expr::binary(b, a, child(rng))
        }
    }
}

/// Every branch reaches exactly `depth`.
pub fn full<R: Rng + ?Sized>(grammar: &Grammar, depth: usize, rng: &mut R) -> Expr {
    if depth <= 1 {
        return random_terminal(grammar, rng);
    }
    let op = *grammar.operators.choose(rng).expect("operator set is non-empty");
    with_operator(op, |r| full(grammar, depth - 1, r), rng)
}

/// Branches stop early at random; terminals and operators are drawn from the
/// combined primitive set.
pub fn grow<R: Rng + ?Sized>(grammar: &Grammar, max_depth: usize, rng: &mut R) -> Expr {
    if max_depth <= 1 {
        return random_terminal(grammar, rng);
    }
    let terminals = grammar.variables.len() + usize::from(grammar.has_constants());
    let pick = rng.gen_range(0..terminals + grammar.operators.len());
    if pick < terminals {
        random_terminal(grammar, rng)
    } else {
        let op = grammar.operators[pick - terminals];
        with_operator(op, |r| grow(grammar, max_depth - 1, r), rng)
    }
}

/// Ramped half-and-half over depths `2..=max_depth`.
pub fn random_expr<R: Rng + ?Sized>(grammar: &Grammar, rng: &mut R) -> Expr {
    let max = grammar.max_depth.max(1);
    let depth = rng.gen_range(2.min(max)..=max);
    if rng.gen_bool(0.5) {
        full(grammar, depth, rng)
    } else {
        grow(grammar, depth, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn grammar(depth: usize) -> Grammar {
        Grammar::new(["x"], ConstantPool::Integers { min: 0, max: 9 }).with_max_depth(depth)
    }

    #[test]
    fn depth_two_bound() {
        let g = grammar(2);
        let mut rng = seed::stream(1, &[]);
        for _ in 0..2000 {
            assert!(random_expr(&g, &mut rng).depth() <= 2);
        }
    }

    #[test]
    fn ramped_draws_cover_leaf_and_max_depth() {
        let g = grammar(8);
        let mut rng = seed::stream(2, &[]);
        let depths: Vec<usize> = (0..10_000).map(|_| random_expr(&g, &mut rng).depth()).collect();
        let leaves = depths.iter().filter(|&&d| d == 1).count();
        let deepest = depths.iter().filter(|&&d| d == 8).count();
        assert!(leaves > 0 && deepest > 0, "leaves={leaves} deepest={deepest}");
        assert!(depths.iter().all(|&d| d <= 8));
    }

    #[test]
    fn same_seed_same_tree() {
        let g = grammar(6);
        let a = random_expr(&g, &mut seed::stream(9, &[1]));
        let b = random_expr(&g, &mut seed::stream(9, &[1]));
        assert_eq!(a, b);
    }

    #[test]
    fn real_constants_are_rounded() {
        let g = Grammar::new(["x"], ConstantPool::Reals { min: 0.0, max: 1.0, decimals: 2 })
            .with_constant_probability(1.0);
        let mut rng = seed::stream(3, &[]);
        for _ in 0..100 {
            let c = random_terminal(&g, &mut rng).as_const().unwrap();
            assert!((0.0..=1.0).contains(&c));
            assert_eq!((c * 100.0).round() / 100.0, c);
        }
    }
}
