//! Semantics-preserving simplification of rules.
//!
//! Rewrites are applied bottom-up until nothing changes. Every rewrite
//! removes at least one node, so the output is never larger than the input
//! and a second pass is a no-op.

use super::{truthy, BinaryOp, Branches, Expr, Rule, UnaryOp};

pub fn prune(expr: &Expr) -> Expr {
    fixpoint(expr.clone(), |e| simplify(e, false))
}

/// Prunes every tree of a rule and resolves constant or redundant branches.
pub fn prune_rule(rule: &Rule) -> Rule {
    let mut current = rule.clone();
    loop {
        let next = prune_rule_once(&current);
        if next == current {
            return next;
        }
        current = next;
    }
}

fn prune_rule_once(rule: &Rule) -> Rule {
    let Some(branches) = &rule.branches else {
        return Rule::bare(prune(&rule.condition));
    };
    let condition = fixpoint(rule.condition.clone(), |e| simplify(e, true));
    let then_action = prune(&branches.then_action);
    let else_action = branches.else_action.as_ref().map(prune);
    resolve_branches(condition, then_action, else_action)
}

/// Collapses a conditional whose outcome no longer depends on the condition.
pub(super) fn resolve_branches(condition: Expr, then_action: Expr, else_action: Option<Expr>) -> Rule {
    let else_or_zero = || else_action.clone().unwrap_or(Expr::Const(0.0));
    if let Some(c) = condition.as_const() {
        return Rule::bare(if truthy(c) { then_action } else { else_or_zero() });
    }
    if then_action == else_or_zero() {
        return Rule::bare(then_action);
    }
    Rule {
        condition,
        branches: Some(Branches {
            then_action,
            else_action,
        }),
    }
}

pub(super) fn fixpoint(mut e: Expr, step: impl Fn(Expr) -> Expr) -> Expr {
    loop {
        let next = step(e.clone());
        if next == e {
            return next;
        }
        e = next;
    }
}

fn is_zero(e: &Expr) -> bool {
    e.as_const() == Some(0.0)
}

fn is_one(e: &Expr) -> bool {
    e.as_const() == Some(1.0)
}

fn is_true_const(e: &Expr) -> bool {
    e.as_const().is_some_and(truthy)
}

fn negate_comparison(op: BinaryOp) -> Option<BinaryOp> {
    Some(match op {
        BinaryOp::Gt => BinaryOp::Le,
        BinaryOp::Ge => BinaryOp::Lt,
        BinaryOp::Lt => BinaryOp::Ge,
        BinaryOp::Le => BinaryOp::Gt,
        BinaryOp::Eq => BinaryOp::Ne,
        BinaryOp::Ne => BinaryOp::Eq,
        _ => return None,
    })
}

/// One bottom-up pass. `in_bool` marks positions whose value is only ever
/// read through boolean coercion.
pub(super) fn simplify(e: Expr, in_bool: bool) -> Expr {
    let e = match e {
        Expr::Unary(op, a) => {
            let child_bool = op == UnaryOp::Not;
            Expr::Unary(op, Box::new(simplify(*a, child_bool)))
        }
        Expr::Binary(op, a, b) => {
            let child_bool = op.is_logical();
            Expr::Binary(
                op,
                Box::new(simplify(*a, child_bool)),
                Box::new(simplify(*b, child_bool)),
            )
        }
        leaf => leaf,
    };
    if let Some(v) = e.eval_const() {
        if v.is_finite() && !matches!(e, Expr::Const(_)) {
            return Expr::Const(v);
        }
    }
    let e = rewrite(e);
    if in_bool {
        rewrite_boolean_context(e)
    } else {
        e
    }
}

fn rewrite(e: Expr) -> Expr {
    match e {
        Expr::Unary(UnaryOp::Neg, a) => match *a {
            Expr::Unary(UnaryOp::Neg, inner) => *inner,
            other => Expr::unary(UnaryOp::Neg, other),
        },
        Expr::Unary(UnaryOp::Not, a) => match *a {
            Expr::Unary(UnaryOp::Not, inner) if inner.is_boolean() => *inner,
            Expr::Binary(op, x, y) if negate_comparison(op).is_some() => {
                Expr::Binary(negate_comparison(op).unwrap(), x, y)
            }
            other => Expr::unary(UnaryOp::Not, other),
        },
        Expr::Binary(op, a, b) => rewrite_binary(op, *a, *b),
        leaf => leaf,
    }
}

fn rewrite_binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
    use BinaryOp::*;
    let same = a == b;
    match op {
        Sub if same => Expr::Const(0.0),
        Div if same => Expr::Const(1.0),
        Eq | Ge | Le if same => Expr::Const(1.0),
        Ne | Gt | Lt if same => Expr::Const(0.0),
        Mul if is_zero(&a) || is_zero(&b) => Expr::Const(0.0),
        Mul if is_one(&a) => b,
        Mul | Div if is_one(&b) => a,
        Add if is_zero(&a) => b,
        Add | Sub if is_zero(&b) => a,
        And if is_zero(&a) || is_zero(&b) => Expr::Const(0.0),
        Or if is_true_const(&a) || is_true_const(&b) => Expr::Const(1.0),
        And if is_true_const(&a) && b.is_boolean() => b,
        And if is_true_const(&b) && a.is_boolean() => a,
        Or if is_zero(&a) && b.is_boolean() => b,
        Or if is_zero(&b) && a.is_boolean() => a,
        And | Or if same && a.is_boolean() => a,
        _ => Expr::binary(op, a, b),
    }
}

/// Rewrites valid only where the value is coerced to a boolean.
fn rewrite_boolean_context(e: Expr) -> Expr {
    use BinaryOp::*;
    match e {
        Expr::Binary(And, a, b) if is_true_const(&a) => *b,
        Expr::Binary(And, a, b) if is_true_const(&b) => *a,
        Expr::Binary(Or, a, b) if is_zero(&a) => *b,
        Expr::Binary(Or, a, b) if is_zero(&b) => *a,
        Expr::Binary(Ne, a, b) if is_zero(&b) => *a,
        Expr::Binary(Ne, a, b) if is_zero(&a) => *b,
        Expr::Unary(UnaryOp::Not, a) if matches!(*a, Expr::Unary(UnaryOp::Not, _)) => match *a {
            Expr::Unary(_, inner) => *inner,
            _ => unreachable!(),
        },
        Expr::Const(c) if truthy(c) && c != 1.0 => Expr::Const(1.0),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, parse_rule};

    fn p(s: &str) -> String {
        prune(&parse_expr(s).unwrap()).to_string()
    }

    #[test]
    fn algebraic_identities() {
        assert_eq!(p("(x - x) * (x - x)"), "0");
        assert_eq!(p("x / x"), "1");
        assert_eq!(p("x * 0 + y"), "y");
        assert_eq!(p("x AND 0"), "0");
        assert_eq!(p("x OR 3"), "1");
        assert_eq!(p("x >= x"), "1");
        assert_eq!(p("y + 1 != y + 1"), "0");
        assert_eq!(p("NOT (x > 2)"), "x <= 2");
        assert_eq!(p("--x"), "x");
        assert_eq!(p("2 * 3 + x"), "6 + x");
    }

    #[test]
    fn minimal_expression_is_fixed_point() {
        for s in ["x > 1", "x + y * 2", "NOT x", "x AND y"] {
            assert_eq!(p(s), s);
        }
    }

    #[test]
    fn numeric_and_is_not_dropped() {
        // `x AND 1` is 0/1-valued; `x` alone is not.
        assert_eq!(p("x AND 1"), "x AND 1");
        assert_eq!(p("(x > 0) AND 1"), "x > 0");
    }

    #[test]
    fn equality_rule_does_not_fold_without_ranges() {
        let rule = parse_rule(
            "IF (previousResource - previousResource) * (previousResource - previousResource) >= \
             (previousTook - resource) - (totalResource - agents) THEN 1",
        )
        .unwrap();
        let pruned = prune_rule(&rule);
        assert_eq!(
            pruned.to_string(),
            "IF 0 >= previousTook - resource - (totalResource - agents) THEN 1"
        );
    }

    #[test]
    fn constant_condition_selects_branch() {
        let r = prune_rule(&parse_rule("IF 2 > 1 THEN x ELSE y").unwrap());
        assert_eq!(r, Rule::bare(parse_expr("x").unwrap()));
        let r = prune_rule(&parse_rule("IF 0 THEN x").unwrap());
        assert_eq!(r.to_string(), "0");
        let r = prune_rule(&parse_rule("IF z THEN x + 0 ELSE x").unwrap());
        assert_eq!(r.to_string(), "x");
    }

    #[test]
    fn boolean_context_in_conditions() {
        let r = prune_rule(&parse_rule("IF (x != 0) AND 5 THEN 1 ELSE 9").unwrap());
        assert_eq!(r.to_string(), "IF x THEN 1 ELSE 9");
    }
}
