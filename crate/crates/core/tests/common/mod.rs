//! Shared helpers for the integration tests.
#![allow(dead_code)]

use opmono::scalarfn::Expr;
use opmono::ScalarFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

/// Random expression that is finite, positive and smooth for `t` in `[0.1, 10]`.
pub fn positive_expr<R: Rng>(depth: u32, rng: &mut R) -> Expr {
    let leaf = depth == 0 || rng.random_bool(0.25);
    if leaf {
        return if rng.random_bool(0.6) {
            Expr::Var
        } else {
            Expr::Const((rng.random_range(0.5..3.0f64) * 8.0).round() / 8.0)
        };
    }
    let d = depth - 1;
    match rng.random_range(0..8) {
        0 => Expr::Add(b(positive_expr(d, rng)), b(positive_expr(d, rng))),
        1 => Expr::Mul(b(positive_expr(d, rng)), b(positive_expr(d, rng))),
        2 => Expr::Div(b(positive_expr(d, rng)), b(positive_expr(d, rng))),
        3 => Expr::Sqrt(b(positive_expr(d, rng))),
        4 => {
            let p = [0.5, 1.5, 2.0, -1.0, 0.3, 3.0][rng.random_range(0..6)];
            Expr::Pow(b(positive_expr(d, rng)), p)
        }
        5 => Expr::Exp(b(Expr::Neg(b(Expr::Log(b(Expr::Add(b(Expr::Const(1.0)), b(positive_expr(d, rng))))))))),
        6 => Expr::Log(b(Expr::Add(b(Expr::Const(1.0)), b(positive_expr(d, rng))))),
        _ => Expr::Add(b(Expr::Var), b(positive_expr(d, rng))),
    }
}

/// Random expression over the full grammar; may leave the domain anywhere.
pub fn any_expr<R: Rng>(depth: u32, rng: &mut R) -> Expr {
    if depth == 0 || rng.random_bool(0.2) {
        return match rng.random_range(0..3) {
            0 => Expr::Var,
            1 => Expr::Const(rng.random_range(-5.0..5.0)),
            _ => Expr::Const(rng.random_range(0..10) as f64),
        };
    }
    let d = depth - 1;
    match rng.random_range(0..10) {
        0 => Expr::Add(b(any_expr(d, rng)), b(any_expr(d, rng))),
        1 => Expr::Sub(b(any_expr(d, rng)), b(any_expr(d, rng))),
        2 => Expr::Mul(b(any_expr(d, rng)), b(any_expr(d, rng))),
        3 => Expr::Div(b(any_expr(d, rng)), b(any_expr(d, rng))),
        4 => Expr::Neg(b(any_expr(d, rng))),
        5 => Expr::Pow(b(any_expr(d, rng)), rng.random_range(-3.0..3.0)),
        6 => Expr::Pow(b(any_expr(d, rng)), rng.random_range(-3..=3) as f64),
        7 => Expr::Exp(b(any_expr(d, rng))),
        8 => Expr::Log(b(any_expr(d, rng))),
        _ => Expr::Sqrt(b(any_expr(d, rng))),
    }
}

/// Fixed corpus of positive expressions.
pub fn fuzz_corpus(count: usize, seed: u64) -> Vec<ScalarFunction> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| ScalarFunction::from_expr(positive_expr(3, &mut r)))
        .collect()
}

/// Five-point central difference.
pub fn central_difference(f: &ScalarFunction, t: f64) -> f64 {
    let h = 1e-3 * t.abs().max(1e-3);
    let e = |x: f64| f.eval(x).unwrap();
    (8.0 * (e(t + h) - e(t - h)) - (e(t + 2.0 * h) - e(t - 2.0 * h))) / (12.0 * h)
}

/// Relative disagreement of the dual derivative with [`central_difference`].
pub fn dual_error(f: &ScalarFunction, t: f64) -> f64 {
    let (v, d) = f.eval_dual(t).unwrap();
    let fd = central_difference(f, t);
    (d - fd).abs() / d.abs().max(v.abs()).max(1.0)
}
