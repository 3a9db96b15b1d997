//! Exact partial differentiation.

use super::ast::{big, Expr, FuncNode, Var};
use super::simplify::{canon_func, canon_pow, canon_prod, canon_sum};

/// Partial derivative of a canonical expression with respect to a variable.
///
/// Arbitrary functions chain through their arguments; a function whose
/// dependency tuple does not involve `v` (directly or through its arguments)
/// differentiates to zero.
pub fn diff(e: &Expr, v: &Var) -> Expr {
    match e {
        Expr::Num(_) | Expr::Param(_) => Expr::zero(),
        Expr::Var(w) => {
            if w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Func(f) => {
            let mut terms = Vec::new();
            for (i, arg) in f.args.iter().enumerate() {
                let darg = diff(arg, v);
                if darg.is_zero() {
                    continue;
                }
                let mut deriv = f.deriv.clone();
                deriv[i] += 1;
                let node = canon_func(FuncNode {
                    decl: f.decl.clone(),
                    deriv,
                    args: f.args.clone(),
                });
                terms.push(canon_prod(vec![node, darg]));
            }
            canon_sum(terms)
        }
        Expr::Pow(b, ex) => {
            let db = diff(b, v);
            if db.is_zero() {
                return Expr::zero();
            }
            let lower = canon_pow((**b).clone(), ex - big(1));
            canon_prod(vec![Expr::Num(ex.clone()), lower, db])
        }
        Expr::Exp(a) => {
            let da = diff(a, v);
            if da.is_zero() {
                return Expr::zero();
            }
            canon_prod(vec![e.clone(), da])
        }
        Expr::Log(a) => {
            let da = diff(a, v);
            if da.is_zero() {
                return Expr::zero();
            }
            canon_prod(vec![canon_pow((**a).clone(), -big(1)), da])
        }
        Expr::Prod(fs) => {
            let mut terms = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let df = diff(f, v);
                if df.is_zero() {
                    continue;
                }
                let mut factors: Vec<Expr> = Vec::with_capacity(fs.len());
                factors.push(df);
                for (j, g) in fs.iter().enumerate() {
                    if i != j {
                        factors.push(g.clone());
                    }
                }
                terms.push(canon_prod(factors));
            }
            canon_sum(terms)
        }
        Expr::Sum(ts) => canon_sum(ts.iter().map(|t| diff(t, v)).collect()),
    }
}

/// Iterated derivative: `diff_n(e, v, 2)` is the second partial w.r.t. `v`.
pub fn diff_n(e: &Expr, v: &Var, n: u32) -> Expr {
    let mut out = e.clone();
    for _ in 0..n {
        out = diff(&out, v);
    }
    out
}

/// Multi-index derivative over a list of (variable, order) pairs.
pub fn diff_multi(e: &Expr, orders: &[(Var, u32)]) -> Expr {
    let mut out = e.clone();
    for (v, n) in orders {
        out = diff_n(&out, v, *n);
    }
    out
}
