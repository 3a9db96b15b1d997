//! IEEE double evaluation of expressions, numeric function implementations
//! and the quadrature machinery backing declared antiderivatives.

use super::ast::{Expr, Name, Var};
use super::diff::diff_n;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone)]
pub enum EvalError {
    #[error("unbound symbol '{0}'")]
    UnboundSymbol(String),
    #[error("unbound function '{0}'")]
    UnboundFunction(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite value in evaluation")]
    NonFinite,
    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

/// Callable backing a function symbol: arguments and per-dependency
/// derivative orders.
pub type DerivCallable = Arc<dyn Fn(&[f64], &[u32]) -> Option<f64> + Send + Sync>;

/// Numeric backing for an arbitrary-function symbol.
#[derive(Clone)]
pub enum FuncImpl {
    /// A concrete expression in the declared dependency variables;
    /// derivative nodes evaluate as derivatives of this expression.
    ExprImpl(Expr),
    /// A raw callable: arguments and per-dependency derivative orders.
    Closure(DerivCallable),
    /// Sampled cumulative table (univariate), built by quadrature of a
    /// declared derivative; evaluated by cubic Hermite interpolation.
    Table(Arc<Table>),
}

impl std::fmt::Debug for FuncImpl {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FuncImpl::ExprImpl(e) => write!(f, "ExprImpl({})", e),
            FuncImpl::Closure(_) => write!(f, "Closure(..)"),
            FuncImpl::Table(t) => write!(f, "Table[{} nodes]", t.values.len()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub lo: f64,
    pub step: f64,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl Table {
    pub fn eval(&self, t: f64, order: u32) -> Result<f64, EvalError> {
        let n = self.values.len();
        let hi = self.lo + self.step * (n as f64 - 1.0);
        if !(self.lo..=hi).contains(&t) {
            return Err(EvalError::Domain(format!(
                "table argument {} outside [{}, {}]",
                t, self.lo, hi
            )));
        }
        let mut i = ((t - self.lo) / self.step).floor() as usize;
        if i >= n - 1 {
            i = n - 2;
        }
        let s = (t - (self.lo + self.step * i as f64)) / self.step;
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let (s2, s3) = (s * s, s * s * s);
        match order {
            0 => Ok((2.0 * s3 - 3.0 * s2 + 1.0) * v0
                + (s3 - 2.0 * s2 + s) * m0
                + (-2.0 * s3 + 3.0 * s2) * v1
                + (s3 - s2) * m1),
            1 => Ok(((6.0 * s2 - 6.0 * s) * v0
                + (3.0 * s2 - 4.0 * s + 1.0) * m0
                + (-6.0 * s2 + 6.0 * s) * v1
                + (3.0 * s2 - 2.0 * s) * m1)
                / self.step),
            _ => Err(EvalError::Domain(
                "table-backed function queried at derivative order > 1".into(),
            )),
        }
    }
}

/// Map from function name to its numeric implementation.
#[derive(Clone, Default, Debug)]
pub struct FuncTable {
    pub map: BTreeMap<Name, FuncImpl>,
}

impl FuncTable {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn insert(&mut self, name: &str, imp: FuncImpl) {
        self.map.insert(Name::new(name), imp);
    }
    pub fn with(mut self, name: &str, imp: FuncImpl) -> Self {
        self.insert(name, imp);
        self
    }
    pub fn get(&self, name: &Name) -> Option<&FuncImpl> {
        self.map.get(name)
    }
    pub fn contains(&self, name: &Name) -> bool {
        self.map.contains_key(name)
    }
}

/// A point assignment for variables and parameters.
pub type Point = BTreeMap<Name, f64>;

/// Evaluate at a point. Every free symbol must be bound and all intermediate
/// values must stay finite and inside function domains.
pub fn eval(e: &Expr, point: &Point, funcs: &FuncTable) -> Result<f64, EvalError> {
    let v = eval_inner(e, point, funcs)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

/// Evaluate, also returning the top-level cancellation scale: for a sum this
/// is the largest |term|, otherwise |value|. Used for relative tolerances.
pub fn eval_with_scale(
    e: &Expr,
    point: &Point,
    funcs: &FuncTable,
) -> Result<(f64, f64), EvalError> {
    match e {
        Expr::Sum(ts) => {
            let mut total = 0.0;
            let mut scale: f64 = 0.0;
            for t in ts {
                let v = eval(t, point, funcs)?;
                total += v;
                scale = scale.max(v.abs());
            }
            if total.is_finite() {
                Ok((total, scale))
            } else {
                Err(EvalError::NonFinite)
            }
        }
        _ => {
            let v = eval(e, point, funcs)?;
            Ok((v, v.abs()))
        }
    }
}

fn eval_inner(e: &Expr, point: &Point, funcs: &FuncTable) -> Result<f64, EvalError> {
    match e {
        Expr::Num(r) => r
            .to_f64()
            .ok_or_else(|| EvalError::Domain("rational outside f64 range".into())),
        Expr::Var(v) => point
            .get(&v.0)
            .copied()
            .ok_or_else(|| EvalError::UnboundSymbol(v.name().to_string())),
        Expr::Param(p) => point
            .get(&p.0)
            .copied()
            .ok_or_else(|| EvalError::UnboundSymbol(p.name().to_string())),
        Expr::Func(fx) => {
            let imp = funcs
                .get(&fx.decl.name)
                .ok_or_else(|| EvalError::UnboundFunction(fx.decl.name.as_str().to_string()))?
                .clone();
            let mut argv = Vec::with_capacity(fx.args.len());
            for a in &fx.args {
                argv.push(eval_inner(a, point, funcs)?);
            }
            match imp {
                FuncImpl::Closure(f) => f(&argv, &fx.deriv)
                    .ok_or_else(|| EvalError::Domain(format!("callable {}", fx.decl.name))),
                FuncImpl::Table(tb) => {
                    let order: u32 = fx.deriv.iter().sum();
                    tb.eval(argv[0], order)
                }
                FuncImpl::ExprImpl(body) => {
                    let mut d = body;
                    for (i, &k) in fx.deriv.iter().enumerate() {
                        d = diff_n(&d, &fx.decl.deps[i], k);
                    }
                    let mut sub: Point = point.clone();
                    for (dep, val) in fx.decl.deps.iter().zip(argv) {
                        sub.insert(dep.0.clone(), val);
                    }
                    eval_inner(&d, &sub, funcs)
                }
            }
        }
        Expr::Pow(b, ex) => {
            let vb = eval_inner(b, point, funcs)?;
            if ex.is_integer() {
                let n = ex
                    .to_integer()
                    .to_i32()
                    .ok_or_else(|| EvalError::Domain("exponent overflow".into()))?;
                if vb == 0.0 && n < 0 {
                    return Err(EvalError::Domain("division by zero".into()));
                }
                Ok(vb.powi(n))
            } else {
                let xe = ex
                    .to_f64()
                    .ok_or_else(|| EvalError::Domain("exponent outside f64 range".into()))?;
                if vb < 0.0 {
                    return Err(EvalError::Domain(
                        "fractional power of negative base".into(),
                    ));
                }
                if vb == 0.0 && xe < 0.0 {
                    return Err(EvalError::Domain("division by zero".into()));
                }
                Ok(vb.powf(xe))
            }
        }
        Expr::Exp(a) => Ok(eval_inner(a, point, funcs)?.exp()),
        Expr::Log(a) => {
            let va = eval_inner(a, point, funcs)?;
            if va <= 0.0 {
                return Err(EvalError::Domain("log of non-positive value".into()));
            }
            Ok(va.ln())
        }
        Expr::Prod(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval_inner(f, point, funcs)?;
            }
            Ok(acc)
        }
        Expr::Sum(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval_inner(t, point, funcs)?;
            }
            Ok(acc)
        }
    }
}

/// Adaptive Simpson quadrature.
pub fn adaptive_simpson(
    f: &dyn Fn(f64) -> Result<f64, EvalError>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, EvalError> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb) = (f(a)?, f(b)?);
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 24)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> Result<f64, EvalError>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, EvalError> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        Ok(left + right + delta / 15.0)
    } else {
        let lv = simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?;
        let rv = simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?;
        Ok(lv + rv)
    }
}

/// Build a cumulative table for a univariate function with a known derivative
/// expression: `f(t) = base_value + integral of deriv from lo`.
///
/// The derivative expression is evaluated against `funcs` (so chained
/// quadratures resolve recursively through previously built tables) with the
/// integration variable bound to `var`.
#[allow(clippy::too_many_arguments)]
pub fn build_quadrature_table(
    var: &Var,
    deriv: &Expr,
    lo: f64,
    hi: f64,
    nodes: usize,
    base_value: f64,
    point: &Point,
    funcs: &FuncTable,
) -> Result<Table, EvalError> {
    assert!(nodes >= 2 && hi > lo);
    let g = |t: f64| -> Result<f64, EvalError> {
        let mut p = point.clone();
        p.insert(var.0.clone(), t);
        eval(deriv, &p, funcs)
    };
    let step = (hi - lo) / (nodes as f64 - 1.0);
    let mut values = Vec::with_capacity(nodes);
    let mut slopes = Vec::with_capacity(nodes);
    let mut acc = base_value;
    values.push(acc);
    slopes.push(g(lo)?);
    for i in 1..nodes {
        let a = lo + step * (i as f64 - 1.0);
        let b = lo + step * i as f64;
        // composite Simpson on the subinterval
        let (fa, fb) = (g(a)?, g(b)?);
        let fm = g(0.5 * (a + b))?;
        acc += (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        if !acc.is_finite() {
            return Err(EvalError::Quadrature(format!(
                "non-finite cumulative integral near {}",
                b
            )));
        }
        values.push(acc);
        slopes.push(fb);
    }
    Ok(Table {
        lo,
        step,
        values,
        slopes,
    })
}
