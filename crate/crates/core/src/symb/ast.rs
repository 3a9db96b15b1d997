//! Expression tree for the symbolic kernel.
//!
//! Expressions are immutable and kept in a canonical form by the smart
//! constructors in [`crate::symb::simplify`]: sums and products are flattened
//! and sorted, numeric factors are collected exactly (arbitrary-precision
//! rationals), powers of equal bases are merged and exponential factors are
//! combined. Arbitrary functions carry their dependency signature and a
//! sorted derivative multi-index, so mixed partials are order-independent by
//! construction.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// Interned-ish symbol name. Cheap to clone, ordered by the string.
#[derive(Clone)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        self.0.as_ref() == other.0.as_ref()
    }
}
impl Eq for Name {}
impl PartialOrd for Name {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Name {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.as_ref().cmp(other.0.as_ref())
    }
}
impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An independent variable (t, x, u, jet symbols, ...).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Var(pub Name);

impl Var {
    pub fn new(s: &str) -> Self {
        Var(Name::new(s))
    }
    pub fn t() -> Self {
        Var::new("t")
    }
    pub fn x() -> Self {
        Var::new("x")
    }
    pub fn u() -> Self {
        Var::new("u")
    }
    pub fn name(&self) -> &str {
        self.0.as_str()
    }
}

/// A named constant parameter (mu, kappa, c1, ...).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Param(pub Name);

impl Param {
    pub fn new(s: &str) -> Self {
        Param(Name::new(s))
    }
    pub fn name(&self) -> &str {
        self.0.as_str()
    }
}

/// Declaration of an arbitrary function: a name, the tuple of variables it
/// depends on, and optionally known first-order derivatives (e.g. a declared
/// quadrature H with H_t = h(t)+1).
///
/// Identity (equality, ordering) is by name and dependency tuple only; the
/// known derivatives are treated as attached rewrite rules.
#[derive(Clone, Debug)]
pub struct FuncDecl {
    pub name: Name,
    pub deps: Vec<Var>,
    pub known: Vec<(usize, Expr)>,
}

impl FuncDecl {
    pub fn new(name: &str, deps: &[Var]) -> Arc<Self> {
        Arc::new(FuncDecl {
            name: Name::new(name),
            deps: deps.to_vec(),
            known: Vec::new(),
        })
    }

    /// Declare a function together with known first-order derivatives,
    /// given as `(dependency variable, expression)` pairs.
    pub fn with_derivs(name: &str, deps: &[Var], derivs: &[(Var, Expr)]) -> Arc<Self> {
        let mut known = Vec::new();
        for (v, e) in derivs {
            let idx = deps
                .iter()
                .position(|d| d == v)
                .expect("declared derivative must be w.r.t. a dependency");
            known.push((idx, e.clone()));
        }
        known.sort_by_key(|(i, _)| *i);
        Arc::new(FuncDecl {
            name: Name::new(name),
            deps: deps.to_vec(),
            known,
        })
    }

    pub fn arity(&self) -> usize {
        self.deps.len()
    }

    pub fn known_deriv(&self, dep_idx: usize) -> Option<&Expr> {
        self.known
            .iter()
            .find(|(i, _)| *i == dep_idx)
            .map(|(_, e)| e)
    }
}

impl PartialEq for FuncDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.deps == other.deps
    }
}
impl Eq for FuncDecl {}
impl PartialOrd for FuncDecl {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FuncDecl {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.name, &self.deps).cmp(&(&other.name, &other.deps))
    }
}

/// Application of a (derivative of an) arbitrary function to arguments.
///
/// `deriv[i]` counts differentiations with respect to `decl.deps[i]`; the
/// multi-index representation makes mixed partials commute structurally.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FuncNode {
    pub decl: Arc<FuncDecl>,
    pub deriv: Vec<u32>,
    pub args: Vec<Expr>,
}

impl FuncNode {
    pub fn order(&self) -> u32 {
        self.deriv.iter().sum()
    }
    pub fn has_default_args(&self) -> bool {
        self.args.len() == self.decl.deps.len()
            && self
                .args
                .iter()
                .zip(&self.decl.deps)
                .all(|(a, d)| matches!(a, Expr::Var(v) if v == d))
    }
}

impl PartialOrd for FuncNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FuncNode {
    fn cmp(&self, other: &Self) -> Ordering {
        (&*self.decl, &self.deriv, &self.args).cmp(&(&*other.decl, &other.deriv, &other.args))
    }
}

/// Immutable symbolic expression over variables, named parameters and
/// arbitrary functions. Construct through the associated functions, which
/// maintain canonical form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Expr {
    /// Exact rational constant.
    Num(BigRational),
    Var(Var),
    Param(Param),
    Func(FuncNode),
    /// Base raised to a rational exponent (never 0 or 1).
    Pow(Box<Expr>, BigRational),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    /// Canonical product: flattened, sorted, at most one leading numeric factor.
    Prod(Vec<Expr>),
    /// Canonical sum: flattened, sorted, like terms collected.
    Sum(Vec<Expr>),
}

#[allow(clippy::should_implement_trait)] // constructor-style arithmetic API
impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(BigRational::zero())
    }
    pub fn one() -> Expr {
        Expr::Num(BigRational::one())
    }
    pub fn int(i: i64) -> Expr {
        Expr::Num(BigRational::from_integer(BigInt::from(i)))
    }
    pub fn rational(num: i64, den: i64) -> Expr {
        assert!(den != 0, "zero denominator");
        Expr::Num(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
    pub fn num(r: BigRational) -> Expr {
        Expr::Num(r)
    }
    pub fn var(v: &Var) -> Expr {
        Expr::Var(v.clone())
    }
    pub fn t() -> Expr {
        Expr::Var(Var::t())
    }
    pub fn x() -> Expr {
        Expr::Var(Var::x())
    }
    pub fn u() -> Expr {
        Expr::Var(Var::u())
    }
    pub fn param(name: &str) -> Expr {
        Expr::Param(Param::new(name))
    }

    /// Function application with the default arguments (the declared deps).
    pub fn func(decl: &Arc<FuncDecl>) -> Expr {
        let args = decl.deps.iter().map(Expr::var).collect();
        crate::symb::simplify::canon_func(FuncNode {
            decl: decl.clone(),
            deriv: vec![0; decl.arity()],
            args,
        })
    }

    /// Function application with explicit arguments.
    pub fn func_at(decl: &Arc<FuncDecl>, args: Vec<Expr>) -> Expr {
        assert_eq!(args.len(), decl.arity(), "arity mismatch for {}", decl.name);
        crate::symb::simplify::canon_func(FuncNode {
            decl: decl.clone(),
            deriv: vec![0; decl.arity()],
            args,
        })
    }

    /// Derivative node of a function with the default arguments.
    pub fn func_deriv(decl: &Arc<FuncDecl>, deriv: &[u32]) -> Expr {
        assert_eq!(deriv.len(), decl.arity());
        let args = decl.deps.iter().map(Expr::var).collect();
        crate::symb::simplify::canon_func(FuncNode {
            decl: decl.clone(),
            deriv: deriv.to_vec(),
            args,
        })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_zero())
    }
    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_one())
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self {
            Expr::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        crate::symb::simplify::canon_sum(vec![a, b])
    }
    pub fn sum(terms: Vec<Expr>) -> Expr {
        crate::symb::simplify::canon_sum(terms)
    }
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(a, Expr::neg(b))
    }
    pub fn neg(a: Expr) -> Expr {
        Expr::mul(Expr::int(-1), a)
    }
    pub fn mul(a: Expr, b: Expr) -> Expr {
        crate::symb::simplify::canon_prod(vec![a, b])
    }
    pub fn prod(factors: Vec<Expr>) -> Expr {
        crate::symb::simplify::canon_prod(factors)
    }
    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::mul(a, Expr::powr(b, -BigRational::one()))
    }
    pub fn powi(base: Expr, e: i64) -> Expr {
        Expr::powr(base, BigRational::from_integer(BigInt::from(e)))
    }
    pub fn powr(base: Expr, e: BigRational) -> Expr {
        crate::symb::simplify::canon_pow(base, e)
    }
    pub fn exp_of(a: Expr) -> Expr {
        crate::symb::simplify::canon_exp(a)
    }
    pub fn log_of(a: Expr) -> Expr {
        crate::symb::simplify::canon_log(a)
    }

    /// Immediate children, for generic tree walks.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => Vec::new(),
            Expr::Func(f) => f.args.iter().collect(),
            Expr::Pow(b, _) => vec![b],
            Expr::Exp(a) | Expr::Log(a) => vec![a],
            Expr::Prod(fs) | Expr::Sum(fs) => fs.iter().collect(),
        }
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        match self {
            Expr::Var(w) => w == v,
            _ => self.children().into_iter().any(|c| c.contains_var(v)),
        }
    }

    /// All free variables, in sorted order.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Var(v) = e {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        });
        out.sort();
        out
    }

    pub fn free_params(&self) -> Vec<Param> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Param(p) = e {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        });
        out.sort();
        out
    }

    /// All distinct function declarations referenced by this expression.
    pub fn free_funcs(&self) -> Vec<Arc<FuncDecl>> {
        let mut out: Vec<Arc<FuncDecl>> = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Func(f) = e {
                if !out.iter().any(|d| **d == *f.decl) {
                    out.push(f.decl.clone());
                }
            }
        });
        out.sort();
        out
    }

    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => {}
            Expr::Func(fx) => fx.args.iter().for_each(|a| a.walk(f)),
            Expr::Pow(b, _) => b.walk(f),
            Expr::Exp(a) | Expr::Log(a) => a.walk(f),
            Expr::Prod(fs) | Expr::Sum(fs) => fs.iter().for_each(|a| a.walk(f)),
        }
    }

    /// Structural replacement of every occurrence of `from` by `to`.
    pub fn replace(&self, from: &Expr, to: &Expr) -> Expr {
        if self == from {
            return to.clone();
        }
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => self.clone(),
            Expr::Func(fx) => {
                let args = fx.args.iter().map(|a| a.replace(from, to)).collect();
                crate::symb::simplify::canon_func(FuncNode {
                    decl: fx.decl.clone(),
                    deriv: fx.deriv.clone(),
                    args,
                })
            }
            Expr::Pow(b, e) => Expr::powr(b.replace(from, to), e.clone()),
            Expr::Exp(a) => Expr::exp_of(a.replace(from, to)),
            Expr::Log(a) => Expr::log_of(a.replace(from, to)),
            Expr::Prod(fs) => Expr::prod(fs.iter().map(|a| a.replace(from, to)).collect()),
            Expr::Sum(fs) => Expr::sum(fs.iter().map(|a| a.replace(from, to)).collect()),
        }
    }

    /// Number of nodes, used as a crude size measure in tests.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

pub(crate) fn big(i: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(i))
}
