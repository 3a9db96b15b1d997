//! Canonical simplification.
//!
//! The rewrite system implements polynomial/rational normalization plus
//! exponential merging: sums and products are flattened and sorted, like
//! terms are collected with exact rational arithmetic, products of sums and
//! positive integer powers of sums are expanded, powers of equal bases are
//! merged, `exp(a)*exp(b)` becomes `exp(a+b)` and `exp(a)^k` becomes
//! `exp(k*a)`. `log(exp(a))` rewrites to `a`; the converse `exp(log(a))`
//! is not applied since it needs a positivity assumption. No radical or
//! trigonometric rules. Simplification is idempotent.

use super::ast::{Expr, FuncNode};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Full recursive canonicalization of an arbitrarily built expression.
pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => e.clone(),
        Expr::Func(f) => canon_func(FuncNode {
            decl: f.decl.clone(),
            deriv: f.deriv.clone(),
            args: f.args.iter().map(simplify).collect(),
        }),
        Expr::Pow(b, ex) => canon_pow(simplify(b), ex.clone()),
        Expr::Exp(a) => canon_exp(simplify(a)),
        Expr::Log(a) => canon_log(simplify(a)),
        Expr::Prod(fs) => canon_prod(fs.iter().map(simplify).collect()),
        Expr::Sum(ts) => canon_sum(ts.iter().map(simplify).collect()),
    }
}

/// Split a canonical non-sum term into (numeric coefficient, monomial).
pub fn split_term(e: &Expr) -> (BigRational, Expr) {
    match e {
        Expr::Num(r) => (r.clone(), Expr::one()),
        Expr::Prod(fs) => match fs.first() {
            Some(Expr::Num(r)) => {
                let rest: Vec<Expr> = fs[1..].to_vec();
                let mono = if rest.len() == 1 {
                    rest.into_iter().next().unwrap()
                } else {
                    Expr::Prod(rest)
                };
                (r.clone(), mono)
            }
            _ => (BigRational::one(), e.clone()),
        },
        _ => (BigRational::one(), e.clone()),
    }
}

fn term_from(coeff: BigRational, mono: Expr) -> Expr {
    if coeff.is_zero() {
        return Expr::zero();
    }
    if mono.is_one() {
        return Expr::Num(coeff);
    }
    if coeff.is_one() {
        return mono;
    }
    match mono {
        Expr::Prod(fs) => {
            let mut v = Vec::with_capacity(fs.len() + 1);
            v.push(Expr::Num(coeff));
            v.extend(fs);
            v.sort();
            Expr::Prod(v)
        }
        other => {
            let mut v = vec![Expr::Num(coeff), other];
            v.sort();
            Expr::Prod(v)
        }
    }
}

/// Canonical sum of already-canonical inputs.
pub fn canon_sum(terms: Vec<Expr>) -> Expr {
    let mut acc: BTreeMap<Expr, BigRational> = BTreeMap::new();
    let mut stack = terms;
    stack.reverse();
    while let Some(t) = stack.pop() {
        match t {
            Expr::Sum(inner) => stack.extend(inner.into_iter().rev()),
            other => {
                let (c, m) = split_term(&other);
                if !c.is_zero() {
                    let entry = acc.entry(m).or_insert_with(BigRational::zero);
                    *entry += c;
                }
            }
        }
    }
    let mut out: Vec<Expr> = acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(m, c)| term_from(c, m))
        .collect();
    out.sort();
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::Sum(out),
    }
}

/// Canonical product of already-canonical inputs.
pub fn canon_prod(factors: Vec<Expr>) -> Expr {
    let mut coeff = BigRational::one();
    let mut bases: BTreeMap<Expr, BigRational> = BTreeMap::new();
    let mut exp_args: Vec<Expr> = Vec::new();
    let mut sums: Vec<Vec<Expr>> = Vec::new();

    let mut stack = factors;
    stack.reverse();
    while let Some(f) = stack.pop() {
        match f {
            Expr::Num(r) => {
                if r.is_zero() {
                    return Expr::zero();
                }
                coeff *= r;
            }
            Expr::Prod(inner) => stack.extend(inner.into_iter().rev()),
            Expr::Exp(a) => exp_args.push(*a),
            Expr::Pow(b, e) => {
                *bases.entry(*b).or_insert_with(BigRational::zero) += e;
            }
            // sums join the base map so reciprocal pairs cancel before any
            // distribution happens
            atom => {
                *bases.entry(atom).or_insert_with(BigRational::zero) += BigRational::one();
            }
        }
    }

    let mut out: Vec<Expr> = Vec::new();
    for (b, e) in bases {
        if e.is_zero() {
            continue;
        }
        let p = canon_pow(b, e);
        match p {
            Expr::Num(r) => {
                if r.is_zero() {
                    return Expr::zero();
                }
                coeff *= r;
            }
            Expr::Prod(fs) => {
                // a merged power re-expanded into a product (e.g. content split)
                for g in fs {
                    match g {
                        Expr::Num(r) => coeff *= r,
                        Expr::Exp(a) => exp_args.push(*a),
                        other => out.push(other),
                    }
                }
            }
            Expr::Exp(a) => exp_args.push(*a),
            Expr::Sum(ts) => sums.push(ts),
            other => out.push(other),
        }
    }
    if !exp_args.is_empty() {
        let arg = canon_sum(exp_args);
        let ex = canon_exp(arg);
        match ex {
            Expr::Num(r) => coeff *= r,
            other => out.push(other),
        }
    }

    if !sums.is_empty() {
        // distribute over sums, collecting like terms after every step so
        // intermediate width stays bounded; pathologically wide products are
        // kept undistributed as opaque factors (probing still covers them)
        let mut widths: usize = 1;
        for s in &sums {
            widths = widths.saturating_mul(s.len());
        }
        if widths > DISTRIBUTION_CAP {
            for s in sums {
                out.push(Expr::Sum(s));
            }
            return assemble_prod(coeff, out);
        }
        let base = assemble_prod(coeff, out);
        let mut terms = vec![base];
        for s in sums {
            let mut next = Vec::with_capacity(terms.len() * s.len());
            for t in &terms {
                for st in &s {
                    next.push(canon_prod(vec![t.clone(), st.clone()]));
                }
            }
            terms = match canon_sum(next) {
                Expr::Sum(ts) => ts,
                other => vec![other],
            };
        }
        return canon_sum(terms);
    }

    assemble_prod(coeff, out)
}

/// Expansion guard: products of sums wider than this stay undistributed and
/// integer powers of sums with more estimated monomials stay unexpanded.
const DISTRIBUTION_CAP: usize = 50_000;

fn assemble_prod(coeff: BigRational, mut factors: Vec<Expr>) -> Expr {
    if coeff.is_zero() {
        return Expr::zero();
    }
    if factors.is_empty() {
        return Expr::Num(coeff);
    }
    if coeff.is_one() {
        if factors.len() == 1 {
            return factors.pop().unwrap();
        }
        factors.sort();
        return Expr::Prod(factors);
    }
    factors.push(Expr::Num(coeff));
    factors.sort();
    Expr::Prod(factors)
}

/// Canonical rational power of a canonical base.
pub fn canon_pow(base: Expr, e: BigRational) -> Expr {
    if e.is_zero() {
        return Expr::one();
    }
    if e.is_one() {
        return base;
    }
    match base {
        Expr::Num(r) => {
            if r.is_zero() {
                if e.is_positive() {
                    return Expr::zero();
                }
                // 1/0 kept symbolic; numeric evaluation reports the domain error
                return Expr::Pow(Box::new(Expr::Num(r)), e);
            }
            if r.is_one() {
                return Expr::one();
            }
            match rational_pow_exact(&r, &e) {
                Some(v) => Expr::Num(v),
                None => Expr::Pow(Box::new(Expr::Num(r)), e),
            }
        }
        Expr::Pow(b2, e2) => {
            if e.is_integer() {
                canon_pow(*b2, e2 * e)
            } else {
                Expr::Pow(Box::new(Expr::Pow(b2, e2)), e)
            }
        }
        Expr::Exp(a) => canon_exp(canon_prod(vec![Expr::Num(e), *a])),
        Expr::Prod(fs) => {
            if e.is_integer() {
                canon_prod(fs.into_iter().map(|f| canon_pow(f, e.clone())).collect())
            } else {
                Expr::Pow(Box::new(Expr::Prod(fs)), e)
            }
        }
        Expr::Sum(ts) => canon_pow_sum(ts, e),
        atom => Expr::Pow(Box::new(atom), e),
    }
}

fn canon_pow_sum(ts: Vec<Expr>, e: BigRational) -> Expr {
    if e.is_integer() && e.is_positive() {
        let n = e.to_integer().to_usize().unwrap_or(0);
        // estimated multinomial width: C(n + m - 1, m - 1)
        let fits = n >= 1 && binom_usize(n + ts.len() - 1, ts.len() - 1) <= DISTRIBUTION_CAP;
        if fits {
            // expand by direct term distribution, collecting after every
            // step; the factors of a term are never bare sums, so this
            // cannot re-enter the expansion
            let mut terms: Vec<Expr> = ts.clone();
            for _ in 1..n {
                let mut next = Vec::with_capacity(terms.len() * ts.len());
                for a in &terms {
                    for b in &ts {
                        next.push(canon_prod(vec![a.clone(), b.clone()]));
                    }
                }
                terms = match canon_sum(next) {
                    Expr::Sum(collected) => collected,
                    other => vec![other],
                };
            }
            return canon_sum(terms);
        }
        return Expr::Pow(Box::new(Expr::Sum(ts)), e);
    }
    // negative or fractional exponent: normalize the rational content so that
    // scaled copies of the same sum share one canonical base. The content is
    // the coefficient of the smallest monomial; monomials are scale-invariant
    // so a single rescale reaches content 1.
    let c0 = ts
        .iter()
        .map(split_term)
        .min_by(|(_, m1), (_, m2)| m1.cmp(m2))
        .map(|(c, _)| c)
        .unwrap_or_else(BigRational::one);
    if !c0.is_one() {
        if let Some(cpow) = rational_pow_exact(&c0, &e) {
            let inv = c0.recip();
            let scaled: Vec<Expr> = ts
                .iter()
                .map(|t| canon_prod(vec![Expr::Num(inv.clone()), t.clone()]))
                .collect();
            let inner = canon_pow(canon_sum(scaled), e);
            return canon_prod(vec![Expr::Num(cpow), inner]);
        }
    }
    Expr::Pow(Box::new(Expr::Sum(ts)), e)
}

pub fn canon_exp(a: Expr) -> Expr {
    if a.is_zero() {
        return Expr::one();
    }
    Expr::Exp(Box::new(a))
}

pub fn canon_log(a: Expr) -> Expr {
    if a.is_one() {
        return Expr::zero();
    }
    if let Expr::Exp(inner) = a {
        return *inner;
    }
    Expr::Log(Box::new(a))
}

/// Canonicalize a function node: apply declared-derivative rewrites
/// (e.g. `H_t -> h(t)+1` for a declared quadrature) and collapse order-zero
/// multi-indices into plain applications.
pub fn canon_func(node: FuncNode) -> Expr {
    for (i, &k) in node.deriv.iter().enumerate() {
        if k == 0 {
            continue;
        }
        if let Some(known) = node.decl.known_deriv(i) {
            // d^(m+e_i) f = d^m (declared derivative), then apply the args
            let mut rem = node.deriv.clone();
            rem[i] -= 1;
            let mut e = known.clone();
            for (j, &kj) in rem.iter().enumerate() {
                for _ in 0..kj {
                    e = super::diff::diff(&e, &node.decl.deps[j]);
                }
            }
            if !node.has_default_args() {
                let map: Vec<(super::ast::Var, Expr)> = node
                    .decl
                    .deps
                    .iter()
                    .cloned()
                    .zip(node.args.iter().cloned())
                    .collect();
                e = super::subst::subst_vars(&e, &map);
            }
            return e;
        }
    }
    Expr::Func(node)
}

/// Exact rational power `r^e` when the result is rational, else `None`.
pub fn rational_pow_exact(r: &BigRational, e: &BigRational) -> Option<BigRational> {
    if e.is_integer() {
        let n = e.to_integer();
        let n = n.to_i32()?;
        return Some(pow_int(r, n));
    }
    let denom = e.denom().to_u32()?;
    let numer = e.numer().to_i32()?;
    let p_root = exact_nth_root(r.numer(), denom)?;
    let q_root = exact_nth_root(r.denom(), denom)?;
    let root = BigRational::new(p_root, q_root);
    Some(pow_int(&root, numer))
}

fn pow_int(r: &BigRational, n: i32) -> BigRational {
    if n == 0 {
        return BigRational::one();
    }
    if n > 0 {
        r.pow(n)
    } else {
        r.recip().pow(-n)
    }
}

fn binom_usize(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = match r.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return usize::MAX,
        };
    }
    r
}

fn exact_nth_root(x: &BigInt, n: u32) -> Option<BigInt> {
    if n == 1 {
        return Some(x.clone());
    }
    if x.is_negative() {
        if n.is_even() {
            return None;
        }
        return exact_nth_root(&-x, n).map(|r| -r);
    }
    let root = x.nth_root(n);
    if num_traits::pow(root.clone(), n as usize) == *x {
        Some(root)
    } else {
        None
    }
}
