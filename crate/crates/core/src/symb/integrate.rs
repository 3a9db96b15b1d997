//! Closed-form antiderivatives on the class {polynomials, rational functions
//! with a single linear denominator, exp of linear arguments}. Anything else
//! returns `None`; callers fall back to declared quadrature functions.

use super::ast::{big, Expr, Var};
use super::diff::diff;
use num_rational::BigRational;
use num_traits::One;

/// Antiderivative of `e` with respect to `v`, if it lies in the implemented
/// closed-form class. The result omits the integration constant.
pub fn integrate_closed_form(e: &Expr, v: &Var) -> Option<Expr> {
    let terms: Vec<Expr> = match e {
        Expr::Sum(ts) => ts.clone(),
        other => vec![other.clone()],
    };
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        out.push(integrate_term(&t, v)?);
    }
    Some(Expr::sum(out))
}

fn integrate_term(term: &Expr, v: &Var) -> Option<Expr> {
    let factors: Vec<Expr> = match term {
        Expr::Prod(fs) => fs.clone(),
        other => vec![other.clone()],
    };

    let mut constant: Vec<Expr> = Vec::new();
    let mut v_power = BigRational::from_integer(0.into()); // exponent of plain v
    let mut linear: Option<(Expr, BigRational)> = None; // (sum base, exponent)
    let mut exponential: Option<Expr> = None; // exp argument

    for f in factors {
        if !f.contains_var(v) {
            constant.push(f);
            continue;
        }
        match &f {
            Expr::Var(w) if w == v => v_power += BigRational::one(),
            Expr::Pow(b, e) => match &**b {
                Expr::Var(w) if w == v => v_power += e.clone(),
                Expr::Sum(_) => {
                    if linear.is_some() {
                        return None;
                    }
                    linear = Some(((**b).clone(), e.clone()));
                }
                _ => return None,
            },
            Expr::Sum(_) => {
                // canonical products never hold sum factors, but a bare term
                // may be one (e.g. integrating `2t + k` term-wise handles it)
                return None;
            }
            Expr::Exp(a) => {
                if exponential.is_some() {
                    return None;
                }
                exponential = Some((**a).clone());
            }
            _ => return None,
        }
    }

    let const_part = Expr::prod(constant);

    match (linear, exponential) {
        (None, None) => {
            // C * v^k
            Some(Expr::mul(
                const_part,
                power_integral(Expr::var(v), v_power)?,
            ))
        }
        (Some((s, e)), None) => {
            // C * v^j * (a v + b)^e with integer j >= 0
            if !v_power.is_integer() || v_power < BigRational::from_integer(0.into()) {
                return None;
            }
            let j = v_power.to_integer();
            let j: u32 = num_traits::ToPrimitive::to_u32(&j)?;
            let a = diff(&s, v);
            if a.contains_var(v) || a.is_zero() {
                return None;
            }
            let b = Expr::sub(s.clone(), Expr::mul(a.clone(), Expr::var(v)));
            if b.contains_var(v) {
                return None;
            }
            // substitute v = (w - b)/a, dv = dw/a, then integrate powers of w
            let inv_a = Expr::div(Expr::one(), a.clone());
            let mut total = Vec::new();
            // (w - b)^j expanded binomially
            for i in 0..=j {
                let c = binom(j, i);
                let w_exp = e.clone() + big(i as i64);
                let coeff = Expr::prod(vec![
                    Expr::num(c),
                    Expr::powi(Expr::neg(b.clone()), (j - i) as i64),
                ]);
                let integral = power_integral_base(s.clone(), w_exp)?;
                total.push(Expr::mul(coeff, integral));
            }
            let sum = Expr::sum(total);
            // scale by a^{-j} (from the substitution) and 1/a (from dv)
            let scale = Expr::powi(inv_a, (j + 1) as i64);
            Some(Expr::prod(vec![const_part, scale, sum]))
        }
        (None, Some(arg)) => {
            // C * exp(alpha v + beta), alpha independent of v
            if !v_power.is_integer() || !v_power.numer().eq(&0.into()) {
                return None;
            }
            let alpha = diff(&arg, v);
            if alpha.contains_var(v) || alpha.is_zero() {
                return None;
            }
            Some(Expr::prod(vec![
                const_part,
                Expr::div(Expr::one(), alpha),
                Expr::exp_of(arg),
            ]))
        }
        (Some(_), Some(_)) => None,
    }
}

/// Integral of base^e d(base) — power rule with the logarithmic case.
fn power_integral_base(base: Expr, e: BigRational) -> Option<Expr> {
    if e == -BigRational::one() {
        Some(Expr::log_of(base))
    } else {
        let e1 = e + BigRational::one();
        Some(Expr::mul(
            Expr::num(BigRational::one() / e1.clone()),
            Expr::powr(base, e1),
        ))
    }
}

fn power_integral(base: Expr, e: BigRational) -> Option<Expr> {
    power_integral_base(base, e)
}

fn binom(n: u32, k: u32) -> BigRational {
    let mut r = BigRational::one();
    for i in 0..k {
        r *= BigRational::from_integer((n - i).into());
        r /= BigRational::from_integer((i + 1).into());
    }
    r
}
