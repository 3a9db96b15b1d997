//! Canonical infix printing. `parse(print(e))` is structurally stable on
//! canonical expressions.

use super::ast::Expr;
use super::simplify::split_term;
use num_rational::BigRational;
use num_traits::{One, Signed};
use std::fmt;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f)
    }
}

fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Sum(ts) => {
            for (i, t) in ts.iter().enumerate() {
                let (c, m) = split_term(t);
                if i == 0 {
                    write_factor_like(t, f)?;
                } else if c.is_negative() {
                    write!(f, " - ")?;
                    let flipped = Expr::mul(Expr::int(-1), t.clone());
                    write_factor_like(&flipped, f)?;
                } else {
                    write!(f, " + ")?;
                    write_factor_like(t, f)?;
                }
                let _ = m;
            }
            Ok(())
        }
        _ => write_factor_like(e, f),
    }
}

fn write_factor_like(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Prod(fs) => {
            let mut rest: &[Expr] = fs;
            if let Some(Expr::Num(r)) = fs.first() {
                if fs.len() > 1 && *r == -BigRational::one() {
                    write!(f, "-")?;
                    rest = &fs[1..];
                }
            }
            for (i, g) in rest.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                write_pow_operand(g, f)?;
            }
            Ok(())
        }
        _ => write_pow_like(e, f),
    }
}

fn write_pow_like(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Pow(b, ex) => {
            write_base(b, f)?;
            write!(f, "^")?;
            write_exponent(ex, f)
        }
        _ => write_atom(e, f),
    }
}

fn write_pow_operand(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Sum(_) => {
            write!(f, "(")?;
            write_expr(e, f)?;
            write!(f, ")")
        }
        _ => write_pow_like(e, f),
    }
}

fn write_base(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Sum(_) | Expr::Prod(_) | Expr::Pow(..) => {
            write!(f, "(")?;
            write_expr(e, f)?;
            write!(f, ")")
        }
        Expr::Num(r) if r.is_negative() || !r.is_integer() => {
            write!(f, "(")?;
            write_num(r, f)?;
            write!(f, ")")
        }
        _ => write_atom(e, f),
    }
}

fn write_exponent(ex: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if ex.is_integer() && !ex.is_negative() {
        write!(f, "{}", ex.numer())
    } else if ex.is_integer() {
        write!(f, "({})", ex.numer())
    } else {
        write!(f, "({}/{})", ex.numer(), ex.denom())
    }
}

fn write_num(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn write_atom(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Num(r) => write_num(r, f),
        Expr::Var(v) => write!(f, "{}", v.name()),
        Expr::Param(p) => write!(f, "{}", p.name()),
        Expr::Func(fx) => {
            write!(f, "{}", fx.decl.name)?;
            if fx.order() > 0 {
                write!(f, "_")?;
                for (i, &k) in fx.deriv.iter().enumerate() {
                    for _ in 0..k {
                        write!(f, "{}", fx.decl.deps[i].name())?;
                    }
                }
            }
            write!(f, "(")?;
            for (i, a) in fx.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write_expr(a, f)?;
            }
            write!(f, ")")
        }
        Expr::Exp(a) => {
            write!(f, "exp(")?;
            write_expr(a, f)?;
            write!(f, ")")
        }
        Expr::Log(a) => {
            write!(f, "log(")?;
            write_expr(a, f)?;
            write!(f, ")")
        }
        Expr::Pow(..) | Expr::Prod(_) | Expr::Sum(_) => {
            write!(f, "(")?;
            write_expr(e, f)?;
            write!(f, ")")
        }
    }
}
