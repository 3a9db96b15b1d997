//! Linear transfer equations `u_t = u_xx + h(t)/x u_x`: the operators common
//! to the whole class, the Galilei-invariant Gaussian family, and the
//! polynomial / Gaussian series whose coefficients satisfy triangular ODE
//! chains.

use crate::construct::SolutionFamily;
use crate::detsys::ReductionOperator;
use crate::pde::ParabolicEquation;
use crate::symb::ast::{Expr, FuncDecl, Var};
use crate::symb::integrate::integrate_closed_form;
use crate::symb::probe::ProbeConfig;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("h must depend on t only")]
    BadCoefficient,
    #[error("series order must be at least zero")]
    BadOrder,
}

/// A transfer equation, embedded in the general class as (A, B, C) =
/// (1, h/x, 0) with the singular locus x = 0.
#[derive(Clone, Debug)]
pub struct TransferEquation {
    pub h: Expr,
    pub eq: ParabolicEquation,
}

impl TransferEquation {
    pub fn new(h: Expr) -> Result<Self, TransferError> {
        if h.contains_var(&Var::x()) || h.contains_var(&Var::u()) {
            return Err(TransferError::BadCoefficient);
        }
        let eq = ParabolicEquation {
            a: Expr::one(),
            b: Expr::div(h.clone(), Expr::x()),
            c: Expr::zero(),
            singular: vec![Expr::x()],
        };
        Ok(TransferEquation { h, eq })
    }

    /// The equation with a fully symbolic coefficient h(t).
    pub fn symbolic() -> (Self, Arc<FuncDecl>) {
        let hd = FuncDecl::new("h", &[Var::t()]);
        let te = TransferEquation::new(Expr::func(&hd)).expect("h(t) depends on t only");
        (te, hd)
    }

    /// The declared quadrature `H` with `H_t = h + 1`.
    pub fn quadrature_decl(&self) -> Arc<FuncDecl> {
        FuncDecl::with_derivs(
            "H",
            &[Var::t()],
            &[(Var::t(), Expr::add(self.h.clone(), Expr::one()))],
        )
    }

    /// A probe configuration with this equation's singular loci attached.
    pub fn probe_cfg(&self, base: &ProbeConfig) -> ProbeConfig {
        self.eq.probe_cfg(base)
    }
}

/// The reduction operators attached to the whole class: the tau=1 operator
/// `dt - (h+1)/x dx`, the Galilei combination normalized to tau=0 form
/// `eta = -xu/(2t+kappa)`, and the tau=0 family `eta = nu x` coming from the
/// constant branch of the common-operator ansatz `eta = x zeta(t,u)`. The
/// last degenerates to the trivial operator `dx` at nu = 0 (admissible for
/// every equation of the class since C = 0).
pub fn canonical_operators(
    te: &TransferEquation,
    kappa: &Expr,
    nu: &Expr,
) -> Vec<(String, ReductionOperator)> {
    let q = ReductionOperator::Tau1 {
        g1: Expr::neg(Expr::div(Expr::add(te.h.clone(), Expr::one()), Expr::x())),
        g2: Expr::zero(),
        g3: Expr::zero(),
    };
    let g_kappa = ReductionOperator::tau0(Expr::neg(Expr::div(
        Expr::mul(Expr::x(), Expr::u()),
        Expr::add(Expr::mul(Expr::int(2), Expr::t()), kappa.clone()),
    )));
    let translation = ReductionOperator::tau0(Expr::mul(nu.clone(), Expr::x()));
    vec![
        ("Q".into(), q),
        ("G_kappa".into(), g_kappa),
        ("dx_nu".into(), translation),
    ]
}

/// Quadrature `R` with `R_t = (h+1)/(2t+kappa)`: closed form when the
/// integrand lies in the implemented class, else a declared function.
fn gauss_quadrature(te: &TransferEquation, kappa: &Expr) -> Expr {
    let integrand = Expr::div(
        Expr::add(te.h.clone(), Expr::one()),
        Expr::add(Expr::mul(Expr::int(2), Expr::t()), kappa.clone()),
    );
    match integrate_closed_form(&integrand, &Var::t()) {
        Some(r) => r,
        None => {
            let decl = FuncDecl::with_derivs("R", &[Var::t()], &[(Var::t(), integrand)]);
            Expr::func(&decl)
        }
    }
}

/// The Gaussian exponential factor `exp(-x^2/(2(2t+kappa)) - R(t))`.
fn gauss_factor(te: &TransferEquation, kappa: &Expr) -> Expr {
    let shifted = Expr::add(Expr::mul(Expr::int(2), Expr::t()), kappa.clone());
    Expr::exp_of(Expr::sub(
        Expr::neg(Expr::div(
            Expr::powi(Expr::x(), 2),
            Expr::mul(Expr::int(2), shifted),
        )),
        gauss_quadrature(te, kappa),
    ))
}

/// The family invariant under the Galilei combination:
/// `u = c1 exp(-x^2/(2(2t+kappa)) - integral (h+1)/(2t+kappa) dt)`.
pub fn invariant_solution_gk(te: &TransferEquation, kappa: &Expr, c1: &Expr) -> SolutionFamily {
    SolutionFamily::OneParam {
        expr: Expr::mul(c1.clone(), gauss_factor(te, kappa)),
        param: c1.clone(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    Polynomial,
    Gaussian,
}

/// A truncated series solution with its coefficient functions. Coefficients
/// are closed-form expressions where the chain integrates in closed form,
/// and declared quadrature functions (with exact derivative declarations)
/// beyond that point.
#[derive(Clone, Debug)]
pub struct SeriesSolution {
    pub kind: SeriesKind,
    pub order: usize,
    pub kappa: Option<Expr>,
    /// Coefficient functions, index k = 0..=N.
    pub coeffs: Vec<Expr>,
    /// The assembled solution expression.
    pub expr: Expr,
    /// Singular loci to respect while probing.
    pub singular: Vec<Expr>,
}

impl SeriesSolution {
    /// The right-hand sides of the coefficient ODEs, index k = 0..N-1:
    /// coefficient k must satisfy `d/dt coeff[k] = rhs[k]`.
    pub fn recurrence_rhs(&self, te: &TransferEquation) -> Vec<Expr> {
        let mut out = Vec::new();
        for k in 0..self.order {
            let factor = Expr::mul(
                Expr::int(2 * (k as i64 + 1)),
                Expr::sum(vec![te.h.clone(), Expr::int(2 * k as i64 + 1)]),
            );
            let scale = match (&self.kind, &self.kappa) {
                (SeriesKind::Polynomial, _) => factor,
                (SeriesKind::Gaussian, Some(kap)) => Expr::mul(
                    factor,
                    Expr::powi(
                        Expr::add(Expr::mul(Expr::int(2), Expr::t()), kap.clone()),
                        -2,
                    ),
                ),
                (SeriesKind::Gaussian, None) => unreachable!("gaussian series carries kappa"),
            };
            out.push(Expr::mul(scale, self.coeffs[k + 1].clone()));
        }
        out
    }
}

/// Build the coefficient chain by back-substitution from the top seed:
/// `coeff[N] = seed`, `d/dt coeff[k] = rhs(k, coeff[k+1])`. Closed-form
/// integration is attempted first; once it fails the remaining coefficients
/// become declared quadrature functions (always representable).
fn build_chain(
    n: usize,
    seed: &Expr,
    prefix: &str,
    rhs_of: impl Fn(usize, &Expr) -> Expr,
    add_c1: bool,
) -> Vec<Expr> {
    let mut coeffs = vec![Expr::zero(); n + 1];
    coeffs[n] = seed.clone();
    let mut closed = true;
    for k in (0..n).rev() {
        let rhs = rhs_of(k, &coeffs[k + 1]);
        if closed {
            if let Some(int) = integrate_closed_form(&rhs, &Var::t()) {
                coeffs[k] = if k == 0 && add_c1 {
                    Expr::add(int, Expr::param("c1"))
                } else {
                    int
                };
                continue;
            }
            closed = false;
        }
        let decl =
            FuncDecl::with_derivs(&format!("{}{}", prefix, k), &[Var::t()], &[(Var::t(), rhs)]);
        coeffs[k] = if k == 0 && add_c1 {
            // the declared quadrature already carries a free constant; name
            // it explicitly so the emitted family shows the parameter
            Expr::add(Expr::func(&decl), Expr::param("c1"))
        } else {
            Expr::func(&decl)
        };
    }
    coeffs
}

/// Polynomial series `u = sum_k T^k(t) x^{2k}` with
/// `T^k_t = 2(k+1)(h+2k+1) T^{k+1}` and `T^N = seed`.
pub fn polynomial_series(te: &TransferEquation, n: usize, seed: &Expr) -> SeriesSolution {
    let h = te.h.clone();
    let coeffs = build_chain(
        n,
        seed,
        "P",
        |k, next| {
            Expr::prod(vec![
                Expr::int(2 * (k as i64 + 1)),
                Expr::sum(vec![h.clone(), Expr::int(2 * k as i64 + 1)]),
                next.clone(),
            ])
        },
        true,
    );
    let expr = Expr::sum(
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| Expr::mul(c.clone(), Expr::powi(Expr::x(), 2 * k as i64)))
            .collect(),
    );
    SeriesSolution {
        kind: SeriesKind::Polynomial,
        order: n,
        kappa: None,
        coeffs,
        expr,
        singular: vec![Expr::x()],
    }
}

/// Gaussian series
/// `u = sum_k S^k(t) (x/(2t+kappa))^{2k} exp(-x^2/(2(2t+kappa)) - R)` with
/// `S^k_t = 2(k+1)(h+2k+1)(2t+kappa)^-2 S^{k+1}` and `S^N = seed`.
pub fn gaussian_series(
    te: &TransferEquation,
    n: usize,
    kappa: &Expr,
    seed: &Expr,
) -> SeriesSolution {
    let h = te.h.clone();
    let shifted = Expr::add(Expr::mul(Expr::int(2), Expr::t()), kappa.clone());
    let coeffs = build_chain(
        n,
        seed,
        "S",
        |k, next| {
            Expr::prod(vec![
                Expr::int(2 * (k as i64 + 1)),
                Expr::sum(vec![h.clone(), Expr::int(2 * k as i64 + 1)]),
                Expr::powi(shifted.clone(), -2),
                next.clone(),
            ])
        },
        false,
    );
    let envelope = gauss_factor(te, kappa);
    let ratio = Expr::div(Expr::x(), shifted.clone());
    let expr = Expr::mul(
        Expr::sum(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| Expr::mul(c.clone(), Expr::powi(ratio.clone(), 2 * k as i64)))
                .collect(),
        ),
        envelope,
    );
    SeriesSolution {
        kind: SeriesKind::Gaussian,
        order: n,
        kappa: Some(kappa.clone()),
        coeffs,
        expr,
        singular: vec![Expr::x(), shifted],
    }
}
