//! The equation class `u_t = A(t,x) u_xx + B(t,x) u_x + C(t,x) u` and its
//! reduced representatives `u_t - u_xx + V(t,x) u = 0`: applying the
//! associated operator L, gauging A to 1 and B to 0, and the syntactic Lie
//! classification of reduced equations.

use crate::symb::ast::{Expr, Var};
use crate::symb::diff::{diff, diff_n};
use crate::symb::integrate::integrate_closed_form;
use crate::symb::probe::{equals_zero, ProbeConfig, ProbeError, ZeroVerdict};
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("leading coefficient A must not vanish identically")]
    DegenerateA,
    #[error("coefficient {0} must not depend on u")]
    CoefficientDependsOnU(&'static str),
    #[error("candidate surface must not contain the variable u")]
    SurfaceContainsU,
    #[error("no closed-form antiderivative for {0}; supply the quadrature as a declared function")]
    NonQuadrable(String),
    #[error(transparent)]
    Probe(#[from] ProbeError),
}

/// An equation `u_t - A u_xx - B u_x - C u = 0` with analytic coefficients
/// over (t, x), together with its declared singular loci.
#[derive(Clone, Debug, PartialEq)]
pub struct ParabolicEquation {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub singular: Vec<Expr>,
}

impl ParabolicEquation {
    pub fn new(a: Expr, b: Expr, c: Expr, cfg: &ProbeConfig) -> Result<Self, PdeError> {
        for (e, n) in [(&a, "A"), (&b, "B"), (&c, "C")] {
            if e.contains_var(&Var::u()) {
                return Err(PdeError::CoefficientDependsOnU(n));
            }
        }
        match equals_zero(&a, cfg)? {
            ZeroVerdict::NonZero(_) => {}
            _ => return Err(PdeError::DegenerateA),
        }
        Ok(ParabolicEquation {
            a,
            b,
            c,
            singular: Vec::new(),
        })
    }

    pub fn with_singular(mut self, loci: Vec<Expr>) -> Self {
        self.singular.extend(loci);
        self
    }

    /// The heat equation `u_t = u_xx`.
    pub fn heat() -> Self {
        ParabolicEquation {
            a: Expr::one(),
            b: Expr::zero(),
            c: Expr::zero(),
            singular: Vec::new(),
        }
    }

    /// A probe configuration carrying this equation's singular loci.
    pub fn probe_cfg(&self, base: &ProbeConfig) -> ProbeConfig {
        base.clone().with_singular(self.singular.clone())
    }

    /// Apply the associated operator to a candidate surface `u = f(t,x)`:
    /// returns `f_t - A f_xx - B f_x - C f` in canonical form.
    pub fn apply_l(&self, u_expr: &Expr) -> Result<Expr, PdeError> {
        if u_expr.contains_var(&Var::u()) {
            return Err(PdeError::SurfaceContainsU);
        }
        Ok(self.apply_l_raw(u_expr))
    }

    /// As [`Self::apply_l`] without the surface check; used internally on
    /// expressions in jet variables.
    pub fn apply_l_raw(&self, w: &Expr) -> Expr {
        let (tv, xv) = (Var::t(), Var::x());
        Expr::sum(vec![
            diff(w, &tv),
            Expr::neg(Expr::mul(self.a.clone(), diff_n(w, &xv, 2))),
            Expr::neg(Expr::mul(self.b.clone(), diff(w, &xv))),
            Expr::neg(Expr::mul(self.c.clone(), w.clone())),
        ])
    }

    /// Zero-verdict of the residual of a candidate solution.
    pub fn solves(&self, u_expr: &Expr, cfg: &ProbeConfig) -> Result<ZeroVerdict, PdeError> {
        let r = self.apply_l(u_expr)?;
        Ok(equals_zero(&r, &self.probe_cfg(cfg))?)
    }

    pub fn is_reduced_form(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }
}

/// Reduced-form equation `u_t - u_xx + V(t,x) u = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedEquation {
    pub v: Expr,
}

impl ReducedEquation {
    pub fn new(v: Expr) -> Result<Self, PdeError> {
        if v.contains_var(&Var::u()) {
            return Err(PdeError::CoefficientDependsOnU("V"));
        }
        Ok(ReducedEquation { v })
    }

    /// Embed into the general class: (A, B, C) = (1, 0, -V).
    pub fn as_parabolic(&self) -> ParabolicEquation {
        ParabolicEquation {
            a: Expr::one(),
            b: Expr::zero(),
            c: Expr::neg(self.v.clone()),
            singular: Vec::new(),
        }
    }
}

/// Syntactic classification of a reduced equation by its potential.
#[derive(Clone, Debug, PartialEq)]
pub enum LieCase {
    /// No recognized extension.
    Kernel,
    /// V = V(x).
    Stationary,
    /// V = mu x^-2 with a nonzero constant or named parameter mu.
    InverseSquare { mu: Expr },
    /// V = 0.
    Free,
}

/// Classify the potential. The match is syntactic after simplification (no
/// classification up to equivalence transformations).
pub fn classify_lie(red: &ReducedEquation, cfg: &ProbeConfig) -> Result<LieCase, PdeError> {
    let v = crate::symb::simplify::simplify(&red.v);
    if equals_zero(&v, cfg)?.is_zero() {
        return Ok(LieCase::Free);
    }
    if let Some(mu) = inverse_square_coefficient(&v) {
        if let ZeroVerdict::NonZero(_) = equals_zero(&mu, cfg)? {
            return Ok(LieCase::InverseSquare { mu });
        }
    }
    let vt = diff(&v, &Var::t());
    if equals_zero(&vt, cfg)?.is_zero() {
        return Ok(LieCase::Stationary);
    }
    Ok(LieCase::Kernel)
}

/// Match `V == c * x^-2` with c a rational constant or a named parameter.
fn inverse_square_coefficient(v: &Expr) -> Option<Expr> {
    let inv2 = Expr::powi(Expr::x(), -2);
    if *v == inv2 {
        return Some(Expr::one());
    }
    if let Expr::Prod(fs) = v {
        let mut coeff = Vec::new();
        let mut seen = false;
        for f in fs {
            if *f == inv2 {
                seen = true;
            } else {
                match f {
                    Expr::Num(_) | Expr::Param(_) => coeff.push(f.clone()),
                    _ => return None,
                }
            }
        }
        if seen && !coeff.is_empty() {
            return Some(Expr::prod(coeff));
        }
    }
    None
}

/// Gauge an equation to reduced form. Returns the potential and the point
/// transformation realizing the gauge, verified by the caller through the
/// coefficient pushforward.
///
/// The construction takes `X = integral of A^{-1/2} dx` with `T = t`, then
/// removes the transformed drift with a gauge factor `U1` solving
/// `U1_x / U1 = B~ / 2` in the intermediate coordinates. Antiderivatives are
/// attempted in the closed-form class; outside it, the caller must supply
/// quadratures as declared arbitrary functions and build the transformation
/// directly.
pub fn gauge_to_reduced(
    eq: &ParabolicEquation,
    cfg: &ProbeConfig,
) -> Result<(ReducedEquation, crate::transform::PointTransformation), PdeError> {
    let xv = Var::x();

    // stage 1: normalize A via X = int A^(-1/2) dx, T = t
    let a_msqrt = Expr::powr(eq.a.clone(), BigRational::new((-1).into(), 2.into()));
    let x_map = integrate_closed_form(&a_msqrt, &xv)
        .ok_or_else(|| PdeError::NonQuadrable(format!("{}", a_msqrt)))?;
    let stage1 =
        crate::transform::PointTransformation::new(Expr::t(), x_map, Expr::one(), Expr::zero());
    let mid = crate::transform::push_equation(eq, &stage1, cfg)
        .map_err(|e| PdeError::NonQuadrable(e.to_string()))?;

    // stage 2: gauge away the drift with U1 = exp(int B~/2 dx)
    let half_b = Expr::div(mid.b.clone(), Expr::int(2));
    let phi = integrate_closed_form(&half_b, &xv)
        .ok_or_else(|| PdeError::NonQuadrable(format!("{}", half_b)))?;
    let u1 = Expr::exp_of(phi);
    let stage2 = crate::transform::PointTransformation::new(Expr::t(), Expr::x(), u1, Expr::zero());
    let fin = crate::transform::push_equation(&mid, &stage2, cfg)
        .map_err(|e| PdeError::NonQuadrable(e.to_string()))?;

    let composed = stage1.compose(&stage2);
    let v = Expr::neg(fin.c.clone());
    Ok((ReducedEquation::new(v)?, composed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symb::ast::FuncDecl;
    use crate::symb::probe::ZeroVerdict;

    fn cfg() -> ProbeConfig {
        ProbeConfig::default()
    }

    #[test]
    fn apply_l_on_classical_solutions() {
        let heat = ParabolicEquation::heat();
        let poly = Expr::add(Expr::powi(Expr::x(), 2), Expr::mul(Expr::int(2), Expr::t()));
        assert_eq!(heat.solves(&poly, &cfg()).unwrap(), ZeroVerdict::ProvenZero);

        let expo = Expr::exp_of(Expr::add(Expr::t(), Expr::x()));
        assert_eq!(heat.solves(&expo, &cfg()).unwrap(), ZeroVerdict::ProvenZero);

        // u = exp(t + 2x) is not a solution
        let bad = Expr::exp_of(Expr::add(Expr::t(), Expr::mul(Expr::int(2), Expr::x())));
        assert!(matches!(
            heat.solves(&bad, &cfg()).unwrap(),
            ZeroVerdict::NonZero(_)
        ));
    }

    #[test]
    fn apply_l_transfer_family_with_quadrature() {
        // u = c2 (x^2 + 2 H(t)) + c1 with H_t = h + 1 solves u_t = u_xx + h/x u_x
        let h = FuncDecl::new("h", &[Var::t()]);
        let hp1 = Expr::add(Expr::func(&h), Expr::one());
        let cap_h = FuncDecl::with_derivs("H", &[Var::t()], &[(Var::t(), hp1)]);
        let eq = ParabolicEquation {
            a: Expr::one(),
            b: Expr::div(Expr::func(&h), Expr::x()),
            c: Expr::zero(),
            singular: vec![Expr::x()],
        };
        let fam = Expr::sum(vec![
            Expr::mul(
                Expr::param("c2"),
                Expr::add(
                    Expr::powi(Expr::x(), 2),
                    Expr::mul(Expr::int(2), Expr::func(&cap_h)),
                ),
            ),
            Expr::param("c1"),
        ]);
        assert_eq!(eq.solves(&fam, &cfg()).unwrap(), ZeroVerdict::ProvenZero);
    }

    #[test]
    fn apply_l_is_linear() {
        let heat = ParabolicEquation::heat();
        let u1 = Expr::exp_of(Expr::add(Expr::t(), Expr::x()));
        let u2 = Expr::powi(Expr::x(), 3);
        let combo = Expr::add(
            Expr::mul(Expr::int(3), u1.clone()),
            Expr::mul(Expr::int(-2), u2.clone()),
        );
        let lhs = heat.apply_l(&combo).unwrap();
        let rhs = Expr::add(
            Expr::mul(Expr::int(3), heat.apply_l(&u1).unwrap()),
            Expr::mul(Expr::int(-2), heat.apply_l(&u2).unwrap()),
        );
        assert!(Expr::sub(lhs, rhs).is_zero());
    }

    #[test]
    fn surface_must_not_contain_u() {
        let heat = ParabolicEquation::heat();
        assert!(heat.apply_l(&Expr::u()).is_err());
    }

    #[test]
    fn degenerate_a_rejected() {
        assert!(ParabolicEquation::new(Expr::zero(), Expr::zero(), Expr::zero(), &cfg()).is_err());
    }

    #[test]
    fn classify_cases() {
        let free = ReducedEquation::new(Expr::zero()).unwrap();
        assert_eq!(classify_lie(&free, &cfg()).unwrap(), LieCase::Free);

        let inv = ReducedEquation::new(Expr::mul(Expr::int(5), Expr::powi(Expr::x(), -2))).unwrap();
        match classify_lie(&inv, &cfg()).unwrap() {
            LieCase::InverseSquare { mu } => assert_eq!(mu, Expr::int(5)),
            c => panic!("expected inverse-square, got {:?}", c),
        }

        let mu_param =
            ReducedEquation::new(Expr::mul(Expr::param("mu"), Expr::powi(Expr::x(), -2))).unwrap();
        assert!(matches!(
            classify_lie(&mu_param, &cfg()).unwrap(),
            LieCase::InverseSquare { .. }
        ));

        let stat = ReducedEquation::new(Expr::exp_of(Expr::x())).unwrap();
        assert_eq!(classify_lie(&stat, &cfg()).unwrap(), LieCase::Stationary);

        let gen = ReducedEquation::new(Expr::mul(Expr::t(), Expr::x())).unwrap();
        assert_eq!(classify_lie(&gen, &cfg()).unwrap(), LieCase::Kernel);

        // classification is stable under structurally different inputs
        let zero2 = ReducedEquation::new(Expr::sub(
            Expr::powi(Expr::add(Expr::x(), Expr::one()), 2),
            Expr::sum(vec![
                Expr::powi(Expr::x(), 2),
                Expr::mul(Expr::int(2), Expr::x()),
                Expr::one(),
            ]),
        ))
        .unwrap();
        assert_eq!(classify_lie(&zero2, &cfg()).unwrap(), LieCase::Free);
    }

    #[test]
    fn gauge_identity_and_scaling() {
        let heat = ParabolicEquation::heat();
        let (red, tr) = gauge_to_reduced(&heat, &cfg()).unwrap();
        assert!(red.v.is_zero());
        let back = crate::transform::push_equation(&heat, &tr, &cfg()).unwrap();
        assert!(back.a.is_one() && back.b.is_zero() && back.c.is_zero());

        let four =
            ParabolicEquation::new(Expr::int(4), Expr::zero(), Expr::zero(), &cfg()).unwrap();
        let (red, tr) = gauge_to_reduced(&four, &cfg()).unwrap();
        assert!(red.v.is_zero(), "V = {}", red.v);
        let pushed = crate::transform::push_equation(&four, &tr, &cfg()).unwrap();
        assert!(pushed.a.is_one(), "A~ = {}", pushed.a);
        assert!(pushed.b.is_zero(), "B~ = {}", pushed.b);
        assert!(pushed.c.is_zero(), "C~ = {}", pushed.c);
    }

    #[test]
    fn gauge_constant_drift_transfer() {
        // h constant: (1, h/x, 0) gauges to V = (h/2)(h/2 - 1) x^-2
        let h = Expr::param("h");
        let eq = ParabolicEquation {
            a: Expr::one(),
            b: Expr::div(h.clone(), Expr::x()),
            c: Expr::zero(),
            singular: vec![Expr::x()],
        };
        let (red, tr) = gauge_to_reduced(&eq, &cfg()).unwrap();
        let expect = Expr::prod(vec![
            Expr::div(h.clone(), Expr::int(2)),
            Expr::sub(Expr::div(h, Expr::int(2)), Expr::one()),
            Expr::powi(Expr::x(), -2),
        ]);
        let delta = Expr::sub(red.v.clone(), expect);
        assert!(
            crate::symb::probe::equals_zero(&delta, &cfg().with_singular(vec![Expr::x()]))
                .unwrap()
                .is_zero(),
            "V = {}",
            red.v
        );
        // round trip: the pushed coefficients are (1, 0, -V)
        let pushed = crate::transform::push_equation(&eq, &tr, &cfg()).unwrap();
        let sing = cfg().with_singular(vec![Expr::x()]);
        assert!(
            crate::symb::probe::equals_zero(&Expr::sub(pushed.a, Expr::one()), &sing)
                .unwrap()
                .is_zero()
        );
        assert!(crate::symb::probe::equals_zero(&pushed.b, &sing)
            .unwrap()
            .is_zero());
        assert!(
            crate::symb::probe::equals_zero(&Expr::add(pushed.c, red.v), &sing)
                .unwrap()
                .is_zero()
        );
    }
}

#[cfg(test)]
mod gauge_error_tests {
    use super::*;
    use crate::symb::probe::ProbeConfig;

    #[test]
    fn gauge_outside_closed_form_class_errors() {
        // A = 1 + x^2 has A^(-1/2) outside the implemented antiderivative
        // class; the caller is told to supply the quadrature instead
        let eq = ParabolicEquation::new(
            Expr::add(Expr::one(), Expr::powi(Expr::x(), 2)),
            Expr::zero(),
            Expr::zero(),
            &ProbeConfig::default(),
        )
        .unwrap();
        assert!(matches!(
            gauge_to_reduced(&eq, &ProbeConfig::default()),
            Err(PdeError::NonQuadrable(_))
        ));
    }
}
