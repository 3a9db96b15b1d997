//! Point transformations of the class and their action on equations and
//! reduction operators; infinitesimal induction of Lie symmetries onto the
//! determining systems; the Lie-symmetry catalog of the classified reduced
//! equations.

use crate::detsys::{self, ReductionOperator};
use crate::jet::{self, JetError, JetField};
use crate::pde::{LieCase, ParabolicEquation};
use crate::symb::ast::{Expr, FuncDecl, Var};
use crate::symb::diff::diff;
use crate::symb::probe::{equals_zero, ProbeConfig, ProbeError, ZeroVerdict};
use crate::symb::subst::{substitute, Bindings};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("transformation is singular: T_t * X_x * U1 vanishes")]
    Singular,
    #[error("U0/U1 must solve the source equation (admissibility); residual is nonzero")]
    InadmissibleShift,
    #[error("T or X is not invertible in closed form; supply Tinv/Xinv")]
    NonInvertible,
    #[error("supplied inverse fails the round-trip check for {0}")]
    BadInverse(&'static str),
    #[error("coefficient {0} of an infinitesimal operator violates its dependency signature")]
    Signature(&'static str),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Detsys(#[from] crate::detsys::DetsysError),
}

/// A point transformation `t~ = T(t), x~ = X(t,x), u~ = U1(t,x) u + U0(t,x)`.
///
/// Inverse expressions, when present, are written in the new variables:
/// `t_inv` gives the old t as an expression in (new) t, `x_inv` the old x in
/// (new) t, x.
#[derive(Clone, Debug, PartialEq)]
pub struct PointTransformation {
    pub t_map: Expr,
    pub x_map: Expr,
    pub u1: Expr,
    pub u0: Expr,
    pub t_inv: Option<Expr>,
    pub x_inv: Option<Expr>,
}

impl PointTransformation {
    pub fn new(t_map: Expr, x_map: Expr, u1: Expr, u0: Expr) -> Self {
        PointTransformation {
            t_map,
            x_map,
            u1,
            u0,
            t_inv: None,
            x_inv: None,
        }
    }

    pub fn identity() -> Self {
        PointTransformation::new(Expr::t(), Expr::x(), Expr::one(), Expr::zero())
    }

    pub fn with_inverses(mut self, t_inv: Expr, x_inv: Expr) -> Self {
        self.t_inv = Some(t_inv);
        self.x_inv = Some(x_inv);
        self
    }

    /// Jacobian-type nondegeneracy factor `T_t X_x U1`.
    pub fn jacobian_factor(&self) -> Expr {
        Expr::prod(vec![
            diff(&self.t_map, &Var::t()),
            diff(&self.x_map, &Var::x()),
            self.u1.clone(),
        ])
    }

    /// Try to derive closed-form inverses for maps affine in t and x.
    pub fn auto_invert(&self) -> Option<(Expr, Expr)> {
        let (tv, xv) = (Var::t(), Var::x());
        let a = diff(&self.t_map, &tv);
        if a.is_zero() || a.contains_var(&tv) || a.contains_var(&xv) {
            return None;
        }
        let b = Expr::sub(self.t_map.clone(), Expr::mul(a.clone(), Expr::t()));
        if b.contains_var(&tv) || b.contains_var(&xv) {
            return None;
        }
        let t_inv = Expr::div(Expr::sub(Expr::t(), b), a);

        let p = diff(&self.x_map, &xv);
        if p.is_zero() || p.contains_var(&xv) {
            return None;
        }
        let q = Expr::sub(self.x_map.clone(), Expr::mul(p.clone(), Expr::x()));
        if q.contains_var(&xv) {
            return None;
        }
        let into_new = [(tv, t_inv.clone())];
        let p_new = crate::symb::subst::subst_vars(&p, &into_new);
        let q_new = crate::symb::subst::subst_vars(&q, &into_new);
        let x_inv = Expr::div(Expr::sub(Expr::x(), q_new), p_new);
        Some((t_inv, x_inv))
    }

    /// Inverse substitution (old variables in terms of new), from supplied
    /// or auto-derived inverses.
    pub fn inverse_maps(&self) -> Result<(Expr, Expr), TransformError> {
        if let (Some(ti), Some(xi)) = (&self.t_inv, &self.x_inv) {
            return Ok((ti.clone(), xi.clone()));
        }
        self.auto_invert().ok_or(TransformError::NonInvertible)
    }

    /// Verify supplied inverses by round-trip zero checks.
    pub fn verify_inverses(&self, cfg: &ProbeConfig) -> Result<(), TransformError> {
        let (ti, xi) = self.inverse_maps()?;
        let sub = Bindings::new().var("t", ti.clone()).var("x", xi.clone());
        let t_round = substitute(&self.t_map, &sub).map_err(ProbeError::from)?;
        if !equals_zero(&Expr::sub(t_round, Expr::t()), cfg)?.is_zero() {
            return Err(TransformError::BadInverse("T"));
        }
        let x_round = substitute(&self.x_map, &sub).map_err(ProbeError::from)?;
        if !equals_zero(&Expr::sub(x_round, Expr::x()), cfg)?.is_zero() {
            return Err(TransformError::BadInverse("X"));
        }
        Ok(())
    }

    /// Composition: apply `self` first, then `next`.
    pub fn compose(&self, next: &PointTransformation) -> PointTransformation {
        let into_mid = Bindings::new()
            .var("t", self.t_map.clone())
            .var("x", self.x_map.clone());
        let lift = |e: &Expr| substitute(e, &into_mid).expect("variable substitution");
        let t_map = lift(&next.t_map);
        let x_map = lift(&next.x_map);
        let u1 = Expr::mul(lift(&next.u1), self.u1.clone());
        let u0 = Expr::add(Expr::mul(lift(&next.u1), self.u0.clone()), lift(&next.u0));
        PointTransformation::new(t_map, x_map, u1, u0)
    }

    /// Bindings sending old (t, x) to their expressions in the new variables.
    fn inverse_bindings(&self) -> Result<Bindings, TransformError> {
        let (ti, xi) = self.inverse_maps()?;
        Ok(Bindings::new().var("t", ti).var("x", xi))
    }
}

fn to_new_vars(e: &Expr, tr: &PointTransformation) -> Result<Expr, TransformError> {
    let b = tr.inverse_bindings()?;
    Ok(substitute(e, &b).map_err(ProbeError::from)?)
}

/// Push an equation through a point transformation: the transformed
/// coefficients, expressed in the new variables.
pub fn push_equation(
    eq: &ParabolicEquation,
    tr: &PointTransformation,
    cfg: &ProbeConfig,
) -> Result<ParabolicEquation, TransformError> {
    let pcfg = eq.probe_cfg(cfg);
    match equals_zero(&tr.jacobian_factor(), &pcfg)? {
        ZeroVerdict::NonZero(_) => {}
        _ => return Err(TransformError::Singular),
    }
    if !tr.u0.is_zero() {
        let shift = Expr::div(tr.u0.clone(), tr.u1.clone());
        if !eq
            .solves(&shift, cfg)
            .map_err(|_| TransformError::InadmissibleShift)?
            .is_zero()
        {
            return Err(TransformError::InadmissibleShift);
        }
    }

    let (tv, xv) = (Var::t(), Var::x());
    let t_t = diff(&tr.t_map, &tv);
    let x_x = diff(&tr.x_map, &xv);
    let x_t = diff(&tr.x_map, &tv);
    let x_xx = diff(&diff(&tr.x_map, &xv), &xv);

    let a_new = Expr::div(
        Expr::mul(Expr::powi(x_x.clone(), 2), eq.a.clone()),
        t_t.clone(),
    );
    let b_new = Expr::sub(
        Expr::mul(
            Expr::div(x_x, t_t.clone()),
            Expr::sub(
                eq.b.clone(),
                Expr::prod(vec![
                    Expr::int(2),
                    Expr::div(diff(&tr.u1, &xv), tr.u1.clone()),
                    eq.a.clone(),
                ]),
            ),
        ),
        Expr::div(Expr::sub(x_t, Expr::mul(eq.a.clone(), x_xx)), t_t.clone()),
    );
    let c_new = Expr::neg(Expr::mul(
        Expr::div(tr.u1.clone(), t_t),
        eq.apply_l_raw(&Expr::powi(tr.u1.clone(), -1)),
    ));

    let mut out = ParabolicEquation {
        a: to_new_vars(&a_new, tr)?,
        b: to_new_vars(&b_new, tr)?,
        c: to_new_vars(&c_new, tr)?,
        singular: Vec::new(),
    };
    for s in &eq.singular {
        out.singular.push(to_new_vars(s, tr)?);
    }
    Ok(out)
}

/// Push a tau=1 operator: normalize the transformed operator's coefficient
/// of d/dt~ back to one, yielding new coefficients in the new variables.
pub fn push_operator_tau1(
    op: &ReductionOperator,
    tr: &PointTransformation,
) -> Result<ReductionOperator, TransformError> {
    let (g1, g2, g3) = match op {
        ReductionOperator::Tau1 { g1, g2, g3 } => (g1, g2, g3),
        _ => {
            return Err(TransformError::Signature(
                "push_operator_tau1 expects a tau=1 operator",
            ))
        }
    };
    let (tv, xv) = (Var::t(), Var::x());
    let t_t = diff(&tr.t_map, &tv);
    let x_x = diff(&tr.x_map, &xv);
    let x_t = diff(&tr.x_map, &tv);
    let (u1, u0) = (tr.u1.clone(), tr.u0.clone());
    let (u1_x, u1_t) = (diff(&u1, &xv), diff(&u1, &tv));
    let (u0_x, u0_t) = (diff(&u0, &xv), diff(&u0, &tv));

    let g1_new = Expr::add(
        Expr::prod(vec![Expr::div(x_x, t_t.clone()), g1.clone()]),
        Expr::div(x_t, t_t.clone()),
    );
    let g2_new = Expr::sum(vec![
        Expr::div(g2.clone(), t_t.clone()),
        Expr::prod(vec![
            Expr::div(u1_x.clone(), Expr::mul(t_t.clone(), u1.clone())),
            g1.clone(),
        ]),
        Expr::div(u1_t.clone(), Expr::mul(t_t.clone(), u1.clone())),
    ]);
    let g3_new = Expr::sum(vec![
        Expr::prod(vec![Expr::div(u1.clone(), t_t.clone()), g3.clone()]),
        Expr::neg(Expr::prod(vec![
            Expr::div(u0.clone(), t_t.clone()),
            g2.clone(),
        ])),
        Expr::prod(vec![
            Expr::div(
                Expr::sub(
                    Expr::mul(u0_x.clone(), u1.clone()),
                    Expr::mul(u0.clone(), u1_x),
                ),
                Expr::mul(t_t.clone(), u1.clone()),
            ),
            g1.clone(),
        ]),
        Expr::div(
            Expr::sub(Expr::mul(u0_t, u1.clone()), Expr::mul(u0, u1_t)),
            Expr::mul(t_t, u1),
        ),
    ]);

    Ok(ReductionOperator::Tau1 {
        g1: to_new_vars(&g1_new, tr)?,
        g2: to_new_vars(&g2_new, tr)?,
        g3: to_new_vars(&g3_new, tr)?,
    })
}

/// Push a tau=0 operator: normalize the coefficient of d/dx~ to one. The
/// variable u transforms as a coordinate, so the inverse substitution also
/// rewrites u.
pub fn push_operator_tau0(
    op: &ReductionOperator,
    tr: &PointTransformation,
) -> Result<ReductionOperator, TransformError> {
    let eta = match op {
        ReductionOperator::Tau0 { eta } => eta,
        _ => {
            return Err(TransformError::Signature(
                "push_operator_tau0 expects a tau=0 operator",
            ))
        }
    };
    let xv = Var::x();
    let x_x = diff(&tr.x_map, &xv);
    let eta_new = Expr::sum(vec![
        Expr::prod(vec![Expr::div(tr.u1.clone(), x_x.clone()), eta.clone()]),
        Expr::prod(vec![Expr::div(diff(&tr.u1, &xv), x_x.clone()), Expr::u()]),
        Expr::div(diff(&tr.u0, &xv), x_x),
    ]);

    // old u in terms of the new coordinates
    let (ti, xi) = tr.inverse_maps()?;
    let into_new = Bindings::new().var("t", ti.clone()).var("x", xi.clone());
    let u1_new = substitute(&tr.u1, &into_new).map_err(ProbeError::from)?;
    let u0_new = substitute(&tr.u0, &into_new).map_err(ProbeError::from)?;
    let u_old = Expr::div(Expr::sub(Expr::u(), u0_new), u1_new);
    let full = Bindings::new().var("t", ti).var("x", xi).var("u", u_old);
    Ok(ReductionOperator::Tau0 {
        eta: substitute(&eta_new, &full).map_err(ProbeError::from)?,
    })
}

/// An infinitesimal operator `tau(t) dt + xi(t,x) dx + (zeta1 u + zeta0) du`.
#[derive(Clone, Debug, PartialEq)]
pub struct InfinitesimalOperator {
    pub tau: Expr,
    pub xi: Expr,
    pub zeta1: Expr,
    pub zeta0: Expr,
}

impl InfinitesimalOperator {
    pub fn new(tau: Expr, xi: Expr, zeta1: Expr, zeta0: Expr) -> Result<Self, TransformError> {
        if tau.contains_var(&Var::x()) || tau.contains_var(&Var::u()) {
            return Err(TransformError::Signature("tau"));
        }
        if xi.contains_var(&Var::u()) {
            return Err(TransformError::Signature("xi"));
        }
        for (e, n) in [(&zeta1, "zeta1"), (&zeta0, "zeta0")] {
            if e.contains_var(&Var::u()) {
                return Err(TransformError::Signature(match n {
                    "zeta1" => "zeta1",
                    _ => "zeta0",
                }));
            }
        }
        Ok(InfinitesimalOperator {
            tau,
            xi,
            zeta1,
            zeta0,
        })
    }

    /// The du coefficient as an expression in (t, x, u).
    pub fn zeta(&self) -> Expr {
        Expr::add(Expr::mul(self.zeta1.clone(), Expr::u()), self.zeta0.clone())
    }
}

/// The induced Lie operator on the tau=1 determining system, acting on
/// (t, x, g1, g2, g3).
#[derive(Clone, Debug, PartialEq)]
pub struct InducedDe1 {
    pub tau: Expr,
    pub xi: Expr,
    /// Coefficients of d/dg1, d/dg2, d/dg3; expressions in t, x and the
    /// unknowns g1(t,x), g2(t,x), g3(t,x).
    pub theta: [Expr; 3],
}

/// The induced Lie operator on the tau=0 determining equation, acting on
/// (t, x, u, eta).
#[derive(Clone, Debug, PartialEq)]
pub struct InducedDe0 {
    pub tau: Expr,
    pub xi: Expr,
    pub zeta: Expr,
    /// Coefficient of d/d eta; an expression in t, x, u and eta(t,x,u).
    pub theta: Expr,
}

/// Induce a Lie operator of the source equation onto the tau=1 determining
/// system.
pub fn induce_on_de1(q: &InfinitesimalOperator) -> InducedDe1 {
    let (tv, xv) = (Var::t(), Var::x());
    let [g1d, g2d, g3d] = detsys::g_decls();
    let g1 = Expr::func(&g1d);
    let g2 = Expr::func(&g2d);
    let g3 = Expr::func(&g3d);
    let tau_t = diff(&q.tau, &tv);
    let xi_x = diff(&q.xi, &xv);
    let xi_t = diff(&q.xi, &tv);
    let z1 = q.zeta1.clone();
    let z0 = q.zeta0.clone();

    let theta1 = Expr::add(Expr::mul(Expr::sub(xi_x, tau_t.clone()), g1.clone()), xi_t);
    let theta2 = Expr::sum(vec![
        Expr::neg(Expr::mul(tau_t.clone(), g2.clone())),
        Expr::mul(diff(&z1, &xv), g1.clone()),
        diff(&z1, &tv),
    ]);
    let theta3 = Expr::sum(vec![
        Expr::mul(Expr::sub(z1, tau_t), g3),
        Expr::neg(Expr::mul(z0.clone(), g2)),
        Expr::mul(diff(&z0, &xv), g1),
        diff(&z0, &tv),
    ]);

    InducedDe1 {
        tau: q.tau.clone(),
        xi: q.xi.clone(),
        theta: [theta1, theta2, theta3],
    }
}

/// Induce a Lie operator of the source equation onto the tau=0 determining
/// equation: `Q0 = Q + theta d/d eta` with
/// `theta = (zeta1 - xi_x) eta + zeta1_x u + zeta0_x`.
pub fn induce_on_de0(q: &InfinitesimalOperator) -> InducedDe0 {
    let xv = Var::x();
    let eta = Expr::func(&detsys::eta_decl());
    let theta = Expr::sum(vec![
        Expr::mul(Expr::sub(q.zeta1.clone(), diff(&q.xi, &xv)), eta),
        Expr::mul(diff(&q.zeta1, &xv), Expr::u()),
        diff(&q.zeta0, &xv),
    ]);
    InducedDe0 {
        tau: q.tau.clone(),
        xi: q.xi.clone(),
        zeta: q.zeta(),
        theta,
    }
}

/// Catalog of essential Lie operators for a classified reduced equation,
/// named for reporting. The trivial family f du is available through
/// [`solution_operator`].
pub fn lie_catalog(case: &LieCase) -> Vec<(String, InfinitesimalOperator)> {
    let zero = Expr::zero;
    let dt = || InfinitesimalOperator {
        tau: Expr::one(),
        xi: zero(),
        zeta1: zero(),
        zeta0: zero(),
    };
    let dx = || InfinitesimalOperator {
        tau: zero(),
        xi: Expr::one(),
        zeta1: zero(),
        zeta0: zero(),
    };
    let scale_u = || InfinitesimalOperator {
        tau: zero(),
        xi: zero(),
        zeta1: Expr::one(),
        zeta0: zero(),
    };
    // D = 2t dt + x dx
    let dil = || InfinitesimalOperator {
        tau: Expr::mul(Expr::int(2), Expr::t()),
        xi: Expr::x(),
        zeta1: zero(),
        zeta0: zero(),
    };
    // Pi = 4t^2 dt + 4tx dx - (x^2 + 2t) u du
    let proj = || InfinitesimalOperator {
        tau: Expr::mul(Expr::int(4), Expr::powi(Expr::t(), 2)),
        xi: Expr::prod(vec![Expr::int(4), Expr::t(), Expr::x()]),
        zeta1: Expr::neg(Expr::add(
            Expr::powi(Expr::x(), 2),
            Expr::mul(Expr::int(2), Expr::t()),
        )),
        zeta0: zero(),
    };
    // G = 2t dx - xu du
    let galilei = || InfinitesimalOperator {
        tau: zero(),
        xi: Expr::mul(Expr::int(2), Expr::t()),
        zeta1: Expr::neg(Expr::x()),
        zeta0: zero(),
    };

    match case {
        LieCase::Free => vec![
            ("dt".into(), dt()),
            ("dx".into(), dx()),
            ("G".into(), galilei()),
            ("D".into(), dil()),
            ("Pi".into(), proj()),
            ("u_du".into(), scale_u()),
        ],
        LieCase::InverseSquare { .. } => vec![
            ("dt".into(), dt()),
            ("D".into(), dil()),
            ("Pi".into(), proj()),
            ("u_du".into(), scale_u()),
        ],
        LieCase::Stationary => vec![("dt".into(), dt()), ("u_du".into(), scale_u())],
        LieCase::Kernel => vec![("u_du".into(), scale_u())],
    }
}

/// The trivial Lie operator `f(t,x) du` attached to a verified solution f.
pub fn solution_operator(
    eq: &ParabolicEquation,
    f: Expr,
    cfg: &ProbeConfig,
) -> Result<InfinitesimalOperator, TransformError> {
    if !eq
        .solves(&f, cfg)
        .map_err(|_| TransformError::Signature("f"))?
        .is_zero()
    {
        return Err(TransformError::InadmissibleShift);
    }
    InfinitesimalOperator::new(Expr::zero(), Expr::zero(), Expr::zero(), f)
}

/// Classical infinitesimal criterion: the second prolongation of Q applied
/// to Lu, restricted only to Lu = 0.
pub fn check_lie_symmetry(
    eq: &ParabolicEquation,
    q: &InfinitesimalOperator,
    cfg: &ProbeConfig,
) -> Result<ZeroVerdict, TransformError> {
    let (tv, xv) = (Var::t(), Var::x());
    let w = FuncDecl::new("u", &[tv.clone(), xv.clone()]);
    let wn = jet::unknown(&w);
    let phi = Expr::add(Expr::mul(q.zeta1.clone(), wn.clone()), q.zeta0.clone());

    let lu = eq.apply_l_raw(&wn);
    let field = JetField {
        independents: vec![(tv.clone(), q.tau.clone()), (xv.clone(), q.xi.clone())],
        dependents: vec![(w.clone(), phi)],
    };
    let crit = field.apply_prolonged(&lu);

    // restrict to Lu = 0 solved as an evolution equation
    let rhs = Expr::sum(vec![
        Expr::mul(eq.a.clone(), jet::jet2(&w, &xv, &xv)),
        Expr::mul(eq.b.clone(), jet::jet1(&w, &xv)),
        Expr::mul(eq.c.clone(), wn),
    ]);
    let reduced = jet::eliminate_evolution(&crit, &tv, &[(w, rhs)]);
    Ok(equals_zero(&reduced, &eq.probe_cfg(cfg))?)
}

/// Infinitesimal invariance of the tau=1 determining system under an induced
/// operator: prolong to second order, restrict to the system manifold by
/// solving for the leading jets g1_t, g2_t, g3_t, and zero-test each
/// component.
pub fn check_induced_invariance_de1(
    eq: &ParabolicEquation,
    ind: &InducedDe1,
    cfg: &ProbeConfig,
) -> Result<Vec<ZeroVerdict>, TransformError> {
    let (tv, xv) = (Var::t(), Var::x());
    let sys = detsys::derive_de1(eq);
    let decls = sys.unknowns.clone();
    let field = JetField {
        independents: vec![(tv.clone(), ind.tau.clone()), (xv, ind.xi.clone())],
        dependents: decls
            .iter()
            .cloned()
            .zip(ind.theta.iter().cloned())
            .collect(),
    };

    let pcfg = eq.probe_cfg(cfg);
    let mut rhs: Vec<(Arc<FuncDecl>, Expr)> = Vec::new();
    for (d, e) in decls.iter().zip(&sys.equations) {
        let lead = jet::jet1(d, &Var::t());
        let solved = jet::solve_linear_for(e, &lead, &pcfg)?;
        rhs.push((d.clone(), solved));
    }

    let mut out = Vec::with_capacity(sys.equations.len());
    for e in &sys.equations {
        let crit = field.apply_prolonged(e);
        let reduced = jet::eliminate_evolution(&crit, &Var::t(), &rhs);
        out.push(equals_zero(&reduced, &pcfg)?);
    }
    Ok(out)
}

/// Infinitesimal invariance of the tau=0 determining equation under an
/// induced operator.
pub fn check_induced_invariance_de0(
    eq: &ParabolicEquation,
    ind: &InducedDe0,
    cfg: &ProbeConfig,
) -> Result<ZeroVerdict, TransformError> {
    let (tv, xv, uv) = (Var::t(), Var::x(), Var::u());
    let sys = detsys::derive_de0(eq);
    let ed = sys.unknowns[0].clone();
    let field = JetField {
        independents: vec![
            (tv.clone(), ind.tau.clone()),
            (xv, ind.xi.clone()),
            (uv, ind.zeta.clone()),
        ],
        dependents: vec![(ed.clone(), ind.theta.clone())],
    };

    let pcfg = eq.probe_cfg(cfg);
    let lead = jet::jet1(&ed, &Var::t());
    let solved = jet::solve_linear_for(&sys.equations[0], &lead, &pcfg)?;

    let crit = field.apply_prolonged(&sys.equations[0]);
    let reduced = jet::eliminate_evolution(&crit, &Var::t(), &[(ed, solved)]);
    Ok(equals_zero(&reduced, &pcfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symb::probe::ZeroVerdict;

    fn cfg() -> ProbeConfig {
        ProbeConfig::default()
    }

    fn heat() -> ParabolicEquation {
        ParabolicEquation::heat()
    }

    fn scaling_4t_2x() -> PointTransformation {
        PointTransformation::new(
            Expr::mul(Expr::int(4), Expr::t()),
            Expr::mul(Expr::int(2), Expr::x()),
            Expr::one(),
            Expr::zero(),
        )
    }

    /// The bridge u~ = x u between the transfer equation with h = 2 and the
    /// heat equation.
    fn xu_bridge() -> PointTransformation {
        PointTransformation::new(Expr::t(), Expr::x(), Expr::x(), Expr::zero())
    }

    fn transfer_h2() -> ParabolicEquation {
        ParabolicEquation {
            a: Expr::one(),
            b: Expr::div(Expr::int(2), Expr::x()),
            c: Expr::zero(),
            singular: vec![Expr::x()],
        }
    }

    #[test]
    fn identity_and_scaling_push() {
        let id = PointTransformation::identity();
        let pushed = push_equation(&heat(), &id, &cfg()).unwrap();
        assert!(pushed.a.is_one() && pushed.b.is_zero() && pushed.c.is_zero());

        let pushed = push_equation(&heat(), &scaling_4t_2x(), &cfg()).unwrap();
        assert!(pushed.a.is_one(), "A~ = {}", pushed.a);
        assert!(pushed.b.is_zero() && pushed.c.is_zero());
    }

    #[test]
    fn transfer_h2_maps_to_heat() {
        let pushed = push_equation(&transfer_h2(), &xu_bridge(), &cfg()).unwrap();
        let sing = cfg().with_singular(vec![Expr::x()]);
        assert!(equals_zero(&Expr::sub(pushed.a, Expr::one()), &sing)
            .unwrap()
            .is_zero());
        assert!(
            equals_zero(&pushed.b, &sing).unwrap().is_zero(),
            "B~ nonzero"
        );
        assert!(
            equals_zero(&pushed.c, &sing).unwrap().is_zero(),
            "C~ nonzero"
        );
    }

    #[test]
    fn reduced_potential_scaling() {
        // V(t,x) potential, sigma = 2: t~ = 4t, x~ = 2x, V~ = V(t/4, x/2)/4
        let vd = crate::symb::ast::FuncDecl::new("V", &[Var::t(), Var::x()]);
        let eq = ParabolicEquation {
            a: Expr::one(),
            b: Expr::zero(),
            c: Expr::neg(Expr::func(&vd)),
            singular: Vec::new(),
        };
        let pushed = push_equation(&eq, &scaling_4t_2x(), &cfg()).unwrap();
        let expect = Expr::mul(
            Expr::rational(-1, 4),
            Expr::func_at(
                &vd,
                vec![
                    Expr::div(Expr::t(), Expr::int(4)),
                    Expr::div(Expr::x(), Expr::int(2)),
                ],
            ),
        );
        assert_eq!(pushed.c, expect, "C~ = {}", pushed.c);
    }

    #[test]
    fn admissibility_requires_solution_shift() {
        // U0/U1 = x^2 + 2t solves the heat equation: admissible
        let ok = PointTransformation::new(
            Expr::t(),
            Expr::x(),
            Expr::one(),
            Expr::add(Expr::powi(Expr::x(), 2), Expr::mul(Expr::int(2), Expr::t())),
        );
        assert!(push_equation(&heat(), &ok, &cfg()).is_ok());

        // U0/U1 = x^3 does not
        let bad =
            PointTransformation::new(Expr::t(), Expr::x(), Expr::one(), Expr::powi(Expr::x(), 3));
        assert!(matches!(
            push_equation(&heat(), &bad, &cfg()),
            Err(TransformError::InadmissibleShift)
        ));
    }

    #[test]
    fn push_tau1_scaling_covariance() {
        // Q = dt - 1/x dx on heat maps to dt~ - 1/x~ dx~ under t~=4t, x~=2x
        let q = ReductionOperator::tau1(
            Expr::neg(Expr::powi(Expr::x(), -1)),
            Expr::zero(),
            Expr::zero(),
        )
        .unwrap();
        let pushed = push_operator_tau1(&q, &scaling_4t_2x()).unwrap();
        match &pushed {
            ReductionOperator::Tau1 { g1, g2, g3 } => {
                assert_eq!(*g1, Expr::neg(Expr::powi(Expr::x(), -1)), "g1~ = {}", g1);
                assert!(g2.is_zero() && g3.is_zero());
            }
            _ => unreachable!(),
        }
        // identity leaves it unchanged
        let same = push_operator_tau1(&q, &PointTransformation::identity()).unwrap();
        assert_eq!(same, q);
    }

    #[test]
    fn push_tau0_scaling_and_bridge() {
        let q = ReductionOperator::tau0(Expr::div(Expr::u(), Expr::x()));
        let pushed = push_operator_tau0(&q, &scaling_4t_2x()).unwrap();
        assert_eq!(
            pushed,
            ReductionOperator::tau0(Expr::div(Expr::u(), Expr::x()))
        );

        // eta = 0 on the h=2 transfer equation maps to eta~ = u/x on heat
        let q0 = ReductionOperator::tau0(Expr::zero());
        let pushed = push_operator_tau0(&q0, &xu_bridge()).unwrap();
        assert_eq!(
            pushed,
            ReductionOperator::tau0(Expr::div(Expr::u(), Expr::x()))
        );
    }

    #[test]
    fn covariance_under_push() {
        // solutions of the determining systems stay solutions after a push
        let cases: Vec<(ParabolicEquation, ReductionOperator, PointTransformation)> = vec![
            (
                heat(),
                ReductionOperator::tau1(
                    Expr::neg(Expr::powi(Expr::x(), -1)),
                    Expr::zero(),
                    Expr::zero(),
                )
                .unwrap(),
                scaling_4t_2x(),
            ),
            (
                transfer_h2(),
                ReductionOperator::tau1(
                    Expr::mul(Expr::int(-3), Expr::powi(Expr::x(), -1)),
                    Expr::zero(),
                    Expr::zero(),
                )
                .unwrap(),
                xu_bridge(),
            ),
            (
                heat(),
                ReductionOperator::tau0(Expr::neg(Expr::div(
                    Expr::mul(Expr::x(), Expr::u()),
                    Expr::mul(Expr::int(2), Expr::t()),
                ))),
                scaling_4t_2x(),
            ),
            (
                transfer_h2(),
                ReductionOperator::tau0(Expr::zero()),
                xu_bridge(),
            ),
        ];
        for (eq, op, tr) in &cases {
            let before = crate::detsys::residual_of_operator(eq, op, &cfg()).unwrap();
            assert!(
                before.iter().all(|v| v.is_zero()),
                "premise fails: {:?}",
                op
            );
            let new_eq = push_equation(eq, tr, &cfg()).unwrap();
            let new_op = match op {
                ReductionOperator::Tau1 { .. } => push_operator_tau1(op, tr).unwrap(),
                ReductionOperator::Tau0 { .. } => push_operator_tau0(op, tr).unwrap(),
            };
            let after = crate::detsys::residual_of_operator(&new_eq, &new_op, &cfg()).unwrap();
            assert!(
                after.iter().all(|v| v.is_zero()),
                "covariance fails for {:?}: {:?}",
                op,
                after
            );
        }
    }

    #[test]
    fn functoriality_of_composition() {
        let t1 = scaling_4t_2x();
        let t2 = PointTransformation::new(
            Expr::add(Expr::t(), Expr::one()),
            Expr::add(Expr::x(), Expr::t()),
            Expr::one(),
            Expr::zero(),
        );
        let seq =
            push_equation(&push_equation(&heat(), &t1, &cfg()).unwrap(), &t2, &cfg()).unwrap();
        let composed = push_equation(&heat(), &t1.compose(&t2), &cfg()).unwrap();
        for (a, b) in [
            (&seq.a, &composed.a),
            (&seq.b, &composed.b),
            (&seq.c, &composed.c),
        ] {
            assert!(
                equals_zero(&Expr::sub(a.clone(), b.clone()), &cfg())
                    .unwrap()
                    .is_zero(),
                "{} vs {}",
                a,
                b
            );
        }
    }

    fn op_d() -> InfinitesimalOperator {
        InfinitesimalOperator::new(
            Expr::mul(Expr::int(2), Expr::t()),
            Expr::x(),
            Expr::zero(),
            Expr::zero(),
        )
        .unwrap()
    }

    fn op_g() -> InfinitesimalOperator {
        InfinitesimalOperator::new(
            Expr::zero(),
            Expr::mul(Expr::int(2), Expr::t()),
            Expr::neg(Expr::x()),
            Expr::zero(),
        )
        .unwrap()
    }

    fn op_pi() -> InfinitesimalOperator {
        InfinitesimalOperator::new(
            Expr::mul(Expr::int(4), Expr::powi(Expr::t(), 2)),
            Expr::prod(vec![Expr::int(4), Expr::t(), Expr::x()]),
            Expr::neg(Expr::add(
                Expr::powi(Expr::x(), 2),
                Expr::mul(Expr::int(2), Expr::t()),
            )),
            Expr::zero(),
        )
        .unwrap()
    }

    #[test]
    fn induced_de1_known_forms() {
        let [g1d, g2d, g3d] = crate::detsys::g_decls();
        let g1 = Expr::func(&g1d);
        let g2 = Expr::func(&g2d);
        let g3 = Expr::func(&g3d);

        // trivial: dt induces dt
        let dt = InfinitesimalOperator::new(Expr::one(), Expr::zero(), Expr::zero(), Expr::zero())
            .unwrap();
        let ind = induce_on_de1(&dt);
        assert!(ind.theta.iter().all(|t| t.is_zero()));

        // D induces 2t dt + x dx - g1 dg1 - 2 g2 dg2 - 2 g3 dg3
        let ind = induce_on_de1(&op_d());
        assert_eq!(ind.theta[0], Expr::neg(g1.clone()));
        assert_eq!(ind.theta[1], Expr::mul(Expr::int(-2), g2.clone()));
        assert_eq!(ind.theta[2], Expr::mul(Expr::int(-2), g3.clone()));

        // G induces 2t dx + 2 dg1 - g1 dg2 - x g3 dg3
        let ind = induce_on_de1(&op_g());
        assert_eq!(ind.theta[0], Expr::int(2));
        assert_eq!(ind.theta[1], Expr::neg(g1.clone()));
        assert_eq!(ind.theta[2], Expr::neg(Expr::mul(Expr::x(), g3.clone())));

        // Pi induces 4(x - t g1) dg1 - (8t g2 + 2x g1 + 2) dg2 - (x^2+10t) g3 dg3
        let ind = induce_on_de1(&op_pi());
        assert_eq!(
            ind.theta[0],
            Expr::mul(
                Expr::int(4),
                Expr::sub(Expr::x(), Expr::mul(Expr::t(), g1.clone()))
            )
        );
        assert_eq!(
            ind.theta[1],
            Expr::neg(Expr::sum(vec![
                Expr::prod(vec![Expr::int(8), Expr::t(), g2]),
                Expr::prod(vec![Expr::int(2), Expr::x(), g1]),
                Expr::int(2),
            ]))
        );
        assert_eq!(
            ind.theta[2],
            Expr::neg(Expr::mul(
                Expr::add(
                    Expr::powi(Expr::x(), 2),
                    Expr::mul(Expr::int(10), Expr::t())
                ),
                g3
            ))
        );
    }

    #[test]
    fn induced_de0_known_forms() {
        let eta = Expr::func(&crate::detsys::eta_decl());

        // D induces theta = -eta
        let ind = induce_on_de0(&op_d());
        assert_eq!(ind.theta, Expr::neg(eta.clone()));

        // G induces theta = -(x eta + u)
        let ind = induce_on_de0(&op_g());
        assert_eq!(
            ind.theta,
            Expr::neg(Expr::add(Expr::mul(Expr::x(), eta.clone()), Expr::u()))
        );

        // Pi induces theta = -(x^2 + 6t) eta - 2xu
        let ind = induce_on_de0(&op_pi());
        assert_eq!(
            ind.theta,
            Expr::sub(
                Expr::neg(Expr::mul(
                    Expr::add(Expr::powi(Expr::x(), 2), Expr::mul(Expr::int(6), Expr::t())),
                    eta
                )),
                Expr::prod(vec![Expr::int(2), Expr::x(), Expr::u()])
            )
        );
    }

    #[test]
    fn lie_symmetry_catalog_heat() {
        let eq = heat();
        let red = crate::pde::ReducedEquation::new(Expr::zero()).unwrap();
        let case = crate::pde::classify_lie(&red, &cfg()).unwrap();
        for (name, q) in lie_catalog(&case) {
            let v = check_lie_symmetry(&eq, &q, &cfg()).unwrap();
            assert_eq!(
                v,
                ZeroVerdict::ProvenZero,
                "operator {} fails: {:?}",
                name,
                v
            );
        }
        // the trivial family f du with a verified solution
        let f = Expr::add(Expr::powi(Expr::x(), 2), Expr::mul(Expr::int(2), Expr::t()));
        let q = solution_operator(&eq, f, &cfg()).unwrap();
        assert!(check_lie_symmetry(&eq, &q, &cfg()).unwrap().is_zero());
    }

    #[test]
    fn lie_symmetry_negative_controls() {
        // x dx alone is not a symmetry of the heat equation
        let q = InfinitesimalOperator::new(Expr::zero(), Expr::x(), Expr::zero(), Expr::zero())
            .unwrap();
        assert!(matches!(
            check_lie_symmetry(&heat(), &q, &cfg()).unwrap(),
            ZeroVerdict::NonZero(_)
        ));

        // dx is not a symmetry of the inverse-square potential equation
        let eq = ParabolicEquation {
            a: Expr::one(),
            b: Expr::zero(),
            c: Expr::neg(Expr::mul(Expr::param("mu"), Expr::powi(Expr::x(), -2))),
            singular: vec![Expr::x(), Expr::param("mu")],
        };
        let q = InfinitesimalOperator::new(Expr::zero(), Expr::one(), Expr::zero(), Expr::zero())
            .unwrap();
        assert!(matches!(
            check_lie_symmetry(&eq, &q, &cfg()).unwrap(),
            ZeroVerdict::NonZero(_)
        ));
    }

    #[test]
    fn inverse_square_catalog_passes() {
        let eq = ParabolicEquation {
            a: Expr::one(),
            b: Expr::zero(),
            c: Expr::neg(Expr::mul(Expr::param("mu"), Expr::powi(Expr::x(), -2))),
            singular: vec![Expr::x(), Expr::param("mu")],
        };
        let case = crate::pde::LieCase::InverseSquare {
            mu: Expr::param("mu"),
        };
        for (name, q) in lie_catalog(&case) {
            let v = check_lie_symmetry(&eq, &q, &cfg()).unwrap();
            assert!(v.is_zero(), "operator {} fails: {:?}", name, v);
        }
    }

    #[test]
    fn induced_invariance_de1_free_case() {
        let eq = heat();
        for (name, q) in [("D", op_d()), ("G", op_g()), ("Pi", op_pi())] {
            let ind = induce_on_de1(&q);
            let verdicts = check_induced_invariance_de1(&eq, &ind, &cfg()).unwrap();
            assert!(
                verdicts.iter().all(|v| v.is_zero()),
                "{}_1 fails invariance: {:?}",
                name,
                verdicts
            );
        }
    }

    #[test]
    fn induced_invariance_de0_free_case_and_discrepancy() {
        let eq = heat();
        for (name, q) in [("D", op_d()), ("G", op_g()), ("Pi", op_pi())] {
            let ind = induce_on_de0(&q);
            let v = check_induced_invariance_de0(&eq, &ind, &cfg()).unwrap();
            assert!(v.is_zero(), "{}_0 fails invariance: {:?}", name, v);
        }

        // the printed eta-coefficient -(x eta + 6t eta + 2xu) fails, while
        // the derived -(x^2 + 6t) eta - 2xu passes
        let eta = Expr::func(&crate::detsys::eta_decl());
        let printed = InducedDe0 {
            tau: op_pi().tau,
            xi: op_pi().xi,
            zeta: op_pi().zeta(),
            theta: Expr::neg(Expr::sum(vec![
                Expr::mul(Expr::x(), eta.clone()),
                Expr::prod(vec![Expr::int(6), Expr::t(), eta]),
                Expr::prod(vec![Expr::int(2), Expr::x(), Expr::u()]),
            ])),
        };
        let v = check_induced_invariance_de0(&eq, &printed, &cfg()).unwrap();
        assert!(
            matches!(v, ZeroVerdict::NonZero(_)),
            "printed coefficient unexpectedly passes: {:?}",
            v
        );
    }
}
