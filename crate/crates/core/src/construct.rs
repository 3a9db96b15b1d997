//! Constructive correspondences between solution families and reduction
//! operators: Wronskian formulas for tau=1 operators from solution pairs,
//! linear-in-u eta operators from solution pairs, the hodograph route from a
//! one-parametric family, the Cole-Hopf operator for equations with C = 0,
//! and Darboux operators with their transformed equations.

use crate::detsys::{self, ReductionOperator};
use crate::pde::ParabolicEquation;
use crate::symb::ast::{Expr, Var};
use crate::symb::diff::{diff, diff_n};
use crate::symb::probe::{equals_zero, ProbeConfig, ProbeError, ZeroVerdict};
use crate::symb::subst::subst_vars;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("component {0} is not a solution of the equation")]
    NotASolution(&'static str),
    #[error("the solutions are linearly dependent (Wronskian vanishes identically)")]
    DependentSolutions,
    #[error("the equation must have C = 0 for this construction")]
    NonzeroC,
    #[error("the seed solution must be nonconstant")]
    ConstantSeed,
    #[error("the inversion check failed: substituting the family into Phi does not return the parameter")]
    BadInversion(String),
    #[error("operator does not match the tuple: {0}")]
    OperatorMismatch(String),
    #[error("the family parameter {0} is not essential")]
    InessentialParameter(String),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Detsys(#[from] crate::detsys::DetsysError),
}

/// Wronskian of the given expressions with respect to `v`: the determinant
/// of successive derivatives, rows indexed by derivative order.
pub fn wronskian(fs: &[Expr], v: &Var) -> Expr {
    assert!(!fs.is_empty(), "wronskian of an empty list");
    let n = fs.len();
    let mut rows: Vec<Vec<Expr>> = Vec::with_capacity(n);
    for order in 0..n {
        rows.push(fs.iter().map(|f| diff_n(f, v, order as u32)).collect());
    }
    determinant(&rows)
}

fn determinant(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut terms = Vec::with_capacity(n);
    for (j, pivot) in m[0].iter().enumerate() {
        if pivot.is_zero() {
            continue;
        }
        let minor: Vec<Vec<Expr>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        terms.push(Expr::prod(vec![
            Expr::int(sign),
            pivot.clone(),
            determinant(&minor),
        ]));
    }
    Expr::sum(terms)
}

/// A triple (v1, v2, v3) of solutions with v1, v2 independent; v3 may be 0.
#[derive(Clone, Debug)]
pub struct SolutionTuple {
    pub v1: Expr,
    pub v2: Expr,
    pub v3: Expr,
    pub source: ParabolicEquation,
}

impl SolutionTuple {
    pub fn new(
        eq: &ParabolicEquation,
        v1: Expr,
        v2: Expr,
        v3: Expr,
        cfg: &ProbeConfig,
    ) -> Result<Self, ConstructError> {
        for (e, n) in [(&v1, "v1"), (&v2, "v2")] {
            if !eq
                .solves(e, cfg)
                .map_err(|_| ConstructError::NotASolution(n))?
                .is_zero()
            {
                return Err(ConstructError::NotASolution(if n == "v1" {
                    "v1"
                } else {
                    "v2"
                }));
            }
        }
        if !v3.is_zero()
            && !eq
                .solves(&v3, cfg)
                .map_err(|_| ConstructError::NotASolution("v3"))?
                .is_zero()
        {
            return Err(ConstructError::NotASolution("v3"));
        }
        let w = wronskian(&[v1.clone(), v2.clone()], &Var::x());
        match equals_zero(&w, &eq.probe_cfg(cfg))? {
            ZeroVerdict::NonZero(_) => {}
            _ => return Err(ConstructError::DependentSolutions),
        }
        Ok(SolutionTuple {
            v1,
            v2,
            v3,
            source: eq.clone(),
        })
    }
}

/// Solution families attached to operators.
#[derive(Clone, Debug)]
pub enum SolutionFamily {
    /// `u = c1 v1 + c2 v2 + v3`, the invariant family of a tau=1 operator.
    TwoParam { v1: Expr, v2: Expr, v3: Expr },
    /// `u = f(t,x,kappa)` with one essential parameter.
    OneParam { expr: Expr, param: Expr },
}

impl SolutionFamily {
    /// Check the family invariants: the expression solves the equation for
    /// probed parameter values, and each parameter is essential (for the
    /// two-parametric form: v1, v2 independent and every component solves).
    pub fn validate(
        &self,
        eq: &ParabolicEquation,
        cfg: &ProbeConfig,
    ) -> Result<(), ConstructError> {
        if !eq
            .solves(&self.expr(), cfg)
            .map_err(|_| ConstructError::NotASolution("family"))?
            .is_zero()
        {
            return Err(ConstructError::NotASolution("family"));
        }
        match self {
            SolutionFamily::OneParam { expr, param } => {
                let name = match param {
                    Expr::Param(p) => p.name().to_string(),
                    _ => return Err(ConstructError::InessentialParameter("?".into())),
                };
                let z = Var::new("__famslot");
                let swapped = expr.replace(param, &Expr::var(&z));
                let sensitivity = diff(&swapped, &z);
                match equals_zero(&sensitivity, &eq.probe_cfg(cfg))? {
                    ZeroVerdict::NonZero(_) => Ok(()),
                    _ => Err(ConstructError::InessentialParameter(name)),
                }
            }
            SolutionFamily::TwoParam { v1, v2, v3 } => {
                let _ = SolutionTuple::new(eq, v1.clone(), v2.clone(), v3.clone(), cfg)?;
                Ok(())
            }
        }
    }

    pub fn expr(&self) -> Expr {
        match self {
            SolutionFamily::TwoParam { v1, v2, v3 } => Expr::sum(vec![
                Expr::mul(Expr::param("c1"), v1.clone()),
                Expr::mul(Expr::param("c2"), v2.clone()),
                v3.clone(),
            ]),
            SolutionFamily::OneParam { expr, .. } => expr.clone(),
        }
    }
}

/// Build the tau=1 operator invariantly attached to a solution tuple:
/// `g1 = -A W(v1,v2)_x / W(v1,v2) - B`,
/// `g2 = -A W(v1_x, v2_x) / W(v1,v2) + C`,
/// `g3 =  A W(v1,v2,v3) / W(v1,v2)`.
pub fn operator_from_solutions(tuple: &SolutionTuple) -> Result<ReductionOperator, ConstructError> {
    let xv = Var::x();
    let eq = &tuple.source;
    let w = wronskian(&[tuple.v1.clone(), tuple.v2.clone()], &xv);
    let w_inv = Expr::powi(w.clone(), -1);

    let g1 = Expr::sub(
        Expr::neg(Expr::prod(vec![eq.a.clone(), diff(&w, &xv), w_inv.clone()])),
        eq.b.clone(),
    );
    let w_dx = wronskian(&[diff(&tuple.v1, &xv), diff(&tuple.v2, &xv)], &xv);
    let g2 = Expr::add(
        Expr::neg(Expr::prod(vec![eq.a.clone(), w_dx, w_inv.clone()])),
        eq.c.clone(),
    );
    let g3 = if tuple.v3.is_zero() {
        Expr::zero()
    } else {
        let w3 = wronskian(&[tuple.v1.clone(), tuple.v2.clone(), tuple.v3.clone()], &xv);
        Expr::prod(vec![eq.a.clone(), w3, w_inv])
    };
    Ok(detsys::ReductionOperator::tau1(g1, g2, g3)?)
}

/// The two-parametric invariant family of a tau=1 operator, given a tuple
/// that reproduces the operator. The invariance characteristic must vanish
/// identically in (t, x, c1, c2).
pub fn family_from_operator_tau1(
    eq: &ParabolicEquation,
    op: &ReductionOperator,
    tuple: &SolutionTuple,
    cfg: &ProbeConfig,
) -> Result<SolutionFamily, ConstructError> {
    let rebuilt = operator_from_solutions(tuple)?;
    let pcfg = eq.probe_cfg(cfg).with_singular(vec![wronskian(
        &[tuple.v1.clone(), tuple.v2.clone()],
        &Var::x(),
    )]);
    match (&rebuilt, op) {
        (
            ReductionOperator::Tau1 { g1, g2, g3 },
            ReductionOperator::Tau1 {
                g1: h1,
                g2: h2,
                g3: h3,
            },
        ) => {
            for (a, b, n) in [(g1, h1, "g1"), (g2, h2, "g2"), (g3, h3, "g3")] {
                if !equals_zero(&Expr::sub(a.clone(), b.clone()), &pcfg)?.is_zero() {
                    return Err(ConstructError::OperatorMismatch(n.into()));
                }
            }
        }
        _ => {
            return Err(ConstructError::OperatorMismatch(
                "operator kinds differ".into(),
            ))
        }
    }
    let fam = SolutionFamily::TwoParam {
        v1: tuple.v1.clone(),
        v2: tuple.v2.clone(),
        v3: tuple.v3.clone(),
    };
    let q_of_u = op.characteristic_on(&fam.expr());
    if !equals_zero(&q_of_u, &pcfg)?.is_zero() {
        return Err(ConstructError::OperatorMismatch(
            "invariance characteristic does not vanish on the family".into(),
        ));
    }
    Ok(fam)
}

/// The tau=0 operator with eta linear in u built from two solutions:
/// `eta1 = Psi1_x / Psi1`, `eta0 = Psi0_x - (Psi1_x / Psi1) Psi0`.
pub fn eta_from_linear_family(
    eq: &ParabolicEquation,
    psi1: &Expr,
    psi0: &Expr,
    cfg: &ProbeConfig,
) -> Result<ReductionOperator, ConstructError> {
    if psi1.is_zero() {
        return Err(ConstructError::NotASolution("Psi1"));
    }
    if !eq
        .solves(psi1, cfg)
        .map_err(|_| ConstructError::NotASolution("Psi1"))?
        .is_zero()
    {
        return Err(ConstructError::NotASolution("Psi1"));
    }
    if !psi0.is_zero()
        && !eq
            .solves(psi0, cfg)
            .map_err(|_| ConstructError::NotASolution("Psi0"))?
            .is_zero()
    {
        return Err(ConstructError::NotASolution("Psi0"));
    }
    let xv = Var::x();
    let ratio = Expr::div(diff(psi1, &xv), psi1.clone());
    let eta1 = ratio.clone();
    let eta0 = Expr::sub(diff(psi0, &xv), Expr::mul(ratio, psi0.clone()));
    Ok(ReductionOperator::tau0(Expr::add(
        Expr::mul(eta1, Expr::u()),
        eta0,
    )))
}

/// Unknowns of the split system for eta linear in u.
pub fn linear_eta_decls() -> [std::sync::Arc<crate::symb::ast::FuncDecl>; 2] {
    [
        crate::symb::ast::FuncDecl::new("eta1", &[Var::t(), Var::x()]),
        crate::symb::ast::FuncDecl::new("eta0", &[Var::t(), Var::x()]),
    ]
}

/// The pair of equations governing `eta = eta1(t,x) u + eta0(t,x)`:
/// `eta1_t = (A eta1_x + A eta1^2 + B eta1 + C)_x` and the linear companion
/// for eta0. Substituting eta linear in u into the tau=0 determining
/// equation splits into exactly these (the u-coefficient and the free term).
pub fn linear_eta_split_system(eq: &ParabolicEquation) -> detsys::DeterminingSystem {
    let [e1d, e0d] = linear_eta_decls();
    let (tv, xv) = (Var::t(), Var::x());
    let p = Expr::func(&e1d);
    let q = Expr::func(&e0d);
    let flux = Expr::sum(vec![
        Expr::mul(eq.a.clone(), diff(&p, &xv)),
        Expr::mul(eq.a.clone(), Expr::powi(p.clone(), 2)),
        Expr::mul(eq.b.clone(), p.clone()),
        eq.c.clone(),
    ]);
    let eq1 = Expr::sub(diff(&p, &tv), diff(&flux, &xv));
    let eq2 = Expr::sum(vec![
        diff(&q, &tv),
        Expr::neg(Expr::mul(
            eq.a.clone(),
            Expr::add(
                diff(&diff(&q, &xv), &xv),
                Expr::prod(vec![Expr::int(2), q.clone(), diff(&p, &xv)]),
            ),
        )),
        Expr::neg(Expr::mul(
            diff(&eq.a, &xv),
            Expr::add(diff(&q, &xv), Expr::mul(p.clone(), q.clone())),
        )),
        Expr::neg(diff(&Expr::mul(eq.b.clone(), q.clone()), &xv)),
        Expr::neg(Expr::mul(eq.c.clone(), q)),
    ]);
    detsys::DeterminingSystem {
        unknowns: vec![e1d, e0d],
        equations: vec![eq1, eq2],
        source: eq.clone(),
    }
}

/// The tau=0 operator of a one-parametric family via the hodograph
/// substitution `eta = -Phi_x / Phi_u`, where `Phi(t,x,u)` inverts the
/// family: substituting `u = f(t,x,kappa)` into Phi returns kappa.
pub fn eta_from_general_family(
    fam: &SolutionFamily,
    phi: &Expr,
    cfg: &ProbeConfig,
) -> Result<ReductionOperator, ConstructError> {
    let (f, kappa) = match fam {
        SolutionFamily::OneParam { expr, param } => (expr, param),
        _ => {
            return Err(ConstructError::BadInversion(
                "expected a one-parametric family".into(),
            ))
        }
    };
    let (xv, uv) = (Var::x(), Var::u());
    let phi_u = diff(phi, &uv);
    match equals_zero(&phi_u, cfg)? {
        ZeroVerdict::NonZero(_) => {}
        _ => {
            return Err(ConstructError::BadInversion(
                "Phi_u vanishes identically".into(),
            ))
        }
    }
    let recovered = subst_vars(phi, &[(Var::u(), f.clone())]);
    let delta = Expr::sub(recovered, kappa.clone());
    if !equals_zero(&delta, cfg)?.is_zero() {
        return Err(ConstructError::BadInversion(format!(
            "Phi(t,x,f) - parameter = {}",
            delta
        )));
    }
    let eta = Expr::neg(Expr::div(diff(phi, &xv), phi_u));
    Ok(ReductionOperator::tau0(eta))
}

/// The Cole-Hopf operator `dt - (v_xx / v_x + B) dx` of an equation with
/// C = 0, built from a nonconstant solution v.
pub fn cole_hopf_operator(
    eq: &ParabolicEquation,
    v: &Expr,
    cfg: &ProbeConfig,
) -> Result<ReductionOperator, ConstructError> {
    if !equals_zero(&eq.c, &eq.probe_cfg(cfg))?.is_zero() {
        return Err(ConstructError::NonzeroC);
    }
    if !eq
        .solves(v, cfg)
        .map_err(|_| ConstructError::NotASolution("v"))?
        .is_zero()
    {
        return Err(ConstructError::NotASolution("v"));
    }
    let xv = Var::x();
    let v_x = diff(v, &xv);
    match equals_zero(&v_x, &eq.probe_cfg(cfg))? {
        ZeroVerdict::NonZero(_) => {}
        _ => return Err(ConstructError::ConstantSeed),
    }
    let g1 = Expr::neg(Expr::add(Expr::div(diff(&v_x, &xv), v_x), eq.b.clone()));
    Ok(detsys::ReductionOperator::tau1(
        g1,
        Expr::zero(),
        Expr::zero(),
    )?)
}

/// A Darboux operator, defined by a tuple of independent seed functions.
#[derive(Clone, Debug)]
pub struct DarbouxOperator {
    pub seeds: Vec<Expr>,
}

impl DarbouxOperator {
    pub fn new(seeds: Vec<Expr>, cfg: &ProbeConfig) -> Result<Self, ConstructError> {
        assert!(
            !seeds.is_empty(),
            "a Darboux operator needs at least one seed"
        );
        let w = wronskian(&seeds, &Var::x());
        match equals_zero(&w, cfg)? {
            ZeroVerdict::NonZero(_) => {}
            _ => return Err(ConstructError::DependentSolutions),
        }
        Ok(DarbouxOperator { seeds })
    }

    pub fn order(&self) -> usize {
        self.seeds.len()
    }

    pub fn wronskian(&self) -> Expr {
        wronskian(&self.seeds, &Var::x())
    }
}

/// Apply the Darboux operator: `W(psi1, ..., psip, u) / W(psi1, ..., psip)`.
pub fn darboux_apply(dop: &DarbouxOperator, u_expr: &Expr) -> Expr {
    let mut fs = dop.seeds.clone();
    fs.push(u_expr.clone());
    Expr::div(wronskian(&fs, &Var::x()), dop.wronskian())
}

/// The transformed equation of a Darboux operator whose seeds solve `eq`:
/// `A~ = A`, `B~ = B + p A_x`,
/// `C~ = C + p B_x + p(p+1)/2 A_xx + (W_x/W) A_x + 2 (W_x/W)_x A`.
pub fn darboux_transformed_equation(
    eq: &ParabolicEquation,
    dop: &DarbouxOperator,
    cfg: &ProbeConfig,
) -> Result<ParabolicEquation, ConstructError> {
    for s in &dop.seeds {
        if !eq
            .solves(s, cfg)
            .map_err(|_| ConstructError::NotASolution("seed"))?
            .is_zero()
        {
            return Err(ConstructError::NotASolution("seed"));
        }
    }
    let xv = Var::x();
    let p = dop.order() as i64;
    let w = dop.wronskian();
    let ratio = Expr::div(diff(&w, &xv), w.clone());
    let a_x = diff(&eq.a, &xv);

    let b_new = Expr::add(eq.b.clone(), Expr::mul(Expr::int(p), a_x.clone()));
    let c_new = Expr::sum(vec![
        eq.c.clone(),
        Expr::mul(Expr::int(p), diff(&eq.b, &xv)),
        Expr::mul(Expr::rational(p * (p + 1), 2), diff(&a_x, &xv)),
        Expr::mul(ratio.clone(), a_x),
        Expr::prod(vec![Expr::int(2), diff(&ratio, &xv), eq.a.clone()]),
    ]);
    let mut singular = eq.singular.clone();
    singular.push(w);
    Ok(ParabolicEquation {
        a: eq.a.clone(),
        b: b_new,
        c: c_new,
        singular,
    })
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

    fn poly2() -> Expr {
        Expr::add(Expr::powi(Expr::x(), 2), Expr::mul(Expr::int(2), Expr::t()))
    }

    #[test]
    fn wronskian_examples() {
        let xv = Var::x();
        assert!(wronskian(&[Expr::one(), Expr::x()], &xv).is_one());
        assert_eq!(
            wronskian(&[Expr::one(), poly2()], &xv),
            Expr::mul(Expr::int(2), Expr::x())
        );
        assert!(wronskian(&[Expr::x(), Expr::x()], &xv).is_zero());
        // 3x3: W(1, x, x^2 + 2t) = 2
        assert_eq!(
            wronskian(&[Expr::one(), Expr::x(), poly2()], &xv),
            Expr::int(2)
        );
    }

    #[test]
    fn operator_from_solutions_examples() {
        let eq = heat();
        // (1, x, 0) -> the trivial operator dt
        let t1 = SolutionTuple::new(&eq, Expr::one(), Expr::x(), Expr::zero(), &cfg()).unwrap();
        let op = operator_from_solutions(&t1).unwrap();
        assert_eq!(
            op,
            ReductionOperator::tau1(Expr::zero(), Expr::zero(), Expr::zero()).unwrap()
        );

        // (1, x^2+2t, 0) -> dt - 1/x dx
        let t2 = SolutionTuple::new(&eq, Expr::one(), poly2(), Expr::zero(), &cfg()).unwrap();
        let op = operator_from_solutions(&t2).unwrap();
        match &op {
            ReductionOperator::Tau1 { g1, g2, g3 } => {
                assert_eq!(*g1, Expr::neg(Expr::powi(Expr::x(), -1)));
                assert!(g2.is_zero() && g3.is_zero());
            }
            _ => unreachable!(),
        }

        // (1, x, x^2+2t) -> g3 = 2
        let t3 = SolutionTuple::new(&eq, Expr::one(), Expr::x(), poly2(), &cfg()).unwrap();
        let op = operator_from_solutions(&t3).unwrap();
        match &op {
            ReductionOperator::Tau1 { g1, g2, g3 } => {
                assert!(g1.is_zero() && g2.is_zero());
                assert_eq!(*g3, Expr::int(2));
            }
            _ => unreachable!(),
        }

        // every construction passes the determining system
        for t in [&t1, &t2, &t3] {
            let op = operator_from_solutions(t).unwrap();
            let r = crate::detsys::residual_of_operator(&eq, &op, &cfg()).unwrap();
            assert!(r.iter().all(|v| *v == ZeroVerdict::ProvenZero), "{:?}", r);
        }
    }

    #[test]
    fn dependent_pair_rejected() {
        let eq = heat();
        assert!(matches!(
            SolutionTuple::new(
                &eq,
                Expr::x(),
                Expr::mul(Expr::int(2), Expr::x()),
                Expr::zero(),
                &cfg()
            ),
            Err(ConstructError::DependentSolutions)
        ));
    }

    #[test]
    fn gl_mixing_leaves_operator_fixed() {
        // replacing (v1,v2) by an invertible constant mix and shifting v3 by
        // multiples of v1, v2 leaves the canonical coefficients unchanged
        let eq = heat();
        let (v1, v2, v3) = (Expr::one(), poly2(), Expr::x());
        let base = SolutionTuple::new(&eq, v1.clone(), v2.clone(), v3.clone(), &cfg()).unwrap();
        let op_base = operator_from_solutions(&base).unwrap();

        let w1 = Expr::add(
            Expr::mul(Expr::int(2), v1.clone()),
            Expr::mul(Expr::int(3), v2.clone()),
        );
        let w2 = Expr::add(v1.clone(), Expr::mul(Expr::int(2), v2.clone()));
        let w3 = Expr::sum(vec![
            v3,
            Expr::mul(Expr::int(5), v1),
            Expr::mul(Expr::int(-7), v2),
        ]);
        let mixed = SolutionTuple::new(&eq, w1, w2, w3, &cfg()).unwrap();
        let op_mixed = operator_from_solutions(&mixed).unwrap();
        assert_eq!(op_base, op_mixed);
    }

    #[test]
    fn family_from_operator_checks_invariance() {
        let eq = heat();
        let tuple = SolutionTuple::new(&eq, Expr::one(), poly2(), Expr::zero(), &cfg()).unwrap();
        let op = operator_from_solutions(&tuple).unwrap();
        let fam = family_from_operator_tau1(&eq, &op, &tuple, &cfg()).unwrap();
        // u = c1 + c2 (x^2 + 2t) solves the heat equation for all parameters
        assert_eq!(
            eq.solves(&fam.expr(), &cfg()).unwrap(),
            ZeroVerdict::ProvenZero
        );

        // a mismatched operator is rejected
        let wrong = ReductionOperator::tau1(Expr::one(), Expr::zero(), Expr::zero()).unwrap();
        assert!(family_from_operator_tau1(&eq, &wrong, &tuple, &cfg()).is_err());
    }

    #[test]
    fn eta_linear_constructions() {
        let eq = heat();
        // Psi1 = exp(t+x), Psi0 = 0 -> eta = u
        let e1 = Expr::exp_of(Expr::add(Expr::t(), Expr::x()));
        let op = eta_from_linear_family(&eq, &e1, &Expr::zero(), &cfg()).unwrap();
        assert_eq!(op, ReductionOperator::tau0(Expr::u()));

        // Psi1 = x, Psi0 = 0 -> eta = u/x
        let op = eta_from_linear_family(&eq, &Expr::x(), &Expr::zero(), &cfg()).unwrap();
        assert_eq!(op, ReductionOperator::tau0(Expr::div(Expr::u(), Expr::x())));

        // Psi1 = 1, Psi0 = x^2+2t -> eta = 2x
        let op = eta_from_linear_family(&eq, &Expr::one(), &poly2(), &cfg()).unwrap();
        assert_eq!(
            op,
            ReductionOperator::tau0(Expr::mul(Expr::int(2), Expr::x()))
        );

        // all pass the tau=0 determining equation
        for op in [
            eta_from_linear_family(&eq, &e1, &Expr::zero(), &cfg()).unwrap(),
            eta_from_linear_family(&eq, &Expr::x(), &Expr::zero(), &cfg()).unwrap(),
            eta_from_linear_family(&eq, &Expr::one(), &poly2(), &cfg()).unwrap(),
        ] {
            let r = crate::detsys::residual_of_operator(&eq, &op, &cfg()).unwrap();
            assert!(r[0].is_zero(), "{:?}", r);
        }
    }

    #[test]
    fn eta_from_hodograph_inversion() {
        let k = Expr::param("kappa");
        // u = kappa x, Phi = u/x
        let fam = SolutionFamily::OneParam {
            expr: Expr::mul(k.clone(), Expr::x()),
            param: k.clone(),
        };
        let phi = Expr::div(Expr::u(), Expr::x());
        let op = eta_from_general_family(&fam, &phi, &cfg()).unwrap();
        assert_eq!(op, ReductionOperator::tau0(Expr::div(Expr::u(), Expr::x())));

        // u = kappa + x^2 + 2t, Phi = u - x^2 - 2t
        let fam = SolutionFamily::OneParam {
            expr: Expr::add(k.clone(), poly2()),
            param: k.clone(),
        };
        let phi = Expr::sub(Expr::u(), poly2());
        let op = eta_from_general_family(&fam, &phi, &cfg()).unwrap();
        assert_eq!(
            op,
            ReductionOperator::tau0(Expr::mul(Expr::int(2), Expr::x()))
        );

        // u = kappa exp(t+x), Phi = u exp(-t-x)
        let e = Expr::exp_of(Expr::add(Expr::t(), Expr::x()));
        let fam = SolutionFamily::OneParam {
            expr: Expr::mul(k.clone(), e.clone()),
            param: k.clone(),
        };
        let phi = Expr::mul(
            Expr::u(),
            Expr::exp_of(Expr::neg(Expr::add(Expr::t(), Expr::x()))),
        );
        let op = eta_from_general_family(&fam, &phi, &cfg()).unwrap();
        assert_eq!(op, ReductionOperator::tau0(Expr::u()));

        // a wrong inversion is rejected
        let bad = Expr::mul(Expr::u(), Expr::x());
        assert!(eta_from_general_family(&fam, &bad, &cfg()).is_err());
    }

    #[test]
    fn cole_hopf_examples() {
        let eq = heat();
        let op = cole_hopf_operator(&eq, &poly2(), &cfg()).unwrap();
        match &op {
            ReductionOperator::Tau1 { g1, .. } => {
                assert_eq!(*g1, Expr::neg(Expr::powi(Expr::x(), -1)))
            }
            _ => unreachable!(),
        }

        let e = Expr::exp_of(Expr::add(Expr::t(), Expr::x()));
        let op = cole_hopf_operator(&eq, &e, &cfg()).unwrap();
        match &op {
            ReductionOperator::Tau1 { g1, .. } => assert_eq!(*g1, Expr::int(-1)),
            _ => unreachable!(),
        }

        // agrees with operator_from_solutions on (v, 1, 0)
        let tuple = SolutionTuple::new(&eq, poly2(), Expr::one(), Expr::zero(), &cfg()).unwrap();
        let via_wronskian = operator_from_solutions(&tuple).unwrap();
        let via_cole_hopf = cole_hopf_operator(&eq, &poly2(), &cfg()).unwrap();
        assert_eq!(via_wronskian, via_cole_hopf);

        // constant seeds and nonzero C are rejected
        assert!(matches!(
            cole_hopf_operator(&eq, &Expr::one(), &cfg()),
            Err(ConstructError::ConstantSeed)
        ));
        let bad_eq = ParabolicEquation {
            a: Expr::one(),
            b: Expr::zero(),
            c: Expr::one(),
            singular: Vec::new(),
        };
        assert!(matches!(
            cole_hopf_operator(&bad_eq, &Expr::x(), &cfg()),
            Err(ConstructError::NonzeroC)
        ));
    }

    #[test]
    fn cole_hopf_transfer_equation() {
        // transfer equation with symbolic h and v = x^2 + 2H:
        // Q = dt - (h+1)/x dx
        let h = crate::symb::ast::FuncDecl::new("h", &[Var::t()]);
        let hp1 = Expr::add(Expr::func(&h), Expr::one());
        let cap_h =
            crate::symb::ast::FuncDecl::with_derivs("H", &[Var::t()], &[(Var::t(), hp1.clone())]);
        let eq = ParabolicEquation {
            a: Expr::one(),
            b: Expr::div(Expr::func(&h), Expr::x()),
            c: Expr::zero(),
            singular: vec![Expr::x()],
        };
        let v = Expr::add(
            Expr::powi(Expr::x(), 2),
            Expr::mul(Expr::int(2), Expr::func(&cap_h)),
        );
        let op = cole_hopf_operator(&eq, &v, &cfg()).unwrap();
        match &op {
            ReductionOperator::Tau1 { g1, .. } => {
                let expect = Expr::neg(Expr::div(hp1, Expr::x()));
                assert_eq!(*g1, expect, "g1 = {}", g1);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn darboux_apply_examples() {
        let xv = Var::x();
        let _ = xv;
        let cfg = cfg();
        // DT[1] is plain d/dx
        let dt1 = DarbouxOperator::new(vec![Expr::one()], &cfg).unwrap();
        assert_eq!(
            darboux_apply(&dt1, &poly2()),
            Expr::mul(Expr::int(2), Expr::x())
        );

        // kernel property: DT[psi](psi) = 0
        let psi = Expr::exp_of(Expr::add(Expr::t(), Expr::x()));
        let dtp = DarbouxOperator::new(vec![psi.clone()], &cfg).unwrap();
        assert!(darboux_apply(&dtp, &psi).is_zero());

        // DT[psi](u) = u_x - (psi_x/psi) u for first order
        let u = poly2();
        let direct = Expr::sub(
            diff(&u, &Var::x()),
            Expr::mul(Expr::div(diff(&psi, &Var::x()), psi.clone()), u.clone()),
        );
        assert!(Expr::sub(darboux_apply(&dtp, &u), direct).is_zero());

        // DT[1, x](x^2 + 2t) = 2
        let dt2 = DarbouxOperator::new(vec![Expr::one(), Expr::x()], &cfg).unwrap();
        assert_eq!(darboux_apply(&dt2, &poly2()), Expr::int(2));
    }

    #[test]
    fn darboux_transformed_equations() {
        let eq = heat();
        let cfg = cfg();

        // DT[exp(t+x)] maps heat to heat
        let psi = Expr::exp_of(Expr::add(Expr::t(), Expr::x()));
        let dop = DarbouxOperator::new(vec![psi], &cfg).unwrap();
        let eq2 = darboux_transformed_equation(&eq, &dop, &cfg).unwrap();
        assert!(eq2.a.is_one() && eq2.b.is_zero() && eq2.c.is_zero());

        // DT[x]: C~ = -2/x^2
        let dop = DarbouxOperator::new(vec![Expr::x()], &cfg).unwrap();
        let eq2 = darboux_transformed_equation(&eq, &dop, &cfg).unwrap();
        assert_eq!(eq2.c, Expr::mul(Expr::int(-2), Expr::powi(Expr::x(), -2)));

        // DT[1] on a general equation: (A, B + A_x, C + B_x + A_xx)
        let gen = ParabolicEquation {
            a: Expr::add(Expr::one(), Expr::powi(Expr::x(), 2)),
            b: Expr::x(),
            c: Expr::t(),
            singular: Vec::new(),
        };
        // seeds must solve the equation; u = 1 solves only if C = 0, so use
        // a C = 0 variant
        let gen0 = ParabolicEquation {
            c: Expr::zero(),
            ..gen.clone()
        };
        let dop = DarbouxOperator::new(vec![Expr::one()], &cfg).unwrap();
        let eq2 = darboux_transformed_equation(&gen0, &dop, &cfg).unwrap();
        assert_eq!(eq2.a, gen0.a);
        assert_eq!(eq2.b, Expr::add(gen0.b.clone(), diff(&gen0.a, &Var::x())));
        assert_eq!(
            eq2.c,
            Expr::add(
                diff(&gen0.b, &Var::x()),
                diff(&diff(&gen0.a, &Var::x()), &Var::x())
            )
        );
    }

    #[test]
    fn darboux_intertwining_on_heat_basis() {
        let eq = heat();
        let cfg = cfg();
        let basis = [
            Expr::one(),
            Expr::x(),
            poly2(),
            Expr::add(
                Expr::powi(Expr::x(), 3),
                Expr::prod(vec![Expr::int(6), Expr::t(), Expr::x()]),
            ),
            Expr::exp_of(Expr::add(Expr::t(), Expr::x())),
        ];
        for seeds in [
            vec![Expr::exp_of(Expr::add(Expr::t(), Expr::x()))],
            vec![Expr::x()],
            vec![Expr::x(), poly2()],
        ] {
            let dop = DarbouxOperator::new(seeds, &cfg).unwrap();
            let target = darboux_transformed_equation(&eq, &dop, &cfg).unwrap();
            for u in &basis {
                let image = darboux_apply(&dop, u);
                let resid = target.apply_l(&image).unwrap();
                let pcfg = cfg.clone().with_singular(target.singular.clone());
                let v = crate::symb::probe::equals_zero(&resid, &pcfg).unwrap();
                assert!(
                    v.is_zero(),
                    "DT image of {} fails on the transformed equation: {:?}",
                    u,
                    v
                );
            }
        }
    }

    #[test]
    fn darboux_bridge_to_tau1_characteristic() {
        // For C = 0 and the tuple (v, 1, 0): -A DT[v,1](u) equals the
        // characteristic action Q[u] on solutions.
        let eq = heat();
        let cfg = cfg();
        let v = poly2();
        let tuple = SolutionTuple::new(&eq, v.clone(), Expr::one(), Expr::zero(), &cfg).unwrap();
        let op = operator_from_solutions(&tuple).unwrap();
        let dop = DarbouxOperator::new(vec![v, Expr::one()], &cfg).unwrap();
        let basis = [
            Expr::one(),
            Expr::x(),
            Expr::add(
                Expr::powi(Expr::x(), 3),
                Expr::prod(vec![Expr::int(6), Expr::t(), Expr::x()]),
            ),
        ];
        for u in &basis {
            let lhs = Expr::neg(Expr::mul(eq.a.clone(), darboux_apply(&dop, u)));
            let rhs = op.characteristic_on(u);
            let delta = Expr::sub(lhs, rhs);
            let pcfg = cfg.clone().with_singular(vec![Expr::x()]);
            assert!(
                crate::symb::probe::equals_zero(&delta, &pcfg)
                    .unwrap()
                    .is_zero(),
                "bridge fails on {}",
                u
            );
        }
    }
}



#[cfg(test)]
mod family_validation_tests {
    use super::*;

    #[test]
    fn families_validate_and_inessential_parameters_are_caught() {
        let eq = ParabolicEquation::heat();
        let cfg = crate::symb::probe::ProbeConfig::default();
        let k = Expr::param("kappa");
        let good = SolutionFamily::OneParam {
            expr: Expr::mul(k.clone(), Expr::x()),
            param: k.clone(),
        };
        good.validate(&eq, &cfg).unwrap();

        // the parameter cancels out: not an essential parameter
        let bogus = SolutionFamily::OneParam {
            expr: Expr::add(Expr::sub(k.clone(), k.clone()), Expr::x()),
            param: k,
        };
        assert!(matches!(
            bogus.validate(&eq, &cfg),
            Err(ConstructError::InessentialParameter(_))
        ));

        let two = SolutionFamily::TwoParam {
            v1: Expr::one(),
            v2: Expr::x(),
            v3: Expr::zero(),
        };
        two.validate(&eq, &cfg).unwrap();

        // a non-solution component fails
        let bad = SolutionFamily::TwoParam {
            v1: Expr::one(),
            v2: Expr::powi(Expr::x(), 4),
            v3: Expr::zero(),
        };
        assert!(bad.validate(&eq, &cfg).is_err());
    }

    #[test]
    fn transfer_invariant_family_validates() {
        let te = crate::transfer::TransferEquation::new(Expr::zero()).unwrap();
        let fam = crate::transfer::invariant_solution_gk(&te, &Expr::one(), &Expr::param("c1"));
        let cfg = te.probe_cfg(&crate::symb::probe::ProbeConfig::default());
        fam.validate(&te.eq, &cfg).unwrap();
    }
}
