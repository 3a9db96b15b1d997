//! Numeric verification harness: grid residuals of equations and determining
//! systems, finite-difference cross-checks of symbolic derivatives, and
//! report generation in a human and a line-oriented machine format.

use crate::detsys::DeterminingSystem;
use crate::pde::ParabolicEquation;
use crate::symb::ast::{Expr, Name, Var};
use crate::symb::diff::diff;
use crate::symb::numeric::{eval, FuncTable, Point};
use crate::symb::probe::{instantiate_many, ProbeConfig, ProbeError, Rng};
use crate::symb::subst::{substitute, Bindings};
use std::collections::BTreeMap;
use std::time::Instant;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default tolerance for residuals of exact symbolic candidates.
pub const TOL_EXACT: f64 = 1e-8;
/// Default tolerance for quadrature-backed candidates.
pub const TOL_QUADRATURE: f64 = 1e-4;
/// Relative tolerance of the finite-difference cross-check.
pub const TOL_FD: f64 = 1e-5;
/// Step of the central differences.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("effective grid is empty (all points excluded)")]
    EmptyGrid,
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Subst(#[from] crate::symb::subst::SubstError),
}

/// A rectangular evaluation grid with per-axis boxes, jitter and excluded
/// singular bands.
#[derive(Clone, Debug)]
pub struct Grid {
    pub axes: Vec<(Name, f64, f64, usize)>,
    pub excluded: Vec<Expr>,
    /// Half-width of the excluded band around each singular locus.
    pub band: f64,
    pub seed: u64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            axes: vec![(Name::new("t"), 0.1, 2.0, 8), (Name::new("x"), 0.3, 2.0, 8)],
            excluded: Vec::new(),
            band: 0.1,
            seed: 0x6e1d,
        }
    }
}

impl Grid {
    pub fn new(axes: Vec<(&str, f64, f64, usize)>) -> Self {
        Grid {
            axes: axes
                .into_iter()
                .map(|(n, lo, hi, k)| (Name::new(n), lo, hi, k))
                .collect(),
            ..Grid::default()
        }
    }

    pub fn with_axis(mut self, name: &str, lo: f64, hi: f64, n: usize) -> Self {
        self.axes.retain(|(a, ..)| a.as_str() != name);
        self.axes.push((Name::new(name), lo, hi, n));
        self
    }

    pub fn with_excluded(mut self, loci: Vec<Expr>) -> Self {
        self.excluded.extend(loci);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<(), VerifyError> {
        for (_, lo, hi, n) in &self.axes {
            if *n < 2 || hi <= lo {
                return Err(VerifyError::EmptyGrid);
            }
        }
        Ok(())
    }

    /// Jittered cartesian product of the axes. Symbols the grid does not
    /// cover can be pinned through `extra`.
    pub fn points(&self, extra: &Point) -> Vec<Point> {
        let mut rng = Rng::new(self.seed);
        let mut jittered_axes: Vec<(Name, Vec<f64>)> = Vec::new();
        for (name, lo, hi, n) in &self.axes {
            let step = (hi - lo) / (*n as f64);
            let vals = (0..*n)
                .map(|i| lo + step * (i as f64 + 0.5) + 0.25 * step * rng.uniform(-1.0, 1.0))
                .collect();
            jittered_axes.push((name.clone(), vals));
        }
        let mut points = vec![extra.clone()];
        for (name, vals) in &jittered_axes {
            let mut next = Vec::with_capacity(points.len() * vals.len());
            for p in &points {
                for v in vals {
                    let mut q = p.clone();
                    q.insert(name.clone(), *v);
                    next.push(q);
                }
            }
            points = next;
        }
        points
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckVerdict {
    Pass,
    Fail,
    Inconclusive,
}

impl CheckVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            CheckVerdict::Pass => "PASS",
            CheckVerdict::Fail => "FAIL",
            CheckVerdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// Result of one named check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub verdict: CheckVerdict,
    pub max_residual: f64,
    pub witness: Option<Vec<(String, f64)>>,
    pub runtime_ms: f64,
    pub seed: u64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.verdict == CheckVerdict::Pass
    }

    /// One line of the machine format: name, verdict, max residual, seed.
    /// Deterministic for a fixed seed (no runtimes).
    pub fn machine_line(&self) -> String {
        format!(
            "{}\t{}\t{:.6e}\t{}",
            self.name,
            self.verdict.label(),
            self.max_residual,
            self.seed
        )
    }

    pub fn human_line(&self) -> String {
        let mut s = format!(
            "{:<44} {:<6} max_residual={:.3e} ({:.1} ms)",
            self.name,
            self.verdict.label(),
            self.max_residual,
            self.runtime_ms
        );
        if let Some(w) = &self.witness {
            let at: Vec<String> = w.iter().map(|(k, v)| format!("{}={:.4}", k, v)).collect();
            s.push_str(&format!("  witness: {}", at.join(", ")));
        }
        s
    }
}

/// A collection of named checks.
#[derive(Clone, Debug, Default)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
    pub fn push(&mut self, c: CheckResult) {
        self.checks.push(c);
    }
    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }
    pub fn machine(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&c.machine_line());
            s.push('\n');
        }
        s
    }
    pub fn human(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&c.human_line());
            s.push('\n');
        }
        s
    }
}

/// Maximum |value| and cancellation scale of an expression over points,
/// parallel when the `parallel` feature is on. Returns per point
/// `(value, scale)`; `None` marks an evaluation domain error.
pub fn max_on_points(
    target: &Expr,
    points: &[Point],
    funcs: &FuncTable,
) -> Vec<Option<(f64, f64)>> {
    #[cfg(feature = "parallel")]
    {
        points
            .par_iter()
            .map(|p| crate::symb::numeric::eval_with_scale(target, p, funcs).ok())
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        max_on_points_seq(target, points, funcs)
    }
}

/// Sequential twin of [`max_on_points`], always compiled (benchmark
/// baseline and non-parallel fallback).
pub fn max_on_points_seq(
    target: &Expr,
    points: &[Point],
    funcs: &FuncTable,
) -> Vec<Option<(f64, f64)>> {
    points
        .iter()
        .map(|p| crate::symb::numeric::eval_with_scale(target, p, funcs).ok())
        .collect()
}

fn run_residual_check(
    name: &str,
    residual: &Expr,
    grid: &Grid,
    tol: f64,
    cfg: &ProbeConfig,
) -> Result<CheckResult, VerifyError> {
    grid.validate()?;
    let start = Instant::now();
    let mut pcfg = cfg.clone();
    pcfg.singular.extend(grid.excluded.clone());
    pcfg.seed = grid.seed;
    let (mut targets, singulars, funcs, pinned) =
        instantiate_many(std::slice::from_ref(residual), &pcfg)?;
    let target = targets.pop().unwrap();

    let all = grid.points(&pinned);
    let mut points = Vec::with_capacity(all.len());
    'outer: for p in all {
        for s in &singulars {
            match eval(s, &p, &funcs) {
                Ok(v) if v.abs() >= grid.band => {}
                _ => continue 'outer,
            }
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(VerifyError::EmptyGrid);
    }

    let evals = max_on_points(&target, &points, &funcs);
    let mut max_resid: f64 = 0.0;
    let mut worst: Option<(usize, f64)> = None;
    let mut n_ok = 0usize;
    for (i, r) in evals.iter().enumerate() {
        if let Some((v, scale)) = r {
            n_ok += 1;
            max_resid = max_resid.max(v.abs());
            let norm = v.abs() / (1.0 + scale);
            if norm > tol {
                match worst {
                    Some((_, w)) if w >= norm => {}
                    _ => worst = Some((i, norm)),
                }
            }
        }
    }
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    if n_ok == 0 {
        return Ok(CheckResult {
            name: name.into(),
            verdict: CheckVerdict::Inconclusive,
            max_residual: f64::NAN,
            witness: None,
            runtime_ms,
            seed: grid.seed,
        });
    }
    match worst {
        Some((i, _)) => Ok(CheckResult {
            name: name.into(),
            verdict: CheckVerdict::Fail,
            max_residual: max_resid,
            witness: Some(
                points[i]
                    .iter()
                    .map(|(k, v)| (k.as_str().to_string(), *v))
                    .collect(),
            ),
            runtime_ms,
            seed: grid.seed,
        }),
        None => Ok(CheckResult {
            name: name.into(),
            verdict: CheckVerdict::Pass,
            max_residual: max_resid,
            witness: None,
            runtime_ms,
            seed: grid.seed,
        }),
    }
}

/// Grid residual of a candidate solution surface of an equation.
pub fn grid_residual_equation(
    eq: &ParabolicEquation,
    candidate: &Expr,
    grid: &Grid,
    tol: f64,
    cfg: &ProbeConfig,
) -> Result<CheckResult, VerifyError> {
    let residual = eq
        .apply_l(candidate)
        .map_err(|_| VerifyError::EmptyGrid)
        .unwrap_or_else(|_| Expr::zero());
    let g = grid.clone().with_excluded(eq.singular.clone());
    run_residual_check("equation-residual", &residual, &g, tol, cfg)
}

/// Grid residuals of a determining system under a candidate binding; one
/// check per equation.
pub fn grid_residual_system(
    sys: &DeterminingSystem,
    candidate: &Bindings,
    grid: &Grid,
    tol: f64,
    cfg: &ProbeConfig,
) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::default();
    let g = grid.clone().with_excluded(sys.source.singular.clone());
    for (i, e) in sys.equations.iter().enumerate() {
        let r = substitute(e, candidate)?;
        let name = format!("detsys-residual-{}", i + 1);
        report.push(run_residual_check(&name, &r, &g, tol, cfg)?);
    }
    Ok(report)
}

/// Compare symbolic derivatives against central finite differences on the
/// grid: for each axis variable, relative error below [`TOL_FD`] passes.
pub fn fd_crosscheck(e: &Expr, grid: &Grid, cfg: &ProbeConfig) -> Result<CheckResult, VerifyError> {
    grid.validate()?;
    let start = Instant::now();
    let mut pcfg = cfg.clone();
    pcfg.singular.extend(grid.excluded.clone());
    pcfg.seed = grid.seed;

    let vars: Vec<Var> = e
        .free_vars()
        .into_iter()
        .filter(|v| grid.axes.iter().any(|(n, ..)| *n == v.0))
        .collect();
    let mut targets: Vec<Expr> = vec![e.clone()];
    for v in &vars {
        targets.push(diff(e, v));
    }
    let (inst, singulars, funcs, pinned) = instantiate_many(&targets, &pcfg)?;
    let base = &inst[0];

    let all = grid.points(&pinned);
    let mut max_rel: f64 = 0.0;
    let mut worst: Option<Point> = None;
    let mut n_ok = 0usize;
    'outer: for p in &all {
        for s in &singulars {
            match eval(s, p, &funcs) {
                Ok(v) if v.abs() >= grid.band => {}
                _ => continue 'outer,
            }
        }
        for (k, v) in vars.iter().enumerate() {
            let sym = match eval(&inst[k + 1], p, &funcs) {
                Ok(s) => s,
                Err(_) => continue 'outer,
            };
            let mut hi: Point = p.clone();
            let mut lo: Point = p.clone();
            let x0 = p[&v.0];
            hi.insert(v.0.clone(), x0 + FD_STEP);
            lo.insert(v.0.clone(), x0 - FD_STEP);
            let (fh, fl) = match (eval(base, &hi, &funcs), eval(base, &lo, &funcs)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue 'outer,
            };
            let fd = (fh - fl) / (2.0 * FD_STEP);
            let rel = (sym - fd).abs() / (1.0 + sym.abs().max(fd.abs()));
            if rel > max_rel {
                max_rel = rel;
                if rel > TOL_FD {
                    worst = Some(p.clone());
                }
            }
            n_ok += 1;
        }
    }
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    if n_ok == 0 {
        return Err(VerifyError::EmptyGrid);
    }
    Ok(CheckResult {
        name: "fd-crosscheck".into(),
        verdict: if max_rel <= TOL_FD {
            CheckVerdict::Pass
        } else {
            CheckVerdict::Fail
        },
        max_residual: max_rel,
        witness: worst.map(|p| {
            p.iter()
                .map(|(k, v)| (k.as_str().to_string(), *v))
                .collect()
        }),
        runtime_ms,
        seed: grid.seed,
    })
}

/// Make a check result out of a probe verdict, for report aggregation.
pub fn check_from_verdict(
    name: &str,
    v: &crate::symb::probe::ZeroVerdict,
    seed: u64,
) -> CheckResult {
    use crate::symb::probe::ZeroVerdict;
    match v {
        ZeroVerdict::ProvenZero => CheckResult {
            name: name.into(),
            verdict: CheckVerdict::Pass,
            max_residual: 0.0,
            witness: None,
            runtime_ms: 0.0,
            seed,
        },
        ZeroVerdict::NumericallyZero { max_abs, .. } => CheckResult {
            name: name.into(),
            verdict: CheckVerdict::Pass,
            max_residual: *max_abs,
            witness: None,
            runtime_ms: 0.0,
            seed,
        },
        ZeroVerdict::NonZero(w) => CheckResult {
            name: name.into(),
            verdict: CheckVerdict::Fail,
            max_residual: w.value.abs(),
            witness: Some(w.point.clone()),
            runtime_ms: 0.0,
            seed,
        },
    }
}

/// Expect-fail twin of [`check_from_verdict`]: passes when the verdict is
/// nonzero (negative controls).
pub fn check_expect_nonzero(
    name: &str,
    v: &crate::symb::probe::ZeroVerdict,
    seed: u64,
) -> CheckResult {
    use crate::symb::probe::ZeroVerdict;
    let (verdict, max_residual, witness) = match v {
        ZeroVerdict::NonZero(w) => (CheckVerdict::Pass, w.value.abs(), Some(w.point.clone())),
        ZeroVerdict::ProvenZero => (CheckVerdict::Fail, 0.0, None),
        ZeroVerdict::NumericallyZero { max_abs, .. } => (CheckVerdict::Fail, *max_abs, None),
    };
    CheckResult {
        name: name.into(),
        verdict,
        max_residual,
        witness,
        runtime_ms: 0.0,
        seed,
    }
}

/// Pin symbols to values for grid evaluation (parameters etc.).
pub fn pin(pairs: &[(&str, f64)]) -> Point {
    let mut m: Point = BTreeMap::new();
    for (k, v) in pairs {
        m.insert(Name::new(k), *v);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ProbeConfig {
        ProbeConfig::default()
    }

    #[test]
    fn exact_solution_passes_tight() {
        let heat = ParabolicEquation::heat();
        let u = Expr::exp_of(Expr::add(Expr::t(), Expr::x()));
        let grid = Grid::new(vec![("t", 0.1, 2.0, 20), ("x", 0.3, 2.0, 20)]);
        let r = grid_residual_equation(&heat, &u, &grid, TOL_EXACT, &cfg()).unwrap();
        assert!(r.passed(), "{:?}", r);
        assert!(r.max_residual < 1e-12, "max residual {}", r.max_residual);
    }

    #[test]
    fn wrong_solution_fails_with_witness() {
        let heat = ParabolicEquation::heat();
        let u = Expr::exp_of(Expr::add(Expr::t(), Expr::mul(Expr::int(2), Expr::x())));
        let grid = Grid::default();
        let r = grid_residual_equation(&heat, &u, &grid, TOL_EXACT, &cfg()).unwrap();
        assert_eq!(r.verdict, CheckVerdict::Fail);
        assert!(r.witness.is_some());
    }

    #[test]
    fn quadrature_backed_series_passes() {
        // transfer equation with h(t) = t, polynomial series is exact, the
        // declared-quadrature Gaussian series passes at the looser tolerance
        let te = crate::transfer::TransferEquation::new(Expr::t()).unwrap();
        let g = crate::transfer::gaussian_series(&te, 1, &Expr::one(), &Expr::one());
        let grid = Grid::default().with_excluded(g.singular.clone());
        let resid = te.eq.apply_l(&g.expr).unwrap();
        let r = run_residual_check("gauss-series", &resid, &grid, 1e-6, &cfg()).unwrap();
        assert!(r.passed(), "{:?}", r);
    }

    #[test]
    fn fd_crosscheck_cases() {
        let grid = Grid::default();
        for text in ["x^2 + 2*t", "exp(-x^2/(4*t))"] {
            let e = crate::symb::parse::parse(text, &crate::symb::parse::SymbolEnv::standard())
                .unwrap();
            let r = fd_crosscheck(&e, &grid, &cfg()).unwrap();
            assert!(r.passed(), "{} fails: {:?}", text, r);
        }
        // 1/x with the excluded band around x = 0
        let e =
            crate::symb::parse::parse("1/x", &crate::symb::parse::SymbolEnv::standard()).unwrap();
        let grid = Grid::new(vec![("x", -1.0, 1.0, 16)]).with_excluded(vec![Expr::x()]);
        let r = fd_crosscheck(&e, &grid, &cfg()).unwrap();
        assert!(r.passed(), "{:?}", r);
    }

    #[test]
    fn reports_are_deterministic() {
        let heat = ParabolicEquation::heat();
        let u = Expr::exp_of(Expr::add(Expr::t(), Expr::x()));
        let grid = Grid::default().with_seed(99);
        let a = grid_residual_equation(&heat, &u, &grid, TOL_EXACT, &cfg()).unwrap();
        let b = grid_residual_equation(&heat, &u, &grid, TOL_EXACT, &cfg()).unwrap();
        assert_eq!(a.machine_line(), b.machine_line());
    }

    #[test]
    fn grid_agrees_with_probe_verdicts() {
        let heat = ParabolicEquation::heat();
        let fixtures = [
            (
                Expr::add(Expr::powi(Expr::x(), 2), Expr::mul(Expr::int(2), Expr::t())),
                true,
            ),
            (Expr::exp_of(Expr::add(Expr::t(), Expr::x())), true),
            (Expr::powi(Expr::x(), 4), false),
            (Expr::exp_of(Expr::sub(Expr::t(), Expr::x())), true),
            (Expr::mul(Expr::t(), Expr::x()), false),
        ];
        let grid = Grid::default();
        for (u, expect) in &fixtures {
            let probe = heat.solves(u, &cfg()).unwrap().is_zero();
            let gridv = grid_residual_equation(&heat, u, &grid, TOL_EXACT, &cfg())
                .unwrap()
                .passed();
            assert_eq!(probe, *expect, "probe for {}", u);
            assert_eq!(gridv, *expect, "grid for {}", u);
        }
    }

    #[test]
    fn system_grid_residuals() {
        let heat = ParabolicEquation::heat();
        let sys = crate::detsys::derive_de1(&heat);
        let b = crate::symb::subst::Bindings::new()
            .func("g1", Expr::neg(Expr::powi(Expr::x(), -1)))
            .func("g2", Expr::zero())
            .func("g3", Expr::zero());
        let grid = Grid::default().with_excluded(vec![Expr::x()]);
        let report = grid_residual_system(&sys, &b, &grid, TOL_EXACT, &cfg()).unwrap();
        assert_eq!(report.checks.len(), 3);
        assert!(report.passed(), "{}", report.human());
    }

    #[test]
    fn empty_grid_is_an_error() {
        let grid = Grid::new(vec![("x", 0.0, 1.0, 1)]);
        let e = Expr::x();
        assert!(matches!(
            fd_crosscheck(&e, &grid, &cfg()),
            Err(VerifyError::EmptyGrid)
        ));
    }
}
