//! Randomized numeric zero-testing.
//!
//! An expression whose canonical form is not literally zero is probed at
//! seeded random points inside per-symbol boxes, avoiding declared singular
//! loci. Unbound arbitrary functions are instantiated deterministically:
//! leaves become random low-degree polynomials, functions with declared
//! derivatives are integrated numerically (so identities that hold for every
//! choice of the arbitrary functions are probed against concrete ones).
//! Probing fans out over points in parallel; aggregation is an
//! order-independent max, so verdicts are deterministic for a fixed seed.

use super::ast::{Expr, FuncDecl, Name, Var};
use super::numeric::{build_quadrature_table, eval, eval_with_scale, FuncImpl, FuncTable, Point};
use super::subst::{substitute, Bindings};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Deterministic splittable PRNG (SplitMix64).
#[derive(Clone, Debug)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }
    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

fn name_hash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Tri-state outcome of a zero test.
#[derive(Clone, Debug, PartialEq)]
pub enum ZeroVerdict {
    /// Canonical form is the literal 0.
    ProvenZero,
    /// All probes below tolerance.
    NumericallyZero { max_abs: f64, probes: usize },
    /// A reproducible witness point where the value exceeds tolerance.
    NonZero(Witness),
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero(_))
    }
    pub fn max_abs(&self) -> f64 {
        match self {
            ZeroVerdict::ProvenZero => 0.0,
            ZeroVerdict::NumericallyZero { max_abs, .. } => *max_abs,
            ZeroVerdict::NonZero(w) => w.value.abs(),
        }
    }
    pub fn label(&self) -> &'static str {
        match self {
            ZeroVerdict::ProvenZero => "proven-zero",
            ZeroVerdict::NumericallyZero { .. } => "numerically-zero",
            ZeroVerdict::NonZero(_) => "nonzero",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub point: Vec<(String, f64)>,
    pub value: f64,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("probing inconclusive: {0}; adjust the domain boxes or singular bands")]
    Inconclusive(String),
    #[error("cannot instantiate function '{0}': {1}")]
    Instantiate(String, String),
    #[error(transparent)]
    Subst(#[from] super::subst::SubstError),
}

/// Probe configuration: seed, point count, domain boxes, tolerance, declared
/// singular loci and numeric function implementations.
#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub seed: u64,
    pub n_points: usize,
    pub tolerance: f64,
    /// Half-width of the excluded band around each singular locus.
    pub band: f64,
    pub boxes: BTreeMap<Name, (f64, f64)>,
    pub default_box: (f64, f64),
    pub singular: Vec<Expr>,
    pub funcs: FuncTable,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        let mut boxes = BTreeMap::new();
        boxes.insert(Name::new("t"), (0.1, 2.0));
        boxes.insert(Name::new("x"), (0.3, 2.0));
        boxes.insert(Name::new("u"), (-2.0, 2.0));
        ProbeConfig {
            seed: 0x5eed,
            n_points: 25,
            tolerance: 1e-8,
            band: 0.1,
            boxes,
            default_box: (-2.0, 2.0),
            singular: Vec::new(),
            funcs: FuncTable::new(),
        }
    }
}

impl ProbeConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }
    pub fn with_singular(mut self, loci: Vec<Expr>) -> Self {
        self.singular.extend(loci);
        self
    }
    pub fn with_box(mut self, symbol: &str, lo: f64, hi: f64) -> Self {
        self.boxes.insert(Name::new(symbol), (lo, hi));
        self
    }
    pub fn with_funcs(mut self, funcs: FuncTable) -> Self {
        for (k, v) in funcs.map {
            self.funcs.map.insert(k, v);
        }
        self
    }

    pub fn box_for(&self, name: &Name) -> (f64, f64) {
        self.boxes.get(name).copied().unwrap_or(self.default_box)
    }
}

/// Zero-test an expression. `ProvenZero` when the canonical form is the
/// literal zero, otherwise a randomized numeric verdict.
pub fn equals_zero(e: &Expr, cfg: &ProbeConfig) -> Result<ZeroVerdict, ProbeError> {
    let e = super::simplify::simplify(e);
    if e.is_zero() {
        return Ok(ZeroVerdict::ProvenZero);
    }
    assert!(cfg.n_points >= 1, "probe config needs n_points >= 1");

    let (target, singulars, funcs, pinned) = instantiate(&e, cfg)?;

    // symbols to sample
    let mut symbols: Vec<Name> = Vec::new();
    let mut note = |n: &Name| {
        if !symbols.contains(n) {
            symbols.push(n.clone());
        }
    };
    for ex in std::iter::once(&target).chain(singulars.iter()) {
        for v in ex.free_vars() {
            note(&v.0);
        }
        for p in ex.free_params() {
            note(&p.0);
        }
    }
    symbols.sort();

    let mut rng = Rng::new(cfg.seed);
    let mut points: Vec<Point> = Vec::with_capacity(cfg.n_points);
    let max_attempts = 400 * cfg.n_points.max(1);
    let mut attempts = 0;
    while points.len() < cfg.n_points && attempts < max_attempts {
        attempts += 1;
        let mut p: Point = pinned.clone();
        for s in &symbols {
            if p.contains_key(s) {
                continue;
            }
            let (lo, hi) = cfg.box_for(s);
            p.insert(s.clone(), rng.uniform(lo, hi));
        }
        let mut ok = true;
        for sing in &singulars {
            match eval(sing, &p, &funcs) {
                Ok(v) if v.abs() >= cfg.band => {}
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            points.push(p);
        }
    }
    if points.is_empty() {
        return Err(ProbeError::Inconclusive(
            "no admissible probe points found (all hit singular loci)".into(),
        ));
    }

    let evals: Vec<Option<(f64, f64)>> = eval_points(&target, &points, &funcs);

    let mut max_abs: f64 = 0.0;
    let mut worst: Option<(usize, f64)> = None; // (index, normalized residual)
    let mut n_ok = 0usize;
    for (i, r) in evals.iter().enumerate() {
        if let Some((v, scale)) = r {
            n_ok += 1;
            max_abs = max_abs.max(v.abs());
            let norm = v.abs() / (1.0 + scale);
            if norm > cfg.tolerance {
                match worst {
                    Some((_, w)) if w >= norm => {}
                    _ => worst = Some((i, norm)),
                }
            }
        }
    }
    if n_ok == 0 {
        return Err(ProbeError::Inconclusive(
            "every probe point hit an evaluation domain error".into(),
        ));
    }
    if let Some((i, _)) = worst {
        let (v, _) = evals[i].unwrap();
        let point = points[i]
            .iter()
            .map(|(k, val)| (k.as_str().to_string(), *val))
            .collect();
        return Ok(ZeroVerdict::NonZero(Witness {
            point,
            value: v,
            seed: cfg.seed,
        }));
    }
    Ok(ZeroVerdict::NumericallyZero {
        max_abs,
        probes: n_ok,
    })
}

/// Evaluate (value, scale) at each point; `None` marks a domain error.
/// Parallel when the `parallel` feature is enabled; the output order is the
/// input order either way, so downstream aggregation is deterministic.
pub fn eval_points(target: &Expr, points: &[Point], funcs: &FuncTable) -> Vec<Option<(f64, f64)>> {
    #[cfg(feature = "parallel")]
    {
        points
            .par_iter()
            .map(|p| eval_with_scale(target, p, funcs).ok())
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points
            .iter()
            .map(|p| eval_with_scale(target, p, funcs).ok())
            .collect()
    }
}

/// Replace unbound arbitrary functions by deterministic instantiations:
/// leaf functions become seeded random polynomials of total degree two,
/// functions with declared derivatives become quadrature tables integrated
/// over the probe box. Returns the rewritten target, rewritten singular loci,
/// the function table for evaluation and parameter values pinned during table
/// construction (those must keep the same value at every probe point).
fn instantiate(
    e: &Expr,
    cfg: &ProbeConfig,
) -> Result<(Expr, Vec<Expr>, FuncTable, Point), ProbeError> {
    let (mut targets, singulars, funcs, pinned) = instantiate_many(std::slice::from_ref(e), cfg)?;
    Ok((targets.pop().unwrap(), singulars, funcs, pinned))
}

/// As the single-target instantiation, for a batch sharing one config; used
/// by the grid verifier so every residual sees the same function instances.
pub fn instantiate_many(
    targets: &[Expr],
    cfg: &ProbeConfig,
) -> Result<(Vec<Expr>, Vec<Expr>, FuncTable, Point), ProbeError> {
    let mut decls: Vec<Arc<FuncDecl>> = Vec::new();
    for e in targets {
        for d in e.free_funcs() {
            if !decls.iter().any(|q| **q == *d) {
                decls.push(d);
            }
        }
    }
    for s in &cfg.singular {
        for d in s.free_funcs() {
            if !decls.iter().any(|q| **q == *d) {
                decls.push(d);
            }
        }
    }
    // declared derivatives may reference further functions (H_t = h(t)+1)
    let mut i = 0;
    while i < decls.len() {
        let extra: Vec<Arc<FuncDecl>> = decls[i]
            .known
            .iter()
            .flat_map(|(_, ex)| ex.free_funcs())
            .collect();
        for d in extra {
            if !decls.iter().any(|q| **q == *d) {
                decls.push(d);
            }
        }
        i += 1;
    }
    decls.sort();

    // split: leaves -> polynomial bindings; declared-derivative funcs -> tables
    let mut poly = Bindings::new();
    let mut quads: Vec<Arc<FuncDecl>> = Vec::new();
    for d in &decls {
        if cfg.funcs.contains(&d.name) {
            continue;
        }
        if d.known.is_empty() {
            let seed = cfg.seed ^ name_hash(d.name.as_str());
            poly = poly.func(d.name.as_str(), random_poly(&d.deps, seed));
        } else {
            quads.push(d.clone());
        }
    }

    let apply = |ex: &Expr| -> Result<Expr, ProbeError> { Ok(substitute(ex, &poly)?) };
    let rewritten: Vec<Expr> = targets.iter().map(apply).collect::<Result<_, _>>()?;
    let singulars: Vec<Expr> = cfg.singular.iter().map(apply).collect::<Result<_, _>>()?;

    let mut funcs = cfg.funcs.clone();
    let mut pinned: Point = BTreeMap::new();
    // topological build order: a quadrature whose declared derivative
    // references another pending quadrature waits for it
    let mut pending = quads;
    let mut progress = true;
    while !pending.is_empty() && progress {
        progress = false;
        let mut remaining = Vec::new();
        for d in pending {
            let ready = d.known.iter().all(|(_, expr)| {
                expr.free_funcs().iter().all(|r| {
                    **r == *d || funcs.contains(&r.name) || poly.funcs.contains_key(&r.name)
                })
            });
            if !ready {
                remaining.push(d);
                continue;
            }
            build_table_for(&d, &poly, cfg, &mut funcs, &mut pinned)?;
            progress = true;
        }
        pending = remaining;
    }
    if let Some(d) = pending.first() {
        return Err(ProbeError::Instantiate(
            d.name.as_str().to_string(),
            "cyclic declared derivatives".into(),
        ));
    }
    Ok((rewritten, singulars, funcs, pinned))
}

fn build_table_for(
    d: &Arc<FuncDecl>,
    poly: &Bindings,
    cfg: &ProbeConfig,
    funcs: &mut FuncTable,
    pinned: &mut Point,
) -> Result<(), ProbeError> {
    if d.arity() != 1 {
        return Err(ProbeError::Instantiate(
            d.name.as_str().to_string(),
            "only univariate declared derivatives can be auto-integrated".into(),
        ));
    }
    let var = d.deps[0].clone();
    let deriv = d
        .known_deriv(0)
        .expect("declared derivative present")
        .clone();
    let deriv = substitute(&deriv, poly)?;
    for v in deriv.free_vars() {
        if v != var {
            return Err(ProbeError::Instantiate(
                d.name.as_str().to_string(),
                format!("declared derivative depends on extra variable {}", v.name()),
            ));
        }
    }
    // evaluate over the probe box, slightly extended for finite differences
    let (lo, hi) = cfg.box_for(&var.0);
    let margin = 1e-3 * (hi - lo);
    // parameters in the derivative get pinned for the whole probe run; retry
    // with fresh draws when the pinned values put a pole inside the box
    let mut last_err = None;
    for round in 0u64..8 {
        let mut seed_rng = Rng::new(cfg.seed ^ name_hash(d.name.as_str()) ^ (0xABCD + round));
        let base = seed_rng.uniform(-1.0, 1.0);
        let mut point: Point = pinned.clone();
        let mut fresh: Vec<Name> = Vec::new();
        for p in deriv.free_params() {
            if !point.contains_key(&p.0) {
                let (plo, phi) = cfg.box_for(&p.0);
                point.insert(p.0.clone(), seed_rng.uniform(plo, phi));
                fresh.push(p.0.clone());
            }
        }
        match build_quadrature_table(
            &var,
            &deriv,
            lo - margin,
            hi + margin,
            1025,
            base,
            &point,
            funcs,
        ) {
            Ok(table) => {
                for name in fresh {
                    let v = point[&name];
                    pinned.insert(name, v);
                }
                funcs.insert(d.name.as_str(), FuncImpl::Table(Arc::new(table)));
                return Ok(());
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(ProbeError::Instantiate(
        d.name.as_str().to_string(),
        last_err
            .map(|e| e.to_string())
            .unwrap_or_else(|| "table construction failed".into()),
    ))
}

/// Seeded random polynomial of total degree two in the given variables.
fn random_poly(deps: &[Var], seed: u64) -> Expr {
    let mut rng = Rng::new(seed);
    let mut coeff = || {
        // rationals with small denominators keep downstream exprs exact
        let n = (rng.next_f64() * 200.0 - 100.0).round() as i64;
        Expr::rational(n.clamp(-99, 99), 64)
    };
    let mut terms = vec![coeff()];
    for (i, v) in deps.iter().enumerate() {
        terms.push(Expr::mul(coeff(), Expr::var(v)));
        terms.push(Expr::mul(coeff(), Expr::powi(Expr::var(v), 2)));
        for w in deps.iter().skip(i + 1) {
            terms.push(Expr::prod(vec![coeff(), Expr::var(v), Expr::var(w)]));
        }
    }
    Expr::sum(terms)
}
