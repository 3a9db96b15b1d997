//! Jet-space machinery: dependents as function symbols, total derivatives,
//! prolonged vector fields and manifold elimination.
//!
//! A dependent unknown (a candidate solution surface, or a determining-system
//! unknown such as g1, g2, g3 or eta) is modelled as an arbitrary-function
//! symbol over the independent variables; its derivative nodes are the jet
//! coordinates. Plain partial differentiation of such nodes then acts as the
//! total derivative, while partial derivatives holding jets fixed and
//! derivatives with respect to a single jet coordinate are computed by
//! temporarily replacing jet nodes with fresh variables.

use crate::symb::ast::{Expr, FuncDecl, FuncNode, Var};
use crate::symb::diff::diff;
use crate::symb::probe::{equals_zero, ProbeConfig, ProbeError, ZeroVerdict};
use crate::symb::simplify::canon_func;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JetError {
    #[error("degenerate elimination: the coefficient of {0} vanishes identically")]
    DegenerateLeading(String),
    #[error("nonlinear in the leading jet coordinate {0}")]
    NonLinearLeading(String),
    #[error(transparent)]
    Probe(#[from] ProbeError),
}

/// The jet node `d^deriv w (default args)` for a dependent `w`.
pub fn jet(decl: &Arc<FuncDecl>, deriv: &[u32]) -> Expr {
    Expr::func_deriv(decl, deriv)
}

/// Derivative of `e` with respect to one specific jet node, treating every
/// other node as independent.
pub fn diff_wrt_node(e: &Expr, node: &Expr) -> Expr {
    let z = Var::new("__jetslot");
    let replaced = e.replace(node, &Expr::var(&z));
    let d = diff(&replaced, &z);
    d.replace(&Expr::var(&z), node)
}

/// Partial derivative with respect to an independent variable, holding every
/// jet node of the listed dependents fixed.
pub fn partial_holding_jets(e: &Expr, v: &Var, deps: &[Arc<FuncDecl>]) -> Expr {
    let nodes = collect_jets(e, deps);
    let mut frozen = e.clone();
    let mut stash: Vec<(Var, Expr)> = Vec::new();
    for (i, n) in nodes.iter().enumerate() {
        let z = Var::new(&format!("__frozen{}", i));
        frozen = frozen.replace(n, &Expr::var(&z));
        stash.push((z, n.clone()));
    }
    let mut d = diff(&frozen, v);
    for (z, n) in stash.iter().rev() {
        d = d.replace(&Expr::var(z), n);
    }
    d
}

/// All jet nodes (function-derivative nodes with default arguments) of the
/// given dependents occurring in `e`, sorted.
pub fn collect_jets(e: &Expr, deps: &[Arc<FuncDecl>]) -> Vec<Expr> {
    let mut out: Vec<Expr> = Vec::new();
    e.walk(&mut |n| {
        if let Expr::Func(f) = n {
            if f.has_default_args() && deps.iter().any(|d| **d == *f.decl) {
                let node = n.clone();
                if !out.contains(&node) {
                    out.push(node);
                }
            }
        }
    });
    out.sort();
    out
}

/// A vector field on the jet space of `dependents` over `independents`:
/// `sum_i xi_i d/d(indep_i) + sum_w phi_w d/d(w)`. Coefficients may mention
/// the jet coordinates themselves.
#[derive(Clone, Debug)]
pub struct JetField {
    pub independents: Vec<(Var, Expr)>,
    pub dependents: Vec<(Arc<FuncDecl>, Expr)>,
}

impl JetField {
    /// Characteristic of a dependent: `phi_w - sum_i xi_i w_{e_i}`.
    pub fn characteristic(&self, w: &Arc<FuncDecl>, phi: &Expr) -> Expr {
        let mut terms = vec![phi.clone()];
        for (v, xi) in &self.independents {
            let mut d = vec![0u32; w.arity()];
            let slot = w
                .deps
                .iter()
                .position(|dv| dv == v)
                .expect("independent missing from dependent signature");
            d[slot] = 1;
            terms.push(Expr::neg(Expr::mul(xi.clone(), jet(w, &d))));
        }
        Expr::sum(terms)
    }

    /// Prolongation coefficient for the jet `w_alpha`:
    /// `D^alpha(char) + sum_i xi_i w_{alpha+e_i}`.
    pub fn prolonged_coeff(&self, w: &Arc<FuncDecl>, phi: &Expr, alpha: &[u32]) -> Expr {
        let char_w = self.characteristic(w, phi);
        let mut d = char_w;
        for (slot, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                d = diff(&d, &w.deps[slot]);
            }
        }
        let mut terms = vec![d];
        for (v, xi) in &self.independents {
            let slot = w.deps.iter().position(|dv| dv == v).expect("independent");
            let mut up = alpha.to_vec();
            up[slot] += 1;
            terms.push(Expr::mul(xi.clone(), jet(w, &up)));
        }
        Expr::sum(terms)
    }

    /// Apply the prolonged field to an expression in the jet variables.
    pub fn apply_prolonged(&self, e: &Expr) -> Expr {
        let deps: Vec<Arc<FuncDecl>> = self.dependents.iter().map(|(d, _)| d.clone()).collect();
        let nodes = collect_jets(e, &deps);
        let mut terms = Vec::new();
        for (v, xi) in &self.independents {
            let p = partial_holding_jets(e, v, &deps);
            if !p.is_zero() {
                terms.push(Expr::mul(xi.clone(), p));
            }
        }
        for node in &nodes {
            let (decl, alpha) = match node {
                Expr::Func(f) => (f.decl.clone(), f.deriv.clone()),
                _ => unreachable!(),
            };
            let phi = self
                .dependents
                .iter()
                .find(|(d, _)| **d == *decl)
                .map(|(_, p)| p.clone())
                .expect("dependent present");
            let slope = diff_wrt_node(e, node);
            if slope.is_zero() {
                continue;
            }
            let coeff = self.prolonged_coeff(&decl, &phi, &alpha);
            terms.push(Expr::mul(coeff, slope));
        }
        Expr::sum(terms)
    }
}

/// Solve `e == 0` for the given jet node; `e` must be affine in the node with
/// a coefficient that does not vanish identically.
pub fn solve_linear_for(e: &Expr, node: &Expr, cfg: &ProbeConfig) -> Result<Expr, JetError> {
    let coeff = diff_wrt_node(e, node);
    let nonlinear = diff_wrt_node(&coeff, node);
    if !nonlinear.is_zero() {
        return Err(JetError::NonLinearLeading(format!("{}", node)));
    }
    match equals_zero(&coeff, cfg)? {
        ZeroVerdict::NonZero(_) => {}
        _ => return Err(JetError::DegenerateLeading(format!("{}", node))),
    }
    let rest = Expr::sub(e.clone(), Expr::mul(coeff.clone(), node.clone()));
    Ok(Expr::neg(Expr::div(rest, coeff)))
}

/// Substitution rules on jets: each entry maps a jet node to its on-manifold
/// expression. Rules may mention nodes rewritten by other rules; application
/// iterates to a fixed point (the rule set must be acyclic).
#[derive(Clone, Debug, Default)]
pub struct JetRules {
    pub rules: Vec<(Expr, Expr)>,
}

impl JetRules {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn push(&mut self, node: Expr, value: Expr) {
        self.rules.push((node, value));
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        let mut cur = e.clone();
        for _ in 0..16 {
            let mut next = cur.clone();
            for (node, value) in &self.rules {
                next = next.replace(node, value);
            }
            if next == cur {
                return cur;
            }
            cur = next;
        }
        cur
    }
}

/// Eliminate every t-derivative (derivatives involving `evol_var`) of the
/// evolution dependents using `w_{evol} = rhs_w` and its total-derivative
/// consequences. The right-hand sides must be free of `evol_var`-derivatives
/// of the dependents.
pub fn eliminate_evolution(e: &Expr, evol_var: &Var, rhs: &[(Arc<FuncDecl>, Expr)]) -> Expr {
    let deps: Vec<Arc<FuncDecl>> = rhs.iter().map(|(d, _)| d.clone()).collect();
    let mut cur = e.clone();
    for _ in 0..64 {
        let nodes = collect_jets(&cur, &deps);
        let mut hit = false;
        for node in nodes {
            let (decl, alpha) = match &node {
                Expr::Func(f) => (f.decl.clone(), f.deriv.clone()),
                _ => unreachable!(),
            };
            let slot = match decl.deps.iter().position(|d| d == evol_var) {
                Some(s) => s,
                None => continue,
            };
            if alpha[slot] == 0 {
                continue;
            }
            // w_{alpha} = D^{alpha - e_evol}(rhs_w)
            let body = rhs
                .iter()
                .find(|(d, _)| **d == *decl)
                .map(|(_, r)| r.clone())
                .expect("dependent present");
            let mut reduced = alpha.clone();
            reduced[slot] -= 1;
            let mut value = body;
            for (i, &k) in reduced.iter().enumerate() {
                for _ in 0..k {
                    value = diff(&value, &decl.deps[i]);
                }
            }
            cur = cur.replace(&node, &value);
            hit = true;
            break;
        }
        if !hit {
            return cur;
        }
    }
    cur
}

/// Convenience: the jet node of `w` differentiated once along `v`.
pub fn jet1(decl: &Arc<FuncDecl>, v: &Var) -> Expr {
    let mut d = vec![0u32; decl.arity()];
    let slot = decl.deps.iter().position(|dv| dv == v).expect("dependency");
    d[slot] = 1;
    jet(decl, &d)
}

/// Convenience: second derivative jet node along `v`, `w`.
pub fn jet2(decl: &Arc<FuncDecl>, v: &Var, w: &Var) -> Expr {
    let mut d = vec![0u32; decl.arity()];
    for q in [v, w] {
        let slot = decl.deps.iter().position(|dv| dv == q).expect("dependency");
        d[slot] += 1;
    }
    jet(decl, &d)
}

/// Expression for a dependent as an unknown: the 0-jet node.
pub fn unknown(decl: &Arc<FuncDecl>) -> Expr {
    canon_func(FuncNode {
        decl: decl.clone(),
        deriv: vec![0; decl.arity()],
        args: decl.deps.iter().map(Expr::var).collect(),
    })
}
