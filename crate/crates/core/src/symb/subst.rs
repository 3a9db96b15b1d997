//! Simultaneous substitution of variables, parameters and arbitrary
//! functions.

use super::ast::{Expr, FuncNode, Name, Param, Var};
use super::diff::diff_n;
use super::simplify::{canon_exp, canon_func, canon_log, canon_pow, canon_prod, canon_sum};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SubstError {
    #[error("cyclic binding: function {0} is bound to an expression mentioning itself")]
    CyclicBinding(String),
}

/// A set of simultaneous bindings. Binding a function symbol to an expression
/// (in the function's declared dependency variables) replaces its stored
/// derivative nodes by actual derivatives of the bound expression.
#[derive(Clone, Default, Debug)]
pub struct Bindings {
    pub vars: BTreeMap<Var, Expr>,
    pub params: BTreeMap<Param, Expr>,
    pub funcs: BTreeMap<Name, Expr>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn var(mut self, name: &str, e: Expr) -> Self {
        self.vars.insert(Var::new(name), e);
        self
    }
    pub fn param(mut self, name: &str, e: Expr) -> Self {
        self.params.insert(Param::new(name), e);
        self
    }
    pub fn func(mut self, name: &str, e: Expr) -> Self {
        self.funcs.insert(Name::new(name), e);
        self
    }
    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.params.is_empty() && self.funcs.is_empty()
    }
}

/// Simultaneous substitution followed by canonical simplification.
pub fn substitute(e: &Expr, b: &Bindings) -> Result<Expr, SubstError> {
    Ok(substitute_with_warnings(e, b)?.0)
}

/// As [`substitute`], additionally reporting bindings whose target symbol
/// does not occur in the expression (they are ignored).
pub fn substitute_with_warnings(e: &Expr, b: &Bindings) -> Result<(Expr, Vec<String>), SubstError> {
    for (name, expr) in &b.funcs {
        if expr.free_funcs().iter().any(|d| d.name == *name) {
            return Err(SubstError::CyclicBinding(name.as_str().to_string()));
        }
    }
    let mut used: BTreeSet<String> = BTreeSet::new();
    let out = apply(e, b, &mut used);
    let mut warnings = Vec::new();
    for v in b.vars.keys() {
        if !used.contains(v.name()) {
            warnings.push(format!("unused binding for variable {}", v.name()));
        }
    }
    for p in b.params.keys() {
        if !used.contains(p.name()) {
            warnings.push(format!("unused binding for parameter {}", p.name()));
        }
    }
    for f in b.funcs.keys() {
        if !used.contains(f.as_str()) {
            warnings.push(format!("unused binding for function {}", f.as_str()));
        }
    }
    Ok((out, warnings))
}

fn apply(e: &Expr, b: &Bindings, used: &mut BTreeSet<String>) -> Expr {
    match e {
        Expr::Num(_) => e.clone(),
        Expr::Var(v) => match b.vars.get(v) {
            Some(r) => {
                used.insert(v.name().to_string());
                r.clone()
            }
            None => e.clone(),
        },
        Expr::Param(p) => match b.params.get(p) {
            Some(r) => {
                used.insert(p.name().to_string());
                r.clone()
            }
            None => e.clone(),
        },
        Expr::Func(f) => {
            let args: Vec<Expr> = f.args.iter().map(|a| apply(a, b, used)).collect();
            match b.funcs.get(&f.decl.name) {
                Some(body) => {
                    used.insert(f.decl.name.as_str().to_string());
                    // derivative nodes become actual derivatives of the body
                    let mut d = body.clone();
                    for (i, &k) in f.deriv.iter().enumerate() {
                        d = diff_n(&d, &f.decl.deps[i], k);
                    }
                    let map: Vec<(Var, Expr)> = f.decl.deps.iter().cloned().zip(args).collect();
                    subst_vars(&d, &map)
                }
                None => canon_func(FuncNode {
                    decl: f.decl.clone(),
                    deriv: f.deriv.clone(),
                    args,
                }),
            }
        }
        Expr::Pow(base, ex) => canon_pow(apply(base, b, used), ex.clone()),
        Expr::Exp(a) => canon_exp(apply(a, b, used)),
        Expr::Log(a) => canon_log(apply(a, b, used)),
        Expr::Prod(fs) => canon_prod(fs.iter().map(|f| apply(f, b, used)).collect()),
        Expr::Sum(ts) => canon_sum(ts.iter().map(|t| apply(t, b, used)).collect()),
    }
}

/// Simultaneous replacement of variables only (no function bindings).
pub fn subst_vars(e: &Expr, map: &[(Var, Expr)]) -> Expr {
    match e {
        Expr::Num(_) | Expr::Param(_) => e.clone(),
        Expr::Var(v) => map
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, r)| r.clone())
            .unwrap_or_else(|| e.clone()),
        Expr::Func(f) => canon_func(FuncNode {
            decl: f.decl.clone(),
            deriv: f.deriv.clone(),
            args: f.args.iter().map(|a| subst_vars(a, map)).collect(),
        }),
        Expr::Pow(base, ex) => canon_pow(subst_vars(base, map), ex.clone()),
        Expr::Exp(a) => canon_exp(subst_vars(a, map)),
        Expr::Log(a) => canon_log(subst_vars(a, map)),
        Expr::Prod(fs) => canon_prod(fs.iter().map(|f| subst_vars(f, map)).collect()),
        Expr::Sum(ts) => canon_sum(ts.iter().map(|t| subst_vars(t, map)).collect()),
    }
}
