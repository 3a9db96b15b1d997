//! Symbolic-numeric engine for reduction (nonclassical-symmetry) operators of
//! (1+1)-dimensional linear second-order parabolic PDEs
//! `u_t = A(t,x) u_xx + B(t,x) u_x + C(t,x) u`.
//!
//! The crate derives the determining systems for reduction operators with
//! nonvanishing and vanishing time components, verifies candidate operators
//! against them and against the general conditional-invariance criterion via
//! second prolongation, builds operators from solution families (Wronskian,
//! Cole-Hopf and Darboux constructions), transports equations and operators
//! under point transformations, and reproduces the special solution families
//! of linear transfer equations `u_t = u_xx + h(t)/x u_x`.
//!
//! Zero-claims are checked with a tri-state verdict: proven (canonical form
//! collapses to the literal zero) or probed numerically at seeded random
//! points. Probing and grid evaluation fan out over points with rayon when
//! the default `parallel` feature is enabled; a sequential fallback is used
//! without it. Aggregation is an order-independent maximum, so results are
//! deterministic either way.

pub mod construct;
pub mod detsys;
pub mod jet;
pub mod pde;
pub mod suite;
pub mod symb;
pub mod transfer;
pub mod transform;
pub mod verify;

pub use symb::{Expr, FuncDecl, ProbeConfig, Var, ZeroVerdict};
