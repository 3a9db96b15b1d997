//! redop: derive, construct and verify reduction operators of linear
//! second-order parabolic PDEs.

mod input;

use anyhow::{anyhow, bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use redop_core::construct::{
    darboux_apply, darboux_transformed_equation, DarbouxOperator, SolutionTuple,
};
use redop_core::detsys::{self, ReductionOperator};
use redop_core::pde::classify_lie;
use redop_core::suite;
use redop_core::symb::ast::{Expr, Var};
use redop_core::symb::diff::diff;
use redop_core::symb::parse::{parse, SymbolEnv};
use redop_core::symb::probe::{equals_zero, ProbeConfig};
use redop_core::transfer::{self, TransferEquation};
use redop_core::transform::{self, InfinitesimalOperator};
use redop_core::verify::{check_from_verdict, VerificationReport};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "redop",
    about = "Reduction operators of linear second-order parabolic PDEs",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Probe seed for randomized zero-testing.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    /// Probe tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemKind {
    De1,
    De0,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeriesKindArg {
    Poly,
    Gauss,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the determining system of an equation.
    Derive {
        #[arg(long)]
        eq: PathBuf,
        #[arg(long, value_enum)]
        system: SystemKind,
    },
    /// Verify an operator against its determining system and the
    /// conditional-invariance criterion.
    VerifyOp {
        #[arg(long)]
        eq: PathBuf,
        /// Operator, e.g. "dt - 1/x*dx" or "dx + u/x*du".
        #[arg(long)]
        op: String,
    },
    /// Build the tau=1 operator attached to a solution tuple "v1; v2[; v3]".
    BuildOp {
        #[arg(long)]
        eq: PathBuf,
        #[arg(long)]
        solutions: String,
    },
    /// Push an equation (and optionally an operator) through a point
    /// transformation.
    Push {
        #[arg(long)]
        eq: PathBuf,
        #[arg(long)]
        transform: PathBuf,
        #[arg(long)]
        op: Option<String>,
    },
    /// Induce a Lie operator of the equation onto a determining system.
    Induce {
        #[arg(long)]
        eq: PathBuf,
        /// Infinitesimal operator, e.g. "2*t*dt + x*dx".
        #[arg(long)]
        op: String,
        #[arg(long, value_enum)]
        system: SystemKind,
    },
    /// Darboux-transform an equation with seed solutions "psi1[; psi2...]".
    Darboux {
        #[arg(long)]
        eq: PathBuf,
        #[arg(long)]
        seeds: String,
        /// Optional expression to transform and verify on the target.
        #[arg(long)]
        apply: Option<String>,
    },
    /// Series solutions of the linear transfer equation u_t = u_xx + h/x u_x.
    Transfer {
        /// Coefficient h: an expression in t, or "h(t)" for symbolic h.
        #[arg(long)]
        h: String,
        #[arg(long, value_enum)]
        series: SeriesKindArg,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        kappa: Option<String>,
    },
    /// Classify a reduced equation and verify its Lie symmetry catalog.
    Catalog {
        #[arg(long)]
        eq: PathBuf,
    },
    /// Run the full acceptance suite.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = ProbeConfig::default().with_seed(cli.seed);
    if let Some(tol) = cli.tol {
        cfg = cfg.with_tolerance(tol);
    }
    if let Cmd::Selftest = cli.cmd {
        let sr = suite::run(cfg.seed);
        match cli.format {
            Format::Text => print!("{}", sr.human()),
            Format::Machine => print!("{}", sr.machine()),
        }
        return if sr.passed() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        };
    }
    match run(&cli, &cfg) {
        Ok(report) => {
            match cli.format {
                Format::Text => print!("{}", report.human()),
                Format::Machine => print!("{}", report.machine()),
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}

fn split_exprs(text: &str, env: &SymbolEnv) -> Result<Vec<Expr>> {
    text.split(';')
        .map(|s| parse(s.trim(), env).map_err(|e| anyhow!("in '{}': {}", s.trim(), e)))
        .collect()
}

fn print_operator(echo: bool, op: &ReductionOperator) {
    if !echo {
        return;
    }
    match op {
        ReductionOperator::Tau1 { g1, g2, g3 } => {
            println!("kind = tau1");
            println!("operator = dt + ({})*dx + (({})*u + ({}))*du", g1, g2, g3);
            println!("g1 = {}", g1);
            println!("g2 = {}", g2);
            println!("g3 = {}", g3);
        }
        ReductionOperator::Tau0 { eta } => {
            println!("kind = tau0");
            println!("operator = dx + ({})*du", eta);
            println!("eta = {}", eta);
        }
    }
}

fn run(cli: &Cli, cfg: &ProbeConfig) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let echo = cli.format == Format::Text;
    macro_rules! info {
        ($($arg:tt)*) => {
            if echo {
                println!($($arg)*);
            }
        };
    }
    match &cli.cmd {
        Cmd::Derive { eq, system } => {
            let file = input::load_equation(eq, cfg)?;
            let sys = match system {
                SystemKind::De1 => detsys::derive_de1(&file.eq),
                SystemKind::De0 => detsys::derive_de0(&file.eq),
            };
            for (i, e) in sys.equations.iter().enumerate() {
                info!("eq{}: {} = 0", i + 1, e);
            }
        }
        Cmd::VerifyOp { eq, op } => {
            let file = input::load_equation(eq, cfg)?;
            let pcfg = file.eq.probe_cfg(cfg);
            let op = detsys::parse_operator(op, &file.env, &pcfg).map_err(|e| anyhow!(e))?;
            print_operator(echo, &op);
            let residuals = detsys::residual_of_operator(&file.eq, &op, &pcfg)?;
            for (i, v) in residuals.iter().enumerate() {
                report.push(check_from_verdict(
                    &format!("detsys-residual-{}", i + 1),
                    v,
                    cfg.seed,
                ));
            }
            let crit = detsys::check_conditional_invariance(&file.eq, &op, &pcfg)?;
            report.push(check_from_verdict(
                "conditional-invariance",
                &crit,
                cfg.seed,
            ));
        }
        Cmd::BuildOp { eq, solutions } => {
            let file = input::load_equation(eq, cfg)?;
            let pcfg = file.eq.probe_cfg(cfg);
            let mut exprs = split_exprs(solutions, &file.env)?;
            match exprs.len() {
                2 => exprs.push(Expr::zero()),
                3 => {}
                n => bail!("--solutions needs 2 or 3 expressions, got {}", n),
            }
            let tuple = SolutionTuple::new(
                &file.eq,
                exprs[0].clone(),
                exprs[1].clone(),
                exprs[2].clone(),
                &pcfg,
            )?;
            let op = redop_core::construct::operator_from_solutions(&tuple)?;
            print_operator(echo, &op);
            let w =
                redop_core::construct::wronskian(&[tuple.v1.clone(), tuple.v2.clone()], &Var::x());
            let vcfg = pcfg.with_singular(vec![w]);
            for (i, v) in detsys::residual_of_operator(&file.eq, &op, &vcfg)?
                .iter()
                .enumerate()
            {
                report.push(check_from_verdict(
                    &format!("detsys-residual-{}", i + 1),
                    v,
                    cfg.seed,
                ));
            }
        }
        Cmd::Push {
            eq,
            transform: tr,
            op,
        } => {
            let file = input::load_equation(eq, cfg)?;
            let pcfg = file.eq.probe_cfg(cfg);
            let trans = input::load_transform(tr, &file.env)?;
            trans.verify_inverses(&pcfg).map_err(|e| anyhow!("{}", e))?;
            let pushed = transform::push_equation(&file.eq, &trans, &pcfg)?;
            info!("A = {}", pushed.a);
            info!("B = {}", pushed.b);
            info!("C = {}", pushed.c);
            if let Some(text) = op {
                let op = detsys::parse_operator(text, &file.env, &pcfg).map_err(|e| anyhow!(e))?;
                let new_op = match &op {
                    ReductionOperator::Tau1 { .. } => transform::push_operator_tau1(&op, &trans)?,
                    ReductionOperator::Tau0 { .. } => transform::push_operator_tau0(&op, &trans)?,
                };
                print_operator(echo, &new_op);
                let vcfg = pushed.probe_cfg(cfg);
                for (i, v) in detsys::residual_of_operator(&pushed, &new_op, &vcfg)?
                    .iter()
                    .enumerate()
                {
                    report.push(check_from_verdict(
                        &format!("pushed-residual-{}", i + 1),
                        v,
                        cfg.seed,
                    ));
                }
            }
        }
        Cmd::Induce { eq, op, system } => {
            let file = input::load_equation(eq, cfg)?;
            let pcfg = file.eq.probe_cfg(cfg);
            let (tau, xi, zeta) =
                detsys::parse_vector_field(op, &file.env).map_err(|e| anyhow!(e))?;
            let zeta1 = diff(&zeta, &Var::u());
            if !diff(&zeta1, &Var::u()).is_zero() {
                bail!("du coefficient must be linear in u for a Lie operator");
            }
            let zeta0 = redop_core::symb::subst::subst_vars(&zeta, &[(Var::u(), Expr::zero())]);
            let q = InfinitesimalOperator::new(tau, xi, zeta1, zeta0)?;
            match system {
                SystemKind::De1 => {
                    let ind = transform::induce_on_de1(&q);
                    info!("tau = {}", ind.tau);
                    info!("xi = {}", ind.xi);
                    for (i, th) in ind.theta.iter().enumerate() {
                        info!("theta{} = {}", i + 1, th);
                    }
                    for (i, v) in transform::check_induced_invariance_de1(&file.eq, &ind, &pcfg)?
                        .iter()
                        .enumerate()
                    {
                        report.push(check_from_verdict(
                            &format!("induced-invariance-{}", i + 1),
                            v,
                            cfg.seed,
                        ));
                    }
                }
                SystemKind::De0 => {
                    let ind = transform::induce_on_de0(&q);
                    info!("tau = {}", ind.tau);
                    info!("xi = {}", ind.xi);
                    info!("zeta = {}", ind.zeta);
                    info!("theta = {}", ind.theta);
                    let v = transform::check_induced_invariance_de0(&file.eq, &ind, &pcfg)?;
                    report.push(check_from_verdict("induced-invariance", &v, cfg.seed));
                }
            }
        }
        Cmd::Darboux { eq, seeds, apply } => {
            let file = input::load_equation(eq, cfg)?;
            let pcfg = file.eq.probe_cfg(cfg);
            let seed_exprs = split_exprs(seeds, &file.env)?;
            let dop = DarbouxOperator::new(seed_exprs, &pcfg)?;
            let target = darboux_transformed_equation(&file.eq, &dop, &pcfg)?;
            info!("A = {}", target.a);
            info!("B = {}", target.b);
            info!("C = {}", target.c);
            if let Some(text) = apply {
                let u = parse(text, &file.env).map_err(|e| anyhow!("{}", e))?;
                let image = darboux_apply(&dop, &u);
                info!("image = {}", image);
                let resid = target.apply_l(&image)?;
                let vcfg = pcfg.with_singular(target.singular.clone());
                let v = equals_zero(&resid, &vcfg)?;
                report.push(check_from_verdict("intertwining", &v, cfg.seed));
            }
        }
        Cmd::Transfer {
            h,
            series,
            n,
            kappa,
        } => {
            let env = SymbolEnv::standard()
                .with_func(redop_core::symb::ast::FuncDecl::new("h", &[Var::t()]))
                .with_params(&["kappa", "nu", "c1", "c2", "hc"]);
            let h_expr = parse(h, &env).map_err(|e| anyhow!("{}", e))?;
            let te = TransferEquation::new(h_expr)?;
            let kappa_expr = match kappa {
                Some(text) => parse(text, &env).map_err(|e| anyhow!("{}", e))?,
                None => Expr::param("kappa"),
            };
            let s = match series {
                SeriesKindArg::Poly => transfer::polynomial_series(&te, *n, &Expr::param("c2")),
                SeriesKindArg::Gauss => {
                    transfer::gaussian_series(&te, *n, &kappa_expr, &Expr::one())
                }
            };
            info!("u = {}", s.expr);
            for (k, c) in s.coeffs.iter().enumerate() {
                info!("coeff{} = {}", k, c);
            }
            let vcfg = te.probe_cfg(cfg).with_singular(s.singular.clone());
            let v = te.eq.solves(&s.expr, &vcfg)?;
            report.push(check_from_verdict("series-residual", &v, cfg.seed));
            // recurrence identities, coefficient by coefficient
            for (k, rhs) in s.recurrence_rhs(&te).iter().enumerate() {
                let lhs = diff(&s.coeffs[k], &Var::t());
                let delta = Expr::sub(lhs, rhs.clone());
                let v = equals_zero(&delta, &vcfg)?;
                report.push(check_from_verdict(
                    &format!("recurrence-{}", k),
                    &v,
                    cfg.seed,
                ));
            }
        }
        Cmd::Catalog { eq } => {
            let file = input::load_equation(eq, cfg)?;
            let pcfg = file.eq.probe_cfg(cfg);
            let reduced = match &file.reduced {
                Some(r) => r.clone(),
                None => {
                    if !file.eq.is_reduced_form() {
                        bail!("catalog needs a reduced-form equation (give V, or A=1 and B=0)");
                    }
                    redop_core::pde::ReducedEquation::new(Expr::neg(file.eq.c.clone()))?
                }
            };
            let case = classify_lie(&reduced, &pcfg)?;
            info!("case = {:?}", case);
            for (name, q) in transform::lie_catalog(&case) {
                let v = transform::check_lie_symmetry(&file.eq, &q, &pcfg)?;
                report.push(check_from_verdict(&format!("lie-{}", name), &v, cfg.seed));
            }
        }
        Cmd::Selftest => unreachable!("handled in main"),
    }
    Ok(report)
}
