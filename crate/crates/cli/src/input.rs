//! Input file formats: equations and point transformations as simple
//! key = expression blocks with optional declarations.
//!
//! Equation files:
//!
//! ```text
//! # linear transfer equation with symbolic h
//! declare h : (t)
//! declare H : (t), H_t = h + 1
//! param kappa
//! singular x
//! A = 1
//! B = h/x
//! C = 0
//! ```
//!
//! A reduced-form equation uses `V = <expr>` instead of A, B, C.
//! Transformation files use the keys T, X, U1, U0 and the optional inverse
//! expressions Tinv, Xinv.

use anyhow::{anyhow, bail, Context, Result};
use redop_core::pde::{ParabolicEquation, ReducedEquation};
use redop_core::symb::ast::{Expr, FuncDecl, Var};
use redop_core::symb::parse::{parse, SymbolEnv};
use redop_core::symb::probe::ProbeConfig;
use redop_core::transform::PointTransformation;
use std::path::Path;

#[derive(Debug)]
pub struct EquationFile {
    pub env: SymbolEnv,
    pub eq: ParabolicEquation,
    pub reduced: Option<ReducedEquation>,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Split on commas at parenthesis depth zero.
fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(ch);
            }
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn parse_declare(body: &str, env: &mut SymbolEnv) -> Result<()> {
    // NAME : (dep, dep) [, NAME_d = expr]*
    let (name, rest) = body
        .split_once(':')
        .ok_or_else(|| anyhow!("declare needs 'name : (deps)'"))?;
    let name = name.trim();
    let rest = rest.trim();
    let close = rest
        .find(')')
        .ok_or_else(|| anyhow!("declare needs a parenthesized dependency list"))?;
    let deps_text = rest
        .get(..close)
        .and_then(|s| s.strip_prefix('('))
        .ok_or_else(|| anyhow!("declare needs a parenthesized dependency list"))?;
    let deps: Vec<Var> = deps_text.split(',').map(|d| Var::new(d.trim())).collect();
    if deps.iter().any(|d| d.name().is_empty()) {
        bail!("empty dependency name in declaration of {}", name);
    }

    let tail = rest[close + 1..].trim().trim_start_matches(',').trim();
    let mut derivs: Vec<(Var, Expr)> = Vec::new();
    if !tail.is_empty() {
        // the declared function itself is visible at order zero
        let mut tmp = env.clone();
        tmp.add_func(FuncDecl::new(name, &deps));
        for part in split_top_level(tail) {
            let (lhs, rhs) = part
                .split_once('=')
                .ok_or_else(|| anyhow!("derivative declaration needs 'name_v = expr'"))?;
            let lhs = lhs.trim();
            let expect_prefix = format!("{}_", name);
            let suffix = lhs
                .strip_prefix(&expect_prefix)
                .ok_or_else(|| anyhow!("derivative declaration must start with {}_", name))?;
            if suffix.len() != 1 {
                bail!(
                    "only first-order derivative declarations are supported ({})",
                    lhs
                );
            }
            let var = deps
                .iter()
                .find(|d| d.name() == suffix)
                .ok_or_else(|| anyhow!("{} is not a dependency of {}", suffix, name))?
                .clone();
            let expr = parse(rhs.trim(), &tmp)
                .map_err(|e| anyhow!("in derivative declaration {}: {}", lhs, e))?;
            derivs.push((var, expr));
        }
    }
    let decl = if derivs.is_empty() {
        FuncDecl::new(name, &deps)
    } else {
        FuncDecl::with_derivs(name, &deps, &derivs)
    };
    env.add_func(decl);
    Ok(())
}

pub fn load_equation(path: &Path, cfg: &ProbeConfig) -> Result<EquationFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading equation file {}", path.display()))?;
    let mut env = SymbolEnv::standard();
    let mut a = None;
    let mut b = None;
    let mut c = None;
    let mut v = None;
    let mut singular: Vec<Expr> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let at = || format!("{}:{}", path.display(), lineno + 1);
        if let Some(rest) = line.strip_prefix("param ") {
            for name in rest.split_whitespace() {
                env = env.with_param(name);
            }
        } else if let Some(rest) = line.strip_prefix("declare ") {
            parse_declare(rest, &mut env).with_context(at)?;
        } else if let Some(rest) = line.strip_prefix("singular ") {
            let e = parse(rest.trim(), &env).map_err(|e| anyhow!("{}: {}", at(), e))?;
            singular.push(e);
        } else if let Some((key, rhs)) = line.split_once('=') {
            let e = parse(rhs.trim(), &env).map_err(|e| anyhow!("{}: {}", at(), e))?;
            match key.trim() {
                "A" => a = Some(e),
                "B" => b = Some(e),
                "C" => c = Some(e),
                "V" => v = Some(e),
                other => bail!("{}: unknown key '{}'", at(), other),
            }
        } else {
            bail!("{}: unrecognized line '{}'", at(), line);
        }
    }

    if let Some(vexpr) = v {
        if a.is_some() || b.is_some() || c.is_some() {
            bail!("{}: give either V or A/B/C, not both", path.display());
        }
        let reduced = ReducedEquation::new(vexpr)?;
        let eq = reduced.as_parabolic().with_singular(singular);
        return Ok(EquationFile {
            env,
            eq,
            reduced: Some(reduced),
        });
    }
    if a.is_none() && b.is_none() && c.is_none() {
        bail!(
            "{}: no coefficients found (need A/B/C or V)",
            path.display()
        );
    }
    let eq = ParabolicEquation::new(
        a.unwrap_or_else(Expr::one),
        b.unwrap_or_else(Expr::zero),
        c.unwrap_or_else(Expr::zero),
        cfg,
    )?
    .with_singular(singular);
    Ok(EquationFile {
        env,
        eq,
        reduced: None,
    })
}

pub fn load_transform(path: &Path, env: &SymbolEnv) -> Result<PointTransformation> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading transformation file {}", path.display()))?;
    let mut t_map = None;
    let mut x_map = None;
    let mut u1 = None;
    let mut u0 = None;
    let mut t_inv = None;
    let mut x_inv = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (key, rhs) = line.split_once('=').ok_or_else(|| {
            anyhow!(
                "{}:{}: expected key = expression",
                path.display(),
                lineno + 1
            )
        })?;
        let e = parse(rhs.trim(), env)
            .map_err(|e| anyhow!("{}:{}: {}", path.display(), lineno + 1, e))?;
        match key.trim() {
            "T" => t_map = Some(e),
            "X" => x_map = Some(e),
            "U1" => u1 = Some(e),
            "U0" => u0 = Some(e),
            "Tinv" => t_inv = Some(e),
            "Xinv" => x_inv = Some(e),
            other => bail!("{}:{}: unknown key '{}'", path.display(), lineno + 1, other),
        }
    }
    let mut tr = PointTransformation::new(
        t_map.ok_or_else(|| anyhow!("{}: missing T", path.display()))?,
        x_map.ok_or_else(|| anyhow!("{}: missing X", path.display()))?,
        u1.unwrap_or_else(Expr::one),
        u0.unwrap_or_else(Expr::zero),
    );
    if let (Some(ti), Some(xi)) = (t_inv, x_inv) {
        tr = tr.with_inverses(ti, xi);
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> std::path::PathBuf {
        let mut path = std::env::temp_dir();
        let unique = format!(
            "redop-input-{}-{}.eq",
            std::process::id(),
            content.len() as u64 + content.bytes().map(u64::from).sum::<u64>()
        );
        path.push(unique);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn equation_file_with_declarations() {
        let path = write_temp(
            "declare h : (t)\ndeclare H : (t), H_t = h + 1\nparam kappa\nsingular x\nA = 1\nB = h/x\nC = 0\n",
        );
        let file = load_equation(&path, &ProbeConfig::default()).unwrap();
        assert_eq!(file.eq.singular.len(), 1);
        assert!(file.env.funcs.contains_key("H"));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn rejects_mixed_and_malformed_input() {
        for bad in [
            "V = 0\nA = 1\n",                    // V and A together
            "Q = 1\n",                           // unknown key
            "declare H (t)\nA = 1\n",            // missing colon
            "declare H : (t), H_x = 1\nA = 1\n", // derivative w.r.t. non-dependency
            "flub\n",                            // unparseable line
        ] {
            let path = write_temp(bad);
            assert!(
                load_equation(&path, &ProbeConfig::default()).is_err(),
                "accepted bad input: {}",
                bad
            );
            std::fs::remove_file(path).ok();
        }
    }

    #[test]
    fn transform_file_defaults_and_inverses() {
        let path = write_temp("T = t\nX = x + t\n");
        let env = crate::input::SymbolEnv::standard();
        let tr = load_transform(&path, &env).unwrap();
        assert!(tr.u1.is_one() && tr.u0.is_zero());
        assert!(tr.auto_invert().is_some());
        std::fs::remove_file(path).ok();
    }
}
