//! Recursive-descent parser for the expression grammar.
//!
//! Infix arithmetic `+ - * / ^` with integer literals (rationals are written
//! as quotients), the variables of the symbol environment, declared named
//! parameters, function application `name(args)` with derivative suffix
//! notation `name_x`, `name_tx`, and the builtins `exp(.)`, `log(.)`.
//! Whitespace-insensitive. Errors carry a byte offset.

use super::ast::{Expr, FuncDecl, FuncNode, Param, Var};
use super::simplify::canon_func;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        offset,
        message: message.into(),
    })
}

/// Declared symbols available to the parser.
#[derive(Clone, Debug, Default)]
pub struct SymbolEnv {
    pub vars: BTreeSet<Var>,
    pub params: BTreeSet<Param>,
    pub funcs: BTreeMap<String, Arc<FuncDecl>>,
}

impl SymbolEnv {
    /// The standard environment: variables t, x, u and nothing else.
    pub fn standard() -> Self {
        let mut vars = BTreeSet::new();
        vars.insert(Var::t());
        vars.insert(Var::x());
        vars.insert(Var::u());
        SymbolEnv {
            vars,
            params: BTreeSet::new(),
            funcs: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, name: &str) -> Self {
        self.params.insert(Param::new(name));
        self
    }

    pub fn with_params(mut self, names: &[&str]) -> Self {
        for n in names {
            self.params.insert(Param::new(n));
        }
        self
    }

    pub fn with_func(mut self, decl: Arc<FuncDecl>) -> Self {
        self.funcs.insert(decl.name.as_str().to_string(), decl);
        self
    }

    pub fn with_var(mut self, name: &str) -> Self {
        self.vars.insert(Var::new(name));
        self
    }

    pub fn add_func(&mut self, decl: Arc<FuncDecl>) {
        self.funcs.insert(decl.name.as_str().to_string(), decl);
    }
}

/// Parse an expression; the result is canonical.
pub fn parse(text: &str, env: &SymbolEnv) -> Result<Expr, ParseError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        env,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return err(p.pos, "unexpected trailing input");
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    env: &'a SymbolEnv,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.term()?;
                    acc = Expr::add(acc, rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.term()?;
                    acc = Expr::sub(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.unary()?;
                    acc = Expr::mul(acc, rhs);
                }
                Some(b'/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.unary()?;
                    acc = Expr::div(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.eat(b'-') {
            self.skip_ws();
            let e = self.unary()?;
            return Ok(Expr::neg(e));
        }
        if self.eat(b'+') {
            self.skip_ws();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let at = self.pos;
            let exp = self.unary()?;
            match exp.as_num() {
                Some(r) => Ok(Expr::powr(base, r.clone())),
                None => err(at, "exponent must be an integer or rational constant"),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return err(self.pos, "expected ')'");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => err(self.pos, format!("unexpected character '{}'", c as char)),
            None => err(self.pos, "unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            return err(
                self.pos,
                "decimal literals are not part of the grammar; use rationals like 1/2",
            );
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        let n = BigInt::parse_bytes(text.as_bytes(), 10).ok_or_else(|| ParseError {
            offset: start,
            message: "invalid integer literal".into(),
        })?;
        Ok(Expr::Num(BigRational::new(n, BigInt::one().clone())))
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .to_string();

        if name == "exp" || name == "log" {
            self.skip_ws();
            if !self.eat(b'(') {
                return err(self.pos, format!("expected '(' after {}", name));
            }
            let a = self.expr()?;
            self.skip_ws();
            if !self.eat(b')') {
                return err(self.pos, "expected ')'");
            }
            return Ok(if name == "exp" {
                Expr::exp_of(a)
            } else {
                Expr::log_of(a)
            });
        }

        // derivative suffix: base_txx
        let (base, suffix) = match name.find('_') {
            Some(i) => (name[..i].to_string(), Some(name[i + 1..].to_string())),
            None => (name.clone(), None),
        };

        if let Some(decl) = self.env.funcs.get(&base) {
            let decl = decl.clone();
            let mut deriv = vec![0u32; decl.arity()];
            if let Some(suf) = &suffix {
                if suf.is_empty() {
                    return err(start, "empty derivative suffix");
                }
                for ch in suf.chars() {
                    let mut found = false;
                    for (i, d) in decl.deps.iter().enumerate() {
                        if d.name().len() == 1 && d.name().starts_with(ch) {
                            deriv[i] += 1;
                            found = true;
                            break;
                        }
                    }
                    if !found {
                        return err(
                            start,
                            format!(
                                "'{}' in derivative suffix is not a dependency of {}",
                                ch, base
                            ),
                        );
                    }
                }
            }
            self.skip_ws();
            let args = if self.eat(b'(') {
                let mut args = Vec::new();
                loop {
                    let a = self.expr()?;
                    args.push(a);
                    self.skip_ws();
                    if self.eat(b',') {
                        continue;
                    }
                    if self.eat(b')') {
                        break;
                    }
                    return err(self.pos, "expected ',' or ')'");
                }
                if args.len() != decl.arity() {
                    return err(
                        start,
                        format!(
                            "{} takes {} argument(s), got {}",
                            base,
                            decl.arity(),
                            args.len()
                        ),
                    );
                }
                args
            } else {
                decl.deps.iter().map(Expr::var).collect()
            };
            return Ok(canon_func(FuncNode { decl, deriv, args }));
        }

        if suffix.is_some() {
            return err(start, format!("unknown function symbol '{}'", base));
        }
        let var = Var::new(&name);
        if self.env.vars.contains(&var) {
            return Ok(Expr::Var(var));
        }
        let par = Param::new(&name);
        if self.env.params.contains(&par) {
            return Ok(Expr::Param(par));
        }
        err(
            start,
            format!(
                "unknown symbol '{}' (declare it as a parameter or function)",
                name
            ),
        )
    }
}
