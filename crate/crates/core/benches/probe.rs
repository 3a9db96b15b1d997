//! Pointwise residual evaluation: rayon fan-out vs the sequential baseline.
//!
//! Both entry points always exist; `max_on_points` uses rayon when the crate
//! is built with the default `parallel` feature and falls back to the
//! sequential path otherwise, so the two series coincide in a
//! `--no-default-features` build.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use redop_core::symb::ast::{Expr, Name};
use redop_core::symb::numeric::{FuncTable, Point};
use redop_core::symb::probe::Rng;
use redop_core::verify::{max_on_points, max_on_points_seq};
use std::collections::BTreeMap;

/// A moderately sized rational-exponential expression, representative of
/// post-substitution determining-system residuals before cancellation.
fn residual_expr() -> Expr {
    let poly = Expr::powi(
        Expr::sum(vec![
            Expr::x(),
            Expr::mul(Expr::int(2), Expr::t()),
            Expr::one(),
        ]),
        6,
    );
    let rat = Expr::div(
        Expr::add(Expr::powi(Expr::x(), 2), Expr::one()),
        Expr::add(Expr::mul(Expr::int(2), Expr::t()), Expr::one()),
    );
    let gauss = Expr::exp_of(Expr::neg(Expr::div(
        Expr::powi(Expr::x(), 2),
        Expr::mul(Expr::int(4), Expr::t()),
    )));
    Expr::mul(Expr::add(poly, rat), gauss)
}

fn sample_points(n: usize) -> Vec<Point> {
    let mut rng = Rng::new(0xbe9c);
    (0..n)
        .map(|_| {
            let mut p: Point = BTreeMap::new();
            p.insert(Name::new("t"), rng.uniform(0.1, 2.0));
            p.insert(Name::new("x"), rng.uniform(0.3, 2.0));
            p
        })
        .collect()
}

fn bench_pointwise(c: &mut Criterion) {
    let expr = residual_expr();
    let funcs = FuncTable::new();
    let mut group = c.benchmark_group("pointwise-residual");
    for n in [512usize, 4096, 16384] {
        let points = sample_points(n);
        group.bench_with_input(BenchmarkId::new("parallel", n), &points, |b, pts| {
            b.iter(|| black_box(max_on_points(&expr, pts, &funcs)))
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &points, |b, pts| {
            b.iter(|| black_box(max_on_points_seq(&expr, pts, &funcs)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_pointwise);
criterion_main!(benches);
