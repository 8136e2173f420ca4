use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mcflab::csf::step_csf;
use mcflab::geometry::{contours, polyline_intersections, shapes, Vec2};
use mcflab::graphical::assemble_coefficients;
use mcflab::levelset::{evolve_levelset, reinitialize};
use mcflab_bench::{circle_state, disk, graph_pair};

fn csf(c: &mut Criterion) {
    let s = circle_state(512);
    let dt = s.max_dt();
    c.bench_function("csf_step_512", |b| b.iter(|| step_csf(black_box(&s), dt).unwrap()));
    let a = shapes::circle(Vec2::ZERO, 1.0, 512);
    let o = shapes::circle(Vec2::new(1.0, 0.0), 1.0, 512);
    c.bench_function("intersections_512", |b| b.iter(|| polyline_intersections(black_box(&a), black_box(&o))));
}

fn levelset(c: &mut Criterion) {
    let s = disk(1.0 / 64.0);
    let dt = 0.2 * s.phi.h() * s.phi.h();
    c.bench_function("levelset_step_h64", |b| b.iter(|| evolve_levelset(black_box(&s), dt).unwrap()));
    c.bench_function("reinit_h64", |b| b.iter(|| reinitialize(black_box(&s.phi)).unwrap()));
    c.bench_function("contours_h64", |b| b.iter(|| contours(black_box(&s.phi), 0.0)));
}

fn graphical(c: &mut Criterion) {
    let p = graph_pair(65);
    c.bench_function("coefficients_65", |b| b.iter(|| assemble_coefficients(black_box(&p))));
}

criterion_group!(kernels, csf, levelset, graphical);
criterion_main!(kernels);
