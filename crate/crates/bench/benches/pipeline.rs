use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use nalgebra::UnitQuaternion;

use framext::fixtures;
use framext::holonomy::representative_loop;
use framext::pipeline::{self, Options};
use framext::system::{Literal, MonomialEquation};
use framext::{default_epsilon, group, loop_class, solve, FramePath, GroupElement, MonomialSystem, OctaGroup};

fn group_tables(c: &mut Criterion) {
    c.bench_function("group/build", |b| b.iter(|| OctaGroup::build().unwrap()));
    let all: Vec<GroupElement> = GroupElement::all().collect();
    c.bench_function("group/all_products", |b| {
        b.iter(|| all.iter().flat_map(|&x| all.iter().map(move |&y| x * y)).fold(0, |acc, g| acc ^ g.id()))
    });
}

fn lifting(c: &mut Criterion) {
    let anchor = UnitQuaternion::from_euler_angles(0.4, -1.2, 2.2);
    let path = FramePath::from_quats(representative_loop(&anchor, group().t(), default_epsilon() / 4.0));
    c.bench_function("holonomy/loop_class", |b| b.iter(|| loop_class(black_box(&path), default_epsilon())));
}

fn solver(c: &mut Criterion) {
    // A chain y_k = y_{k+1} closed by a conjugation constraint; forces search on x_1.
    let n = 200;
    let mut eqs: Vec<MonomialEquation> = (0..n)
        .map(|k| MonomialEquation { face: k, literals: vec![Literal::y(k, 1), Literal::y(k + 1, -1)] })
        .collect();
    let t = group().t();
    eqs.push(MonomialEquation {
        face: n,
        literals: vec![Literal::conj(1, t, 1), Literal::y(0, -1), Literal::conj(1, t, 1), Literal::y(n, 1)],
    });
    let sys = MonomialSystem::new(2, eqs);
    c.bench_function("solver/chain", |b| b.iter(|| solve(black_box(&sys), u64::MAX)));
}

fn end_to_end(c: &mut Criterion) {
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    for name in ["torus", "tube"] {
        let fx = fixtures::named(name, 0).unwrap();
        let opts = Options::default();
        g.bench_function(format!("check/{name}"), |b| {
            b.iter(|| pipeline::check(&fx.mesh, &fx.graph, &fx.frames, &opts).unwrap())
        });
        let checked = pipeline::check(&fx.mesh, &fx.graph, &fx.frames, &opts).unwrap();
        g.bench_function(format!("extend/{name}"), |b| {
            b.iter_batched(
                || checked.clone(),
                |mut c| pipeline::extend(&mut c, &opts).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    g.finish();
}

criterion_group!(benches, group_tables, lifting, solver, end_to_end);
criterion_main!(benches);
