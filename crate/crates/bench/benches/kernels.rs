use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use dgsiac_core::harness::{mms_steady_2d, ScatteringVariant};
use dgsiac_core::{ordinates_sphere_cl, solve_steady, DgSpace, IterationOptions, SiacFilter};

fn sweep(c: &mut Criterion) {
    let case = mms_steady_2d(ScatteringVariant::Constant);
    let ords = Arc::new(ordinates_sphere_cl(8, 4).unwrap());
    for k in [1, 2] {
        let space = DgSpace::new(case.mesh(32).unwrap(), k);
        let p = case.problem(space, ords.clone(), 0.0);
        // one iteration is a single transport sweep
        let opts = IterationOptions { tol: 0.0, max_iterations: 1, dsa: false };
        c.bench_function(&format!("sweep_32x32_k{k}"), |b| b.iter(|| black_box(solve_steady(&p, &opts).err())));
    }
}

fn source_iteration(c: &mut Criterion) {
    let case = mms_steady_2d(ScatteringVariant::Constant);
    let ords = Arc::new(ordinates_sphere_cl(8, 4).unwrap());
    let space = DgSpace::new(case.mesh(16).unwrap(), 1);
    let p = case.problem(space, ords, 0.0);
    let opts = IterationOptions::for_degree(1);
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    g.bench_function("si_dsa_16x16_k1", |b| b.iter(|| black_box(solve_steady(&p, &opts).unwrap())));
    g.finish();
}

fn filter(c: &mut Criterion) {
    let case = mms_steady_2d(ScatteringVariant::Constant);
    for k in [1, 2] {
        let space = DgSpace::new(case.mesh(32).unwrap(), k);
        let field = dgsiac_core::project_scalar(&space, k + 3, |x| (case.density)(x, 0.0));
        let f = SiacFilter::new(space.basis(), space.mesh()).unwrap();
        let st = f.stencil(&[0.2, -0.4]);
        let mesh = space.mesh();
        let elems: Vec<usize> = (0..mesh.num_elements()).filter(|&e| st.fits(mesh, e)).collect();
        c.bench_function(&format!("filter_interior_32x32_k{k}"), |b| {
            b.iter(|| {
                let s: f64 = elems.iter().map(|&e| st.apply(&field, 0, e).unwrap()).sum();
                black_box(s)
            })
        });
    }
}

criterion_group!(benches, sweep, source_iteration, filter);
criterion_main!(benches);
