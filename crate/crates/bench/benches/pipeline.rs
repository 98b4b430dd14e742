use criterion::{criterion_group, criterion_main, Criterion};
use fracbvp_core::expr;
use fracbvp_core::kernel::{self, KernelContext, Nonlinearity, ProblemSpec};
use fracbvp_core::measures::SignedMeasure;
use fracbvp_core::solver::{self, SolveOptions};
use fracbvp_core::spectral::{self, SpectralOptions};
use std::hint::black_box;

fn example_ctx() -> KernelContext {
    let spec = ProblemSpec::new(
        2.5,
        2.0,
        1.0 / 7.0,
        1.0,
        SignedMeasure::from_atoms(&[(3.0 / 7.0, 2.0), (4.0 / 7.0, -1.0)]).unwrap(),
        Nonlinearity::parse("1 - t + exp(t/4 - u)").unwrap(),
    )
    .unwrap();
    KernelContext::with_defaults(spec).unwrap()
}

fn bench_kernels(c: &mut Criterion) {
    let ctx = example_ctx();
    c.bench_function("kernel/green_g", |b| {
        b.iter(|| kernel::green_g(black_box(0.37), black_box(0.53), black_box(2.5)).unwrap())
    });
    c.bench_function("kernel/kernel_h", |b| {
        b.iter(|| kernel::kernel_h(&ctx, black_box(0.37), black_box(0.53)).unwrap())
    });
    c.bench_function("kernel/g_weight", |b| {
        b.iter(|| kernel::g_weight(&ctx, black_box(0.31)).unwrap())
    });
}

fn bench_spectral(c: &mut Criterion) {
    let ctx = example_ctx();
    c.bench_function("spectral/tau1", |b| {
        b.iter(|| spectral::tau1(&ctx).unwrap())
    });
    c.bench_function("spectral/nystrom_128", |b| {
        b.iter(|| spectral::nystrom_matrix(&ctx, black_box(128)).unwrap())
    });
    let disc = spectral::nystrom_matrix(&ctx, 128).unwrap();
    c.bench_function("spectral/power_iteration_128", |b| {
        b.iter(|| spectral::power_iteration(&disc.matrix, 1e-10, 5000).unwrap())
    });
    c.bench_function("spectral/gelfand_16", |b| {
        b.iter(|| spectral::gelfand_check(&disc.matrix, 16).unwrap())
    });
    let mut group = c.benchmark_group("spectral/bounds");
    group.sample_size(10);
    group.bench_function("n_96_with_doubling", |b| {
        b.iter(|| {
            spectral::spectral_bounds(
                &ctx,
                &SpectralOptions {
                    n: 96,
                    ..Default::default()
                },
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_solver(c: &mut Criterion) {
    let ctx = example_ctx();
    let f = ctx.spec().nonlinearity.clone();
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("picard_grid_65", |b| {
        let opts = SolveOptions {
            grid_size: 65,
            tol: 1e-9,
            ..Default::default()
        };
        b.iter(|| solver::picard_solve(&ctx, &f, None, &opts).unwrap())
    });
    group.bench_function("linear_solve_grid_129", |b| {
        let opts = SolveOptions {
            grid_size: 129,
            ..Default::default()
        };
        let forcing = ctx.gamma_alpha_plus_1();
        b.iter(|| solver::solve_linear(&ctx, |_| forcing, &opts).unwrap())
    });
    group.finish();
}

fn bench_expr(c: &mut Criterion) {
    let source = "1 - t + exp(t/4 - u)";
    c.bench_function("expr/parse", |b| {
        b.iter(|| expr::parse(black_box(source), &["t", "u"]).unwrap())
    });
    let parsed = expr::parse(source, &["t", "u"]).unwrap();
    c.bench_function("expr/evaluate", |b| {
        b.iter(|| expr::evaluate(&parsed, &[("t", black_box(0.4)), ("u", black_box(0.2))]).unwrap())
    });
}

criterion_group!(
    benches,
    bench_kernels,
    bench_spectral,
    bench_solver,
    bench_expr
);
criterion_main!(benches);
