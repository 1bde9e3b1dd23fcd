use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qnsplit::linalg::{self, dist, dot};
use qnsplit::metric::{GammaRule, MetricMode};
use qnsplit::ops::cocoercivity_defect;
use qnsplit::pdhg::{pdhg_step, PdhgModel};
use qnsplit::splitting::{run, AlphaSchedule, SolverConfig, Variant};
use qnsplit_imaging::pgm::{read_pgm, write_pgm};
use qnsplit_imaging::{
    add_gaussian_noise, build_blur_op, build_deconvolution, build_denoising, build_gradient_op, build_infconv,
    dual_value, edge_weights, gaussian_kernel, pd_gap, primal_value, Image, ImageProblem, Phantom,
};

fn noisy(phantom: Phantom, rows: usize, cols: usize, seed: u64) -> Image {
    add_gaussian_noise(&phantom.render(rows, cols).unwrap(), 10.0, seed).unwrap()
}

fn denoising(rows: usize, cols: usize) -> ImageProblem {
    let b = noisy(Phantom::Shapes, rows, cols, 3);
    let w = edge_weights(&b, 10.0).unwrap();
    build_denoising(&b, 0.1, &w, 0.1, 0.1).unwrap()
}

fn plain_pdhg(p: &ImageProblem, iters: usize, mut visit: impl FnMut(usize, &[f64])) -> Vec<f64> {
    let m = p.metric().unwrap();
    let mut z = p.initial_point();
    for k in 0..iters {
        z = pdhg_step(&p.saddle, &m, &z).unwrap();
        visit(k + 1, &z);
    }
    z
}

#[test]
fn blur_norm_estimate_is_at_most_one() {
    let a = build_blur_op(&gaussian_kernel(5, 1.5).unwrap(), 20, 17).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let est = linalg::power_iteration_norm(
        340,
        340,
        |x, y| a.apply_into(x, y),
        |y, x| a.apply_adjoint_into(y, x),
        500,
        &mut rng,
    );
    assert!(est <= 1.0 + 1e-6, "estimated norm {est}");
    assert!(est > 0.99);
}

#[test]
fn gradient_norm_estimate_respects_declared_bound() {
    let d = build_gradient_op(16, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let est = linalg::power_iteration_norm(
        256,
        512,
        |x, y| d.apply_into(x, y),
        |y, x| d.apply_adjoint_into(y, x),
        2000,
        &mut rng,
    );
    assert!(est * est <= 8.0);
    assert!(est * est > 7.5);
}

#[test]
fn dual_gradient_matches_finite_differences() {
    let b = noisy(Phantom::Checkerboard, 6, 5, 4);
    let w = edge_weights(&b, 10.0).unwrap();
    let p = build_infconv(&b, 0.01, &w, 0.1, 0.1, Some(&gaussian_kernel(3, 1.0).unwrap())).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let y: Vec<f64> = (0..60).map(|_| rng.random_range(-1.0..1.0)).collect();
    let f = |y: &[f64]| 0.5 * y.chunks(2).zip(&w).map(|(q, wi)| dot(q, q) / (wi * wi)).sum::<f64>();
    let grad = p.saddle.grad_f.apply(&y);
    let h = 1e-5;
    for i in 0..y.len() {
        let (mut up, mut dn) = (y.clone(), y.clone());
        up[i] += h;
        dn[i] -= h;
        let fd = (f(&up) - f(&dn)) / (2.0 * h);
        assert!((fd - grad[i]).abs() <= 1e-6, "component {i}: {fd} vs {}", grad[i]);
    }
}

#[test]
fn clean_data_with_tiny_weight_is_recovered() {
    let b = Phantom::Ramp.render(8, 8).unwrap();
    let p = build_deconvolution(&b, 1e-8, 0.3, 0.3, &qnsplit_imaging::Kernel::delta()).unwrap();
    let z = plain_pdhg(&p, 2000, |_, _| {});
    assert!(dist(&z[..64], &b.pixels) <= 1e-4 * linalg::norm(&b.pixels));
}

#[test]
fn quasi_newton_pdhg_matches_long_reference() {
    let b = noisy(Phantom::Shapes, 8, 8, 9);
    let p = build_deconvolution(&b, 20.0, 0.2, 0.6, &gaussian_kernel(5, 1.5).unwrap()).unwrap();
    let reference = plain_pdhg(&p, 10_000, |_, _| {});
    let (xr, _) = p.split(&reference);
    for (variant, scale) in [(Variant::Relaxed, 5.0), (Variant::Inertial, 0.5)] {
        let cfg = SolverConfig {
            variant,
            metric: MetricMode::Sr1(GammaRule::Fixed { scale }),
            alpha: AlphaSchedule::Zero,
            max_iter: 10_000,
            stop_tol: 0.0,
            ..SolverConfig::default()
        };
        let model = PdhgModel::new(&p.saddle, p.metric().unwrap()).unwrap();
        let out = run(&model, &cfg, &p.initial_point(), |_, _| {}).unwrap();
        let (x, _) = p.split(&out.z);
        assert!(dist(x, xr) <= 1e-6 * (1.0 + linalg::norm(xr)), "{variant:?}: distance {:e}", dist(x, xr));
    }
}

#[test]
fn denoising_gap_decreases_along_reference_run() {
    let p = denoising(12, 12);
    // Objective values are of order ‖b‖², which sets the rounding floor.
    let floor = 1e-14 * dot(&p.b, &p.b);
    let mut samples = Vec::new();
    let z = plain_pdhg(&p, 3000, |k, z| {
        if k % 50 == 0 {
            let (x, y) = p.split(z);
            samples.push(pd_gap(&p, x, y, None).pd_gap.unwrap());
        }
    });
    for pair in samples.windows(2) {
        assert!(pair[1] <= pair[0] + floor, "{pair:?}");
    }
    let (x, y) = p.split(&z);
    let gap = pd_gap(&p, x, y, None).pd_gap.unwrap();
    assert!(gap.abs() <= 1e-8, "gap {gap:e}");
}

#[test]
fn pgm_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shapes.pgm");
    let img = Phantom::Shapes.render(9, 7).unwrap();
    write_pgm(&path, &img).unwrap();
    assert_eq!(read_pgm(&path).unwrap(), img);
}

fn feasible_pair(p: &ImageProblem, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..p.pixels()).map(|_| rng.random_range(0.0..255.0)).collect();
    let y: Vec<f64> = (0..2 * p.pixels())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect::<Vec<_>>()
        .chunks(2)
        .flat_map(|q| {
            let s = p.mu * rng.random_range(0.0..1.0) / linalg::norm(q).max(1e-12);
            [q[0] * s, q[1] * s]
        })
        .collect();
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn adjoints_match(seed in any::<u64>(), rows in 1usize..9, cols in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rows * cols;
        let ops = [
            build_gradient_op(rows, cols).unwrap(),
            build_blur_op(&gaussian_kernel(5, 1.5).unwrap(), rows, cols).unwrap(),
        ];
        for op in &ops {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..op.out_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lhs = dot(&op.apply(&x).unwrap(), &y);
            let rhs = dot(&x, &op.apply_adjoint(&y).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn maps_are_cocoercive_with_declared_beta(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = noisy(Phantom::Shapes, 6, 6, seed);
        let w = edge_weights(&b, 10.0).unwrap();
        let k = gaussian_kernel(5, 1.5).unwrap();
        let problems = [
            build_deconvolution(&b, 0.001, 0.09, 0.9, &k).unwrap(),
            build_infconv(&b, 0.01, &w, 0.1, 0.1, Some(&k)).unwrap(),
            build_denoising(&b, 0.1, &w, 0.1, 0.1).unwrap(),
        ];
        for p in &problems {
            let z1: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-100.0..100.0)).collect();
            let z2: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-100.0..100.0)).collect();
            let (b1, b2) = (apply_b(p, &z1), apply_b(p, &z2));
            let d: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| a - b).collect();
            let g: Vec<f64> = b1.iter().zip(&b2).map(|(a, b)| a - b).collect();
            prop_assert!(dot(&d, &g) >= p.beta * dot(&g, &g) * (1.0 - 1e-12));
            prop_assert!(cocoercivity_defect(p.saddle.grad_g.as_ref(), &z1[..p.pixels()], &z2[..p.pixels()]) <= 1e-9);
        }
    }

    #[test]
    fn primal_objective_is_midpoint_convex(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = noisy(Phantom::Checkerboard, 5, 6, seed);
        let w = edge_weights(&b, 10.0).unwrap();
        let problems = [
            build_deconvolution(&b, 0.5, 0.09, 0.9, &gaussian_kernel(3, 1.0).unwrap()).unwrap(),
            build_denoising(&b, 0.1, &w, 0.1, 0.1).unwrap(),
        ];
        for p in &problems {
            let x1: Vec<f64> = (0..30).map(|_| rng.random_range(0.0..255.0)).collect();
            let x2: Vec<f64> = (0..30).map(|_| rng.random_range(0.0..255.0)).collect();
            let mid: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 0.5 * (a + b)).collect();
            let (f1, f2, fm) = (primal_value(p, &x1), primal_value(p, &x2), primal_value(p, &mid));
            prop_assert!(fm <= 0.5 * (f1 + f2) + 1e-9 * (1.0 + f1.abs() + f2.abs()));
        }
    }

    #[test]
    fn denoising_gap_is_nonnegative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = denoising(5, 4);
        let (x, y) = feasible_pair(&p, &mut rng);
        let gap = pd_gap(&p, &x, &y, None).pd_gap.unwrap();
        prop_assert!(gap >= -1e-9);
        prop_assert!(dual_value(&p, &y).unwrap().is_finite());
    }
}

fn apply_b(p: &ImageProblem, z: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; z.len()];
    p.saddle.apply_b_into(z, &mut out);
    out
}
