use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qnsplit::linalg::dist;
use qnsplit::metric::Sign;
use qnsplit::oracle::{dense_fb_step, dense_resolvent, inclusion_residual, random_instance, OperatorKind};
use qnsplit::resolvent::{fb_step_with_gradient, resolve_perturbed, RootConfig, RootMethod};

fn signs() -> [Sign; 2] {
    [Sign::Plus, Sign::Minus]
}

#[test]
fn perturbed_resolvent_matches_dense_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for trial in 0..120 {
        let kind = OperatorKind::ALL[trial % 4];
        let sign = signs()[(trial / 4) % 2];
        let dim = 2 * rng.random_range(1..=4);
        let rank = rng.random_range(0..=dim.min(3));
        let inst = random_instance(&mut rng, kind, dim, rank, sign);
        let (x, rep) = resolve_perturbed(inst.op.as_ref(), &inst.base, &inst.term, &inst.z, &RootConfig::default())
            .unwrap();
        let reference = dense_resolvent(inst.op.as_ref(), &inst.dense_metric(), &inst.z).unwrap();
        let err = dist(&x, &reference);
        worst = worst.max(err);
        assert!(err <= 1e-8, "trial {trial} ({kind:?}, {sign:?}, r = {rank}): error {err:e}, {rep:?}");
    }
    assert!(worst <= 1e-8);
}

#[test]
fn forward_backward_step_matches_dense_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..60 {
        let kind = OperatorKind::ALL[trial % 4];
        let sign = signs()[trial % 2];
        let inst = random_instance(&mut rng, kind, 6, 1 + trial % 3, sign);
        let q: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (x, _) =
            fb_step_with_gradient(inst.op.as_ref(), &inst.base, &inst.term, &inst.z, &q, &RootConfig::default())
                .unwrap();
        let reference =
            dense_fb_step(inst.op.as_ref(), &inst.dense_metric(), &inst.z, Some(&q), 1e-14, 200_000).unwrap();
        assert!(dist(&x, &reference) <= 1e-8, "trial {trial}");
    }
}

#[test]
fn every_root_method_reaches_the_same_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..40 {
        let inst = random_instance(&mut rng, OperatorKind::ALL[trial % 4], 4, 1, signs()[trial % 2]);
        let v = inst.dense_metric();
        let mut points = Vec::new();
        for method in [RootMethod::Bisection, RootMethod::Newton, RootMethod::Hybrid] {
            let cfg = RootConfig {
                method,
                ..RootConfig::default()
            };
            let (x, _) = resolve_perturbed(inst.op.as_ref(), &inst.base, &inst.term, &inst.z, &cfg).unwrap();
            assert!(inclusion_residual(inst.op.as_ref(), &v, &inst.z, &x) <= 1e-8);
            points.push(x);
        }
        assert!(dist(&points[0], &points[1]) <= 1e-8);
        assert!(dist(&points[0], &points[2]) <= 1e-8);
    }
}

#[test]
fn resolvent_is_nonexpansive_in_its_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for trial in 0..60 {
        let inst = random_instance(&mut rng, OperatorKind::ALL[trial % 4], 6, 1 + trial % 2, signs()[trial % 2]);
        let v = inst.dense_metric();
        let z2: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
        let cfg = RootConfig::default();
        let (x1, _) = resolve_perturbed(inst.op.as_ref(), &inst.base, &inst.term, &inst.z, &cfg).unwrap();
        let (x2, _) = resolve_perturbed(inst.op.as_ref(), &inst.base, &inst.term, &z2, &cfg).unwrap();
        let vnorm = |a: &[f64], b: &[f64]| {
            let d = DVector::from_column_slice(a) - DVector::from_column_slice(b);
            d.dot(&(&v * &d)).sqrt()
        };
        assert!(vnorm(&x1, &x2) <= vnorm(&inst.z, &z2) * (1.0 + 1e-10) + 1e-12);
    }
}
