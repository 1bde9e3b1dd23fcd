use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qnsplit::linalg::{self, dist, dot, norm};
use qnsplit::metric::{build_sr1_metric, osr1_direction, GammaRule, Osr1Update, Sign, SpdBase};
use qnsplit::ops::{
    firm_nonexpansive_defect, prox_box, prox_group_l21, project_pairwise_l2_ball, BlockOperator, BoxConstraint,
    Convolution2d, GroupShrink, LinearOperator, MonotoneOperator, PairwiseBall, SoftShrink,
};
use qnsplit::oracle::{random_instance, OperatorKind};
use qnsplit::resolvent::{eval_root_l, prop_bound, resolve_perturbed, LowRankTerm, RootConfig};

fn vec_of(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, len)
}

fn even_vec() -> impl Strategy<Value = Vec<f64>> {
    (1usize..6).prop_flat_map(|h| vec_of(2 * h))
}

fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn adjoint_gap(op: &LinearOperator, x: &[f64], y: &[f64]) -> f64 {
    let lhs = dot(&op.apply(x).unwrap(), y);
    let rhs = dot(x, &op.apply_adjoint(y).unwrap());
    (lhs - rhs).abs() / (1.0 + norm(x) * norm(y))
}

fn operators() -> Vec<LinearOperator> {
    let kernel: Vec<f64> = [1.0, 2.0, 1.0, 2.0, 4.0, 2.0, 1.0, 2.0, 1.0, 1.0, 2.0, 1.0, 0.5, 1.0, 0.5]
        .iter()
        .map(|v| v / 22.0)
        .collect();
    let conv = Convolution2d::new(4, 5, 5, 3, kernel).unwrap();
    let dense = LinearOperator::Dense(DMatrix::from_fn(7, 20, |i, j| ((3 * i + 5 * j) % 7) as f64 - 3.0));
    vec![
        LinearOperator::ForwardDifference2d { rows: 4, cols: 5 },
        LinearOperator::Convolution2d(conv.clone()),
        dense.clone(),
        LinearOperator::Block(
            BlockOperator::new(
                vec![40, 7],
                vec![20],
                vec![vec![Some(LinearOperator::ForwardDifference2d { rows: 4, cols: 5 })], vec![Some(dense)]],
            )
            .unwrap(),
        ),
        LinearOperator::Block(BlockOperator::diagonal(vec![
            LinearOperator::Convolution2d(conv),
            LinearOperator::Diagonal(vec![2.0, -1.0, 0.5]),
        ])),
    ]
}

fn catalog() -> Vec<Arc<dyn MonotoneOperator>> {
    vec![
        Arc::new(BoxConstraint::new(-1.0, 2.0).unwrap()),
        Arc::new(BoxConstraint::orthant()),
        Arc::new(PairwiseBall::new(0.7).unwrap()),
        Arc::new(SoftShrink::new(0.4).unwrap()),
        Arc::new(GroupShrink::new(0.9).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn adjoints_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for op in operators() {
            let x = random_vector(&mut rng, op.in_dim());
            let y = random_vector(&mut rng, op.out_dim());
            prop_assert!(adjoint_gap(&op, &x, &y) <= 1e-12);
        }
    }

    #[test]
    fn declared_norm_bounds_hold(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for op in operators() {
            let x = random_vector(&mut rng, op.in_dim());
            let ax = op.apply(&x).unwrap();
            prop_assert!(norm(&ax) <= op.norm_bound() * norm(&x) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn resolvents_are_firmly_nonexpansive(
        (z1, z2) in even_vec().prop_flat_map(|a| { let n = a.len(); (Just(a), vec_of(n)) }),
        tau in 0.05f64..5.0,
    ) {
        for op in catalog() {
            prop_assert!(firm_nonexpansive_defect(op.as_ref(), &z1, &z2, tau) <= 1e-12);
        }
    }

    #[test]
    fn projections_are_idempotent(z in even_vec(), r in 0.01f64..3.0) {
        let p = project_pairwise_l2_ball(&z, r).unwrap();
        prop_assert!(dist(&project_pairwise_l2_ball(&p, r).unwrap(), &p) <= 1e-14 * (1.0 + r));
        for pair in p.chunks(2) {
            prop_assert!(norm(pair) <= r * (1.0 + 1e-15));
        }
        let b = prox_box(&z, -r, r).unwrap();
        prop_assert_eq!(prox_box(&b, -r, r).unwrap(), b);
    }

    #[test]
    fn moreau_decomposition(z in even_vec(), lam in 0.0f64..3.0) {
        // Shrinkage and projection onto the dual-norm ball sum to the identity.
        let shrink = SoftShrink::new(lam).unwrap().resolvent(&z, 1.0);
        let clip = prox_box(&z, -lam, lam).unwrap();
        for i in 0..z.len() {
            prop_assert!((shrink[i] + clip[i] - z[i]).abs() <= 1e-12);
        }
        let group = prox_group_l21(&z, lam).unwrap();
        let ball = project_pairwise_l2_ball(&z, lam).unwrap();
        for i in 0..z.len() {
            prop_assert!((group[i] + ball[i] - z[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn sr1_metric_satisfies_the_secant_equation(
        (s, y, d) in (2usize..10).prop_flat_map(|n| (vec_of(n), vec_of(n), prop::collection::vec(0.2f64..4.0, n))),
    ) {
        let base = Arc::new(SpdBase::diagonal(d).unwrap());
        let (metric, skipped) = build_sr1_metric(&base, 1, &s, &y, GammaRule::Secant, 1.0).unwrap();
        if skipped.is_none() {
            let ms = metric.apply(&s).unwrap();
            prop_assert!(dist(&ms, &y) <= 1e-10 * (1.0 + norm(&y)));
        } else {
            prop_assert!(metric.is_unperturbed());
        }
    }

    #[test]
    fn minus_safeguard_keeps_margin(
        (s, y) in (2usize..12).prop_flat_map(|n| (vec_of(n), vec_of(n))),
        c in 0.05f64..0.95,
        scale in 2.5f64..6.0,
    ) {
        let n = s.len();
        let beta = 1.0;
        let base = Arc::new(SpdBase::scaled_identity(n, scale).unwrap());
        let margin = base.rho_min() - 1.0 / beta;
        let (metric, _) = build_sr1_metric(&base, 3, &s, &y, GammaRule::SafeguardA2 { c }, beta).unwrap();
        let shifted = metric.to_dense() - DMatrix::identity(n, n) / beta;
        prop_assert!(linalg::min_eigenvalue(&shifted) >= (1.0 - c) * margin - 1e-10);
    }

    #[test]
    fn sr1_sign_follows_curvature((s, y) in (2usize..8).prop_flat_map(|n| (vec_of(n), vec_of(n)))) {
        let base = SpdBase::scaled_identity(s.len(), 1.0).unwrap();
        let d: Vec<f64> = y.iter().zip(&s).map(|(a, b)| a - b).collect();
        match osr1_direction(&base, &s, &y).unwrap() {
            Osr1Update::Direction { sign, u } => {
                prop_assert_eq!(sign == Sign::Plus, dot(&d, &s) > 0.0);
                prop_assert!((dot(&u, &s).abs() - dot(&d, &s).abs().sqrt()).abs() <= 1e-9 * (1.0 + norm(&d) * norm(&s)));
            }
            Osr1Update::NoUpdate(_) => prop_assert!(dot(&d, &s).abs() <= 1e-12 * norm(&d) * norm(&s) + 1e-300),
        }
    }

    #[test]
    fn root_function_is_monotone_and_lipschitz(
        seed in any::<u64>(),
        kind in 0usize..4,
        rank in 1usize..4,
        minus in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let inst = random_instance(&mut rng, OperatorKind::ALL[kind], 6, rank, sign);
        let w = inverse_weighted_norm2(&inst.base, &inst.term);
        let a = random_vector(&mut rng, rank);
        let b: Vec<f64> = a.iter().map(|v| v + rng.random_range(-2.0..2.0)).collect();
        let la = eval_root_l(inst.op.as_ref(), &inst.base, &inst.term, &inst.z, &a).unwrap();
        let lb = eval_root_l(inst.op.as_ref(), &inst.base, &inst.term, &inst.z, &b).unwrap();
        let dl: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x - y).collect();
        let da: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let floor = if minus { 1.0 - w } else { 1.0 };
        prop_assert!(dot(&dl, &da) >= floor * dot(&da, &da) * (1.0 - 1e-9));
        prop_assert!(norm(&dl) <= (1.0 + w) * norm(&da) * (1.0 + 1e-9));
    }

    #[test]
    fn a_priori_bracket_contains_the_root(seed in any::<u64>(), kind in 0usize..4, minus in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let inst = random_instance(&mut rng, OperatorKind::ALL[kind], 4, 1, sign);
        let (_, rep) = resolve_perturbed(inst.op.as_ref(), &inst.base, &inst.term, &inst.z, &RootConfig::default()).unwrap();
        let (j0, _) = resolve_perturbed(inst.op.as_ref(), &inst.base, &LowRankTerm::none(), &[0.0; 4], &RootConfig::default()).unwrap();
        let bound = prop_bound(inst.term.norm(), norm(&inst.z), norm(&j0));
        prop_assert!(rep.alpha[0].abs() <= bound);
    }
}

/// `‖M^{-1/2}U‖²`, the spectral quantity in the root-function bounds.
fn inverse_weighted_norm2(base: &SpdBase, term: &LowRankTerm) -> f64 {
    let m = base.to_dense();
    let n = m.nrows();
    let u = DMatrix::from_fn(n, term.rank(), |i, j| term.dirs()[j][i] / m[(i, i)].sqrt());
    linalg::max_eigenvalue(&(u.transpose() * u))
}

