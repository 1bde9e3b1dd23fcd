//! Oracle-equivalence self test of the low-rank resolvent.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qnsplit::linalg::dist;
use qnsplit::metric::Sign;
use qnsplit::oracle::{dense_resolvent, random_instance, OperatorKind};
use qnsplit::resolvent::{resolve_perturbed, RootConfig};

use crate::error::Result;

/// Operators of the self test: box, pairwise ℓ₂ ball and soft shrinkage.
pub const SELFTEST_KINDS: [OperatorKind; 3] = [OperatorKind::Box, OperatorKind::Ball, OperatorKind::Shrink];

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub instances: usize,
    pub worst_error: f64,
    /// Instances whose error exceeded the tolerance.
    pub failures: usize,
    pub tolerance: f64,
    pub elapsed: Duration,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Compares [`resolve_perturbed`] with a dense fixed-point oracle on
/// `instances` random problems with `n ≤ 8`, `r ≤ 3` and both signs.
pub fn oracle_selftest(instances: usize, seed: u64, tolerance: f64) -> Result<SelftestReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for i in 0..instances {
        let kind = SELFTEST_KINDS[i % SELFTEST_KINDS.len()];
        let sign = if (i / SELFTEST_KINDS.len()).is_multiple_of(2) { Sign::Plus } else { Sign::Minus };
        let dim = 2 * rng.random_range(1..=4);
        let rank = rng.random_range(1..=dim.min(3));
        let inst = random_instance(&mut rng, kind, dim, rank, sign);
        let (x, _) = resolve_perturbed(inst.op.as_ref(), &inst.base, &inst.term, &inst.z, &RootConfig::default())?;
        let reference = dense_resolvent(inst.op.as_ref(), &inst.dense_metric(), &inst.z)?;
        let err = dist(&x, &reference);
        if !(err <= tolerance) {
            log::warn!("instance {i} ({kind:?}, {sign:?}, n = {dim}, r = {rank}): error {err:e}");
            failures += 1;
        }
        worst = worst.max(err);
    }
    Ok(SelftestReport {
        instances,
        worst_error: worst,
        failures,
        tolerance,
        elapsed: start.elapsed(),
    })
}
