// SPDX-License-Identifier: Apache-2.0

mod common;

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use zeno_core::state::{decompose_pm, purity_lower_bound, SystemState};

/// Smallest eigenvalue of a 2×2 Hermitian block, from the characteristic
/// polynomial.
fn lambda_min(b: &Matrix2<C64>) -> f64 {
    let tr = (b[(0, 0)] + b[(1, 1)]).re;
    let det = (b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)]).re;
    0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt())
}

#[test]
fn bound_equals_smallest_eigenvalue() {
    let mut rng = common::rng(21);
    for _ in 0..10_000 {
        let b = common::random_block(&mut rng);
        let s = SystemState::from_parts(b, 0.0);
        let bound = purity_lower_bound(s.purity()).unwrap();
        assert!((bound - lambda_min(&b)).abs() <= 1e-9);
        assert!(s.marked_probability() >= bound - 1e-12);
    }
}

#[test]
fn decomposition_of_random_states() {
    let mut rng = common::rng(22);
    for _ in 0..1000 {
        let s = SystemState::from_parts(common::random_block(&mut rng), 0.0);
        let d = decompose_pm(&s).unwrap();
        assert!((d.p_m + d.p_psi - 1.0).abs() <= 1e-12);
        assert!(d.p_m >= -1e-12 && d.p_psi >= -1e-12);
        assert!(common::max_abs_diff(&d.reconstruct(), s.block()) <= 1e-10);
    }
}

proptest! {
    #[test]
    fn purity_within_bounds(seed in any::<u64>(), d in 0.0f64..1.0) {
        let mut rng = common::rng(seed);
        let s = SystemState::from_parts(common::random_block(&mut rng) * C64::from(1.0 - d), d);
        prop_assert!(s.validate(1e-12).is_ok());
        prop_assert!(s.purity() >= 1.0 / 3.0 - 1e-12 && s.purity() <= 1.0 + 1e-12);
    }
}
