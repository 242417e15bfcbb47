// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2, SymmetricEigen, Vector2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zeno_core::state::SystemState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn entry(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_pure(rng: &mut ChaCha8Rng) -> Vector2<C64> {
    let v = Vector2::new(entry(rng), entry(rng));
    v / C64::from(v.norm())
}

/// `AA†/Tr(AA†)` with uniformly drawn complex entries.
pub fn random_block(rng: &mut ChaCha8Rng) -> Matrix2<C64> {
    let a = Matrix2::from_fn(|_, _| entry(rng));
    let rho = a * a.adjoint();
    rho / rho.trace()
}

/// Random state with `|d⟩` population drawn from `[0, max_destroyed)`.
pub fn random_state(rng: &mut ChaCha8Rng, max_destroyed: f64) -> SystemState {
    let d = if max_destroyed > 0.0 {
        rng.gen_range(0.0..max_destroyed)
    } else {
        0.0
    };
    SystemState::from_parts(random_block(rng) * C64::from(1.0 - d), d)
}

pub fn max_abs_diff(a: &Matrix2<C64>, b: &Matrix2<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn state_diff(a: &SystemState, b: &SystemState) -> f64 {
    max_abs_diff(a.block(), b.block())
        .max((a.destroyed_probability() - b.destroyed_probability()).abs())
}

/// `−(1−s)ΣXᵢ + strength·s|0…0⟩⟨0…0|` on all `2ⁿ` bit strings.
pub fn full_space_hamiltonian(n: usize, s: f64, strength: f64) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        for i in 0..n {
            h[(b ^ (1 << i), b)] -= 1.0 - s;
        }
    }
    h[(0, 0)] += strength * s;
    h
}

/// Eigenvalues of the full-space Hamiltonian that belong to the
/// permutation-symmetric sector, ascending.
///
/// Eigenvalues are clustered to absorb degeneracies; each cluster
/// contributes as many symmetric levels as its summed weight on the Dicke
/// states.
pub fn full_space_symmetric_levels(n: usize, s: f64, strength: f64) -> Vec<f64> {
    let dim = 1usize << n;
    let eig = SymmetricEigen::new(full_space_hamiltonian(n, s, strength));
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    // Dicke weights: popcount k gets 1/C(n,k) per string
    let mut binom = vec![1.0f64; n + 1];
    for k in 1..=n {
        binom[k] = binom[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    let sym_weight = |col: usize| -> f64 {
        let v = eig.eigenvectors.column(col);
        let mut sums = vec![0.0f64; n + 1];
        for b in 0..dim {
            sums[(b as u64).count_ones() as usize] += v[b];
        }
        sums.iter().zip(&binom).map(|(s, c)| s * s / c).sum()
    };

    let mut levels = Vec::new();
    let mut i = 0;
    while i < dim {
        let e0 = eig.eigenvalues[idx[i]];
        let mut j = i;
        let mut weight = 0.0;
        while j < dim && (eig.eigenvalues[idx[j]] - e0).abs() < 1e-8 {
            weight += sym_weight(idx[j]);
            j += 1;
        }
        let count = weight.round() as usize;
        assert!(
            (weight - count as f64).abs() < 1e-6,
            "non-integer symmetric weight {weight}"
        );
        let mean = idx[i..j].iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / (j - i) as f64;
        levels.extend(std::iter::repeat_n(mean, count));
        i = j;
    }
    levels
}
