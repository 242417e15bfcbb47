// SPDX-License-Identifier: Apache-2.0

//! Transverse-field hypercube search restricted to the symmetric subspace.
//!
//! Basis state `k` is the normalised sum of all bit strings at Hamming
//! distance `k` from the marked string. In this basis `Σᵢ Xᵢ` is
//! tridiagonal with `⟨k+1|ΣX|k⟩ = √((k+1)(n−k))`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub const MAX_QUBITS: usize = 64;

/// Sign of the marked projector term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkedSign {
    /// Lowers `|m⟩`, making it the ground state at `s = 1`.
    #[default]
    Negative,
    Positive,
}

impl MarkedSign {
    pub fn value(self) -> f64 {
        match self {
            MarkedSign::Negative => -1.0,
            MarkedSign::Positive => 1.0,
        }
    }
}

/// Strength of the marked projector term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkedScale {
    /// `n·s|m⟩⟨m|`
    #[default]
    Extensive,
    /// `s|m⟩⟨m|`
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hypercube {
    pub n: usize,
    #[serde(default)]
    pub sign: MarkedSign,
    #[serde(default)]
    pub scale: MarkedScale,
}

/// `H(s) = −(1−s)ΣXᵢ ± (n or 1)·s|m⟩⟨m|` in the symmetric basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricHamiltonian {
    pub n: usize,
    pub s: f64,
    pub diagonal: Vec<f64>,
    /// Entry `(k, k+1)` for `k = 0..n`.
    pub off_diagonal: Vec<f64>,
}

impl SymmetricHamiltonian {
    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.n + 1;
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diagonal));
        for (k, &v) in self.off_diagonal.iter().enumerate() {
            h[(k, k + 1)] = v;
            h[(k + 1, k)] = v;
        }
        debug_assert_eq!(h.nrows(), d);
        h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    pub s: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `|⟨m|vᵢ⟩|²` per eigenvector.
    pub marked_overlap: Vec<f64>,
    /// `|⟨ω̃|vᵢ⟩|²` per eigenvector.
    pub omega_overlap: Vec<f64>,
}

impl SpectrumSlice {
    pub fn gap(&self) -> f64 {
        self.eigenvalues[1] - self.eigenvalues[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinGap {
    pub s_star: f64,
    pub g_min: f64,
}

/// Components of `|ω̃⟩` in the symmetric basis: binomial weights
/// `√(C(n,k)/2ⁿ)` with the `k = 0` term projected out.
pub fn omega_tilde_components(n: usize) -> Vec<f64> {
    // ln C(n,k) built incrementally to stay finite at n = 64
    let mut log_binom = 0.0f64;
    let ln2n = n as f64 * std::f64::consts::LN_2;
    let mut w = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            log_binom += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        w.push((0.5 * (log_binom - ln2n)).exp());
    }
    w[0] = 0.0;
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter().map(|v| v / norm).collect()
}

impl Hypercube {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            sign: MarkedSign::default(),
            scale: MarkedScale::default(),
        }
    }

    pub fn with_sign(mut self, sign: MarkedSign) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_scale(mut self, scale: MarkedScale) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_QUBITS).contains(&self.n) {
            return Err(Error::InvalidParameter(format!(
                "qubit count {} outside 1..={MAX_QUBITS}",
                self.n
            )));
        }
        Ok(())
    }

    fn marked_strength(&self) -> f64 {
        let scale = match self.scale {
            MarkedScale::Extensive => self.n as f64,
            MarkedScale::Unit => 1.0,
        };
        self.sign.value() * scale
    }

    pub fn hamiltonian(&self, s: f64) -> Result<SymmetricHamiltonian> {
        self.validate()?;
        if !(0.0..=1.0).contains(&s) {
            return Err(domain("s", s, "[0, 1]"));
        }
        let n = self.n;
        let mut diagonal = vec![0.0; n + 1];
        diagonal[0] = self.marked_strength() * s;
        let off_diagonal = (0..n)
            .map(|k| -(1.0 - s) * (((k + 1) * (n - k)) as f64).sqrt())
            .collect();
        Ok(SymmetricHamiltonian {
            n,
            s,
            diagonal,
            off_diagonal,
        })
    }

    pub fn spectrum(&self, s: f64) -> Result<SpectrumSlice> {
        let h = self.hamiltonian(s)?.matrix();
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
            .ok_or(Error::Eigensolver { index: self.n })?;
        let mut order: Vec<usize> = (0..=self.n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let omega = omega_tilde_components(self.n);
        let mut out = SpectrumSlice {
            s,
            eigenvalues: Vec::with_capacity(self.n + 1),
            marked_overlap: Vec::with_capacity(self.n + 1),
            omega_overlap: Vec::with_capacity(self.n + 1),
        };
        for i in order {
            let v = eig.eigenvectors.column(i);
            out.eigenvalues.push(eig.eigenvalues[i]);
            out.marked_overlap.push(v[0] * v[0]);
            let o: f64 = v.iter().zip(&omega).map(|(a, b)| a * b).sum();
            out.omega_overlap.push(o * o);
        }
        Ok(out)
    }

    /// Spectra at `points` evenly spaced values of `s`, endpoints included.
    pub fn scan(&self, points: usize) -> Result<Vec<SpectrumSlice>> {
        if points < 2 {
            return Err(Error::InvalidParameter(
                "scan needs at least two points".into(),
            ));
        }
        (0..points)
            .map(|i| self.spectrum(i as f64 / (points - 1) as f64))
            .collect()
    }

    fn gap_at(&self, s: f64) -> Result<f64> {
        Ok(self.spectrum(s)?.gap())
    }

    /// Minimum of `E₁ − E₀` over `s`: a 1000-point interior scan, then golden
    /// section on the bracket around the best scan point.
    pub fn min_gap(&self) -> Result<MinGap> {
        const SCAN: usize = 1000;
        let grid: Vec<f64> = (1..=SCAN).map(|i| i as f64 / (SCAN + 1) as f64).collect();
        let gaps = grid
            .iter()
            .map(|&s| self.gap_at(s))
            .collect::<Result<Vec<_>>>()?;
        let best = (0..SCAN)
            .min_by(|&a, &b| gaps[a].total_cmp(&gaps[b]))
            .expect("non-empty scan");
        let mut lo = if best == 0 { 0.0 } else { grid[best - 1] };
        let mut hi = if best + 1 == SCAN {
            1.0
        } else {
            grid[best + 1]
        };

        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut a = hi - inv_phi * (hi - lo);
        let mut b = lo + inv_phi * (hi - lo);
        let mut fa = self.gap_at(a)?;
        let mut fb = self.gap_at(b)?;
        while hi - lo > 1e-13 {
            if fa < fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - inv_phi * (hi - lo);
                fa = self.gap_at(a)?;
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + inv_phi * (hi - lo);
                fb = self.gap_at(b)?;
            }
        }
        let (s_star, g_min) = if fa < fb { (a, fa) } else { (b, fb) };
        let (s_star, g_min) = if gaps[best] < g_min {
            (grid[best], gaps[best])
        } else {
            (s_star, g_min)
        };
        Ok(MinGap { s_star, g_min })
    }
}

/// Symmetric-subspace Hamiltonian with the extensive marked term.
pub fn build_hamiltonian(n: usize, s: f64, sign: MarkedSign) -> Result<SymmetricHamiltonian> {
    Hypercube::new(n).with_sign(sign).hamiltonian(s)
}

pub fn spectrum(n: usize, s: f64, sign: MarkedSign) -> Result<SpectrumSlice> {
    Hypercube::new(n).with_sign(sign).spectrum(s)
}

pub fn min_gap(n: usize, sign: MarkedSign) -> Result<MinGap> {
    Hypercube::new(n).with_sign(sign).min_gap()
}
