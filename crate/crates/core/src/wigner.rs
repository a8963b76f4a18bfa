//! Discrete toroidal Wigner function on a `2N × 2N` phase-space grid.
//!
//! Rows are momenta `P_l = (ℏ̄k/2) l` for `l = −N … N−1`, columns are angles
//! `X_k = πk/N` for `k = 0 … 2N−1`. Ladder sites are shifted to
//! non-negative indices `ñ = n + N/2`, so row `l` collects the pairs with
//! `ñ + ñ' = l + N`; pairs that would fall outside the truncated basis
//! contribute nothing.
//!
//! ```text
//! w(X_k, P_l) = Σ_j exp(iπjk/N) · ½(1 + (−1)^(l+j)) · ⟨(l+j)/2| ρ̂ |(l−j)/2⟩
//! ```
//!
//! Each row is one inverse DFT of length `2N` over `j`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::quantum::DensityMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    /// Basis size N of the source density matrix.
    pub basis_size: usize,
    pub scaled_planck: f64,
    /// `2N × 2N`, row = momentum index `l + N`, column = angle index `k`.
    pub values: DMatrix<f64>,
    /// `N × N` average over non-overlapping 2×2 cells.
    pub coarse: DMatrix<f64>,
    /// Largest imaginary residue discarded when taking the real part.
    pub max_imaginary: f64,
}

impl WignerGrid {
    /// Angles `X_k`.
    pub fn x_axis(&self) -> Vec<f64> {
        let n = self.basis_size;
        (0..2 * n).map(|k| PI * k as f64 / n as f64).collect()
    }

    /// Momenta `P_l`.
    pub fn p_axis(&self) -> Vec<f64> {
        let n = self.basis_size as i64;
        (-n..n).map(|l| 0.5 * self.scaled_planck * l as f64).collect()
    }

    pub fn coarse_x_axis(&self) -> Vec<f64> {
        pair_means(&self.x_axis())
    }

    pub fn coarse_p_axis(&self) -> Vec<f64> {
        pair_means(&self.p_axis())
    }

    /// Area of one coarse cell, `(2π/N) · ℏ̄k`.
    pub fn coarse_cell_area(&self) -> f64 {
        2.0 * PI / self.basis_size as f64 * self.scaled_planck
    }
}

fn pair_means(v: &[f64]) -> Vec<f64> {
    v.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect()
}

/// Matrix element feeding term `j` of row `lp = l + N`, or `None` when the
/// pair lies outside the basis or `l + j` is odd.
fn term_element(rho: &DensityMatrix, lp: usize, j: usize) -> Option<Complex64> {
    let n = rho.basis_size() as i64;
    let (lp, j) = (lp as i64, j as i64);
    if (lp + j) % 2 != 0 {
        return None;
    }
    // Representative of j mod 2N in (−N, N); j = N has none.
    let d = if j < n {
        j
    } else if j > n {
        j - 2 * n
    } else {
        return None;
    };
    let a = (lp + d) / 2;
    let b = (lp - d) / 2;
    if (0..n).contains(&a) && (0..n).contains(&b) {
        Some(rho.elements()[(a as usize, b as usize)])
    } else {
        None
    }
}

/// Toroidal Wigner function of `rho`, with its coarse-grained companion.
pub fn toroidal_wigner(rho: &DensityMatrix, scaled_planck: f64) -> WignerGrid {
    let n = rho.basis_size();
    let len = 2 * n;
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(len);
    let rows: Vec<(Vec<f64>, f64)> = (0..len)
        .into_par_iter()
        .map(|lp| {
            let mut buf: Vec<Complex64> =
                (0..len).map(|j| term_element(rho, lp, j).unwrap_or_default()).collect();
            // Inverse transform: Σ_j g_j exp(+2πi jk / 2N), unnormalised.
            fft.process(&mut buf);
            let imag = buf.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
            (buf.into_iter().map(|z| z.re).collect(), imag)
        })
        .collect();
    let max_imaginary = rows.iter().fold(0.0f64, |m, r| m.max(r.1));
    let values = DMatrix::from_fn(len, len, |l, k| rows[l].0[k]);
    let coarse = coarse_grain(&values).expect("2N × 2N grid has even dimensions");
    WignerGrid { basis_size: n, scaled_planck, values, coarse, max_imaginary }
}

/// Means over non-overlapping 2×2 cells.
pub fn coarse_grain(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (r, c) = w.shape();
    if r % 2 != 0 || c % 2 != 0 {
        return Err(Error::InvalidArgument(format!("coarse graining needs even dimensions, got {r}×{c}")));
    }
    Ok(DMatrix::from_fn(r / 2, c / 2, |i, j| {
        0.25 * (w[(2 * i, 2 * j)] + w[(2 * i + 1, 2 * j)] + w[(2 * i, 2 * j + 1)] + w[(2 * i + 1, 2 * j + 1)])
    }))
}

/// `Σ |w| · cell area` over coarse cells where `w < 0`.
pub fn negativity_volume(grid: &WignerGrid) -> f64 {
    let neg: f64 = grid.coarse.iter().filter(|&&v| v < 0.0).map(|v| -v).sum();
    neg * grid.coarse_cell_area()
}
