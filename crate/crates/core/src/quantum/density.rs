use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Density operator in the momentum basis `|n⟩`, `n = −N/2 … N/2−1`,
/// stored with row/column `i = n + N/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    elements: CMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix after checking it is square, Hermitian and of unit
    /// trace to `tol`.
    pub fn from_matrix(elements: CMatrix, tol: f64) -> Result<Self> {
        if !elements.is_square() || elements.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "density matrix must be square and non-empty, got {}×{}",
                elements.nrows(),
                elements.ncols()
            )));
        }
        let rho = DensityMatrix { elements };
        let herm = rho.hermiticity_error();
        if herm > tol {
            return Err(Error::InvalidArgument(format!("matrix not Hermitian: max |ρ−ρ†| = {herm:e}")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidArgument(format!("trace {tr} differs from 1")));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(elements: CMatrix) -> Self {
        DensityMatrix { elements }
    }

    /// Incoherent mixture with the given momentum populations (normalised).
    pub fn from_populations(populations: &[f64]) -> Result<Self> {
        let total: f64 = populations.iter().sum();
        if populations.is_empty() || populations.iter().any(|&p| p < 0.0 || !p.is_finite()) || total <= 0.0 {
            return Err(Error::InvalidArgument("populations must be finite, non-negative and not all zero".into()));
        }
        let diag = DVector::from_iterator(populations.len(), populations.iter().map(|&p| Complex64::new(p / total, 0.0)));
        Ok(DensityMatrix { elements: CMatrix::from_diagonal(&diag) })
    }

    /// Pure momentum eigenstate `|n⟩`.
    pub fn momentum_state(basis_size: usize, n: i64) -> Result<Self> {
        let i = ladder_index(basis_size, n)?;
        let mut m = CMatrix::zeros(basis_size, basis_size);
        m[(i, i)] = Complex64::new(1.0, 0.0);
        Ok(DensityMatrix { elements: m })
    }

    /// `|ψ⟩⟨ψ|` for a (normalised) state vector.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("state vector has zero or non-finite norm".into()));
        }
        let v = psi / Complex64::new(norm, 0.0);
        Ok(DensityMatrix { elements: &v * v.adjoint() })
    }

    pub fn maximally_mixed(basis_size: usize) -> Self {
        let w = Complex64::new(1.0 / basis_size as f64, 0.0);
        DensityMatrix { elements: CMatrix::from_diagonal_element(basis_size, basis_size, w) }
    }

    /// Diagonal mixture with Gaussian weights `exp(−(nℏ̄k)²/2σ²)`, the quantum
    /// counterpart of the thermal classical ensemble.
    pub fn thermal(basis_size: usize, scaled_planck: f64, sigma: f64) -> Result<Self> {
        if sigma == 0.0 {
            return Self::momentum_state(basis_size, 0);
        }
        let weights: Vec<f64> = ladder(basis_size)
            .map(|n| {
                let rho = n as f64 * scaled_planck;
                (-rho * rho / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        Self::from_populations(&weights)
    }

    pub fn basis_size(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn into_elements(self) -> CMatrix {
        self.elements
    }

    /// `⟨m|ρ̂|n⟩` for ladder momenta `m`, `n`.
    pub fn element(&self, m: i64, n: i64) -> Complex64 {
        let size = self.basis_size();
        self.elements[(periodic_index(size, m), periodic_index(size, n))]
    }

    pub fn trace(&self) -> f64 {
        self.elements.diagonal().iter().map(|z| z.re).sum()
    }

    /// Tr ρ̂² = Σ |ρ_ij|² for Hermitian ρ̂.
    pub fn purity(&self) -> f64 {
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.basis_size();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.elements[(i, j)] - self.elements[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let herm = (&self.elements + self.elements.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = nalgebra::SymmetricEigen::try_new(herm, 1e-15, 0)
            .ok_or_else(|| Error::Eigensolver { context: "density-matrix spectrum".into() })?;
        Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    /// `U ρ̂ U†`.
    pub fn conjugate_by(&self, u: &CMatrix, u_adj: &CMatrix) -> Self {
        DensityMatrix { elements: u * &self.elements * u_adj }
    }

    /// Momentum populations `diag ρ̂` in ladder order.
    pub fn populations(&self) -> Vec<f64> {
        self.elements.diagonal().iter().map(|z| z.re).collect()
    }
}

/// Momentum ladder `−N/2 … N/2−1`.
pub fn ladder(basis_size: usize) -> impl Iterator<Item = i64> {
    let half = (basis_size / 2) as i64;
    -half..(basis_size as i64 - half)
}

/// Row index of momentum `n`; errors if `n` is outside the ladder.
pub fn ladder_index(basis_size: usize, n: i64) -> Result<usize> {
    let half = (basis_size / 2) as i64;
    let i = n + half;
    if i < 0 || i >= basis_size as i64 {
        return Err(Error::InvalidArgument(format!("momentum {n} outside the ladder of size {basis_size}")));
    }
    Ok(i as usize)
}

/// Row index of momentum `n` with the ladder treated as periodic.
pub fn periodic_index(basis_size: usize, n: i64) -> usize {
    let half = (basis_size / 2) as i64;
    (n + half).rem_euclid(basis_size as i64) as usize
}

/// Spontaneous-emission channel applied once per kick:
/// `ρ'_{mn} = ½η(ρ_{m+1,n+1} + ρ_{m−1,n−1}) + (1−η)ρ_{mn}`, shifts periodic
/// in `n`.
pub fn apply_decoherence(rho: &DensityMatrix, eta: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::param("se_probability", format!("η must lie in [0, 1], got {eta}")));
    }
    if eta == 0.0 {
        return Ok(rho.clone());
    }
    let n = rho.basis_size();
    let src = &rho.elements;
    let stay = Complex64::new(1.0 - eta, 0.0);
    let hop = Complex64::new(0.5 * eta, 0.0);
    let out = CMatrix::from_fn(n, n, |i, j| {
        let up = src[((i + 1) % n, (j + 1) % n)];
        let down = src[((i + n - 1) % n, (j + n - 1) % n)];
        stay * src[(i, j)] + hop * (up + down)
    });
    Ok(DensityMatrix { elements: out })
}

/// Momentum populations `diag ρ̂`.
pub fn momentum_distribution(rho: &DensityMatrix) -> Vec<f64> {
    rho.populations()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random full-rank density matrix `A A† / Tr`.
    pub(crate) fn random_density(n: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m = &a * a.adjoint();
        let tr = m.trace();
        DensityMatrix::from_matrix(m / tr, 1e-12).unwrap()
    }

    #[test]
    fn identity_limit() {
        let rho = random_density(8, 1);
        assert_eq!(apply_decoherence(&rho, 0.0).unwrap(), rho);
    }

    #[test]
    fn full_emission_splits_momentum() {
        let rho = DensityMatrix::momentum_state(8, 0).unwrap();
        let out = apply_decoherence(&rho, 1.0).unwrap();
        let p = out.populations();
        for n in ladder(8) {
            let want = if n.abs() == 1 { 0.5 } else { 0.0 };
            assert_eq!(p[ladder_index(8, n).unwrap()], want, "n={n}");
        }
        assert_eq!(out.element(1, -1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_eta_out_of_range() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(apply_decoherence(&rho, -0.1).is_err());
        assert!(apply_decoherence(&rho, 1.1).is_err());
    }

    #[test]
    fn channel_preserves_trace_and_hermiticity() {
        for seed in 0..10 {
            let rho = random_density(16, seed);
            let out = apply_decoherence(&rho, 0.37).unwrap();
            assert!((out.trace() - 1.0).abs() < 1e-14);
            assert!(out.hermiticity_error() < 1e-15);
            assert!(out.min_eigenvalue().unwrap() > -1e-12);
        }
    }

    #[test]
    fn channel_never_raises_purity() {
        for seed in 0..100 {
            let rho = random_density(16, 100 + seed);
            let before = rho.purity();
            let after = apply_decoherence(&rho, 0.05).unwrap().purity();
            assert!(after <= before + 1e-15, "seed {seed}: {before} -> {after}");
        }
    }

    #[test]
    fn distributions() {
        let p = momentum_distribution(&DensityMatrix::momentum_state(6, 0).unwrap());
        assert_eq!(p, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let p = momentum_distribution(&DensityMatrix::maximally_mixed(128));
        assert!(p.iter().all(|&x| (x - 1.0 / 128.0).abs() < 1e-15));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn validation() {
        let bad = CMatrix::from_element(2, 2, Complex64::new(0.5, 0.1));
        assert!(DensityMatrix::from_matrix(bad, 1e-12).is_err());
        assert!(DensityMatrix::momentum_state(8, 4).is_err());
        assert!(DensityMatrix::momentum_state(8, -4).is_ok());
        assert!(DensityMatrix::from_populations(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn thermal_state_is_parity_symmetric() {
        let rho = DensityMatrix::thermal(64, 2.6, 9.0).unwrap();
        for n in 1..32 {
            assert!((rho.element(n, n).re - rho.element(-n, -n).re).abs() < 1e-15);
        }
        assert!((rho.trace() - 1.0).abs() < 1e-14);
    }
}
