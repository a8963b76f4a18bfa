use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::density::{ladder, CMatrix};
use crate::error::{Error, Result};
use crate::model::PulseTrain;

/// Free and driven Hamiltonians in the momentum basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonians {
    /// Diagonal of `H_dark`, `½(n+β)²ℏ̄k²`.
    pub dark: DVector<f64>,
    /// `H_dark − ½k(δ_{m,n+1} + δ_{m,n−1})` with periodic `n`.
    pub light: DMatrix<f64>,
}

/// Builds `H_dark` and `H_light` on `N` momentum states, quasimomentum
/// offset `beta` (zero for the plain integer ladder).
pub fn build_hamiltonians(basis_size: usize, k: f64, scaled_planck: f64, beta: f64) -> Result<Hamiltonians> {
    if basis_size == 0 || basis_size % 2 != 0 {
        return Err(Error::param("basis_size", format!("must be positive and even, got {basis_size}")));
    }
    let dark = DVector::from_iterator(
        basis_size,
        ladder(basis_size).map(|n| {
            let p = (n as f64 + beta) * scaled_planck;
            0.5 * p * p
        }),
    );
    let mut light = DMatrix::from_diagonal(&dark);
    if basis_size > 1 {
        for i in 0..basis_size {
            let j = (i + 1) % basis_size;
            light[(i, j)] -= 0.5 * k;
            light[(j, i)] -= 0.5 * k;
        }
    }
    Ok(Hamiltonians { dark, light })
}

/// One-cycle evolution operator.
#[derive(Clone, Debug)]
pub struct FloquetOperator {
    pub matrix: CMatrix,
    pub kick_strength: f64,
    pub scaled_planck: f64,
    pub quasimomentum: f64,
    pub schedule: PulseTrain,
}

impl FloquetOperator {
    pub fn basis_size(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |U†U − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.basis_size();
        let prod = self.matrix.adjoint() * &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - Complex64::new(id, 0.0)).norm());
            }
        }
        worst
    }
}

/// `U = Π exp(−i t_s H_s / ℏ̄k)` over the schedule, the first segment acting
/// first. Driven factors use the eigendecomposition of the real symmetric
/// `H_light`, so each factor is unitary to eigensolver precision.
pub fn build_floquet(
    basis_size: usize,
    k: f64,
    scaled_planck: f64,
    pulses: &PulseTrain,
    beta: f64,
) -> Result<FloquetOperator> {
    let total = pulses.total_duration();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("pulse schedule spans {total} periods, expected 1")));
    }
    let h = build_hamiltonians(basis_size, k, scaled_planck, beta)?;
    let needs_light = pulses.segments.iter().any(|s| s.driven);
    let light_eig = if needs_light {
        Some(SymmetricEigen::try_new(h.light.clone(), 1e-15, 0).ok_or_else(|| Error::Eigensolver {
            context: format!("H_light (N={basis_size}, k={k}, ℏ̄k={scaled_planck})"),
        })?)
    } else {
        None
    };

    let mut u = CMatrix::identity(basis_size, basis_size);
    for (index, seg) in pulses.segments.iter().enumerate() {
        let t = seg.duration / scaled_planck;
        if seg.driven {
            let eig = light_eig.as_ref().ok_or_else(|| Error::Eigensolver { context: format!("segment {index}") })?;
            let factor = spectral_exponential(eig, t);
            u = factor * u;
        } else {
            // ½(n+β)²ℏ̄k²·τ/ℏ̄k regrouped so the large factor is exact for β = 0.
            let half_step = 0.5 * scaled_planck * seg.duration;
            for (n, mut row) in ladder(basis_size).zip(u.row_iter_mut()) {
                let s = n as f64 + beta;
                row *= unit_phase(s * s, half_step);
            }
        }
    }
    Ok(FloquetOperator {
        matrix: u,
        kick_strength: k,
        scaled_planck,
        quasimomentum: beta,
        schedule: pulses.clone(),
    })
}

/// Low half of 2π: `TAU + TAU_LO` is 2π to about 1e-32.
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// `exp(−i·a·b)`, with the product kept exact and reduced modulo 2π before
/// the trig call. Phases reach thousands of radians at the ladder edges.
fn unit_phase(a: f64, b: f64) -> Complex64 {
    let p = a * b;
    let err = a.mul_add(b, -p);
    let q = (p / TAU).round();
    let r = (-q).mul_add(TAU, p) - q * TAU_LO + err;
    Complex64::from_polar(1.0, -r)
}

/// `V diag(exp(−iλt)) Vᵀ` for a real symmetric eigendecomposition.
fn spectral_exponential(eig: &SymmetricEigen<f64, nalgebra::Dyn>, t: f64) -> CMatrix {
    let v = &eig.eigenvectors;
    let n = v.nrows();
    let phases: Vec<Complex64> = eig.eigenvalues.iter().map(|&l| unit_phase(l, t)).collect();
    let vc = v.map(|x| Complex64::new(x, 0.0));
    let scaled = CMatrix::from_fn(n, n, |i, j| vc[(i, j)] * phases[j]);
    scaled * vc.transpose()
}

/// Eigenvectors (columns) and unit-modulus eigenvalues of a Floquet
/// operator.
#[derive(Clone, Debug)]
pub struct FloquetModes {
    pub vectors: CMatrix,
    pub eigenvalues: DVector<Complex64>,
}

impl FloquetModes {
    /// `V Λⁿ V†`.
    pub fn power(&self, n: u32) -> CMatrix {
        let size = self.vectors.nrows();
        let lam: Vec<Complex64> = self.eigenvalues.iter().map(|z| z.powu(n)).collect();
        let scaled = CMatrix::from_fn(size, size, |i, j| self.vectors[(i, j)] * lam[j]);
        scaled * self.vectors.adjoint()
    }

    /// Coherent evolution of a state vector by `n` kicks.
    pub fn evolve_state(&self, psi: &DVector<Complex64>, n: u32) -> DVector<Complex64> {
        let coeffs = self.vectors.adjoint() * psi;
        let advanced = DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(self.eigenvalues.iter()).map(|(c, l)| c * l.powu(n)),
        );
        &self.vectors * advanced
    }
}

/// Full eigendecomposition of a unitary `U`. A unitary matrix is normal, so
/// its Schur form is diagonal and the Schur vectors are its eigenvectors.
pub fn floquet_modes(u: &FloquetOperator) -> Result<FloquetModes> {
    let n = u.basis_size();
    let schur = nalgebra::linalg::Schur::try_new(u.matrix.clone(), 1e-15, 100 * n.max(10))
        .ok_or_else(|| Error::Eigensolver { context: format!("Floquet operator Schur form (N={n})") })?;
    let (q, t) = schur.unpack();
    let eigenvalues = t.diagonal();
    Ok(FloquetModes { vectors: q, eigenvalues })
}
