//! Quantum density-matrix dynamics in a truncated, periodic momentum basis.

mod density;
mod floquet;

pub use density::{
    apply_decoherence, ladder, ladder_index, momentum_distribution, periodic_index, CMatrix, DensityMatrix,
};
pub use floquet::{build_floquet, build_hamiltonians, floquet_modes, FloquetModes, FloquetOperator, Hamiltonians};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{PulseTrain, SimParams};

/// Edge population above which the periodic wrap of the basis is suspect.
pub const EDGE_POPULATION_WARN: f64 = 1e-4;

/// Per-kick record of a density-matrix evolution.
#[derive(Clone, Debug)]
pub struct DensityEvolution {
    /// `populations[t]` is `diag ρ̂` after `t` kicks (index 0 is the start).
    pub populations: Vec<Vec<f64>>,
    /// Full density matrices at the requested kicks, in kick order.
    pub checkpoints: Vec<(usize, DensityMatrix)>,
    /// Largest population seen on the two outermost ladder sites.
    pub max_edge_population: f64,
}

/// Population on the two outermost ladder sites.
pub fn edge_population(populations: &[f64]) -> f64 {
    match populations {
        [] => 0.0,
        [only] => *only,
        [first, .., last] => first + last,
    }
}

/// Per kick: `ρ̂ ← U ρ̂ U†`, then the decoherence channel. Calls `observe`
/// after every kick with the kick index (from 1).
pub fn evolve_density_with<F>(
    rho0: &DensityMatrix,
    u: &FloquetOperator,
    eta: f64,
    n_kicks: usize,
    mut observe: F,
) -> Result<DensityMatrix>
where
    F: FnMut(usize, &DensityMatrix) -> Result<()>,
{
    if rho0.basis_size() != u.basis_size() {
        return Err(Error::InvalidArgument(format!(
            "density matrix is {}-dimensional but the Floquet operator is {}-dimensional",
            rho0.basis_size(),
            u.basis_size()
        )));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::param("se_probability", format!("η must lie in [0, 1], got {eta}")));
    }
    let u_adj = u.matrix.adjoint();
    let mut rho = rho0.clone();
    for kick in 1..=n_kicks {
        rho = rho.conjugate_by(&u.matrix, &u_adj);
        rho = apply_decoherence(&rho, eta)?;
        observe(kick, &rho)?;
    }
    Ok(rho)
}

/// Evolves `rho0` for `n_kicks`, recording populations every kick and the
/// full matrix at each kick listed in `checkpoints`.
pub fn evolve_density(
    rho0: &DensityMatrix,
    u: &FloquetOperator,
    eta: f64,
    n_kicks: usize,
    checkpoints: &[usize],
) -> Result<DensityEvolution> {
    let mut populations = vec![rho0.populations()];
    let mut saved = Vec::new();
    if checkpoints.contains(&0) {
        saved.push((0, rho0.clone()));
    }
    let mut max_edge = edge_population(&populations[0]);
    evolve_density_with(rho0, u, eta, n_kicks, |kick, rho| {
        let p = rho.populations();
        max_edge = max_edge.max(edge_population(&p));
        populations.push(p);
        if checkpoints.contains(&kick) {
            saved.push((kick, rho.clone()));
        }
        Ok(())
    })?;
    if max_edge > EDGE_POPULATION_WARN {
        log::warn!("edge population {max_edge:.2e} exceeds {EDGE_POPULATION_WARN:.0e}: basis may be too small");
    }
    Ok(DensityEvolution { populations, checkpoints: saved, max_edge_population: max_edge })
}

/// Optional incoherent averages over quasimomentum and over a Gaussian
/// spread of kick strengths. Both are off by default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Averaging {
    /// Number of quasimomentum offsets β on a midpoint grid in [−½, ½);
    /// zero keeps the single integer ladder.
    pub quasimomentum_samples: usize,
    /// RMS spread of k as a fraction of its mean; zero disables.
    pub k_spread_rms: f64,
    pub k_spread_samples: usize,
}

impl Averaging {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_spread_rms.is_finite() && self.k_spread_rms >= 0.0) {
            return Err(Error::param("k_spread_rms", "must be finite and >= 0"));
        }
        if self.k_spread_rms > 0.0 && self.k_spread_samples == 0 {
            return Err(Error::param("k_spread_samples", "must be positive when k_spread_rms > 0"));
        }
        Ok(())
    }

    /// Ensemble members `(k, β)`, equally weighted. Kick strengths sit at the
    /// midpoint quantiles of the Gaussian.
    pub fn members(&self, k: f64) -> Vec<(f64, f64)> {
        let betas: Vec<f64> = if self.quasimomentum_samples == 0 {
            vec![0.0]
        } else {
            let q = self.quasimomentum_samples as f64;
            (0..self.quasimomentum_samples).map(|j| (j as f64 + 0.5) / q - 0.5).collect()
        };
        let ks: Vec<f64> = if self.k_spread_rms == 0.0 || self.k_spread_samples <= 1 {
            vec![k]
        } else {
            let normal = Normal::standard();
            let m = self.k_spread_samples as f64;
            (0..self.k_spread_samples)
                .map(|i| k * (1.0 + self.k_spread_rms * normal.inverse_cdf((i as f64 + 0.5) / m)))
                .collect()
        };
        ks.iter().flat_map(|&k| betas.iter().map(move |&b| (k, b))).collect()
    }
}

/// Thermal quantum run averaged over the configured ensemble members.
///
/// With quasimomentum averaging the populations of each β are binned onto
/// the integer ladder site they belong to.
pub fn run_thermal(
    params: &SimParams,
    pulses: &PulseTrain,
    eta: f64,
    averaging: &Averaging,
    checkpoints: &[usize],
) -> Result<DensityEvolution> {
    averaging.validate()?;
    let members = averaging.members(params.kick_strength);
    let weight = 1.0 / members.len() as f64;
    let mut acc: Option<DensityEvolution> = None;
    for (k, beta) in members {
        let u = build_floquet(params.basis_size, k, params.scaled_planck, pulses, beta)?;
        let rho0 = thermal_with_offset(params.basis_size, params.scaled_planck, params.init_momentum_sigma, beta)?;
        let run = evolve_density(&rho0, &u, eta, params.n_kicks, checkpoints)?;
        acc = Some(match acc {
            None => scale_evolution(run, weight),
            Some(mut a) => {
                for (pa, pr) in a.populations.iter_mut().zip(&run.populations) {
                    for (x, y) in pa.iter_mut().zip(pr) {
                        *x += weight * y;
                    }
                }
                for ((_, ra), (_, rr)) in a.checkpoints.iter_mut().zip(run.checkpoints) {
                    let sum = ra.elements() + rr.into_elements() * num_complex::Complex64::new(weight, 0.0);
                    *ra = DensityMatrix::from_matrix_unchecked(sum);
                }
                a.max_edge_population = a.max_edge_population.max(run.max_edge_population);
                a
            }
        });
    }
    acc.ok_or_else(|| Error::InvalidArgument("empty averaging ensemble".into()))
}

fn scale_evolution(mut run: DensityEvolution, weight: f64) -> DensityEvolution {
    if weight == 1.0 {
        return run;
    }
    for p in run.populations.iter_mut() {
        for x in p.iter_mut() {
            *x *= weight;
        }
    }
    for (_, rho) in run.checkpoints.iter_mut() {
        let scaled = rho.elements() * num_complex::Complex64::new(weight, 0.0);
        *rho = DensityMatrix::from_matrix_unchecked(scaled);
    }
    run
}

fn thermal_with_offset(basis_size: usize, scaled_planck: f64, sigma: f64, beta: f64) -> Result<DensityMatrix> {
    if beta == 0.0 {
        return DensityMatrix::thermal(basis_size, scaled_planck, sigma);
    }
    let weights: Vec<f64> = ladder(basis_size)
        .map(|n| {
            let rho = (n as f64 + beta) * scaled_planck;
            (-rho * rho / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    DensityMatrix::from_populations(&weights)
}
