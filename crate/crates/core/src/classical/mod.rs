//! Classical trajectory dynamics of the double-pulse driven rotor.
//!
//! While a pulse is on the motion is that of a pendulum,
//! `H_light = ρ²/2 − k cos φ`; between pulses it is free rotation. Two
//! pendulum propagators are provided: a fourth-order symplectic composition
//! (the default) and an exact propagator built on Jacobi elliptic functions.

pub mod elliptic;
mod flux;

pub use flux::{cantorus_flux, FluxConfig, FluxEstimate};

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PulseTrain;

/// Pendulum propagator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Symplectic,
    Elliptic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Integrator {
    pub backend: Backend,
    /// Substeps per driven segment for the symplectic backend.
    pub substeps: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator { backend: Backend::Symplectic, substeps: 256 }
    }
}

impl Integrator {
    pub fn symplectic(substeps: usize) -> Self {
        Integrator { backend: Backend::Symplectic, substeps }
    }

    pub fn elliptic() -> Self {
        Integrator { backend: Backend::Elliptic, ..Default::default() }
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Free rotation: `φ' = φ + ρ t`, `ρ' = ρ`. The angle is not wrapped.
pub fn drift_segment(state: (f64, f64), duration: f64) -> (f64, f64) {
    (state.0 + state.1 * duration, state.1)
}

/// Pendulum energy `ρ²/2 − k cos φ`.
pub fn pendulum_energy(state: (f64, f64), k: f64) -> f64 {
    0.5 * state.1 * state.1 - k * state.0.cos()
}

/// Evolves `(φ, ρ)` for `duration` under `ρ²/2 − k cos φ`.
///
/// The returned angle is continuous with the input (not wrapped).
pub fn pendulum_segment(state: (f64, f64), k: f64, duration: f64, integrator: Integrator) -> Result<(f64, f64)> {
    let (phi, rho) = state;
    if !(phi.is_finite() && rho.is_finite() && k.is_finite() && duration.is_finite()) {
        return Err(Error::NumericalDomain(format!(
            "non-finite pendulum input φ={phi} ρ={rho} k={k} t={duration}"
        )));
    }
    if duration < 0.0 {
        return Err(Error::NumericalDomain(format!("negative segment duration {duration}")));
    }
    if k == 0.0 || duration == 0.0 {
        return Ok(drift_segment(state, duration));
    }
    let out = match integrator.backend {
        Backend::Symplectic => symplectic_pendulum(phi, rho, k, duration, integrator.substeps.max(1)),
        Backend::Elliptic => elliptic_pendulum(phi, rho, k, duration)
            .unwrap_or_else(|| symplectic_pendulum(phi, rho, k, duration, integrator.substeps.max(1))),
    };
    Ok(out)
}

// Fourth-order Forest–Ruth/Yoshida composition of drift-kick-drift steps.
const CBRT2: f64 = 1.259_921_049_894_873_2;
const W1: f64 = 1.0 / (2.0 - CBRT2);
const W0: f64 = -CBRT2 / (2.0 - CBRT2);
const DRIFT: [f64; 4] = [0.5 * W1, 0.5 * (W0 + W1), 0.5 * (W0 + W1), 0.5 * W1];
const KICK: [f64; 3] = [W1, W0, W1];

fn symplectic_pendulum(mut phi: f64, mut rho: f64, k: f64, duration: f64, substeps: usize) -> (f64, f64) {
    let h = duration / substeps as f64;
    let (d0, d1, d2, d3) = (DRIFT[0] * h, DRIFT[1] * h, DRIFT[2] * h, DRIFT[3] * h);
    let (k0, k1, k2) = (KICK[0] * h * k, KICK[1] * h * k, KICK[2] * h * k);
    phi += d0 * rho;
    for step in 0..substeps {
        rho -= k0 * phi.sin();
        phi += d1 * rho;
        rho -= k1 * phi.sin();
        phi += d2 * rho;
        rho -= k2 * phi.sin();
        // Last drift of this step fused with the first drift of the next.
        phi += if step + 1 == substeps { d3 } else { d3 + d0 } * rho;
    }
    (phi, rho)
}

/// Exact pendulum flow via Jacobi elliptic functions. Returns `None` on the
/// separatrix itself, where the elliptic parametrisation degenerates.
fn elliptic_pendulum(phi: f64, rho: f64, k: f64, t: f64) -> Option<(f64, f64)> {
    let omega = k.sqrt();
    let turns = (phi / TAU).round();
    let offset = turns * TAU;
    let pw = phi - offset;
    let (s_half, c_half) = (0.5 * pw).sin_cos();
    let kinetic = rho * rho / (4.0 * k);
    // m = (E + k)/2k and its complement, each without cancellation.
    let m = kinetic + s_half * s_half;
    let m1 = c_half * c_half - kinetic;
    if m1.abs() < 1e-14 {
        return None;
    }
    if m1 > 0.0 {
        // Libration: sin(φ/2) = √m sn(u), ρ = 2ω√m cn(u).
        let theta = s_half.atan2(rho / (2.0 * omega));
        let u = elliptic::incomplete_f(theta, m1) + omega * t;
        let am = elliptic::amplitude(u, m, m1);
        let (sa, ca) = am.sin_cos();
        let sqm = m.sqrt();
        // cos(φ/2) = dn(u) = √(m1 + m cos²am).
        let dn = (m1 + m * ca * ca).sqrt();
        let phi_out = 2.0 * (sqm * sa).atan2(dn);
        Some((phi_out + offset, 2.0 * omega * sqm * ca))
    } else {
        // Rotation: φ/2 = σ am(ω√m t + u₀ | 1/m), ρ = 2σω√m dn.
        let nu = 1.0 / m;
        let nu1 = -m1 / m;
        let sigma = rho.signum();
        let sqm = m.sqrt();
        let u = elliptic::incomplete_f(sigma * 0.5 * pw, nu1) + omega * sqm * t;
        let am = elliptic::amplitude(u, nu, nu1);
        let ca = am.cos();
        let dn = (nu1 + nu * ca * ca).sqrt();
        Some((2.0 * sigma * am + offset, 2.0 * sigma * omega * sqm * dn))
    }
}

/// Applies one full kick cycle; the returned angle is wrapped to `[0, 2π)`.
pub fn kick_cycle(state: (f64, f64), k: f64, pulses: &PulseTrain, integrator: Integrator) -> Result<(f64, f64)> {
    let mut s = state;
    for seg in &pulses.segments {
        s = if seg.driven {
            pendulum_segment(s, k, seg.duration, integrator)?
        } else {
            drift_segment(s, seg.duration)
        };
    }
    Ok((wrap_angle(s.0), s.1))
}

/// Independent per-trajectory random stream derived from `(seed, index)`.
pub fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClassicalEnsemble {
    pub phi: Vec<f64>,
    pub rho: Vec<f64>,
}

impl ClassicalEnsemble {
    pub fn new(phi: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        if phi.len() != rho.len() {
            return Err(Error::InvalidArgument(format!(
                "ensemble arrays differ in length: {} vs {}",
                phi.len(),
                rho.len()
            )));
        }
        Ok(ClassicalEnsemble { phi: phi.into_iter().map(wrap_angle).collect(), rho })
    }

    /// Uniform in φ, Gaussian in ρ with width `sigma`.
    pub fn thermal(n: usize, sigma: f64, seed: u64) -> Self {
        let normal = Normal::new(0.0, sigma.max(0.0)).expect("non-negative sigma");
        let (phi, rho) = (0..n)
            .map(|i| {
                let mut rng = trajectory_rng(seed, i);
                let phi = rng.random_range(0.0..TAU);
                (phi, normal.sample(&mut rng))
            })
            .unzip();
        ClassicalEnsemble { phi, rho }
    }

    /// Uniform random in `[0, 2π) × [rho_min, rho_max)`.
    pub fn uniform(n: usize, rho_min: f64, rho_max: f64, seed: u64) -> Self {
        let (phi, rho) = (0..n)
            .map(|i| {
                let mut rng = trajectory_rng(seed, i);
                (rng.random_range(0.0..TAU), rng.random_range(rho_min..rho_max))
            })
            .unzip();
        ClassicalEnsemble { phi, rho }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// The ensemble mirrored through the origin, `(φ, ρ) → (−φ, −ρ)`.
    pub fn reflected(&self) -> Self {
        ClassicalEnsemble {
            phi: self.phi.iter().map(|&p| wrap_angle(-p)).collect(),
            rho: self.rho.iter().map(|&r| -r).collect(),
        }
    }
}

/// Applies `n_kicks` cycles to every trajectory, calling `observe` with the
/// ensemble after each cycle (kick index starting at 1).
pub fn evolve_ensemble_with<F>(
    ensemble: &mut ClassicalEnsemble,
    k: f64,
    pulses: &PulseTrain,
    n_kicks: usize,
    integrator: Integrator,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(usize, &ClassicalEnsemble),
{
    for kick in 1..=n_kicks {
        if k == 0.0 {
            // Pure drift: ρ is untouched bit for bit.
            for (phi, &rho) in ensemble.phi.iter_mut().zip(&ensemble.rho) {
                *phi = wrap_angle(*phi + rho * pulses.total_duration());
            }
        } else {
            ensemble
                .phi
                .par_iter_mut()
                .zip(ensemble.rho.par_iter_mut())
                .try_for_each(|(phi, rho)| -> Result<()> {
                    let (p, r) = kick_cycle((*phi, *rho), k, pulses, integrator)?;
                    *phi = p;
                    *rho = r;
                    Ok(())
                })?;
        }
        observe(kick, ensemble);
    }
    Ok(())
}

/// Stroboscopic record of an ensemble: one snapshot per kick, index 0 being
/// the initial state.
pub fn evolve_ensemble(
    ensemble: &ClassicalEnsemble,
    k: f64,
    pulses: &PulseTrain,
    n_kicks: usize,
    integrator: Integrator,
) -> Result<Vec<ClassicalEnsemble>> {
    let mut snapshots = Vec::with_capacity(n_kicks + 1);
    snapshots.push(ensemble.clone());
    let mut e = ensemble.clone();
    evolve_ensemble_with(&mut e, k, pulses, n_kicks, integrator, |_, s| snapshots.push(s.clone()))?;
    Ok(snapshots)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoincareSection {
    /// Seed-major: orbit `i` occupies `points[i*n_kicks .. (i+1)*n_kicks]`.
    pub points: Vec<(f64, f64)>,
    pub n_kicks: usize,
    pub kick_strength: f64,
}

impl PoincareSection {
    pub fn orbit(&self, seed: usize) -> &[(f64, f64)] {
        &self.points[seed * self.n_kicks..(seed + 1) * self.n_kicks]
    }

    pub fn n_orbits(&self) -> usize {
        if self.n_kicks == 0 {
            0
        } else {
            self.points.len() / self.n_kicks
        }
    }
}

/// Stroboscopic iterates of each seed, sampled after every kick cycle.
pub fn poincare_section(
    seeds: &[(f64, f64)],
    k: f64,
    pulses: &PulseTrain,
    n_kicks: usize,
    integrator: Integrator,
) -> Result<PoincareSection> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("Poincaré section needs at least one seed".into()));
    }
    let orbits: Vec<Vec<(f64, f64)>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut s = (wrap_angle(seed.0), seed.1);
            let mut orbit = Vec::with_capacity(n_kicks);
            for _ in 0..n_kicks {
                s = kick_cycle(s, k, pulses, integrator)?;
                orbit.push(s);
            }
            Ok(orbit)
        })
        .collect::<Result<_>>()?;
    Ok(PoincareSection { points: orbits.into_iter().flatten().collect(), n_kicks, kick_strength: k })
}

/// A line of seeds at fixed ρ values spread over φ, for section plots.
pub fn section_seeds(rho_min: f64, rho_max: f64, n_rho: usize, n_phi: usize) -> Vec<(f64, f64)> {
    let mut seeds = Vec::with_capacity(n_rho * n_phi);
    for i in 0..n_rho {
        let rho = if n_rho == 1 { rho_min } else { rho_min + (rho_max - rho_min) * i as f64 / (n_rho - 1) as f64 };
        for j in 0..n_phi {
            seeds.push(((j as f64 + 0.5) * TAU / n_phi as f64, rho));
        }
    }
    seeds
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use rand::Rng;
    use crate::model::build_pulse_train;
    use proptest::prelude::*;

    fn default_pulses() -> PulseTrain {
        build_pulse_train(0.05, 0.1).unwrap()
    }

    #[test]
    fn drift_examples() {
        let (p, r) = drift_segment((0.0, TAU), 1.0);
        assert!((wrap_angle(p)).abs() < 1e-12 || (wrap_angle(p) - TAU).abs() < 1e-12);
        assert_eq!(r, TAU);
        let (p, r) = drift_segment((0.0, PI), 0.5);
        assert!((p - PI / 2.0).abs() < 1e-15);
        assert_eq!(r, PI);
    }

    #[test]
    fn fixed_points() {
        for integ in [Integrator::default(), Integrator::elliptic()] {
            assert_eq!(pendulum_segment((0.0, 0.0), 50.0, 0.3, integ).unwrap(), (0.0, 0.0));
            let (p, r) = pendulum_segment((PI, 0.0), 50.0, 0.3, integ).unwrap();
            assert!((p - PI).abs() < 1e-12 && r.abs() < 1e-12, "{p} {r}");
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(pendulum_segment((f64::NAN, 0.0), 1.0, 0.1, Integrator::default()).is_err());
        assert!(pendulum_segment((0.0, 0.0), 1.0, -0.1, Integrator::default()).is_err());
    }

    #[test]
    fn small_amplitude_period() {
        // Half a small-oscillation period 2π/√k brings φ₀ to −φ₀.
        let k: f64 = 100.0;
        let phi0 = 1e-3;
        let half = PI / k.sqrt();
        for integ in [Integrator::default(), Integrator::elliptic()] {
            let (p, r) = pendulum_segment((phi0, 0.0), k, half, integ).unwrap();
            // Finite-amplitude correction to the period is O(φ₀²/16).
            assert!((p + phi0).abs() < 1e-9, "{p}");
            assert!(r.abs() < 1e-5, "{r}");
        }
    }

    #[test]
    fn period_against_fine_reference() {
        let k = 100.0;
        let phi0 = 1e-3;
        let t = 0.173;
        let reference = symplectic_pendulum(phi0, 0.0, k, t, (t / 1e-6) as usize);
        let fast = pendulum_segment((phi0, 0.0), k, t, Integrator::default()).unwrap();
        let exact = pendulum_segment((phi0, 0.0), k, t, Integrator::elliptic()).unwrap();
        assert!((fast.0 - reference.0).abs() < 1e-12 && (fast.1 - reference.1).abs() < 1e-10);
        assert!((exact.0 - reference.0).abs() < 1e-12 && (exact.1 - reference.1).abs() < 1e-10);
    }

    #[test]
    fn near_separatrix_elliptic() {
        let k: f64 = 270.0;
        for &(phi, rho) in &[(PI - 1e-6, 0.0), (0.0, 2.0 * k.sqrt() * (1.0 - 1e-9)), (0.0, 2.0 * k.sqrt() * (1.0 + 1e-9))] {
            let a = pendulum_segment((phi, rho), k, 0.05, Integrator::elliptic()).unwrap();
            let b = symplectic_pendulum(phi, rho, k, 0.05, 20_000);
            assert!((a.0 - b.0).abs() < 1e-7 && (a.1 - b.1).abs() < 1e-6, "{a:?} {b:?}");
        }
    }

    #[test]
    fn zero_kick_preserves_momenta_bitwise() {
        let e = ClassicalEnsemble::thermal(500, 9.0, 7);
        let snaps = evolve_ensemble(&e, 0.0, &default_pulses(), 20, Integrator::default()).unwrap();
        for s in &snaps {
            assert_eq!(s.rho, e.rho);
        }
    }

    #[test]
    fn thermal_ensemble_is_seed_deterministic() {
        let a = ClassicalEnsemble::thermal(100, 5.0, 3);
        let b = ClassicalEnsemble::thermal(100, 5.0, 3);
        let c = ClassicalEnsemble::thermal(100, 5.0, 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
        // Streams are per trajectory: a prefix of a larger ensemble matches.
        let big = ClassicalEnsemble::thermal(200, 5.0, 3);
        assert_eq!(&big.rho[..100], &a.rho[..]);
        assert!(a.phi.iter().all(|&p| (0.0..TAU).contains(&p)));
    }

    #[test]
    fn elliptic_matches_symplectic_single_kick() {
        let k = 270.0;
        let pulses = default_pulses();
        let mut rng = trajectory_rng(11, 0);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let s = (rng.random_range(0.0..TAU), rng.random_range(-40.0..40.0));
            let a = kick_cycle(s, k, &pulses, Integrator::default()).unwrap();
            let b = kick_cycle(s, k, &pulses, Integrator::elliptic()).unwrap();
            let dphi = (a.0 - b.0).abs();
            let dphi = dphi.min(TAU - dphi);
            worst = worst.max(dphi).max((a.1 - b.1).abs());
        }
        assert!(worst <= 1e-6, "worst single-kick difference {worst}");
    }

    #[test]
    fn poincare_integrable_limit() {
        let seeds = section_seeds(-10.0, 10.0, 5, 3);
        let sec = poincare_section(&seeds, 0.0, &default_pulses(), 20, Integrator::default()).unwrap();
        assert_eq!(sec.n_orbits(), 15);
        for (i, seed) in seeds.iter().enumerate() {
            assert!(sec.orbit(i).iter().all(|&(_, r)| r == seed.1));
        }
        assert!(poincare_section(&[], 1.0, &default_pulses(), 5, Integrator::default()).is_err());
    }

    proptest! {
        #[test]
        fn pendulum_energy_conserved(phi in 0.0..TAU, rho in -60.0f64..60.0, k in 0.1f64..400.0) {
            for integ in [Integrator::default(), Integrator::elliptic()] {
                let before = pendulum_energy((phi, rho), k);
                let after = pendulum_energy(pendulum_segment((phi, rho), k, 0.05, integ).unwrap(), k);
                prop_assert!((after - before).abs() <= 1e-9 * before.abs().max(1.0),
                    "{:?}: {} -> {}", integ.backend, before, after);
            }
        }

        #[test]
        fn reflection_symmetry(phi in 0.0..TAU, rho in -40.0f64..40.0) {
            let pulses = default_pulses();
            let a = kick_cycle((phi, rho), 270.0, &pulses, Integrator::default()).unwrap();
            let b = kick_cycle((wrap_angle(-phi), -rho), 270.0, &pulses, Integrator::default()).unwrap();
            let dphi = (wrap_angle(-a.0) - b.0).abs();
            prop_assert!(dphi.min(TAU - dphi) < 1e-9);
            prop_assert!((a.1 + b.1).abs() < 1e-9);
        }
    }
}
