//! Transport metrics shared by the classical and quantum backends.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classical::ClassicalEnsemble;
use crate::error::{Error, Result};
use crate::quantum::ladder;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Classical,
    Quantum,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Classical => "classical",
            Source::Quantum => "quantum",
        })
    }
}

/// Fraction of the ensemble beyond `|ρ| = boundary`, kick by kick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportCurve {
    pub kick_index: Vec<usize>,
    pub fraction_outside: Vec<f64>,
    pub boundary: f64,
    pub source: Source,
    /// Free-form `key=value` description of the run parameters.
    pub fingerprint: String,
}

impl TransportCurve {
    pub fn new(source: Source, boundary: f64, fingerprint: impl Into<String>) -> Self {
        TransportCurve {
            kick_index: Vec::new(),
            fraction_outside: Vec::new(),
            boundary,
            source,
            fingerprint: fingerprint.into(),
        }
    }

    pub fn push(&mut self, kick: usize, fraction: f64) {
        self.kick_index.push(kick);
        self.fraction_outside.push(fraction);
    }

    pub fn len(&self) -> usize {
        self.kick_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kick_index.is_empty()
    }

    /// Value at `kick`, if recorded.
    pub fn at(&self, kick: usize) -> Option<f64> {
        self.kick_index.iter().position(|&k| k == kick).map(|i| self.fraction_outside[i])
    }
}

/// `count(|ρ| > boundary) / n`.
pub fn fraction_outside_classical(ensemble: &ClassicalEnsemble, boundary: f64) -> Result<f64> {
    if ensemble.is_empty() {
        return Err(Error::InvalidArgument("fraction outside of an empty ensemble".into()));
    }
    let outside = ensemble.rho.iter().filter(|r| r.abs() > boundary).count();
    Ok(outside as f64 / ensemble.len() as f64)
}

/// Share of ladder site `n`'s cell `[nℏ̄k − ℏ̄k/2, nℏ̄k + ℏ̄k/2]` lying beyond `|ρ| = boundary`.
fn outside_share(n: i64, scaled_planck: f64, boundary: f64) -> f64 {
    let lo = (n as f64 - 0.5) * scaled_planck;
    let hi = (n as f64 + 0.5) * scaled_planck;
    if lo >= boundary || hi <= -boundary {
        return 1.0;
    }
    if lo >= -boundary && hi <= boundary {
        return 0.0;
    }
    let above = (hi - lo.max(boundary)).max(0.0);
    let below = (hi.min(-boundary) - lo).max(0.0);
    ((above + below) / scaled_planck).min(1.0)
}

/// Population beyond `|ρ| = boundary`. Each ladder site owns a cell of
/// width ℏ̄k; the site straddling the boundary contributes the share of
/// its cell that lies outside.
pub fn fraction_outside_quantum(populations: &[f64], scaled_planck: f64, boundary: f64) -> f64 {
    ladder(populations.len())
        .zip(populations)
        .map(|(n, &p)| p * outside_share(n, scaled_planck, boundary))
        .sum()
}

/// One-bin sensitivity of [`fraction_outside_quantum`]: the value with the
/// straddling sites counted wholly inside and wholly outside.
pub fn fraction_outside_quantum_bounds(populations: &[f64], scaled_planck: f64, boundary: f64) -> (f64, f64) {
    let mut lower = 0.0;
    let mut upper = 0.0;
    for (n, &p) in ladder(populations.len()).zip(populations) {
        let s = outside_share(n, scaled_planck, boundary);
        if s >= 1.0 {
            lower += p;
        }
        if s > 0.0 {
            upper += p;
        }
    }
    (lower, upper)
}

/// Mean of `ρ²/2` over the momentum populations.
pub fn kinetic_energy_quantum(populations: &[f64], scaled_planck: f64) -> f64 {
    ladder(populations.len())
        .zip(populations)
        .map(|(n, &p)| {
            let rho = n as f64 * scaled_planck;
            0.5 * p * rho * rho
        })
        .sum()
}

/// Mean of `ρ²/2` over the ensemble (zero if empty).
pub fn kinetic_energy_classical(ensemble: &ClassicalEnsemble) -> f64 {
    if ensemble.is_empty() {
        return 0.0;
    }
    ensemble.rho.iter().map(|r| 0.5 * r * r).sum::<f64>() / ensemble.len() as f64
}

/// Population per unit momentum near the boundary, symmetrised over `±ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShoulderContrast {
    /// Outermost site whose cell lies wholly inside the boundary.
    pub inside_site: i64,
    /// Site whose cell contains the probe momentum.
    pub probe_site: i64,
    pub inside_density: f64,
    pub probe_density: f64,
    /// `inside_density / probe_density`.
    pub ratio: f64,
}

/// Compares the population density just inside `boundary` with the density
/// at `probe` (a momentum beyond the boundary).
pub fn shoulder_contrast(populations: &[f64], scaled_planck: f64, boundary: f64, probe: f64) -> Result<ShoulderContrast> {
    let n = populations.len();
    let half = (n / 2) as i64;
    let inside_site = ((boundary / scaled_planck) - 0.5).floor() as i64;
    let probe_site = (probe / scaled_planck).round() as i64;
    if inside_site < 0 || probe_site >= half || probe_site <= inside_site {
        return Err(Error::InvalidArgument(format!(
            "boundary {boundary} / probe {probe} do not resolve on a ladder of {n} sites at ℏ̄k={scaled_planck}"
        )));
    }
    let density = |site: i64| {
        let p = populations[(site + half) as usize] + populations[(half - site) as usize];
        0.5 * p / scaled_planck
    };
    let inside_density = density(inside_site);
    let probe_density = density(probe_site);
    Ok(ShoulderContrast {
        inside_site,
        probe_site,
        inside_density,
        probe_density,
        ratio: inside_density / probe_density,
    })
}

/// Continued-fraction terms `[a₀; a₁, a₂, …]` of `w`, at most `depth` terms.
/// Stops early when the remainder vanishes.
pub fn continued_fraction(w: f64, depth: usize) -> Vec<i64> {
    let mut terms = Vec::with_capacity(depth);
    let mut x = w;
    for _ in 0..depth {
        let a = x.floor();
        terms.push(a as i64);
        let frac = x - a;
        if frac.abs() < 1e-12 {
            break;
        }
        x = 1.0 / frac;
    }
    terms
}

/// Convergents `p_i / q_i` of a continued fraction.
pub fn convergents(terms: &[i64]) -> Vec<(i128, i128)> {
    let (mut p_prev, mut p) = (1i128, 0i128);
    let (mut q_prev, mut q) = (0i128, 1i128);
    let mut out = Vec::with_capacity(terms.len());
    for &a in terms {
        let a = a as i128;
        let pn = a * p_prev + p;
        let qn = a * q_prev + q;
        p = p_prev;
        q = q_prev;
        p_prev = pn;
        q_prev = qn;
        out.push((pn, qn));
    }
    out
}
