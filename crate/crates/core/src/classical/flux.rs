//! Phase-space flux through a (broken) torus at fixed momentum, by crossing
//! statistics on a uniform seed grid.
//!
//! Seeds fill the band `|ρ − b| < w` on a cell-centred grid. A seed counts
//! as a crossing event when its first cycle carries it across `ρ = b` and
//! its orbit then reaches the far edge of the band (`b ± w` on the new side)
//! within `n_cycles`. Requiring the far edge separates genuine transport from
//! the back-and-forth wobble of orbits riding a surviving torus. Each event
//! stands for one grid cell of area, so the event area per direction is the
//! flux per cycle. Outward and inward fluxes are averaged.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{kick_cycle, Integrator};
use crate::error::{Error, Result};
use crate::model::PulseTrain;

/// Minimum number of events for a flux estimate to be reported.
pub const MIN_EVENTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FluxConfig {
    pub grid_phi: usize,
    pub grid_rho: usize,
    /// Half-width `w` of the seeded band.
    pub band_halfwidth: f64,
    /// Cycles allowed for an orbit to reach the far band edge.
    pub n_cycles: usize,
}

impl Default for FluxConfig {
    fn default() -> Self {
        FluxConfig { grid_phi: 1000, grid_rho: 1000, band_halfwidth: 2.0 * PI, n_cycles: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxEstimate {
    pub boundary: f64,
    /// Mean of outward and inward transit flux, area per cycle.
    pub flux: f64,
    /// One-sigma binomial error on `flux`.
    pub std_error: f64,
    pub outward: f64,
    pub inward: f64,
    /// One-cycle flux through the line without the far-edge requirement.
    /// Reported for method sensitivity.
    pub line_flux: f64,
    pub events: usize,
    pub seeds: usize,
    pub cell_area: f64,
}

/// Estimates the flux per kick cycle through `ρ = boundary`.
///
/// Fails with [`Error::InsufficientStatistics`] below [`MIN_EVENTS`] events;
/// the error carries the raw count so callers can still tell "no transport"
/// from "too few seeds".
pub fn cantorus_flux(
    k: f64,
    pulses: &PulseTrain,
    boundary: f64,
    config: &FluxConfig,
    integrator: Integrator,
) -> Result<FluxEstimate> {
    let FluxConfig { grid_phi, grid_rho, band_halfwidth: w, n_cycles } = *config;
    if grid_phi == 0 || grid_rho < 2 || grid_rho % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "flux grid needs grid_phi > 0 and an even grid_rho ≥ 2, got {grid_phi}×{grid_rho}"
        )));
    }
    if !(w > 0.0 && w.is_finite() && boundary.is_finite()) || n_cycles == 0 {
        return Err(Error::InvalidArgument("flux band half-width and cycle count must be positive".into()));
    }
    // The side of the boundary facing ρ = 0 is "inside".
    let outward_sign = if boundary >= 0.0 { 1.0 } else { -1.0 };
    let dphi = TAU / grid_phi as f64;
    let drho = 2.0 * w / grid_rho as f64;
    let cell_area = dphi * drho;

    // Per-row counts: (outward transits, inward transits, outward line, inward line).
    let rows: Vec<[usize; 4]> = (0..grid_rho)
        .into_par_iter()
        .map(|i| -> Result<[usize; 4]> {
            let rho0 = boundary - w + (i as f64 + 0.5) * drho;
            let inside = (rho0 - boundary) * outward_sign < 0.0;
            let mut counts = [0usize; 4];
            for j in 0..grid_phi {
                let phi0 = (j as f64 + 0.5) * dphi;
                let s1 = kick_cycle((phi0, rho0), k, pulses, integrator)?;
                let crossed = ((s1.1 - boundary) * outward_sign < 0.0) != inside;
                if !crossed {
                    continue;
                }
                counts[if inside { 2 } else { 3 }] += 1;
                // Far edge on the side the orbit crossed to.
                let reached = |rho: f64| {
                    let d = (rho - boundary) * outward_sign;
                    if inside {
                        d >= w
                    } else {
                        d <= -w
                    }
                };
                let mut s = s1;
                let mut transit = reached(s.1);
                for _ in 1..n_cycles {
                    if transit {
                        break;
                    }
                    s = kick_cycle(s, k, pulses, integrator)?;
                    transit = reached(s.1);
                }
                if transit {
                    counts[if inside { 0 } else { 1 }] += 1;
                }
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;

    let mut total = [0usize; 4];
    for r in &rows {
        for (t, c) in total.iter_mut().zip(r) {
            *t += c;
        }
    }
    let per_side = (grid_phi * grid_rho / 2) as f64;
    let half_area = per_side * cell_area;
    let outward = total[0] as f64 * cell_area;
    let inward = total[1] as f64 * cell_area;
    let flux = 0.5 * (outward + inward);
    let binomial_var = |count: usize| {
        let p = count as f64 / per_side;
        half_area * half_area * p * (1.0 - p) / per_side
    };
    let std_error = 0.5 * (binomial_var(total[0]) + binomial_var(total[1])).sqrt();
    let events = total[0] + total[1];
    if events < MIN_EVENTS {
        return Err(Error::InsufficientStatistics { count: events, estimate: flux });
    }
    Ok(FluxEstimate {
        boundary,
        flux,
        std_error,
        outward,
        inward,
        line_flux: 0.5 * (total[2] + total[3]) as f64 * cell_area,
        events,
        seeds: grid_phi * grid_rho,
        cell_area,
    })
}
