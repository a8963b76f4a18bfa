//! Parameter model, pulse train and resonance analytics for the double-pulse
//! driven rotor.
//!
//! The dimensionless Hamiltonian is `H = ρ²/2 − k cos φ Σ f(τ − n)` where
//! `f` is a periodic train of two square pulses per cycle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant (CODATA 2018), J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (exact SI), J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Relative line strengths for the F=4 → F'=5,4,3 caesium transitions,
/// equal Zeeman populations assumed.
pub const LINE_STRENGTHS: [f64; 3] = [11.0 / 27.0, 7.0 / 36.0, 7.0 / 108.0];

/// Ω/δ_min above which adiabatic elimination of the excited state is
/// considered questionable. Only a warning is emitted.
pub const ADIABATIC_WARN_RATIO: f64 = 0.1;

/// Laboratory-unit parameters of the standing-wave kicking potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Resonant Rabi frequency Ω (rad/s).
    pub rabi_frequency: f64,
    /// Detunings δ_45, δ_44, δ_43 (rad/s).
    pub detunings: [f64; 3],
    /// Laser wave number k_L (1/m).
    pub wave_number: f64,
    /// Atomic mass M (kg).
    pub atom_mass: f64,
    /// Kick period T (s).
    pub pulse_period: f64,
}

impl PhysicalParams {
    /// Caesium D2 line at 852 nm, T = 25 μs, with the given Rabi frequency
    /// and detunings.
    pub fn caesium(rabi_frequency: f64, detunings: [f64; 3]) -> Self {
        PhysicalParams {
            rabi_frequency,
            detunings,
            wave_number: 2.0 * PI / 852e-9,
            atom_mass: 2.2069e-25,
            pulse_period: 25e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite and > 0, got {v}")))
            }
        };
        // Zero coupling is a valid (trivial) configuration.
        if !(self.rabi_frequency.is_finite() && self.rabi_frequency >= 0.0) {
            return Err(Error::param(
                "rabi_frequency",
                format!("must be finite and >= 0, got {}", self.rabi_frequency),
            ));
        }
        for &d in &self.detunings {
            finite_pos("detunings", d)?;
        }
        finite_pos("wave_number", self.wave_number)?;
        finite_pos("atom_mass", self.atom_mass)?;
        finite_pos("pulse_period", self.pulse_period)
    }

    /// Ω_eff = Ω² Σ s_4j / δ_4j.
    pub fn effective_rabi_frequency(&self) -> f64 {
        let sum: f64 = LINE_STRENGTHS.iter().zip(&self.detunings).map(|(s, d)| s / d).sum();
        self.rabi_frequency * self.rabi_frequency * sum
    }

    /// Ω / min δ. Large values mean the adiabatic elimination is doubtful.
    pub fn adiabaticity_ratio(&self) -> f64 {
        let dmin = self.detunings.iter().cloned().fold(f64::INFINITY, f64::min);
        self.rabi_frequency / dmin
    }

    /// RMS width in ρ of a thermal momentum distribution at `temperature`
    /// (K): σ_ρ = 2 k_L T √(k_B Θ / M).
    pub fn thermal_momentum_sigma(&self, temperature: f64) -> f64 {
        2.0 * self.wave_number * self.pulse_period * (BOLTZMANN * temperature / self.atom_mass).sqrt()
    }
}

/// Converts laboratory parameters to the dimensionless kick strength `k` and
/// scaled Planck constant `ℏ̄k`.
pub fn physical_to_scaled(p: &PhysicalParams) -> Result<(f64, f64)> {
    p.validate()?;
    let ratio = p.adiabaticity_ratio();
    if ratio > ADIABATIC_WARN_RATIO {
        log::warn!("Ω/δ_min = {ratio:.3} exceeds {ADIABATIC_WARN_RATIO}; adiabatic elimination may not hold");
    }
    let kl2 = p.wave_number * p.wave_number;
    let t = p.pulse_period;
    let k = HBAR * p.effective_rabi_frequency() * kl2 * t * t / (2.0 * p.atom_mass);
    let hbar_k = 4.0 * HBAR * kl2 * t / p.atom_mass;
    Ok((k, hbar_k))
}

/// All dimensionless run parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Kick strength k.
    pub kick_strength: f64,
    /// Scaled Planck constant ℏ̄k.
    pub scaled_planck: f64,
    /// Spontaneous-emission probability per kick cycle, η.
    pub se_probability: f64,
    /// Pulse width α as a fraction of the period.
    pub pulse_width: f64,
    /// Centre-to-centre pulse spacing Δ as a fraction of the period.
    pub pulse_spacing: f64,
    /// Number of momentum states N (even).
    pub basis_size: usize,
    pub n_kicks: usize,
    pub n_trajectories: usize,
    pub rng_seed: u64,
    /// Thermal width of the initial momentum distribution, in ρ units.
    pub init_momentum_sigma: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            kick_strength: 270.0,
            scaled_planck: 2.5988,
            se_probability: 0.0,
            pulse_width: 1.0 / 20.0,
            pulse_spacing: 1.0 / 10.0,
            basis_size: 128,
            n_kicks: 70,
            n_trajectories: 10_000,
            rng_seed: 1,
            init_momentum_sigma: 9.22,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let p = self;
        if !(p.kick_strength.is_finite() && p.kick_strength > 0.0) {
            return Err(Error::param("kick_strength", format!("must be > 0, got {}", p.kick_strength)));
        }
        if !(p.scaled_planck.is_finite() && p.scaled_planck > 0.0) {
            return Err(Error::param("scaled_planck", format!("must be > 0, got {}", p.scaled_planck)));
        }
        if !(0.0..=1.0).contains(&p.se_probability) {
            return Err(Error::param("se_probability", format!("must lie in [0, 1], got {}", p.se_probability)));
        }
        if !(p.pulse_width > 0.0 && p.pulse_width <= p.pulse_spacing && p.pulse_spacing <= 0.5) {
            return Err(Error::param(
                "pulse_width",
                format!("need 0 < α ≤ Δ ≤ 1/2, got α={} Δ={}", p.pulse_width, p.pulse_spacing),
            ));
        }
        if p.basis_size == 0 || p.basis_size % 2 != 0 {
            return Err(Error::param("basis_size", format!("must be positive and even, got {}", p.basis_size)));
        }
        if p.n_trajectories == 0 {
            return Err(Error::param("n_trajectories", "must be positive"));
        }
        if !(p.init_momentum_sigma.is_finite() && p.init_momentum_sigma >= 0.0) {
            return Err(Error::param("init_momentum_sigma", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn pulse_shape(&self) -> PulseShape {
        PulseShape { width: self.pulse_width, spacing: self.pulse_spacing }
    }
}

/// One constant-Hamiltonian piece of a kick cycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Fraction of the period.
    pub duration: f64,
    /// Whether the standing wave is on.
    pub driven: bool,
}

/// Temporal schedule of one kick cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseTrain {
    pub segments: Vec<Segment>,
}

impl PulseTrain {
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn driven_time(&self) -> f64 {
        self.segments.iter().filter(|s| s.driven).map(|s| s.duration).sum()
    }
}

/// Builds the symmetric double-pulse schedule
/// `[pad, α, Δ−α, α, pad]` with `pad = (1 − α − Δ)/2`.
///
/// Zero-length segments are dropped and adjacent segments of the same kind
/// merged, so `Δ = α` gives a single pulse of width `2α`.
pub fn build_pulse_train(width: f64, spacing: f64) -> Result<PulseTrain> {
    if !(width.is_finite() && spacing.is_finite()) || width <= 0.0 {
        return Err(Error::param("pulse_width", format!("must be > 0, got {width}")));
    }
    if spacing < width {
        return Err(Error::param("pulse_spacing", format!("Δ={spacing} must be ≥ α={width}")));
    }
    if spacing + width > 1.0 {
        return Err(Error::param("pulse_spacing", format!("α + Δ = {} exceeds one period", width + spacing)));
    }
    let gap = spacing - width;
    // Outer pads take whatever is left so the durations sum to one.
    let pad = 0.5 * (1.0 - 2.0 * width - gap);
    let raw = [(pad, false), (width, true), (gap, false), (width, true), (pad, false)];

    let mut segments: Vec<Segment> = Vec::with_capacity(5);
    for (duration, driven) in raw {
        if duration <= 0.0 {
            continue;
        }
        match segments.last_mut() {
            Some(last) if last.driven == driven => last.duration += duration,
            _ => segments.push(Segment { duration, driven }),
        }
    }
    Ok(PulseTrain { segments })
}

/// Shape of the double-pulse train: width α and centre spacing Δ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub width: f64,
    pub spacing: f64,
}

impl PulseShape {
    /// Pulse width 1/20 and centre spacing 1/10 of the period.
    pub const DOUBLE_PULSE: PulseShape = PulseShape { width: 1.0 / 20.0, spacing: 1.0 / 10.0 };

    pub fn fourier_coefficient(&self, m: i64) -> f64 {
        fourier_coefficient(m, self.width, self.spacing)
    }

    pub fn resonance_width(&self, m: i64, k: f64) -> f64 {
        4.0 * (self.fourier_coefficient(m).abs() * k).sqrt()
    }

    pub fn chirikov_overlap(&self, m: i64, n: i64, k: f64) -> Result<bool> {
        if m == n {
            return Err(Error::InvalidArgument(format!("resonance overlap needs m ≠ n, got m = n = {m}")));
        }
        let separation = 2.0 * PI * (m - n).unsigned_abs() as f64;
        let half_widths = 0.5 * (self.resonance_width(m, k) + self.resonance_width(n, k));
        Ok(separation <= half_widths)
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Cosine-series coefficient a_m of the pulse train, taken about the
/// midpoint between the two pulses: `f(τ) = Σ_m a_m cos 2πmτ` with
/// `a_m = 2α sinc(mπα) cos(mπΔ)`.
///
/// At the resonance positions `mΔ` an odd half-integer the two pulses
/// interfere destructively and `a_m` is exactly zero.
pub fn fourier_coefficient(m: i64, width: f64, spacing: f64) -> f64 {
    let mf = m as f64;
    2.0 * width * sinc(mf * PI * width) * cos_pi(mf * spacing)
}

/// cos(πx) with exact zeros at half-integers.
fn cos_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if (r - 0.5).abs() < 1e-14 || (r - 1.5).abs() < 1e-14 {
        0.0
    } else {
        (PI * r).cos()
    }
}

/// Full width 4√(|a_m| k) of the m-th primary resonance, centred at ρ = 2πm.
pub fn resonance_width(m: i64, k: f64, shape: PulseShape) -> f64 {
    shape.resonance_width(m, k)
}

/// Chirikov overlap test for resonances m and n.
pub fn chirikov_overlap(m: i64, n: i64, k: f64, shape: PulseShape) -> Result<bool> {
    shape.chirikov_overlap(m, n, k)
}
