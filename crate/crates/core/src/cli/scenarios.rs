use std::time::Instant;

use chrono::Utc;
use rayon::prelude::*;

use super::config::{Resolved, RunConfig, Scenario};
use super::manifest::{sha256_hex, RunManifest};
use super::output::{self, num, RunDir};
use crate::analysis::{
    fraction_outside_classical, fraction_outside_quantum, fraction_outside_quantum_bounds, Source, TransportCurve,
};
use crate::classical::{cantorus_flux, evolve_ensemble_with, poincare_section, section_seeds, ClassicalEnsemble};
use crate::error::{Error, Result};
use crate::model::SimParams;
use crate::quantum::{run_thermal, DensityEvolution};
use crate::wigner::{negativity_volume, toroidal_wigner};

type Meta = Vec<(&'static str, String)>;

/// Validates `config`, runs its scenario into a fresh run directory and
/// writes the manifest last.
pub fn run_scenario(config: &RunConfig) -> Result<RunManifest> {
    let resolved = config.resolve()?;
    let canonical = config.to_toml_string()?;
    let config_sha256 = sha256_hex(canonical.as_bytes());
    let started = Utc::now();
    let clock = Instant::now();
    let mut dir = RunDir::create(&config.output_dir, &config_sha256[..12], started)?;
    log::info!("scenario {} -> {}", resolved.scenario, dir.root().display());

    execute(&resolved, &mut dir)
        .map_err(|e| Error::Scenario { scenario: resolved.scenario.name().into(), source: Box::new(e) })?;

    let manifest = RunManifest {
        artifact: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: resolved.scenario.name().into(),
        run_dir: dir.root().to_path_buf(),
        config: canonical,
        config_sha256,
        started_utc: started.to_rfc3339(),
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        files: RunManifest::digest_files(dir.root(), dir.files())?,
    };
    manifest.write()?;
    Ok(manifest)
}

/// Runs the scenario and writes its data files into `dir`.
pub fn execute(r: &Resolved, dir: &mut RunDir) -> Result<()> {
    match r.scenario {
        Scenario::Poincare => poincare(r, dir),
        Scenario::Waterfall => waterfall(r, dir),
        Scenario::Transport => transport(r, dir),
        Scenario::Wigner => wigner(r, dir),
        Scenario::Flux => flux(r, dir),
    }
}

fn tag(x: f64) -> String {
    format!("{x}")
}

fn meta(r: &Resolved, k: f64, eta: Option<f64>) -> Meta {
    let p = &r.params;
    let mut m: Meta = vec![
        ("scenario", r.scenario.name().into()),
        ("kick_strength", tag(k)),
        ("scaled_planck", tag(p.scaled_planck)),
    ];
    if let Some(eta) = eta {
        m.push(("se_probability", tag(eta)));
    }
    m.extend([
        ("pulse_width", tag(p.pulse_width)),
        ("pulse_spacing", tag(p.pulse_spacing)),
        ("basis_size", p.basis_size.to_string()),
        ("n_kicks", p.n_kicks.to_string()),
        ("n_trajectories", p.n_trajectories.to_string()),
        ("rng_seed", p.rng_seed.to_string()),
        ("init_momentum_sigma", tag(p.init_momentum_sigma)),
    ]);
    m
}

fn fingerprint(r: &Resolved, k: f64, eta: Option<f64>) -> String {
    meta(r, k, eta).iter().skip(1).map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

fn params_for(r: &Resolved, k: f64, eta: f64) -> SimParams {
    SimParams { kick_strength: k, se_probability: eta, ..r.params.clone() }
}

struct QuantumRun {
    k: f64,
    eta: f64,
    evolution: DensityEvolution,
}

/// One thermal density-matrix run per `(k, η)`, in parallel.
fn quantum_runs(r: &Resolved, checkpoints: &[usize]) -> Result<Vec<QuantumRun>> {
    let jobs: Vec<(f64, f64)> =
        r.kick_strengths.iter().flat_map(|&k| r.etas.iter().map(move |&eta| (k, eta))).collect();
    jobs.par_iter()
        .map(|&(k, eta)| {
            let evolution = run_thermal(&params_for(r, k, eta), &r.pulses, eta, &r.averaging, checkpoints)?;
            Ok(QuantumRun { k, eta, evolution })
        })
        .collect()
}

struct ClassicalRun {
    k: f64,
    /// `fraction[t − 1]` after kick `t`.
    fraction: Vec<f64>,
    /// Momenta after each kick, index 0 initial; only when requested.
    momenta: Vec<Vec<f64>>,
    snapshots: Vec<(usize, ClassicalEnsemble)>,
}

fn classical_run(r: &Resolved, k: f64, keep_momenta: bool, checkpoints: &[usize]) -> Result<ClassicalRun> {
    let p = &r.params;
    let mut e = ClassicalEnsemble::thermal(p.n_trajectories, p.init_momentum_sigma, p.rng_seed);
    let mut fraction = Vec::with_capacity(p.n_kicks);
    let mut momenta = Vec::new();
    let mut snapshots = Vec::new();
    if keep_momenta {
        momenta.push(e.rho.clone());
    }
    if checkpoints.contains(&0) {
        snapshots.push((0, e.clone()));
    }
    let mut failure = None;
    evolve_ensemble_with(&mut e, k, &r.pulses, p.n_kicks, r.integrator, |kick, s| {
        match fraction_outside_classical(s, r.boundary) {
            Ok(f) => fraction.push(f),
            Err(err) => failure = Some(err),
        }
        if keep_momenta {
            momenta.push(s.rho.clone());
        }
        if checkpoints.contains(&kick) {
            snapshots.push((kick, s.clone()));
        }
    })?;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(ClassicalRun { k, fraction, momenta, snapshots })
}

fn classical_runs(r: &Resolved, keep_momenta: bool, checkpoints: &[usize]) -> Result<Vec<ClassicalRun>> {
    if !r.classical {
        return Ok(Vec::new());
    }
    r.kick_strengths.par_iter().map(|&k| classical_run(r, k, keep_momenta, checkpoints)).collect()
}

fn write_checkpoints(r: &Resolved, dir: &mut RunDir, q: &QuantumRun) -> Result<()> {
    for (kick, rho) in &q.evolution.checkpoints {
        let mut m = meta(r, q.k, Some(q.eta));
        m.push(("kick", kick.to_string()));
        let name = format!("density_k{}_eta{}_kick{kick}.dat", tag(q.k), tag(q.eta));
        dir.write(&name, &output::density_text(rho, &m))?;
    }
    Ok(())
}

fn write_snapshots(r: &Resolved, dir: &mut RunDir, c: &ClassicalRun) -> Result<()> {
    for (kick, e) in &c.snapshots {
        let mut m = meta(r, c.k, None);
        m.push(("kick", kick.to_string()));
        dir.write(&format!("classical_k{}_kick{kick}.dat", tag(c.k)), &output::ensemble_text(e, &m))?;
    }
    Ok(())
}

fn index_text(rows: &[(String, Source, f64, Option<f64>)]) -> String {
    let mut s = output::header("files in this run", &[], &["file", "source", "kick_strength", "se_probability"]);
    for (file, source, k, eta) in rows {
        let eta = eta.map(tag).unwrap_or_else(|| "-".into());
        s.push_str(&format!("{file} {source} {} {eta}\n", tag(*k)));
    }
    s
}

fn transport(r: &Resolved, dir: &mut RunDir) -> Result<()> {
    let (quantum, classical) =
        rayon::join(|| quantum_runs(r, &r.checkpoints), || classical_runs(r, false, &r.checkpoints));
    let (quantum, classical) = (quantum?, classical?);
    let hb = r.params.scaled_planck;
    let mut index = Vec::new();

    for c in &classical {
        let mut curve = TransportCurve::new(Source::Classical, r.boundary, fingerprint(r, c.k, None));
        for (i, &f) in c.fraction.iter().enumerate() {
            curve.push(i + 1, f);
        }
        let name = format!("transport_k{}_classical.dat", tag(c.k));
        dir.write(&name, &output::transport_curve_text(&curve, &meta(r, c.k, None), None))?;
        index.push((name, Source::Classical, c.k, None));
        write_snapshots(r, dir, c)?;
    }
    for q in &quantum {
        let mut curve = TransportCurve::new(Source::Quantum, r.boundary, fingerprint(r, q.k, Some(q.eta)));
        let mut bounds = Vec::new();
        for (kick, p) in q.evolution.populations.iter().enumerate().skip(1) {
            curve.push(kick, fraction_outside_quantum(p, hb, r.boundary));
            bounds.push(fraction_outside_quantum_bounds(p, hb, r.boundary));
        }
        let name = format!("transport_k{}_eta{}.dat", tag(q.k), tag(q.eta));
        let mut m = meta(r, q.k, Some(q.eta));
        m.push(("max_edge_population", num(q.evolution.max_edge_population)));
        dir.write(&name, &output::transport_curve_text(&curve, &m, Some(&bounds)))?;
        index.push((name, Source::Quantum, q.k, Some(q.eta)));
        write_checkpoints(r, dir, q)?;
    }
    dir.write("index.dat", &index_text(&index))
}

fn waterfall(r: &Resolved, dir: &mut RunDir) -> Result<()> {
    let (quantum, classical) = rayon::join(|| quantum_runs(r, &r.checkpoints), || classical_runs(r, true, &[]));
    let (quantum, classical) = (quantum?, classical?);
    let hb = r.params.scaled_planck;
    let mut index = Vec::new();

    for q in &quantum {
        let name = format!("waterfall_k{}_eta{}.dat", tag(q.k), tag(q.eta));
        dir.write(&name, &output::waterfall_text(&q.evolution.populations, hb, &meta(r, q.k, Some(q.eta))))?;
        index.push((name, Source::Quantum, q.k, Some(q.eta)));
        write_checkpoints(r, dir, q)?;
    }
    for c in classical {
        let name = format!("waterfall_k{}_classical.dat", tag(c.k));
        let snapshots: Vec<(usize, Vec<f64>)> = c.momenta.into_iter().enumerate().collect();
        let text = output::classical_histogram_text(&snapshots, r.params.basis_size, hb, &meta(r, c.k, None));
        dir.write(&name, &text)?;
        index.push((name, Source::Classical, c.k, None));
    }
    dir.write("index.dat", &index_text(&index))
}

fn wigner(r: &Resolved, dir: &mut RunDir) -> Result<()> {
    let checkpoints = if r.checkpoints.is_empty() { vec![r.params.n_kicks] } else { r.checkpoints.clone() };
    let quantum = quantum_runs(r, &checkpoints)?;
    let hb = r.params.scaled_planck;
    let mut summary = output::header(
        "Wigner negativity on the coarse grid",
        &[],
        &["kick_strength", "se_probability", "kick", "negativity", "max_imaginary", "file"],
    );
    for q in &quantum {
        let grids: Vec<_> = q.evolution.checkpoints.par_iter().map(|(kick, rho)| (*kick, toroidal_wigner(rho, hb))).collect();
        for (kick, g) in grids {
            let mut m = meta(r, q.k, Some(q.eta));
            m.push(("kick", kick.to_string()));
            let stem = format!("wigner_k{}_eta{}_kick{kick}", tag(q.k), tag(q.eta));
            dir.write(&format!("{stem}.dat"), &output::wigner_points_text(&g, &m))?;
            let fine = output::matrix_text(&g.values, &g.x_axis(), &g.p_axis(), "toroidal Wigner function, 2N x 2N", &m);
            dir.write(&format!("{stem}_matrix.dat"), &fine)?;
            let coarse = output::matrix_text(
                &g.coarse,
                &g.coarse_x_axis(),
                &g.coarse_p_axis(),
                "toroidal Wigner function, 2x2 cell means",
                &m,
            );
            dir.write(&format!("{stem}_coarse.dat"), &coarse)?;
            summary.push_str(&format!(
                "{} {} {kick} {} {} {stem}.dat\n",
                tag(q.k),
                tag(q.eta),
                num(negativity_volume(&g)),
                num(g.max_imaginary)
            ));
        }
    }
    dir.write("negativity.dat", &summary)
}

fn poincare(r: &Resolved, dir: &mut RunDir) -> Result<()> {
    let s = &r.poincare;
    let seeds = section_seeds(s.rho_min, s.rho_max, s.n_rho, s.n_phi);
    let sections = r
        .kick_strengths
        .iter()
        .map(|&k| poincare_section(&seeds, k, &r.pulses, s.n_kicks, r.integrator))
        .collect::<Result<Vec<_>>>()?;
    for section in &sections {
        let mut m = meta(r, section.kick_strength, None);
        m.push(("section_kicks", s.n_kicks.to_string()));
        dir.write(&format!("poincare_k{}.dat", tag(section.kick_strength)), &output::poincare_text(section, &m))?;
    }
    Ok(())
}

fn flux(r: &Resolved, dir: &mut RunDir) -> Result<()> {
    let rows = r
        .kick_strengths
        .iter()
        .map(|&k| cantorus_flux(k, &r.pulses, r.boundary, &r.flux, r.integrator).map(|e| (k, e)))
        .collect::<Result<Vec<_>>>()?;
    let mut m = meta(r, r.params.kick_strength, None);
    m.retain(|(key, _)| !matches!(*key, "kick_strength" | "n_trajectories" | "init_momentum_sigma" | "basis_size"));
    m.extend([
        ("grid", format!("{}x{}", r.flux.grid_phi, r.flux.grid_rho)),
        ("band_halfwidth", tag(r.flux.band_halfwidth)),
        ("n_cycles", r.flux.n_cycles.to_string()),
    ]);
    dir.write("flux.dat", &output::flux_text(&rows, r.params.scaled_planck, &m))
}
