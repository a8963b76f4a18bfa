//! Gnuplot-ready columnar text. Comment lines start with `#`; blank lines
//! separate data blocks so `splot` and `index` work directly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use nalgebra::DMatrix;

use crate::analysis::TransportCurve;
use crate::classical::{ClassicalEnsemble, FluxEstimate, PoincareSection};
use crate::error::Result;
use crate::quantum::{ladder, DensityMatrix};
use crate::wigner::WignerGrid;

/// Fixed-width scientific notation, identical across runs and platforms.
pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

/// Comment header: a title, `key = value` metadata and the column names.
pub fn header(title: &str, meta: &[(&str, String)], columns: &[&str]) -> String {
    let mut s = format!("# {title}\n");
    for (k, v) in meta {
        let _ = writeln!(s, "# {k} = {v}");
    }
    if !columns.is_empty() {
        let _ = writeln!(s, "# columns: {}", columns.join(" "));
    }
    s
}

/// One row per recorded kick. `bounds`, if given, adds the one-bin
/// sensitivity columns.
pub fn transport_curve_text(curve: &TransportCurve, meta: &[(&str, String)], bounds: Option<&[(f64, f64)]>) -> String {
    let mut m = meta.to_vec();
    m.push(("source", curve.source.to_string()));
    m.push(("boundary", num(curve.boundary)));
    m.push(("fingerprint", curve.fingerprint.clone()));
    let columns: &[&str] = if bounds.is_some() {
        &["kick", "fraction_outside", "fraction_lower", "fraction_upper"]
    } else {
        &["kick", "fraction_outside"]
    };
    let mut s = header("fraction of the ensemble beyond |rho| = boundary", &m, columns);
    for (i, (&kick, &f)) in curve.kick_index.iter().zip(&curve.fraction_outside).enumerate() {
        match bounds.and_then(|b| b.get(i)) {
            Some(&(lo, hi)) => {
                let _ = writeln!(s, "{kick} {} {} {}", num(f), num(lo), num(hi));
            }
            None => {
                let _ = writeln!(s, "{kick} {}", num(f));
            }
        }
    }
    s
}

/// Momentum populations per kick; one block per kick.
pub fn waterfall_text(populations: &[Vec<f64>], scaled_planck: f64, meta: &[(&str, String)]) -> String {
    let mut s = header("momentum populations per kick", meta, &["kick", "n", "rho", "population"]);
    for (kick, p) in populations.iter().enumerate() {
        for (n, &x) in ladder(p.len()).zip(p) {
            let _ = writeln!(s, "{kick} {n} {} {}", num(n as f64 * scaled_planck), num(x));
        }
        s.push('\n');
    }
    s
}

/// Classical momentum histograms per kick, bins of width ℏ̄k centred on
/// the ladder momenta `nℏ̄k`; counts outside the ladder are dropped.
pub fn classical_histogram_text(
    snapshots: &[(usize, Vec<f64>)],
    basis_size: usize,
    scaled_planck: f64,
    meta: &[(&str, String)],
) -> String {
    let mut s = header("classical momentum histogram per kick (fraction per bin)", meta, &["kick", "n", "rho", "fraction"]);
    let half = (basis_size / 2) as i64;
    for (kick, rho) in snapshots {
        let mut counts = vec![0usize; basis_size];
        for &r in rho {
            let n = (r / scaled_planck).round() as i64;
            if (-half..basis_size as i64 - half).contains(&n) {
                counts[(n + half) as usize] += 1;
            }
        }
        let total = rho.len().max(1) as f64;
        for (n, &c) in ladder(basis_size).zip(&counts) {
            let _ = writeln!(s, "{kick} {n} {} {}", num(n as f64 * scaled_planck), num(c as f64 / total));
        }
        s.push('\n');
    }
    s
}

/// Every element `⟨m|ρ̂|n⟩` as `m n re im`.
pub fn density_text(rho: &DensityMatrix, meta: &[(&str, String)]) -> String {
    let mut s = header("density matrix in the momentum basis", meta, &["m", "n", "re", "im"]);
    let size = rho.basis_size();
    let e = rho.elements();
    for (i, m) in ladder(size).enumerate() {
        for (j, n) in ladder(size).enumerate() {
            let z = e[(i, j)];
            let _ = writeln!(s, "{m} {n} {} {}", num(z.re), num(z.im));
        }
    }
    s
}

pub fn ensemble_text(ensemble: &ClassicalEnsemble, meta: &[(&str, String)]) -> String {
    let mut s = header("classical ensemble snapshot", meta, &["phi", "rho"]);
    for (p, r) in ensemble.phi.iter().zip(&ensemble.rho) {
        let _ = writeln!(s, "{} {}", num(*p), num(*r));
    }
    s
}

/// Fine Wigner grid as `X P w`, one block per momentum row.
pub fn wigner_points_text(grid: &WignerGrid, meta: &[(&str, String)]) -> String {
    let mut m = meta.to_vec();
    m.push(("max_imaginary", num(grid.max_imaginary)));
    let mut s = header("toroidal Wigner function", &m, &["X", "P", "w"]);
    let (xs, ps) = (grid.x_axis(), grid.p_axis());
    for (l, p) in ps.iter().enumerate() {
        for (k, x) in xs.iter().enumerate() {
            let _ = writeln!(s, "{} {} {}", num(*x), num(*p), num(grid.values[(l, k)]));
        }
        s.push('\n');
    }
    s
}

/// Dense matrix dump in gnuplot's `nonuniform matrix` layout: the first row
/// is the column count followed by the X axis, each later row starts with
/// its P value.
pub fn matrix_text(values: &DMatrix<f64>, x_axis: &[f64], p_axis: &[f64], title: &str, meta: &[(&str, String)]) -> String {
    let mut s = header(title, meta, &[]);
    s.push_str("# layout: nonuniform matrix (row 0 = [ncols, X...], rows = [P, w...])\n");
    let _ = write!(s, "{}", x_axis.len());
    for x in x_axis {
        let _ = write!(s, " {}", num(*x));
    }
    s.push('\n');
    for (l, p) in p_axis.iter().enumerate() {
        s.push_str(&num(*p));
        for k in 0..values.ncols() {
            let _ = write!(s, " {}", num(values[(l, k)]));
        }
        s.push('\n');
    }
    s
}

/// Poincaré section as `orbit phi rho`, one block per orbit.
pub fn poincare_text(section: &PoincareSection, meta: &[(&str, String)]) -> String {
    let mut s = header("stroboscopic section", meta, &["orbit", "phi", "rho"]);
    for i in 0..section.n_orbits() {
        for &(phi, rho) in section.orbit(i) {
            let _ = writeln!(s, "{i} {} {}", num(phi), num(rho));
        }
        s.push('\n');
    }
    s
}

pub fn flux_text(rows: &[(f64, FluxEstimate)], scaled_planck: f64, meta: &[(&str, String)]) -> String {
    let columns = [
        "k", "boundary", "flux", "std_error", "flux_over_hbar", "outward", "inward", "line_flux", "events", "seeds",
    ];
    let mut s = header("classical flux per kick cycle through rho = +-boundary", meta, &columns);
    for (k, e) in rows {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {} {} {} {}",
            num(*k),
            num(e.boundary),
            num(e.flux),
            num(e.std_error),
            num(e.flux / scaled_planck),
            num(e.outward),
            num(e.inward),
            num(e.line_flux),
            e.events,
            e.seeds
        );
    }
    s
}

/// Directory holding one run's outputs; records every file written.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    /// Creates `<parent>/<YYYYmmddTHHMMSSZ>-<tag>`, appending `-2`, `-3`, …
    /// if that name is taken.
    pub fn create(parent: &Path, tag: &str, now: DateTime<Utc>) -> Result<Self> {
        fs::create_dir_all(parent)?;
        let base = format!("{}-{tag}", now.format("%Y%m%dT%H%M%SZ"));
        let mut attempt = 1;
        loop {
            let name = if attempt == 1 { base.clone() } else { format!("{base}-{attempt}") };
            let root = parent.join(name);
            match fs::create_dir(&root) {
                Ok(()) => return Ok(RunDir { root, files: Vec::new() }),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => attempt += 1,
                Err(e) => return Err(e.into()),
            }
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Relative paths of the files written so far, in write order.
    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.root.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }
}
