//! Independent reference computations checked against the library.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cantori::model::{build_pulse_train, fourier_coefficient, PulseTrain, Segment};
use cantori::quantum::{build_floquet, build_hamiltonians, evolve_density, floquet_modes, CMatrix, DensityMatrix};
use cantori::wigner::toroidal_wigner;

/// Composite Simpson rule over `[a, b]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `∫₀¹ f(τ) cos(2πm(τ − ½)) dτ` with `f` read off the pulse schedule; the
/// cycle midpoint lies halfway between the two pulses.
fn fourier_by_quadrature(pulses: &PulseTrain, m: i64) -> f64 {
    let mut t = 0.0;
    let mut total = 0.0;
    for seg in &pulses.segments {
        if seg.driven {
            total += simpson(|tau| (2.0 * PI * m as f64 * (tau - 0.5)).cos(), t, t + seg.duration, 4000);
        }
        t += seg.duration;
    }
    total
}

#[test]
fn fourier_coefficients_match_quadrature() {
    let pulses = build_pulse_train(0.05, 0.1).unwrap();
    for m in -100..=100 {
        let lib = fourier_coefficient(m, 0.05, 0.1);
        let oracle = fourier_by_quadrature(&pulses, m);
        assert!((lib - oracle).abs() < 1e-9, "m={m}: {lib} vs {oracle}");
    }
    for &(w, s) in &[(0.03, 0.2), (0.1, 0.1), (0.07, 0.31)] {
        let pulses = build_pulse_train(w, s).unwrap();
        for m in -40..=40 {
            assert!((fourier_coefficient(m, w, s) - fourier_by_quadrature(&pulses, m)).abs() < 1e-9);
        }
    }
}

/// Cyclic Jacobi eigenvalue iteration for a real symmetric matrix.
fn jacobi_eigen(mut a: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

fn light_matrix_by_hand(n: usize, k: f64, hb: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        let m = i as f64 - (n / 2) as f64;
        let d = (i as i64 - j as i64).rem_euclid(n as i64);
        if i == j {
            0.5 * m * m * hb * hb
        } else if d == 1 || d == n as i64 - 1 {
            -0.5 * k
        } else {
            0.0
        }
    })
}

#[test]
fn light_hamiltonian_spectrum_matches_jacobi() {
    let h = build_hamiltonians(8, 1.0, 1.0, 0.0).unwrap();
    let by_hand = light_matrix_by_hand(8, 1.0, 1.0);
    assert_eq!(h.light, by_hand);

    let (mut oracle, _) = jacobi_eigen(by_hand.clone());
    oracle.sort_by(f64::total_cmp);
    let mut lib: Vec<f64> = h.light.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
    lib.sort_by(f64::total_cmp);
    for (a, b) in lib.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    // A single driven segment spanning the whole cycle is exp(−iH_light/ℏ̄k).
    let hb = 1.0;
    let train = PulseTrain { segments: vec![Segment { duration: 1.0, driven: true }] };
    let u = build_floquet(8, 1.0, hb, &train, 0.0).unwrap();
    let (vals, vecs) = jacobi_eigen(by_hand);
    let want = CMatrix::from_fn(8, 8, |i, j| {
        (0..8).map(|l| Complex64::from_polar(vecs[(i, l)] * vecs[(j, l)], -vals[l] / hb)).sum()
    });
    assert!((u.matrix - want).iter().all(|z| z.norm() < 1e-12));
}

/// Forward DFT between momentum amplitudes (ladder order) and the angle
/// grid `φ_j = 2πj/N`: `ψ(φ_j) = Σ_n c_n e^{inφ_j}`.
fn to_angle(c: &[Complex64], n: usize) -> Vec<Complex64> {
    let half = (n / 2) as f64;
    (0..n)
        .map(|j| {
            let phi = 2.0 * PI * j as f64 / n as f64;
            c.iter().enumerate().map(|(i, &a)| a * Complex64::from_polar(1.0, (i as f64 - half) * phi)).sum()
        })
        .collect()
}

fn to_momentum(psi: &[Complex64], n: usize) -> Vec<Complex64> {
    let half = (n / 2) as f64;
    (0..n)
        .map(|i| {
            let s: Complex64 = psi
                .iter()
                .enumerate()
                .map(|(j, &a)| a * Complex64::from_polar(1.0, -(i as f64 - half) * 2.0 * PI * j as f64 / n as f64))
                .sum();
            s / n as f64
        })
        .collect()
}

/// Fourth-order (triple-jump) composition of Strang steps
/// `T(dt/2) V(dt) T(dt/2)` for `H = ρ²/2 − k cos φ` on the periodic ladder.
fn split_light(mut c: Vec<Complex64>, n: usize, k: f64, hb: f64, time: f64, steps: usize) -> Vec<Complex64> {
    let w1 = 1.0 / (2.0 - 2f64.powf(1.0 / 3.0));
    let w0 = 1.0 - 2.0 * w1;
    let dt = time / steps as f64;
    let kinetic = |c: &mut Vec<Complex64>, tau: f64| {
        for (i, a) in c.iter_mut().enumerate() {
            let p = (i as f64 - (n / 2) as f64) * hb;
            *a *= Complex64::from_polar(1.0, -0.5 * p * p * tau / hb);
        }
    };
    let potential = |c: &mut Vec<Complex64>, tau: f64| {
        let mut psi = to_angle(c, n);
        for (j, a) in psi.iter_mut().enumerate() {
            let phi = 2.0 * PI * j as f64 / n as f64;
            *a *= Complex64::from_polar(1.0, k * phi.cos() * tau / hb);
        }
        *c = to_momentum(&psi, n);
    };
    for _ in 0..steps {
        for w in [w1, w0, w1] {
            kinetic(&mut c, 0.5 * w * dt);
            potential(&mut c, w * dt);
            kinetic(&mut c, 0.5 * w * dt);
        }
    }
    c
}

#[test]
fn floquet_matches_split_operator_integration() {
    let (n, k, hb) = (8usize, 1.0, 2.6);
    let pulses = build_pulse_train(0.05, 0.1).unwrap();
    let u = build_floquet(n, k, hb, &pulses, 0.0).unwrap();
    let driven_steps = 100_000 / pulses.segments.iter().filter(|s| s.driven).count();
    for col in 0..n {
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        c[col] = Complex64::new(1.0, 0.0);
        for seg in &pulses.segments {
            if seg.driven {
                c = split_light(c, n, k, hb, seg.duration, driven_steps);
            } else {
                for (i, a) in c.iter_mut().enumerate() {
                    let p = (i as f64 - (n / 2) as f64) * hb;
                    *a *= Complex64::from_polar(1.0, -0.5 * p * p * seg.duration / hb);
                }
            }
        }
        for row in 0..n {
            let d = (u.matrix[(row, col)] - c[row]).norm();
            assert!(d < 1e-6, "U[{row},{col}] differs by {d:e}");
        }
    }
}

/// Wigner grid by summing over matrix elements: `⟨a|ρ̂|b⟩` feeds row
/// `a + b` with phase `exp(iπ(a − b)k/N)`.
fn wigner_by_elements(rho: &DensityMatrix) -> DMatrix<f64> {
    let n = rho.basis_size();
    let e = rho.elements();
    let mut w = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            let row = a + b;
            let d = a as f64 - b as f64;
            for k in 0..2 * n {
                w[(row, k)] += e[(a, b)] * Complex64::from_polar(1.0, PI * d * k as f64 / n as f64);
            }
        }
    }
    assert!(w.iter().all(|z| z.im.abs() < 1e-10));
    w.map(|z| z.re)
}

fn random_density(n: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::from_matrix(m / tr, 1e-12).unwrap()
}

#[test]
fn wigner_matches_element_sum() {
    for (n, seed) in [(4, 1), (8, 2), (16, 3), (32, 4)] {
        let rho = random_density(n, seed);
        let g = toroidal_wigner(&rho, 2.6);
        let oracle = wigner_by_elements(&rho);
        let diff = (&g.values - &oracle).amax();
        assert!(diff < 1e-10, "N={n}: {diff:e}");
        assert!(g.max_imaginary < 1e-10);
    }
}

#[test]
fn wigner_momentum_marginal() {
    let n = 16;
    let rho = random_density(n, 7);
    let g = toroidal_wigner(&rho, 1.0);
    let pops = rho.populations();
    for lp in 0..2 * n {
        let sum: f64 = g.values.row(lp).iter().sum();
        // Row lp = l + N carries momentum l/2, i.e. ladder index lp/2.
        let want = if lp % 2 == 0 { 2.0 * n as f64 * pops[lp / 2] } else { 0.0 };
        assert!((sum - want).abs() < 1e-10, "row {lp}: {sum} vs {want}");
    }
}

#[test]
fn floquet_power_matches_repeated_multiplication() {
    let pulses = build_pulse_train(0.05, 0.1).unwrap();
    let u = build_floquet(128, 270.0, 2.5988, &pulses, 0.0).unwrap();
    let modes = floquet_modes(&u).unwrap();
    let mut psi = DVector::<Complex64>::zeros(128);
    psi[64] = Complex64::new(1.0, 0.0);
    psi[70] = Complex64::new(0.0, 1.0);
    psi /= Complex64::new(2f64.sqrt(), 0.0);
    let mut direct = psi.clone();
    for _ in 0..70 {
        direct = &u.matrix * direct;
    }
    let via_modes = modes.evolve_state(&psi, 70);
    let worst = direct.iter().zip(via_modes.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst:e}");
    assert!(modes.eigenvalues.iter().all(|z| (z.norm() - 1.0).abs() < 1e-8));
}

#[test]
fn populations_stay_parity_symmetric() {
    let pulses = build_pulse_train(0.05, 0.1).unwrap();
    let u = build_floquet(128, 270.0, 2.5988, &pulses, 0.0).unwrap();
    let rho0 = DensityMatrix::thermal(128, 2.5988, 9.22).unwrap();
    let run = evolve_density(&rho0, &u, 0.05, 70, &[]).unwrap();
    for p in &run.populations {
        for n in 1..64 {
            assert!((p[64 + n] - p[64 - n]).abs() < 1e-8);
        }
    }
}
