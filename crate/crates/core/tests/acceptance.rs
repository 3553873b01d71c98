//! Acceptance suite: ten criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines
//! when everything passes.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use superdir::beamforming::{directivity_quotient, eepb_solve, Excitation, ExcitationFile};
use superdir::coupling::{
    bcf_from_generalized_s, bcf_from_s, bcf_from_z, bcf_integrate, generalized_s, sinc_bcf, steering_at, CouplingFile,
    CouplingMatrix, NetworkData,
};
use superdir::patterns::FarField;
use superdir::patterns::{
    hertzian_dipole_eep, isotropic_eep, make_sphere_grid, ArrayGeometry, Direction, ElementPattern, DEFAULT_N_PHI,
    DEFAULT_N_THETA,
};
use superdir::robust::{build_w, det_w_polynomial, ocrb_solve, orthogonal_complement, tradeoff_sweep};
use superdir::sensitivity::{
    exact_expected_power_pattern, expected_power_pattern, min_variance_excitation, monte_carlo, normalized_variance,
    sample_fields, ErrorModel, EvalMode,
};

type C = Complex64;
type M = DMatrix<C>;
type V = DVector<C>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn isotropic_patterns(m: usize, d: f64) -> (ArrayGeometry, Vec<ElementPattern>) {
    let g = ArrayGeometry::uniform_linear(m, d, 1.0).unwrap();
    let p = (0..m).map(|i| isotropic_eep(&g, i).unwrap()).collect();
    (g, p)
}

/// Isotropic endfire array with the closed-form coupling matrix.
fn isotropic(m: usize, d: f64) -> CouplingMatrix {
    let (g, p) = isotropic_patterns(m, d);
    CouplingMatrix::from_steering(sinc_bcf(&g), &steering_at(&p, &Direction::endfire()).unwrap()).unwrap()
}

/// `|aᵀv|² / (aᵀ B a*)`, written out longhand.
fn rayleigh(a: &[C], b: &M, v: &V) -> f64 {
    let m = a.len();
    let mut num = c(0.0, 0.0);
    let mut den = 0.0;
    for i in 0..m {
        num += a[i] * v[i];
        for j in 0..m {
            den += (a[i] * b[(i, j)] * a[j].conj()).re;
        }
    }
    num.norm_sqr() / den
}

fn xi_of(a: &[C], d: &[f64], v: &V) -> f64 {
    let num: f64 = a.iter().zip(d).map(|(x, d)| x.norm_sqr() * d).sum();
    let main: C = a.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
    num / main.norm_sqr()
}

fn random_c(rng: &mut ChaCha8Rng) -> C {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn criterion_1() -> Outcome {
    let mut worst = (f64::INFINITY, 0, 0.0);
    let mut pass = true;
    for (d, frac) in [(0.02, 0.90), (0.002, 0.98)] {
        for m in 2..=4 {
            let r = eepb_solve(&isotropic(m, d)).unwrap();
            let ratio = r.directivity / (m * m) as f64;
            pass &= ratio >= frac;
            if ratio - frac < worst.0 {
                worst = (ratio - frac, m, d);
            }
        }
    }
    outcome(
        pass,
        format!(
            "smallest margin D/M² − bound = {:.4} at M={}, d={}λ",
            worst.0, worst.1, worst.2
        ),
    )
}

fn criterion_2() -> Outcome {
    let grid = make_sphere_grid(DEFAULT_N_THETA, DEFAULT_N_PHI).unwrap();
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let d = 0.05 + (2.0 - 0.05) * k as f64 / 49.0;
        let (_, p) = isotropic_patterns(2, d);
        let b = bcf_integrate(&p, &grid).unwrap();
        let x = 2.0 * PI * d;
        let s = x.sin() / x;
        let want = M::from_row_slice(2, 2, &[c(1.0, 0.0), c(s, 0.0), c(s, 0.0), c(1.0, 0.0)]);
        worst = worst.max((b - want).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    outcome(worst <= 1e-6, format!("max abs error {worst:.3e} (tol 1e-6)"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = 4;
    let z0 = 50.0;
    let (mut worst_zs, mut worst_gs) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let a = DMatrix::<f64>::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
        let r = &a * a.transpose() + DMatrix::<f64>::identity(m, m) * 0.1;
        let x = DMatrix::<f64>::from_fn(m, m, |_, _| rng.random_range(-50.0..50.0));
        let x = &x + x.transpose();
        let z = M::from_fn(m, m, |i, j| c(30.0 * r[(i, j)], x[(i, j)]));
        let id = M::identity(m, m);
        let zi = (&z + &id * c(z0, 0.0)).try_inverse().unwrap();
        let s = (&z - &id * c(z0, 0.0)) * zi;
        let net_z = NetworkData::from_z(z, vec![c(z0, 0.0); m]).unwrap();
        let net_s = NetworkData::from_s(s.clone(), z0).unwrap();
        let bz = bcf_from_z(&net_z).unwrap();
        let bs = bcf_from_s(&net_s).unwrap();
        for (p, q) in bz.iter().zip(bs.iter()) {
            worst_zs = worst_zs.max((p - q).norm() / q.norm());
        }
        let sg = generalized_s(&net_s, z0).unwrap();
        let bg = bcf_from_generalized_s(&sg, &net_s).unwrap();
        for (p, q) in bg.iter().zip(bs.iter()) {
            worst_gs = worst_gs.max((p - q).norm() / q.norm());
        }
    }
    outcome(
        worst_zs <= 1e-10 && worst_gs <= 1e-12,
        format!("Z vs S max elementwise rel {worst_zs:.3e} (tol 1e-10); generalized vs S {worst_gs:.3e} (tol 1e-12)"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_rel, mut worst_excess, mut worst_grid) = (0.0_f64, f64::NEG_INFINITY, 0.0_f64);
    for inst in 0..100 {
        let m = 2 + inst % 7;
        let a = M::from_fn(m, m, |_, _| random_c(&mut rng));
        let b = &a * a.adjoint() + M::identity(m, m) * c(0.05, 0.0);
        let v = V::from_fn(m, |_, _| random_c(&mut rng));
        let d: Vec<f64> = v.iter().map(|x| x.norm_sqr()).collect();
        let k = CouplingMatrix::new(b.clone(), v.clone(), d).unwrap();
        let d0 = (v.adjoint() * b.clone().try_inverse().unwrap() * &v)[(0, 0)].re;
        let r = eepb_solve(&k).unwrap();
        let q = directivity_quotient(&r.excitation, &k).unwrap();
        worst_rel = worst_rel.max((q - d0).abs() / d0).max((r.directivity - d0).abs() / d0);
        let a0 = r.excitation.as_slice().to_vec();
        let scale = a0.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for t in 0..10 {
            let eps = 10f64.powf(-(t as f64) / 2.0) * scale;
            let trial: Vec<C> = a0.iter().map(|x| x + random_c(&mut rng) * eps).collect();
            worst_excess = worst_excess.max(rayleigh(&trial, &b, &v) - d0);
        }
        if m == 2 {
            let mut best = 0.0_f64;
            for i in 0..=400 {
                let amp = 10f64.powf(-3.0 + 6.0 * i as f64 / 400.0);
                for j in 0..720 {
                    let ph = 2.0 * PI * j as f64 / 720.0;
                    best = best.max(rayleigh(&[c(1.0, 0.0), C::from_polar(amp, ph)], &b, &v));
                }
            }
            worst_grid = worst_grid.max((d0 - best).abs() / d0);
        }
    }
    // 100 instances × 10 perturbation sizes = 1e3 perturbations.
    outcome(
        worst_rel <= 1e-10 && worst_excess <= 1e-9 && worst_grid <= 0.005,
        format!(
            "D0 rel err {worst_rel:.2e} (tol 1e-10); max perturbed D − D0 {worst_excess:.2e} (tol 1e-9); M=2 grid gap {:.3}% (tol 0.5%)",
            100.0 * worst_grid
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dipoles = {
        let g = ArrayGeometry::uniform_linear(5, 0.2, 1.0).unwrap();
        let p: Vec<_> = (0..5)
            .map(|i| hertzian_dipole_eep(&g, i, nalgebra::Vector3::z()).unwrap())
            .collect();
        CouplingMatrix::from_steering(sinc_bcf(&g), &steering_at(&p, &Direction::endfire()).unwrap()).unwrap()
    };
    let uneven = {
        let v = V::from_fn(6, |_, _| random_c(&mut rng));
        let d = v.iter().map(|x| x.norm_sqr()).collect();
        CouplingMatrix::new(M::identity(6, 6), v, d).unwrap()
    };
    let configs = [
        isotropic(2, 0.1),
        isotropic(4, 0.15),
        isotropic(8, 0.3),
        dipoles,
        uneven,
    ];
    let (mut worst_bound, mut worst_min) = (f64::INFINITY, 0.0_f64);
    for k in &configs {
        let m = k.m() as f64;
        for _ in 0..10_000 {
            let a: Vec<C> = (0..k.m()).map(|_| random_c(&mut rng)).collect();
            worst_bound = worst_bound.min(xi_of(&a, k.d_f0(), k.v0()) - 1.0 / m);
        }
        let mv = min_variance_excitation(k).unwrap();
        worst_min = worst_min.max((xi_of(mv.as_slice(), k.d_f0(), k.v0()) - 1.0 / m).abs());
    }
    outcome(
        worst_bound >= -1e-12 && worst_min <= 1e-12,
        format!("min Ξ − 1/M over 5e4 draws {worst_bound:.3e}; minimizer |Ξ − 1/M| {worst_min:.2e} (tol 1e-12)"),
    )
}

fn criterion_6() -> Outcome {
    let (_, patterns) = isotropic_patterns(4, 0.15);
    let k = isotropic(4, 0.15);
    let a = eepb_solve(&k).unwrap().excitation;
    let xi = normalized_variance(&a, &k).unwrap();
    let em = ErrorModel::from_degrees(0.05, 5.0).unwrap();
    let u0 = Direction::endfire();
    let fields: Vec<_> = patterns.iter().map(|p| p.field(&u0).unwrap()).collect();
    let f0: C = a.as_slice().iter().zip(k.v0().iter()).map(|(x, v)| x * v).sum();
    let expected_field = f0 * em.field_attenuation();
    let expected_power = expected_power_pattern(&a, &patterns, &em, &u0).unwrap();
    let expected_nv = em.variance_scale() * xi;
    let exact_power = exact_expected_power_pattern(&a, &patterns, &em, &u0).unwrap();
    let n = 100_000;
    let mut lines = Vec::new();
    let mut pass = true;
    for seed in [11, 22, 33] {
        let samples = sample_fields(&a, &fields, &em, n, seed, 4).unwrap();
        // Co-polar scalar field; the array is θ-polarized at u0.
        let f: Vec<C> = samples.iter().map(|s| s.e_theta).collect();
        let nf = n as f64;
        let mean: C = f.iter().sum::<C>() / nf;
        let var_f = f.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / (nf - 1.0);
        let se_field = (var_f / nf).sqrt();
        let p: Vec<f64> = f.iter().map(|x| x.norm_sqr()).collect();
        let mean_p = p.iter().sum::<f64>() / nf;
        let se_power = (p.iter().map(|x| (x - mean_p).powi(2)).sum::<f64>() / (nf - 1.0) / nf).sqrt();
        let nv = (mean_p - mean.norm_sqr()) / mean.norm_sqr();
        let field_z = (mean - expected_field).norm() / se_field;
        let power_z = (mean_p - expected_power).abs() / se_power;
        let nv_rel = (nv - expected_nv).abs() / expected_nv;
        let ok = field_z <= 3.0 && power_z <= 3.0 && nv_rel <= 0.05;
        pass &= ok;
        let exact_z = (mean_p - exact_power).abs() / se_power;
        lines.push(format!(
            "seed {seed}: E{{F}} {field_z:.2} SE, E{{|F|²}} {power_z:.1} SE (exact moment {exact_z:.2} SE), Ξ-scale rel {:.1}%",
            100.0 * nv_rel
        ));
    }
    outcome(pass, lines.join("; "))
}

/// Brute-force constrained search for M = 3: `a = (1, r2 e^{jφ2}, r3 e^{jφ3})`
/// with `r3` solved from the constraint quadratic.
fn brute_force_three(k: &CouplingMatrix, xi: f64) -> f64 {
    let (v, d, b) = (k.v0(), k.d_f0(), k.b());
    let eval = |r2: f64, p2: f64, p3: f64| -> f64 {
        let a2 = C::from_polar(r2, p2);
        let cc = v[0] + a2 * v[1];
        let w = C::from_polar(1.0, p3) * v[2];
        let qa = xi * w.norm_sqr() - d[2];
        let qb = 2.0 * xi * (cc * w.conj()).re;
        let qc = xi * cc.norm_sqr() - d[0] - d[1] * r2 * r2;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return 0.0;
        }
        let mut best = 0.0_f64;
        for r3 in [(-qb + disc.sqrt()) / (2.0 * qa), (-qb - disc.sqrt()) / (2.0 * qa)] {
            if r3 >= 0.0 && r3.is_finite() {
                best = best.max(rayleigh(&[c(1.0, 0.0), a2, C::from_polar(r3, p3)], b, v));
            }
        }
        best
    };
    let n = 40;
    let (mut best, mut arg) = (0.0, (0.0, 0.0, 0.0));
    for i in 0..=n {
        for j in 0..n {
            for l in 0..n {
                let x = (
                    6.0 * i as f64 / n as f64,
                    2.0 * PI * j as f64 / n as f64,
                    2.0 * PI * l as f64 / n as f64,
                );
                let dv = eval(x.0, x.1, x.2);
                if dv > best {
                    best = dv;
                    arg = x;
                }
            }
        }
    }
    let mut step = (6.0 / n as f64, 2.0 * PI / n as f64);
    for _ in 0..30 {
        let centre = arg;
        for i in -3..=3 {
            for j in -3..=3 {
                for l in -3..=3 {
                    let x = (
                        (centre.0 + step.0 * i as f64 / 3.0).max(0.0),
                        centre.1 + step.1 * j as f64 / 3.0,
                        centre.2 + step.1 * l as f64 / 3.0,
                    );
                    let dv = eval(x.0, x.1, x.2);
                    if dv > best {
                        best = dv;
                        arg = x;
                    }
                }
            }
        }
        step = (step.0 * 0.6, step.1 * 0.6);
    }
    best
}

fn criterion_7() -> Outcome {
    let k = isotropic(3, 0.1);
    let r0 = eepb_solve(&k).unwrap();
    let d0 = r0.directivity;
    let xi0 = xi_of(r0.excitation.as_slice(), k.d_f0(), k.v0());
    let b = k.b().clone();
    let v = k.v0().clone();
    let dmat = M::from_diagonal(&V::from_iterator(3, k.d_f0().iter().map(|x| c(*x, 0.0))));
    let mut pass = true;
    let mut notes = Vec::new();
    let (mut worst_xi, mut worst_res, mut worst_bf) = (0.0_f64, 0.0_f64, 0.0_f64);
    for t in [0.01, 0.1, 0.3, 0.6, 0.9] {
        let xi = 1.0 / 3.0 + t * (xi0 - 1.0 / 3.0);
        let s = match ocrb_solve(&k, xi) {
            Ok(s) => s,
            Err(e) => {
                pass = false;
                notes.push(format!("ξ={xi:.4}: {e}"));
                continue;
            }
        };
        let a = s.excitation.as_slice();
        worst_xi = worst_xi.max((xi_of(a, k.d_f0(), &v) - xi).abs() / xi);
        // Residual of the stationarity constraint with K = B + p Mξ.
        let mx = (&v * v.adjoint()) * c(xi, 0.0) - &dmat;
        let kp = &b + &mx * c(s.chosen_p.re, 0.0);
        let kinv = kp.clone().try_inverse().unwrap();
        let x = &kinv * &v;
        let num = (x.adjoint() * &mx * &x)[(0, 0)].norm();
        let kinv_norm = kinv.singular_values().max();
        let den = v.norm_squared() * kinv_norm * kinv_norm * k.d_f0().iter().cloned().fold(0.0, f64::max);
        worst_res = worst_res.max(num / den);
        let d = rayleigh(a, &b, &v);
        pass &= d <= d0 + 1e-9;
        let bf = brute_force_three(&k, xi);
        worst_bf = worst_bf.max((bf - d).abs() / d);
    }
    pass &= worst_xi <= 1e-6 && worst_res <= 1e-8 && worst_bf <= 0.01;
    let at_opt = ocrb_solve(&k, xi0).map(|s| (s.directivity - d0).abs() / d0);
    let opt_rel = at_opt.as_ref().copied().unwrap_or(f64::INFINITY);
    pass &= opt_rel <= 1e-6;

    // Degree: fit one degree higher from direct determinant evaluations and
    // check the extra coefficient vanishes; then check a held-out point.
    let xi = 0.5 * (1.0 / 3.0 + xi0);
    let basis = orthogonal_complement(&v).unwrap();
    let poly = det_w_polynomial(&k, xi, &basis).unwrap();
    let n = 2 * (3 - 1);
    let det = |p: f64| build_w(c(p, 0.0), &k, xi, &basis).unwrap().determinant();
    let rho = poly.rho;
    let pts: Vec<f64> = (0..n + 2)
        .map(|i| (PI * (i as f64 + 0.5) / (n as f64 + 2.0)).cos())
        .collect();
    let vand = M::from_fn(n + 2, n + 2, |i, j| c(pts[i].powi(j as i32), 0.0));
    let vals = V::from_iterator(n + 2, pts.iter().map(|t| det(rho * t)));
    let over = vand.lu().solve(&vals).unwrap();
    let top = over.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let extra = over[n + 1].norm() / top;
    let lead = over[n].norm() / top;
    let p_held = 0.377 * rho;
    let held = (poly.eval(c(p_held, 0.0)) - det(p_held)).norm() / det(p_held).norm();
    let degree_ok = poly.coeffs.len() == n + 1 && extra <= 1e-8 && lead >= 1e-6 && held <= 1e-8;
    pass &= degree_ok;
    notes.push(format!(
        "Ξ rel {worst_xi:.1e}, residual {worst_res:.1e}, brute-force gap {:.3}%, D(Ξ0) rel {opt_rel:.1e}, degree {} (extra coef {extra:.1e}, lead {lead:.1e}, held-out {held:.1e})",
        100.0 * worst_bf,
        poly.degree()
    ));
    outcome(pass, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let k = isotropic(4, 0.15);
    let r0 = eepb_solve(&k).unwrap();
    let xi0 = xi_of(r0.excitation.as_slice(), k.d_f0(), k.v0());
    let mut xis: Vec<f64> = (0..=60).map(|i| 0.25 + (2.0 * xi0 - 0.25) * i as f64 / 60.0).collect();
    xis.push(xi0);
    xis.sort_by(f64::total_cmp);
    let points = tradeoff_sweep(&k, &xis);
    let mut curve = Vec::new();
    for p in &points {
        match &p.outcome {
            Ok(s) => curve.push((p.xi, s.directivity)),
            Err(e) => return outcome(false, format!("ξ={:.4} failed: {e}", p.xi)),
        }
    }
    let d_peak = curve.iter().find(|(x, _)| *x == xi0).unwrap().1;
    let mut pass = true;
    let mut worst_drop = 0.0_f64;
    for w in curve.windows(2) {
        if w[1].0 <= xi0 {
            worst_drop = worst_drop.max(w[0].1 - w[1].1);
        }
    }
    pass &= worst_drop <= 1e-9;
    let beyond: Vec<_> = curve.iter().filter(|(x, _)| *x > xi0).collect();
    let beyond_ok = beyond.iter().all(|(_, d)| *d < d_peak);
    pass &= beyond_ok && !beyond.is_empty();
    outcome(
        pass,
        format!(
            "{} points; max decrease below Ξ0 {worst_drop:.1e} (slack 1e-9); all {} points beyond Ξ0 below D(Ξ0)={d_peak:.4}: {beyond_ok}",
            curve.len(),
            beyond.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let k = isotropic(5, 0.3);
    let eepb = eepb_solve(&k).unwrap();
    let xi_e = normalized_variance(&eepb.excitation, &k).unwrap();
    let xi = (0.1 * xi_e).max(1.0 / 5.0);
    let ocrb = ocrb_solve(&k, xi).unwrap();
    let em = ErrorModel::from_degrees(0.05, 5.0).unwrap();
    let run = |a: &Excitation| monte_carlo(a, &k, EvalMode::Quotient, &em, 10_000, 2024, 4).unwrap();
    let re = run(&eepb.excitation);
    let ro = run(&ocrb.excitation);
    let h_ok = ro.h < re.h;
    let mean_ok = ro.mean_d > re.mean_d;
    outcome(
        h_ok && mean_ok,
        format!(
            "ξ={xi:.4}: H(OCRB)={:.3} < H(EEPB)={:.3}: {h_ok}; mean D(OCRB)={:.3} > mean D(EEPB)={:.3}: {mean_ok}",
            ro.h, re.h, ro.mean_d, re.mean_d
        ),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let k = isotropic(4, 0.15);
    let coupling = dir.path().join("coupling.json");
    CouplingFile::from_coupling("integrate", &k).write(&coupling).unwrap();
    let excitation = dir.path().join("a.json");
    ExcitationFile::from_result(&eepb_solve(&k).unwrap())
        .write(&excitation)
        .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        for rep in 0..2 {
            let out = dir.path().join(format!("report-{threads}-{rep}.json"));
            let samples = dir.path().join(format!("samples-{threads}-{rep}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_superdir"))
                .env("SUPERDIR_THREADS", threads)
                .args([
                    "montecarlo",
                    "--sigma-amp",
                    "0.05",
                    "--sigma-phase-deg",
                    "5",
                    "--n",
                    "20000",
                    "--seed",
                    "99",
                ])
                .arg("--excitation")
                .arg(&excitation)
                .arg("--coupling")
                .arg(&coupling)
                .arg("--samples")
                .arg("samples.csv")
                .arg("--out")
                .arg(&out)
                .current_dir(dir.path())
                .output()
                .unwrap();
            if !status.status.success() {
                return outcome(false, format!("montecarlo exited with {}", status.status));
            }
            std::fs::rename(dir.path().join("samples.csv"), &samples).unwrap();
            outputs.push((std::fs::read(&out).unwrap(), std::fs::read(&samples).unwrap()));
        }
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!("4 runs (threads 1, 1, 8, 8): reports and samples byte-identical: {same}"),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("Uzkov limit", criterion_1, 1),
        ("BCF quadrature vs sinc", criterion_2, 10),
        ("cross-route coupling identity", criterion_3, 5),
        ("maximum-directivity optimality", criterion_4, 30),
        ("normalized-variance bound and minimizer", criterion_5, 5),
        ("excitation-error statistics", criterion_6, 60),
        ("constrained optimum", criterion_7, 60),
        ("trade-off curve shape", criterion_8, 60),
        ("robustness ordering", criterion_9, 120),
        ("determinism across worker counts", criterion_10, 60),
    ];
    let mut failed = Vec::new();
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let pass = o.pass && in_time;
        println!(
            "criterion {:>2} {:<40} {} ({:.2}s / {}s) {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit,
            o.detail
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
