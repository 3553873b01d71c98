//! End-to-end runs of the `superdir` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use superdir::beamforming::ExcitationFile;
use superdir::coupling::CouplingFile;
use superdir::patterns::{isotropic_eep, ArrayGeometry, ElementPattern, SampledPattern};
use superdir::robust::SolutionFile;
use superdir::sensitivity::ReportFile;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn superdir(dir: &Path, args: &[&str]) -> Run {
    superdir_env(dir, args, "2")
}

fn superdir_env(dir: &Path, args: &[&str], threads: &str) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_superdir"))
        .args(args)
        .env("SUPERDIR_THREADS", threads)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Value after `key = ` in the command output.
fn printed(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("`{key}` missing in {out}"))
        .trim()
        .parse()
        .unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

const ISO4: [&str; 7] = [
    "--analytic",
    "isotropic",
    "--m",
    "4",
    "--spacing-wl",
    "0.15",
    "--endfire",
];

#[test]
fn bcf_matches_closed_form_at_half_wavelength() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "bcf",
        "--analytic",
        "isotropic",
        "--m",
        "2",
        "--spacing-wl",
        "0.5",
        "--endfire",
        "--route",
        "integrate",
        "--oracle",
        "sinc",
        "-o",
        "b.json",
    ];
    let r = superdir(dir.path(), &args);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("oracle sinc max abs diff"));
    let f = CouplingFile::read(dir.path().join("b.json")).unwrap();
    let b = f.b_matrix().unwrap();
    assert!((b - nalgebra::DMatrix::identity(2, 2)).iter().all(|z| z.norm() < 1e-10));
    assert_eq!(f.route, "integrate");
}

#[test]
fn network_routes_and_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let z_only = r#"{"m": 2, "z0": [[50,0],[50,0]], "z": [[[73,42],[20,-10]],[[20,-10],[73,42]]]}"#;
    std::fs::write(dir.path().join("z.json"), z_only).unwrap();
    let r = superdir(
        dir.path(),
        &["bcf", "--network", "z.json", "--route", "s", "-o", "b.json"],
    );
    assert_eq!(r.code, 2, "{}", r.stderr);
    let r = superdir(dir.path(), &["bcf", "--network", "z.json", "-o", "b.json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let f = CouplingFile::read(dir.path().join("b.json")).unwrap();
    assert_eq!(f.route, "z");
    assert!(f.v0.is_none());
    // No steering vector: solving from this file is a usage error.
    let r = superdir(
        dir.path(),
        &["solve", "--coupling", "b.json", "--method", "eepb", "-o", "a.json"],
    );
    assert_eq!(r.code, 2, "{}", r.stderr);

    let r = superdir(
        dir.path(),
        &[
            "bcf",
            "--analytic",
            "isotropic",
            "--m",
            "2",
            "--spacing-wl",
            "0.5",
            "--route",
            "z",
            "-o",
            "x.json",
        ],
    );
    assert_eq!(r.code, 2);

    std::fs::write(dir.path().join("bad.json"), "{\"m\": 2, \"z0\": [[50,0]] ").unwrap();
    let r = superdir(dir.path(), &["bcf", "--network", "bad.json", "-o", "b.json"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("bad.json"), "{}", r.stderr);
}

#[test]
fn touchstone_parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.s1p"), "# GHz S RI R 50\n1.0 0.1 0.0\n2.0 0.1 oops\n").unwrap();
    let r = superdir(
        dir.path(),
        &["bcf", "--touchstone", "a.s1p", "--freq", "1e9", "-o", "b.json"],
    );
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("a.s1p:3"), "{}", r.stderr);

    std::fs::write(
        dir.path().join("b.s2p"),
        "# MHz S MA R 50\n100 0.1 0 0.2 90 0.2 90 0.1 0\n",
    )
    .unwrap();
    let r = superdir(
        dir.path(),
        &["bcf", "--touchstone", "b.s2p", "--freq", "1e8", "-o", "b.json"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(CouplingFile::read(dir.path().join("b.json")).unwrap().route, "s");
}

#[test]
fn solve_methods_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let small = [
        "--analytic",
        "isotropic",
        "--m",
        "3",
        "--spacing-wl",
        "0.02",
        "--endfire",
    ];
    let mut args = vec!["solve", "--method", "eepb", "-o", "e.json"];
    args.extend(small);
    let r = superdir(dir.path(), &args);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(printed(&r.stdout, "D") >= 8.1);

    let mut args = vec!["solve", "--method", "ocrb", "--xi", "0.2", "-o", "o.json"];
    args.extend(ISO4);
    let r = superdir(dir.path(), &args);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("0.25"), "{}", r.stderr);

    let mut d = Vec::new();
    for method in ["mrt", "iep", "eepb"] {
        let mut args = vec!["solve", "--method", method, "-o", "x.json"];
        args.extend(ISO4);
        let r = superdir(dir.path(), &args);
        assert_eq!(r.code, 0, "{}", r.stderr);
        d.push(printed(&r.stdout, "D"));
    }
    assert!(d[2] >= d[0] && d[2] >= d[1] - 1e-9);

    let mut args = vec!["solve", "--method", "eepb", "--xi", "1", "-o", "x.json"];
    args.extend(ISO4);
    assert_eq!(superdir(dir.path(), &args).code, 2);
    let mut args = vec!["solve", "--method", "ocrb", "-o", "x.json"];
    args.extend(ISO4);
    assert_eq!(superdir(dir.path(), &args).code, 2);
    assert_eq!(
        superdir(dir.path(), &["solve", "--method", "eepb", "-o", "x.json"]).code,
        2
    );
}

#[test]
fn files_flow_between_commands_without_loss() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["bcf", "-o", "c.json"];
    args.extend(ISO4);
    assert_eq!(superdir(dir.path(), &args).code, 0);
    let c_path = dir.path().join("c.json");
    let before = std::fs::read(&c_path).unwrap();
    let f = CouplingFile::read(&c_path).unwrap();
    f.write(&c_path).unwrap();
    assert_eq!(std::fs::read(&c_path).unwrap(), before);

    let r = superdir(
        dir.path(),
        &["solve", "--coupling", "c.json", "--method", "eepb", "-o", "e.json"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let r = superdir(
        dir.path(),
        &[
            "solve",
            "--coupling",
            "c.json",
            "--method",
            "ocrb",
            "--xi",
            "1.5",
            "-o",
            "o.json",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!((printed(&r.stdout, "xi") - 1.5).abs() <= 1.5e-6);
    assert!(printed(&r.stdout, "residual") <= 1e-8);
    let sol = SolutionFile::read(dir.path().join("o.json")).unwrap();
    assert_eq!(sol.a.len(), 4);
    assert!(sol.p_roots.contains(&sol.p));

    let e = ExcitationFile::read(dir.path().join("e.json")).unwrap();
    let bytes = std::fs::read(dir.path().join("e.json")).unwrap();
    e.write(dir.path().join("e2.json")).unwrap();
    assert_eq!(std::fs::read(dir.path().join("e2.json")).unwrap(), bytes);

    // The OCRB solution file is accepted wherever an excitation is.
    let mc = |exc: &str, out: &str| {
        superdir(
            dir.path(),
            &[
                "montecarlo",
                "--excitation",
                exc,
                "--coupling",
                "c.json",
                "--sigma-amp",
                "0.05",
                "--sigma-phase-deg",
                "5",
                "--n",
                "500",
                "--seed",
                "3",
                "-o",
                out,
            ],
        )
    };
    assert_eq!(mc("e.json", "re.json").code, 0);
    assert_eq!(mc("o.json", "ro.json").code, 0);
    let he = ReportFile::read(dir.path().join("re.json")).unwrap().h;
    let ho = ReportFile::read(dir.path().join("ro.json")).unwrap().h;
    assert!(ho < he, "h(OCRB) = {ho}, h(EEPB) = {he}");
}

#[test]
fn montecarlo_is_deterministic_and_exact_without_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["bcf", "-o", "c.json"];
    args.extend(ISO4);
    assert_eq!(superdir(dir.path(), &args).code, 0);
    assert_eq!(
        superdir(
            dir.path(),
            &["solve", "--coupling", "c.json", "--method", "eepb", "-o", "e.json"]
        )
        .code,
        0
    );
    let run = |sa: &str, sp: &str, out: &str, threads: &str| {
        let args = [
            "montecarlo",
            "--excitation",
            "e.json",
            "--coupling",
            "c.json",
            "--sigma-amp",
            sa,
            "--sigma-phase-deg",
            sp,
            "--n",
            "3000",
            "--seed",
            "17",
            "--bins",
            "20",
            "--samples",
            "s.csv",
            "-o",
            out,
        ];
        let r = superdir_env(dir.path(), &args, threads);
        assert_eq!(r.code, 0, "{}", r.stderr);
        std::fs::read(dir.path().join(out)).unwrap()
    };
    run("0", "0", "zero.json", "1");
    let zero = ReportFile::read(dir.path().join("zero.json")).unwrap();
    assert_eq!(zero.h, 0.0);
    assert_eq!(zero.histogram.counts.len(), 20);
    let a = run("0.05", "5", "a.json", "1");
    let b = run("0.05", "5", "b.json", "8");
    assert_eq!(a, b);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("s.csv"))
            .unwrap()
            .lines()
            .count(),
        3000
    );

    let r = superdir(
        dir.path(),
        &[
            "montecarlo",
            "--excitation",
            "missing.json",
            "--coupling",
            "c.json",
            "--sigma-amp",
            "0.05",
            "--sigma-phase-deg",
            "5",
            "-o",
            "x.json",
        ],
    );
    assert_eq!(r.code, 3);
}

#[test]
fn spacing_sweep_orders_methods() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--analytic",
        "isotropic",
        "--m",
        "4",
        "--spacing-wl",
        "0.1",
        "--endfire",
        "--n-theta",
        "32",
        "--n-phi",
        "64",
        "--kind",
        "spacing",
        "--start",
        "0.10",
        "--stop",
        "0.50",
        "--step",
        "0.01",
        "--methods",
        "eepb,iep,mrt",
        "-o",
        "s.csv",
    ];
    let r = superdir(dir.path(), &args);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = csv_rows(&dir.path().join("s.csv"));
    assert_eq!(header, ["spacing_wl", "eepb", "iep", "mrt", "error"]);
    assert_eq!(rows.len(), 41);
    for row in &rows {
        assert!(row[4].is_empty(), "{row:?}");
        let d: Vec<f64> = row[1..4].iter().map(|x| x.parse().unwrap()).collect();
        assert!(d[0] >= d[1] - 1e-9 && d[0] >= d[2] - 1e-9, "{row:?}");
    }

    let mut bad = args.to_vec();
    bad[16] = "0.50";
    bad[18] = "0.10";
    assert_eq!(superdir(dir.path(), &bad).code, 2);
}

#[test]
fn xi_sweep_records_failures_and_rises() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["bcf", "-o", "c.json"];
    args.extend(ISO4);
    assert_eq!(superdir(dir.path(), &args).code, 0);
    let r = superdir(
        dir.path(),
        &[
            "sweep",
            "--coupling",
            "c.json",
            "--kind",
            "xi",
            "--start",
            "0.15",
            "--stop",
            "30",
            "--step",
            "0.5",
            "-o",
            "x.csv",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = csv_rows(&dir.path().join("x.csv"));
    assert_eq!(header, ["xi", "d", "p_re", "p_im", "residual", "error"]);
    assert!(!rows[0][5].is_empty() && rows[0][1].is_empty());
    let d: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(d.windows(2).all(|w| w[1] >= w[0] - 1e-9));
}

#[test]
fn pattern_outputs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("one.json"),
        r#"{"m": 2, "a": [[1,0],[0,0]], "method": "eepb", "directivity": 1.0}"#,
    )
    .unwrap();
    std::fs::write(
        dir.path().join("uni.json"),
        r#"{"m": 2, "a": [[1,0],[1,0]], "method": "mrt", "directivity": 1.0}"#,
    )
    .unwrap();
    let scen = [
        "--analytic",
        "isotropic",
        "--m",
        "2",
        "--spacing-wl",
        "0.5",
        "--endfire",
    ];

    let mut args = vec![
        "pattern",
        "--excitation",
        "one.json",
        "--step-deg",
        "15",
        "-o",
        "full.csv",
    ];
    args.extend(scen);
    let r = superdir(dir.path(), &args);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = csv_rows(&dir.path().join("full.csv"));
    assert_eq!(header, ["theta_deg", "phi_deg", "power_db"]);
    assert_eq!(rows.len(), 13 * 24);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap().abs() < 1e-9));
    assert!((printed(&r.stdout, "D") - 1.0).abs() < 1e-9);

    let mut args = vec![
        "pattern",
        "--excitation",
        "uni.json",
        "--cut",
        "planar",
        "--cut-n-phi",
        "360",
        "-o",
        "cut.csv",
    ];
    args.extend(scen);
    let r = superdir(dir.path(), &args);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = csv_rows(&dir.path().join("cut.csv"));
    assert_eq!(header, ["phi_deg", "power_db"]);
    let at = |phi: f64| -> f64 {
        rows.iter()
            .find(|r| (r[0].parse::<f64>().unwrap() - phi).abs() < 1e-9)
            .map(|r| r[1].parse().unwrap())
            .unwrap()
    };
    assert!(at(90.0) < -200.0 && at(270.0) < -200.0);
    assert!(at(0.0).abs() < 1e-9);

    // A single isotropic element read back from an EEP file.
    let g = ArrayGeometry::uniform_linear(1, 0.0, 1.0).unwrap();
    let thetas: Vec<f64> = (0..=36).map(|i| i as f64 * 5.0).collect();
    let phis: Vec<f64> = (0..72).map(|i| i as f64 * 5.0).collect();
    let iso: ElementPattern = isotropic_eep(&g, 0).unwrap();
    let eep: PathBuf = dir.path().join("eep.csv");
    SampledPattern::from_far_field(&iso, &thetas, &phis)
        .unwrap()
        .write_csv(&eep)
        .unwrap();
    std::fs::write(
        dir.path().join("single.json"),
        r#"{"m": 1, "a": [[1,0]], "method": "eepb", "directivity": 1.0}"#,
    )
    .unwrap();
    let r = superdir(
        dir.path(),
        &[
            "pattern",
            "--eep-files",
            "eep.csv",
            "--excitation",
            "single.json",
            "--cut",
            "planar",
            "-o",
            "p.csv",
        ],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!((printed(&r.stdout, "D_p") - 1.0).abs() < 1e-12);
}
