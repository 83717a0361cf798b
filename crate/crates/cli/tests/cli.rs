use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ddgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddgate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

const SPIN: [&str; 6] = [
    "--apar-khz",
    "30.6",
    "--aperp-khz",
    "25.7",
    "--larmor-khz",
    "314",
];

#[test]
fn resonance_table_has_one_row_per_order() {
    let mut args = vec!["resonance", "--protocol", "cpmg", "--kmax", "3"];
    args.extend(SPIN);
    let o = ddgate(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let t1: f64 = rows[0].split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((t1 - 3.35).abs() < 0.01, "{t1}");
}

#[test]
fn resonance_csv_and_second_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res.csv");
    let mut args = vec![
        "resonance",
        "--protocol",
        "udd4",
        "--set",
        "2",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend(SPIN);
    assert_eq!(ddgate(&args).status.code(), Some(0));
    assert_eq!(
        header(&out),
        "protocol,kind,k,t_analytic_us,phi_analytic_rad,t_refined_us,phi_refined_rad,dot_refined,weak_field"
    );
    let row = fs::read_to_string(&out)
        .unwrap()
        .lines()
        .nth(1)
        .unwrap()
        .to_string();
    assert!(row.starts_with("udd4,udd4-set2,1,"));
}

#[test]
fn usage_errors_exit_2() {
    let o = ddgate(&["resonance", "--apar-khz", "30.6", "--larmor-khz", "314"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--aperp-khz"));
    let mut args = vec!["resonance", "--protocol", "cpmg", "--set", "2"];
    args.extend(SPIN);
    assert_eq!(ddgate(&args).status.code(), Some(2));
    let o = ddgate(&[
        "filter",
        "--compare",
        "cpmg:9",
        "udd4:33",
        "--t-us",
        "90.2",
        "--wmax-khz",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        ddgate(&["sweep", "--protocol", "xy8"]).status.code(),
        Some(2)
    );
}

#[test]
fn help_exits_0() {
    for sub in [
        "resonance",
        "sweep",
        "selectivity",
        "synthesize",
        "filter",
        "chi",
        "robustness",
    ] {
        assert_eq!(ddgate(&[sub, "--help"]).status.code(), Some(0), "{sub}");
    }
}

#[test]
fn physics_errors_exit_3() {
    let o = ddgate(&[
        "resonance",
        "--apar-khz",
        "30.6",
        "--aperp-khz",
        "0",
        "--larmor-khz",
        "314",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("A_perp = 0"));
}

#[test]
fn io_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = ddgate(&[
        "selectivity",
        "--register",
        missing.to_str().unwrap(),
        "--entangle",
        "a",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "name,a,b\nx,1,2\n").unwrap();
    let o = ddgate(&[
        "selectivity",
        "--register",
        bad.to_str().unwrap(),
        "--n",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn selectivity_entangles_with_udd4() {
    let dir = tempfile::tempdir().unwrap();
    let reg = dir.path().join("spins.csv");
    fs::write(
        &reg,
        "label,apar_khz,aperp_khz\nspin1,15.3,12.9\nspin2,30.6,25.7\n",
    )
    .unwrap();
    let out = dir.path().join("curve.csv");
    let o = ddgate(&[
        "selectivity",
        "--register",
        reg.to_str().unwrap(),
        "--protocol",
        "udd4",
        "--k",
        "1",
        "--entangle",
        "spin2",
        "--points",
        "401",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("N = 33"));
    assert_eq!(header(&out), "t_us,px_joint,px_spin1,px_spin2");
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 402);
}

#[test]
fn synthesize_reports_gate() {
    let o = ddgate(&[
        "synthesize",
        "--target",
        "crx",
        "--angle-deg",
        "90",
        "--protocol",
        "hybrid",
        "--udd-order",
        "4",
        "--apar-khz",
        "170",
        "--aperp-khz",
        "70",
        "--larmor-khz",
        "2000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("n_cpmg=21\n"));
    assert!(text.contains("n_udd=2\n"));
    assert!(text.contains("protocol,t_us,n_cpmg,n_udd,total_time_us,fidelity\n"));
}

#[test]
fn synthesize_grid_matches_single_cells() {
    let o = ddgate(&[
        "synthesize",
        "--larmor-khz",
        "2000",
        "--grid-khz",
        "70:170:2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "apar_khz,aperp_khz,protocol,t_us,n_cpmg,n_udd,total_time_us,fidelity"
    );
    assert_eq!(lines.len(), 5);
    // row order: A∥ outer, A⊥ inner, so (170, 70) is the third cell
    let cell: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(&cell[4..6], ["21", "2"]);
    let single = ddgate(&[
        "synthesize",
        "--apar-khz",
        "170",
        "--aperp-khz",
        "70",
        "--larmor-khz",
        "2000",
    ]);
    assert!(stdout(&single).ends_with(&format!("{}\n", cell[2..].join(","))));

    let bad = ddgate(&["synthesize", "--larmor-khz", "2000", "--grid-khz", "70:170"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn filter_and_chi_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let o = ddgate(&[
        "filter",
        "--compare",
        "cpmg:9",
        "udd4:33",
        "--t-us",
        "90.2",
        "110.4",
        "--wmax-khz",
        "1000",
        "--points",
        "101",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        header(&out),
        "omega_over_2pi_khz,F_cpmg,F_udd,F_hybrid,F_fid,quotient"
    );
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 102);

    let spec = dir.path().join("s.csv");
    let mut body = String::from("omega_over_2pi_khz,s_value\n");
    for i in 0..=400 {
        body.push_str(&format!("{},{}\n", i as f64 * 2.5, 1.0e3));
    }
    fs::write(&spec, body).unwrap();
    let chi = dir.path().join("chi.csv");
    let o = ddgate(&[
        "chi",
        "--spectrum",
        spec.to_str().unwrap(),
        "--seq",
        "cpmg:4",
        "fid",
        "--t-us",
        "10",
        "20",
        "--out",
        chi.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&chi).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "sequence,t_us,chi,coherence,coarse_grid"
    );
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn robustness_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = ddgate(&[
        "robustness",
        "--apar-khz",
        "25",
        "--aperp-khz",
        "25",
        "--larmor-khz",
        "5000",
        "--points",
        "21",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(header(&out), "target,t_ref_us,fwhm_us,dt_us,dot");
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 43);

    let sw = dir.path().join("s.csv");
    let mut args = vec![
        "sweep",
        "--protocol",
        "udd3",
        "--t-min-us",
        "1",
        "--t-max-us",
        "8",
        "--points",
        "50",
    ];
    args.extend(SPIN);
    args.extend(["--out", sw.to_str().unwrap()]);
    assert_eq!(ddgate(&args).status.code(), Some(0));
    assert_eq!(header(&sw), "t_us,dot,phi_rad,n0x,n1x");
}

#[test]
fn identical_runs_are_byte_identical() {
    let mut args = vec![
        "sweep",
        "--protocol",
        "cpmg",
        "--t-min-us",
        "2",
        "--t-max-us",
        "12",
        "--points",
        "300",
    ];
    args.extend(SPIN);
    let a = ddgate(&args);
    let mut seq = args.clone();
    seq.push("--sequential");
    let b = ddgate(&seq);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}
