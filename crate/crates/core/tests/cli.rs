use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use qwlb::harness::main_with_args;

fn run(args: &[&str]) -> i32 {
    let mut v = vec!["qwlb"];
    v.extend_from_slice(args);
    main_with_args(v)
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn out_arg(dir: &Path) -> String {
    dir.display().to_string()
}

#[test]
fn run1d_outputs_are_stamped_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.toml");
    fs::write(
        &cfg,
        "[run]\nscheme = \"split\"\nsteps = 30\nstride = 10\n[lattice]\nn = 128\ndz = 0.5\n\
         [mass]\nkind = \"kink\"\nmy = 0.4\nwidth = 3.0\n[initial]\nsigma = 4.0\nk = 1.0\n",
    )
    .unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let c = cfg.display().to_string();
    assert_eq!(run(&["run1d", "-c", &c, "--out", &out_arg(&a)]), 0);
    assert_eq!(run(&["--threads", "1", "run1d", "-c", &c, "--out", &out_arg(&b)]), 0);
    let (fa, fb) = (read_dir(&a), read_dir(&b));
    assert_eq!(fa, fb);
    let names: Vec<&str> = fa.keys().map(String::as_str).collect();
    assert_eq!(
        names,
        [
            "density_000000.csv",
            "density_000010.csv",
            "density_000020.csv",
            "density_000030.csv",
            "final.ckpt",
            "metadata.toml",
            "series.csv"
        ]
    );
    for (name, bytes) in &fa {
        if name.ends_with(".csv") || name.ends_with(".toml") {
            let text = String::from_utf8(bytes.clone()).unwrap();
            assert!(text.starts_with("# qwlb "), "{name}");
            if name.ends_with(".csv") {
                assert!(text.contains("# config_sha256 = ") && text.contains("# seed = 0"), "{name}");
            }
        }
    }
    let series = String::from_utf8(fa["series.csv"].clone()).unwrap();
    let rows: Vec<&str> = series.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "step,norm,centroid");
    assert_eq!(rows.len(), 32);
    for r in &rows[1..] {
        let norm: f64 = r.split(',').nth(1).unwrap().parse().unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn run2d_is_byte_identical_serial_and_parallel() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |dir: &Path| {
        vec![
            "run2d".to_string(),
            "--set".into(),
            "grid.nz=80".into(),
            "--set".into(),
            "grid.ny=80".into(),
            "--set".into(),
            "packet2d.sigma=5".into(),
            "--set".into(),
            "packet2d.kz=0.3".into(),
            "--set".into(),
            "impurity.concentration=0.02".into(),
            "--set".into(),
            "impurity.v=1.5".into(),
            "--steps".into(),
            "12".into(),
            "--seed".into(),
            "9".into(),
            "--set".into(),
            "run.stride=6".into(),
            "--out".into(),
            out_arg(dir),
        ]
    };
    let dirs = ["t1", "t4", "again"].map(|d| tmp.path().join(d));
    let mut a1 = vec!["qwlb".to_string(), "--threads".into(), "1".into()];
    a1.extend(args(&dirs[0]));
    let mut a4 = vec!["qwlb".to_string(), "--threads".into(), "4".into()];
    a4.extend(args(&dirs[1]));
    let mut a = vec!["qwlb".to_string()];
    a.extend(args(&dirs[2]));
    assert_eq!(main_with_args(a1), 0);
    assert_eq!(main_with_args(a4), 0);
    assert_eq!(main_with_args(a), 0);
    let reference = read_dir(&dirs[0]);
    assert!(reference.contains_key("rho_000012.csv"));
    assert!(String::from_utf8_lossy(&reference["rho_000006.csv"]).contains("# seed = 9"));
    assert_eq!(reference, read_dir(&dirs[1]));
    assert_eq!(reference, read_dir(&dirs[2]));
}

#[test]
fn njl_run_and_checkpoint_inspection() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("njl");
    let code = run(&[
        "run2d",
        "--set",
        "grid.nz=32",
        "--set",
        "grid.ny=32",
        "--set",
        "packet2d.sigma=3",
        "--set",
        "packet2d.kz=0.4",
        "--set",
        "packet2d.ky=0.4",
        "--set",
        "njl.g=100",
        "--steps",
        "5",
        "--out",
        &out_arg(&out),
    ]);
    assert_eq!(code, 0);
    let mut text = Vec::new();
    qwlb::harness::inspect_checkpoint(&out.join("final.ckpt"), &mut text).unwrap();
    let text = String::from_utf8(text).unwrap();
    assert!(text.contains("shape = 2d, 32 x 32 sites"), "{text}");
    assert!(text.contains("step = 5"));
    let norm: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("norm = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn equilibrium_and_curved_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let eq = tmp.path().join("eq");
    assert_eq!(
        run(&[
            "run1d",
            "--set",
            "run.scheme=\"equilibrium\"",
            "--set",
            "lattice.n=32",
            "--set",
            "mass.m=0.2",
            "--steps",
            "4",
            "--out",
            &out_arg(&eq)
        ]),
        0
    );
    assert!(eq.join("equilibrium_diagnostics.csv").is_file());
    let cv = tmp.path().join("cv");
    assert_eq!(
        run(&[
            "curved",
            "--set",
            "lattice.n=64",
            "--set",
            "lattice.dt=0.5",
            "--set",
            "curved.a=\"bump\"",
            "--set",
            "curved.depth=0.3",
            "--set",
            "curved.width=4",
            "--steps",
            "8",
            "--out",
            &out_arg(&cv)
        ]),
        0
    );
    assert!(cv.join("final.ckpt").is_file());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[lattice]\nn = 64\ndzz = 1\n").unwrap();
    assert_eq!(run(&["run1d", "-c", &bad.display().to_string()]), 2);
    assert_eq!(run(&["run1d", "--set", "lattice.dt=0.5"]), 2);
    assert_eq!(run(&["run1d", "--set", "run.scheme=walk2d"]), 2);
    assert_eq!(run(&["no-such-command"]), 2);
    assert_eq!(run(&["run1d", "-c", &tmp.path().join("missing.toml").display().to_string()]), 4);
    assert_eq!(run(&["inspect-checkpoint", &tmp.path().join("x.ckpt").display().to_string()]), 4);
    let junk = tmp.path().join("junk.ckpt");
    fs::write(&junk, b"not a checkpoint").unwrap();
    assert_eq!(run(&["inspect-checkpoint", &junk.display().to_string()]), 4);
    // a naive run with a huge mass overflows to infinity
    let code = run(&[
        "run1d",
        "--set",
        "run.scheme=naive",
        "--set",
        "lattice.n=16",
        "--set",
        "mass.m=1e100",
        "--steps",
        "10",
        "--out",
        &out_arg(&tmp.path().join("nan")),
    ]);
    assert_eq!(code, 3);
}

#[test]
fn map_params_dispersion_and_convergence_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let masses = tmp.path().join("m.csv");
    fs::write(&masses, "j,m0,mx,my,mz\n0,0,0,0.5,0\n1,0.1,0.2,0.3,-0.1\n").unwrap();
    let params = tmp.path().join("p.csv");
    let m = masses.display().to_string();
    let p = params.display().to_string();
    assert_eq!(run(&["map-params", "--input", &m, "--dt", "0.2", "--output", &p]), 0);
    let text = fs::read_to_string(&params).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "j,xi,alpha,beta,theta");
    assert_eq!(rows.len(), 3);
    assert_eq!(run(&["map-params", "--input", &m, "--dt", "0.2", "--scheme", "naive"]), 2);

    let disp = tmp.path().join("d.csv");
    assert_eq!(
        run(&["dispersion", "--scheme", "qlb", "--m", "0.5", "--output", &disp.display().to_string()]),
        0
    );
    let text = fs::read_to_string(&disp).unwrap();
    let omegas: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('k'))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(omegas.len(), 65);
    assert!(omegas.windows(2).all(|w| w[1] > w[0]), "ω(k) not monotone");

    let conv = tmp.path().join("c.csv");
    assert_eq!(run(&["convergence", "--scheme", "split", "--output", &conv.display().to_string()]), 0);
    let text = fs::read_to_string(&conv).unwrap();
    assert!(text.contains("# symmetrized_order = "));
}
