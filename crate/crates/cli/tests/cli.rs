use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn spinres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinres")).args(args).output().expect("run spinres")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn run_ok(args: &[&str]) -> String {
    let o = spinres(args);
    assert!(o.status.success(), "spinres {args:?} failed: {}", stderr(&o));
    stdout(&o)
}

/// Full-precision observable recorded in an evolve sidecar.
fn sidecar_observable(path: &Path) -> f64 {
    let text = std::fs::read_to_string(path).unwrap();
    let line = text.lines().find(|l| l.starts_with("# observable = ")).expect("observable comment");
    line["# observable = ".len()..].parse().unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn no_drive_observable_is_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "model.rabi_mw_mhz = 0\nmodel.mod_rf_mhz = 0\nsim.t_total_us = 2\n");
    let out = run_ok(&["evolve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.trim(), "observable = 1.000000");
    assert_eq!(sidecar_observable(&dir.path().join("trajectory.cfg")), 1.0);
    let traj = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().next(), Some("t_us,p0,rx,ry,rz"));
}

#[test]
fn pi_pulse_empties_ms0() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "pi.cfg",
        "model.rabi_mw_mhz = 0.5\nmodel.mod_rf_mhz = 0\nsim.t_total_us = 1\nsim.observable = endpoint\n",
    );
    let out = run_ok(&["evolve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.trim(), "observable = 0.000000");
    assert!(sidecar_observable(&dir.path().join("trajectory.cfg")).abs() < 1e-6);
}

#[test]
fn missing_config_file_exits_2_naming_path() {
    let o = spinres(&["evolve", "--config", "/nonexistent/where.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/where.cfg"));
}

#[test]
fn config_errors_exit_2_with_line_number() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "# header\nsim.t_total_us = 1\nsim.t_totl_us = 2\n");
    let o = spinres(&["evolve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert!(stderr(&o).contains("sim.t_totl_us"));

    let cfg = write_config(dir.path(), "bad2.cfg", "sim.dt_us = fast\n");
    let o = spinres(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"));

    let o = spinres(&["evolve"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn one_cell_spectrum_matches_evolve() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    let text = "model.detuning_mhz = 5\nmodel.rf_freq_mhz = 5\nsim.t_total_us = 5\n\
                grid.rf_min_mhz = 5\ngrid.rf_max_mhz = 5\ngrid.rf_points = 1\n\
                grid.mw_min_mhz = 5\ngrid.mw_max_mhz = 5\ngrid.mw_points = 1\ngrid.phases = 1\n";
    for frame in ["rwa", "lab"] {
        let cfg = write_config(dir.path(), "one.cfg", &format!("model.frame = {frame}\n{text}"));
        run_ok(&["evolve", "--config", cfg.to_str().unwrap(), "--out", d]);
        run_ok(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", d]);
        let evolved = sidecar_observable(&dir.path().join("trajectory.cfg"));
        let rows = csv_rows(&std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap());
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0][0], "rf\\mw");
        let cell: f64 = rows[1][1].parse().unwrap();
        assert!((cell - evolved).abs() <= 1e-12, "{frame}: {cell} vs {evolved}");
    }
}

#[test]
fn normalize_rows_on_constant_grid() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    let cfg = write_config(
        dir.path(),
        "const.cfg",
        "model.rabi_mw_mhz = 0\nsim.t_total_us = 0.5\ngrid.rf_points = 3\ngrid.mw_points = 4\ngrid.phases = 2\n",
    );
    run_ok(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", d, "--normalize", "rows"]);
    let rows = csv_rows(&std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap());
    assert_eq!(rows.len(), 4);
    for row in &rows[1..] {
        assert_eq!(row.len(), 5);
        for v in &row[1..] {
            assert_eq!(v.parse::<f64>().unwrap(), 1.0);
        }
    }
    let side = std::fs::read_to_string(dir.path().join("spectrum.cfg")).unwrap();
    assert!(side.contains("output.normalize = rows"));
    assert!(side.contains("# normalization = row_mean"));
}

#[test]
fn sidecars_reproduce_outputs_bit_for_bit() {
    let first = TempDir::new().unwrap();
    let second = TempDir::new().unwrap();
    let cfg = write_config(
        first.path(),
        "in.cfg",
        "model.frame = lab\nmodel.rabi_mw_mhz = 0.43\nsim.t_total_us = 0.7\nsim.record_stride = 7\n\
         grid.rf_min_mhz = 2\ngrid.rf_max_mhz = 6.5\ngrid.rf_points = 4\n\
         grid.mw_min_mhz = -3.3\ngrid.mw_max_mhz = 3.3\ngrid.mw_points = 5\ngrid.phases = 3\n",
    );
    let (a, b) = (first.path().to_str().unwrap(), second.path().to_str().unwrap());
    run_ok(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", a, "--normalize", "rows"]);
    run_ok(&["evolve", "--config", cfg.to_str().unwrap(), "--out", a]);
    run_ok(&["spectrum", "--config", first.path().join("spectrum.cfg").to_str().unwrap(), "--out", b, "--threads", "1"]);
    run_ok(&["evolve", "--config", first.path().join("trajectory.cfg").to_str().unwrap(), "--out", b]);
    for f in ["spectrum.csv", "trajectory.csv"] {
        let x = std::fs::read(first.path().join(f)).unwrap();
        let y = std::fs::read(second.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs after sidecar round trip");
    }
}

#[test]
fn analyze_cdt_first_frequency() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "cdt.cfg", "analyze.order = 0\nmodel.mod_rf_mhz = 15.4\nanalyze.zeros = 3\n");
    let rows = csv_rows(&run_ok(&["analyze", "cdt", "--config", cfg.to_str().unwrap()]));
    assert_eq!(rows[0], ["m", "rf_freq_mhz"]);
    assert_eq!(rows.len(), 4);
    let first: f64 = rows[1][1].parse().unwrap();
    assert!((first - 12.807).abs() < 1e-3, "{first}");
}

#[test]
fn analyze_lineshape_without_modulation_is_lorentzian() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "ls.cfg", "model.mod_rf_mhz = 0\nanalyze.hwhm_mhz = 0.5\n");
    let rows = csv_rows(&run_ok(&["analyze", "lineshape", "--config", cfg.to_str().unwrap()]));
    assert_eq!(rows[0], ["delta_mhz", "density"]);
    // The profile has unit area on the default ±12 MHz window.
    let pi = std::f64::consts::PI;
    let window_mass = 2.0 / pi * (12.0f64 / 0.5).atan();
    let mut peak: f64 = 0.0;
    for r in &rows[1..] {
        let (x, p): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        let lorentz = 0.5 / (pi * (x * x + 0.25)) / window_mass;
        assert!((p - lorentz).abs() < 1e-3 * lorentz.max(1e-3), "{x}: {p} vs {lorentz}");
        peak = peak.max(p);
    }
    assert!((peak * 0.5 * pi * window_mass - 1.0).abs() < 1e-3);
}

#[test]
fn analyze_lines_five_sidebands() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "lines.cfg", "model.rf_freq_mhz = 5\nanalyze.delta_min_mhz = -12\nanalyze.delta_max_mhz = 12\n");
    let rows = csv_rows(&run_ok(&["analyze", "lines", "--config", cfg.to_str().unwrap()]));
    assert_eq!(rows[0], ["n", "delta_mhz", "effective_rabi_mhz"]);
    let orders: Vec<i32> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(orders, vec![-2, -1, 0, 1, 2]);
}

#[test]
fn analyze_sidebands_and_floquet() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "sb.cfg", "model.detuning_mhz = 5\n");
    let rows = csv_rows(&run_ok(&["analyze", "sidebands", "--config", cfg.to_str().unwrap()]));
    let a0: f64 = rows.iter().find(|r| r[0] == "0").unwrap()[1].parse().unwrap();
    assert!((a0 - 0.25 * 0.671133).abs() < 1e-6);

    let rows = csv_rows(&run_ok(&["analyze", "floquet", "--config", cfg.to_str().unwrap()]));
    assert_eq!(rows[0], ["quasienergy_a_mhz", "quasienergy_b_mhz", "gap_mhz"]);
    let gap: f64 = rows[1][2].parse().unwrap();
    assert!((gap / (0.5 * 0.498289) - 1.0).abs() < 0.02, "{gap}");
}

#[test]
fn analytic_domain_errors_exit_4() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "z.cfg", "analyze.zeros = 5000\n");
    let o = spinres(&["analyze", "cdt", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    let cfg = write_config(dir.path(), "narrow.cfg", "model.mod_rf_mhz = 6\nanalyze.delta_min_mhz = -5\nanalyze.delta_max_mhz = 5\n");
    let o = spinres(&["analyze", "lineshape", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    let cfg = write_config(dir.path(), "static.cfg", "model.rf_freq_mhz = 0\n");
    let o = spinres(&["analyze", "sidebands", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            // `lines` needs only the model section; it fails fast on a bad key.
            let o = spinres(&["analyze", "lines", "--config", path.to_str().unwrap()]);
            assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
            n += 1;
        }
    }
    assert!(n >= 5);
}
