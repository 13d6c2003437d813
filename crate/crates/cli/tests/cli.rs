use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cogrelay"))
}

#[test]
fn presets_lists_all_bundled_scenarios() {
    let out = bin().arg("presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}

#[test]
fn solve_prints_solution_record() {
    let out = bin()
        .args(["solve", "fig3", "--scheme", "ct"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("pu_target     3.803227"));
    assert!(text.contains("su_rate"));
    assert!(text.contains("coex_slack"));
}

#[test]
fn sweep_runs_spec_file_into_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("tiny.sweep");
    let csv_path = dir.path().join("out.csv");
    std::fs::write(
        &spec_path,
        "scenario = fig3\nvariable = su_snr_db\nstart = 10\nstop = 20\nsteps = 3\nschemes = ct\ngrid_points = 9\n",
    )
    .unwrap();
    let out = bin()
        .args([
            "sweep",
            spec_path.to_str().unwrap(),
            "--out",
            csv_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("sweep_value,ct_rate"));
}

#[test]
fn bad_inputs_exit_nonzero() {
    let out = bin().args(["solve", "nonexistent"]).output().unwrap();
    assert!(!out.status.success());
    let out = bin()
        .args(["solve", "fig3", "--scheme", "xyz"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = bin()
        .args(["sweep", "/no/such/file.sweep"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
