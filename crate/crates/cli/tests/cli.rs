use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rrslrp"))
}

fn instance(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../instances")
        .join(name)
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rrslrp-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn validate_accepts_shipped_instances() {
    for name in [
        "small.rrs",
        "sensitivity.rrs",
        "sensitivity_fast.rrs",
        "sensitivity_order_up_to.rrs",
        "sioux_falls.rrs",
    ] {
        let out = run(&["validate", "--instance", instance(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", text(&out.stderr));
        assert!(text(&out.stdout).starts_with("ok:"));
    }
}

#[test]
fn malformed_file_reports_its_line() {
    let dir = scratch("malformed");
    let path = dir.join("bad.rrs");
    let good = std::fs::read_to_string(instance("sensitivity.rrs")).unwrap();
    let bad = good.replace("b,f,1,1,-2", "b,f,one,1,-2");
    let line = bad.lines().position(|l| l.starts_with("b,f,one")).unwrap() + 1;
    std::fs::write(&path, bad).unwrap();
    let out = run(&["validate", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        text(&out.stderr).contains(&format!("line {line}")),
        "{}",
        text(&out.stderr)
    );
}

#[test]
fn semantic_violations_are_listed() {
    let dir = scratch("semantic");
    let path = dir.join("bad.rrs");
    let good = std::fs::read_to_string(instance("sensitivity.rrs")).unwrap();
    let bad = good
        .replace("1,b,b,1,2,16,20,16,6", "1,b,b,1,2,16,20,16,30")
        .replace("e,g,8,9", "e,g,9,8");
    std::fs::write(&path, bad).unwrap();
    let out = run(&["validate", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("initial_resource_out_of_range"), "{err}");
    assert!(err.contains("demand_time_order"), "{err}");
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&["solve"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(
        run(&["validate", "--instance", "/nonexistent/instance.rrs"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(
        run(&[
            "solve",
            "--instance",
            instance("sensitivity.rrs").to_str().unwrap(),
            "--penalty",
            "-3"
        ])
        .status
        .code(),
        Some(64)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn solve_closes_the_gap_on_the_sensitivity_network() {
    let dir = scratch("solve");
    let out = run(&[
        "solve",
        "--instance",
        instance("sensitivity.rrs").to_str().unwrap(),
        "--step",
        "ratio",
        "--max-iters",
        "30",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(
        stdout.contains("best_ub=18") && stdout.contains("gap=0"),
        "{stdout}"
    );
    let bounds = std::fs::read_to_string(dir.join("bounds.csv")).unwrap();
    assert!(bounds.starts_with(
        "iteration,step_size,lb,ub,best_lb,best_ub,gap,stations,unserved,iter_wall_ms\n"
    ));
    assert!(bounds.lines().last().unwrap().contains(",c;h,"));
    let selection = std::fs::read_to_string(dir.join("selection.csv")).unwrap();
    assert!(selection.contains("c,11,2,1,"));
    assert!(selection.contains("h,14,2,1,"));
    let routes = std::fs::read_to_string(dir.join("routes.csv")).unwrap();
    assert!(routes.starts_with("vehicle,node,time,resource,arc_kind,arc_cost\n"));
    assert!(routes.contains("recharge"));
    let meta = std::fs::read_to_string(dir.join("metadata.txt")).unwrap();
    assert!(meta.contains("step=ratio"));
}

#[test]
fn oracle_agrees_with_solver() {
    let path = instance("small.rrs");
    let out = run(&["oracle", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("objective=17\n"), "{stdout}");
    assert!(stdout.contains("stations=A\n"), "{stdout}");
    let dir = scratch("oracle");
    let solved = run(&[
        "solve",
        "--instance",
        path.to_str().unwrap(),
        "--step",
        "ratio",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(text(&solved.stdout).contains("best_ub=17 "));
}

#[test]
fn reruns_write_identical_bounds() {
    let path = instance("sensitivity_fast.rrs");
    let mut files = Vec::new();
    for tag in ["first", "second"] {
        let dir = scratch(tag);
        let out = run(&[
            "solve",
            "--instance",
            path.to_str().unwrap(),
            "--seed",
            "3",
            "--no-wall-clock",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        files.push(std::fs::read(dir.join("bounds.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn no_feasible_routing_exits_2() {
    let dir = scratch("infeasible");
    let path = dir.join("stuck.rrs");
    let good = std::fs::read_to_string(instance("sensitivity.rrs")).unwrap();
    // vehicle 1 cannot reach anything and must be back by time 3
    let stuck = good.replace("1,b,b,1,2,16,20,16,6", "1,b,e,1,2,3,3,16,6");
    std::fs::write(&path, stuck).unwrap();
    let out = run(&[
        "solve",
        "--instance",
        path.to_str().unwrap(),
        "--max-iters",
        "3",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
    let oracle = run(&["oracle", "--instance", path.to_str().unwrap()]);
    assert_eq!(oracle.status.code(), Some(2));
}

#[test]
fn export_lp_writes_a_model() {
    let dir = scratch("lp");
    let out = run(&[
        "export-lp",
        "--instance",
        instance("sensitivity.rrs").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let lp = std::fs::read_to_string(dir.join("model.lp")).unwrap();
    assert!(lp.starts_with("Minimize\n"));
    assert!(lp.contains("\nSubject To\n") && lp.contains("\nBinary\n"));
    assert!(lp.contains(" budget:"));
    assert!(lp.trim_end().ends_with("End"));
    let capped = run(&[
        "export-lp",
        "--instance",
        instance("sensitivity.rrs").to_str().unwrap(),
        "--max-columns",
        "10",
    ]);
    assert_eq!(capped.status.code(), Some(1));
}
