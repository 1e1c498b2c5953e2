use std::{fs, path::Path, process::Command};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_donor-drp"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(k).unwrap().to_string())
        .collect()
}

#[test]
fn magic_finds_the_clock_drp() {
    let dir = tempfile::tempdir().unwrap();
    let roots = dir.path().join("roots.csv");
    let (code, out, err) = run(&[
        "magic",
        "--transition",
        "11,10",
        "--roots",
        roots.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("no OWP"), "{err}");
    assert!(out.starts_with("B0_T,phi,Pu_minus_Pd,rho\n"));
    let roots = fs::read_to_string(roots).unwrap();
    let lines: Vec<&str> = roots.lines().collect();
    assert_eq!(lines[0], "transition,kind,B_T,residual");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("11->10,DRP,"));
    let b: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((b - 0.2107).abs() < 1e-3, "{b}");
}

#[test]
fn labels_select_the_same_line() {
    let (code, _, err) = run(&["magic", "--transition", "-1+,-2-", "--grid", "200"]);
    assert_eq!(code, 0, "{err}");
    assert!(err.starts_with("14->7"), "{err}");
    assert!(err.contains("OWP at 0.0799"), "{err}");
}

#[test]
fn levels_table_shape() {
    let (code, out, _) = run(&["levels", "--B", "0:0.6:7"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 8);
    assert!(lines.iter().all(|l| l.split(',').count() == 21));
    assert!(!out.contains('\r'));
    assert_eq!(lines[1].split(',').next().unwrap(), "0.0000000000000000e0");
}

#[test]
fn transitions_table_counts() {
    let (_, out, _) = run(&["transitions", "--B", "0.1"]);
    assert_eq!(out.lines().count(), 1 + 36);
    let (_, all, _) = run(&["transitions", "--B", "0.1", "--include-dark"]);
    // Every |Δm| = 1 pair of Bi carries some S_x weight.
    assert_eq!(all, out);
    let classes = column(&out, "class");
    assert_eq!(classes.iter().filter(|c| *c == "allowed").count(), 10);
}

#[test]
fn echo_without_coupling_is_perfect() {
    let (code, out, err) = run(&[
        "echo",
        "--transition",
        "11,10",
        "--B",
        "0.15",
        "--J",
        "0",
        "--t",
        "0:1e-3:11",
    ]);
    assert_eq!(code, 0, "{err}");
    for f in column(&out, "fidelity") {
        let f: f64 = f.parse().unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }
}

#[test]
fn echo_at_the_drp_refocuses() {
    let (code, out, err) = run(&[
        "echo",
        "--transition",
        "11,10",
        "--B",
        "0.2107422",
        "--J",
        "1000",
        "--t",
        "0:10:5",
        "--dimensionless",
        "--axis",
        "x",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("Jt,"));
    for f in column(&out, "fidelity") {
        assert!(f.parse::<f64>().unwrap() > 0.999);
    }
}

#[test]
fn unknown_selector_exits_2_with_listing() {
    let (code, out, err) = run(&[
        "echo",
        "--transition",
        "3,9",
        "--B",
        "0.1",
        "--J",
        "1",
        "--t",
        "1",
    ]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("valid transitions at B0 = 0.1 T"), "{err}");
    assert!(err.contains("14,7  -1+,-2-  allowed"), "{err}");

    let (code, _, _) = run(&["magic", "--transition", "garbage"]);
    assert_eq!(code, 2);
}

#[test]
fn decay_requires_a_seed() {
    let (code, _, err) = run(&[
        "decay",
        "--transition",
        "14,7",
        "--B",
        "0.1",
        "--spacing",
        "150e-9",
        "--t",
        "0:1:3",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("--seed"), "{err}");
}

#[test]
fn decay_is_deterministic() {
    let args = [
        "decay",
        "--transition",
        "14,7",
        "--B",
        "0.1",
        "--spacing",
        "150e-9",
        "--radius",
        "3e-7",
        "--n",
        "20",
        "--seed",
        "42",
        "--t",
        "0:20:6",
        "--mode",
        "id_only",
    ];
    let (code, a, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    let (_, b, _) = run(&args);
    assert_eq!(a, b);
    assert_eq!(
        a.lines().next().unwrap(),
        "t_s,L_mean,L_stderr,n_realizations"
    );
    let first = column(&a, "L_mean")[0].parse::<f64>().unwrap();
    assert!((first - 1.0).abs() < 1e-12);
    let (_, c, _) = run(&[&args[..args.len() - 2], &["--mode", "full"]].concat());
    assert_ne!(a, c);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn config_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "transition = \"11,10\"\nB0_T = 0.15\nJ = 0\nt = \"0:1e-3:4\"\n",
    );
    let (code, out, err) = run(&["echo", "--config", &cfg]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 5);
    // A flag overrides the config value.
    let (code, out, _) = run(&["echo", "--config", &cfg, "--t", "0:1e-3:7"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 8);

    let bad = write(dir.path(), "bad.toml", "no_such_key = 1\n");
    let (code, _, _) = run(&["levels", "--config", &bad]);
    assert_eq!(code, 1);
}

#[test]
fn config_can_supply_a_species_and_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("levels.csv");
    let cfg = write(
        dir.path(),
        "p.toml",
        &format!(
            "B = \"0:0.1:3\"\noutput = \"{}\"\n[species]\nname = \"P\"\nI = \"1/2\"\nA_MHz = 117.53\ndelta = 6.156e-4\n",
            csv.display()
        ),
    );
    let (code, out, err) = run(&["levels", "--config", &cfg]);
    assert_eq!(code, 0, "{err}");
    assert!(out.is_empty());
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "B0_T,E_1_MHz,E_2_MHz,E_3_MHz,E_4_MHz"
    );
}

#[test]
fn usage_errors_exit_1() {
    let (code, _, _) = run(&["levels", "--B", "1:0:5"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 1);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("decay"));
}
