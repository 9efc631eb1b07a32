use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtriple")).args(args).arg("--out").arg(dir).output().unwrap()
}

fn config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

#[test]
fn shipped_configs_pass() {
    for name in ["dual.toml", "triple.toml", "triple2.toml"] {
        let dir = tempfile::tempdir().unwrap();
        let out = bin(&["--config", configs().join(name).to_str().unwrap()], dir.path());
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let psi = std::fs::read_to_string(dir.path().join("psi.csv")).unwrap();
        assert!(psi.starts_with("k,u,psi\n"));
        assert!(psi.lines().count() > 20);
        let res = std::fs::read_to_string(dir.path().join("residual.csv")).unwrap();
        assert!(res.starts_with("band,point,residual\n"));
        for line in res.lines().skip(1) {
            let r: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!(r <= 1e-6, "{name}: {line}");
        }
        assert!(dir.path().join("summary.txt").exists());
    }
}

#[test]
fn summary_names_variant_window_and_condition() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["--config", configs().join("triple.toml").to_str().unwrap(), "--window", "30,30"], dir.path());
    assert!(out.status.success());
    let s = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(s.contains("F1 variant Derived"), "{s}");
    assert!(s.contains("M=30 N=30"), "{s}");
    assert!(s.contains("condition estimate"), "{s}");
}

#[test]
fn builtin_commands_run_without_config() {
    for cmd in ["example1", "example2"] {
        let dir = tempfile::tempdir().unwrap();
        let out = bin(&[cmd], dir.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["example2", "--seed-check"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("selected Derived: ok"));
}

#[test]
fn malformed_alpha_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "command = \"solve-triple\"\n[triple]\nm_a = 3\nm_b = 0\nalpha = 1.5\nnu = 0.5\n");
    let out = bin(&["--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[triple]") && err.contains("0 < alpha < 1"), "{err}");
    assert!(!dir.path().join("psi.csv").exists());
}

#[test]
fn unknown_keys_and_families_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for text in [
        "command = \"verify\"\nbogus = 1\n",
        "command = \"solve-dual\"\n[dual]\nalpha = 0.25\nbeta = 1.0\nmu = 0.5\nnu = 0.5\nf = { family = \"spline\" }\n",
        "command = \"solve-dual\"\n",
    ] {
        let out = bin(&["--config", &config(dir.path(), text)], dir.path());
        assert_eq!(out.status.code(), Some(2), "{text}");
    }
    let out = bin(&["example1", "--q", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_threshold_gives_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "command = \"example2\"\n[tolerances]\nacceptance = 1e-30\n");
    let out = bin(&["--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("residual.csv").exists());
}

#[test]
fn user_split_and_table_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        r#"
command = "solve-triple"
[triple]
m_a = 2
m_b = 0
alpha = 0.5
nu = 0.0
split = "user"
f1 = { family = "indicator", lo = 0.0, hi = 1.0 }
f2 = { family = "constant", value = 1.0 }
g1 = { family = "constant", value = 1.0 }
g2 = { family = "constant", value = 0.0 }
f3 = { family = "table", k_min = -3, values = [0.0, 0.0, 0.0] }
"#,
    );
    // the table does not reach the truncated grid
    let out = bin(&["--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("window error"));
    let text = std::fs::read_to_string(&cfg).unwrap().replace("k_min = -3, values = [0.0, 0.0, 0.0]", &format!("k_min = -80, values = [{}]", vec!["0.0"; 80].join(", ")));
    let out = bin(&["--config", &config(dir.path(), &text)], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
