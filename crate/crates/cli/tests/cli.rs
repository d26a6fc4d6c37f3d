use std::path::Path;
use std::process::{Command, Output};

fn streamnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streamnet")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = "topology = 4-clique\ntxn_count = 300\nbundle_size = 1\nseed = 4\n";

#[test]
fn run_prints_a_report_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.cfg", SMALL);
    let out = streamnet(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout(&out);
    for key in ["config_hash=", "tps=", "converged=true", "pairs_one_winner=150", "msgs_block="] {
        assert!(report.contains(key), "{key} missing from\n{report}");
    }
    assert_eq!(stdout(&streamnet(&["run", &cfg])), report);
}

#[test]
fn run_writes_artifacts_named_by_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.cfg", &format!("{SMALL}trace = true\n"));
    let out_dir = dir.path().join("out");
    let out = streamnet(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout(&out);
    let hash = report.lines().next().unwrap().strip_prefix("config_hash=").unwrap();
    for ext in ["order", "utxo", "trace"] {
        assert!(out_dir.join(format!("{hash}.{ext}")).is_file(), "{ext}");
    }
    let order = std::fs::read_to_string(out_dir.join(format!("{hash}.order"))).unwrap();
    assert_eq!(stdout(&streamnet(&["dump-order", &cfg])), order);
    let utxo = std::fs::read_to_string(out_dir.join(format!("{hash}.utxo"))).unwrap();
    assert_eq!(stdout(&streamnet(&["dump-utxo", &cfg])), utxo);
}

#[test]
fn config_errors_exit_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "seed = 1\n\nspeed = 9\n");
    let out = streamnet(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(streamnet(&["run", "/nonexistent/x.cfg"]).status.code(), Some(2));
    let missing_topo = write(dir.path(), "topo.cfg", "topology_file = nowhere.txt\n");
    assert_eq!(streamnet(&["dump-order", &missing_topo]).status.code(), Some(2));
}

#[test]
fn topology_file_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "line.txt", "nodes=3\n0\t1\n1\t2\n");
    let cfg = write(dir.path(), "c.cfg", "topology = line\ntopology_file = line.txt\ntxn_count = 60\n");
    let out = streamnet(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("topology=line\nnodes=3\nlinks=2\n"));
}

#[test]
fn prdrop_values_and_errors() {
    let v = |args: &[&str]| -> f64 { stdout(&streamnet(args)).trim().parse().unwrap() };
    assert_eq!(v(&["prdrop", "--n", "20", "--m", "10", "--q", "0", "--lambda-h", "1", "--t", "30"]), 0.0);
    let q = v(&["prdrop", "--n", "5", "--m", "5", "--q", "0.3", "--lambda-h", "1", "--t", "0"]);
    assert!((q - 0.3).abs() < 1e-12);
    let bad = streamnet(&["prdrop", "--n", "1", "--m", "2", "--q", "0.3", "--lambda-h", "1", "--t", "1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn topo_list_and_show() {
    let list = stdout(&streamnet(&["topo", "list"]));
    assert_eq!(list.lines().count(), 8);
    assert!(list.contains("7-bridge\t7\t8\t4\ttrue"));
    assert!(list.contains("7-star\t7\t6\t2\tfalse"));
    assert_eq!(stdout(&streamnet(&["topo", "show", "3-clique"])), "nodes=3\n0\t1\n0\t2\n1\t2\n");
    assert_eq!(streamnet(&["topo", "show", "9-cube"]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_catches_tie_mutation() {
    let ok = streamnet(&["verify", "--seeds", "2", "--dags", "10"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).lines().all(|l| l.contains("\tPASS\t")));
    let mutated = streamnet(&["verify", "--tie-break", "larger", "--seeds", "2", "--dags", "10"]);
    assert_eq!(mutated.status.code(), Some(1));
    assert!(stdout(&mutated).contains("pivot-ties\tFAIL"));
}

#[test]
fn sample_configs_parse_and_small_ones_run() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("cfg") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(streamnet::experiment::ExperimentConfig::parse(&text).is_ok(), "{}", path.display());
    }
    for name in ["ring-file.cfg", "7-bridge-lossy.cfg"] {
        let out = streamnet(&["run", dir.join(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("converged=true"));
    }
}
