use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fri_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fri-lab")).args(args).output().expect("spawn fri-lab")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const SMALL: &str = r#"
seed = 11

[graph]
family = "regular_tree"
degree = 3

[grid]
u = [0.2]
T = [3.0]

[budgets]
replicas = 20
mc_samples = 200
radius = 4
vertex_budget = 200
depth_limit = 4
"#;

#[test]
fn sample_run_writes_artifacts_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = fri_lab(&["sample", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["kind"], "sample");
    assert_eq!(manifest["master_seed"], 11);
    assert_eq!(manifest["config"]["budgets"]["replicas"], 20);
    for rec in manifest["outputs"].as_array().unwrap() {
        let bytes = std::fs::read(out.join(rec["file"].as_str().unwrap())).unwrap();
        assert_eq!(rec["sha256"].as_str().unwrap(), fri_lab::output::sha256_hex(&bytes));
    }
    let csv = std::fs::read_to_string(out.join("sample.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn seed_flag_overrides_and_reruns_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let read = |name: &str, seed: &str| {
        let out = tmp.path().join(name);
        let o =
            fri_lab(&["growth", "--config", &config, "--seed", seed, "--out", out.to_str().unwrap(), "--workers", "2"]);
        assert!(o.status.success());
        std::fs::read(out.join("growth.csv")).unwrap()
    };
    assert_eq!(read("a", "5"), read("b", "5"));
    assert_ne!(read("c", "5"), read("d", "6"));
}

#[test]
fn refuses_non_empty_output_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    std::fs::create_dir(&out).unwrap();
    std::fs::write(out.join("stale.txt"), "x").unwrap();
    let o = fri_lab(&["entropy", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = fri_lab(&["entropy", "--config", &config, "--out", out.to_str().unwrap(), "--force"]);
    assert!(o.status.success());
}

#[test]
fn bad_config_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let config =
        write_config(tmp.path(), "seed = 1\n[graph]\nfamily = \"regular_tree\"\ndegree = 3\n[budgets]\nreplicas = 0\n");
    let o = fri_lab(&["sample", "--config", &config, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let config =
        write_config(tmp.path(), "seed = 1\n[graph]\nfamily = \"regular_tree\"\ndegree = 3\n[budgets]\nreplicaz = 3\n");
    let o = fri_lab(&["sample", "--config", &config, "--out", tmp.path().join("p").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("replicaz"));
}

#[test]
fn strict_flags_truncated_runs() {
    let tmp = tempfile::tempdir().unwrap();
    // supercritical enough that a tiny vertex budget stops most clusters
    let body = SMALL.replace("u = [0.2]", "u = [1.0]").replace("vertex_budget = 200", "vertex_budget = 3");
    let config = write_config(tmp.path(), &body);
    let out = tmp.path().join("s");
    let o = fri_lab(&["growth", "--config", &config, "--out", out.to_str().unwrap(), "--strict"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stdout));
    let manifest: Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["truncated_runs"].as_u64().unwrap() > 0);
}

#[test]
fn verify_subset_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "seed = 3\n[graph]\nfamily = \"regular_tree\"\ndegree = 3\n[verify]\ncriteria = [1, 10]\n",
    );
    let out = tmp.path().join("v");
    let o = fri_lab(&["verify", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS criterion  1") && stdout.contains("PASS criterion 10"));
    let table = std::fs::read_to_string(out.join("verify.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let config = fri_lab::config::ExperimentConfig::load(&path).unwrap();
        config.validate().unwrap();
        n += 1;
    }
    assert!(n >= 2);
}

#[test]
fn growth_grid_has_one_block_per_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SMALL.replace("u = [0.2]", "u = [0.1, 0.2]").replace("T = [3.0]", "T = [2.0, 8.0]");
    let config = write_config(tmp.path(), &body);
    let out = tmp.path().join("g");
    let o = fri_lab(&["growth", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.join("growth.csv")).unwrap();
    let mut cells: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    cells.dedup();
    assert_eq!(cells, ["0", "1", "2", "3"]);
    let manifest: Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let streams = manifest["streams"].as_array().unwrap();
    let cell_streams: Vec<_> = streams.iter().filter(|s| !s["cell"].is_null()).collect();
    assert_eq!(cell_streams.len(), 4);
    assert_eq!(cell_streams[3]["u"], 0.2);
    assert_eq!(cell_streams[3]["T"], 8.0);
}

#[test]
fn finite_graph_from_edge_file() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("cycle.txt"), "0 1\n1 2\n2 3\n3 0\n").unwrap();
    let body =
        SMALL.replace("family = \"regular_tree\"\ndegree = 3", "family = \"finite\"\nedges_path = \"cycle.txt\"");
    let config = write_config(tmp.path(), &body);
    let o = fri_lab(&["sample", "--config", &config, "--out", tmp.path().join("f").to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
