//! Configuration, result files and the command-line surface.

use std::path::Path;
use std::process::Command;

use mitbench::benchmark::run_volumetric;
use mitbench::config::{BenchmarkConfig, Method};
use mitbench::report::{results_csv, write_results, Format, ReportSpec, ResultsDocument};
use proptest::prelude::*;
use sha2::{Digest, Sha256};

const SMALL: &str = r#"
seed = 11
grid = [[2, 2], [3, 1]]
circuits_per_cell = 3

[class]
kind = "random_su4"

[noise]
mode = "local"
p1 = 0.001
p2 = 0.01

[budgets]
scale = 0.02
"#;

fn small() -> BenchmarkConfig {
    BenchmarkConfig::from_toml(SMALL).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mitbench"))
}

fn sha256_hex(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn resolved_config_round_trips(
        seed in 0u64..=i64::MAX as u64,
        cells in proptest::collection::vec((2usize..=7, 1usize..=8), 1..5),
        count in 1usize..20,
        lo in 0.0..0.5f64,
        scale in 0.01..4.0f64,
        gadget in any::<bool>(),
        n_training in 2usize..40,
    ) {
        let grid: Vec<String> = cells.iter().map(|(n, d)| format!("[{n}, {d}]")).collect();
        let text = format!(
            "seed = {seed}\ngrid = [{}]\ncircuits_per_cell = {count}\nfilter_range = [{lo}, 0.9]\n\
             [class]\nkind = \"{}\"\n[noise]\nmode = \"global_depolarising\"\np1 = 0.001\np2 = 0.01\n\
             [budgets]\nscale = {scale}\n[cdr]\nn_training = {n_training}\n",
            grid.join(", "),
            if gadget { "pauli_gadget" } else { "random_su4" },
        );
        let cfg = BenchmarkConfig::from_toml(&text).unwrap();
        let again = BenchmarkConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(cfg, again);
    }
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            mitbench::config::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 1);
}

#[test]
fn csv_has_one_row_per_circuit_and_method() {
    let cfg = small();
    let grids = run_volumetric(&cfg).unwrap();
    let csv = results_csv(&grids).unwrap();
    let rows = csv.lines().count() - 1;
    assert_eq!(rows, cfg.grid.len() * cfg.circuits_per_cell * cfg.methods.len());
}

#[test]
fn methods_see_the_same_circuits() {
    let grids = run_volumetric(&small()).unwrap();
    let hashes = |m: Method| -> Vec<Vec<String>> {
        let g = grids.iter().find(|g| g.method == m).unwrap();
        g.cells
            .iter()
            .map(|c| c.per_circuit.iter().map(|r| r.circuit_hash.clone()).collect())
            .collect()
    };
    assert_eq!(hashes(Method::None), hashes(Method::Zne));
    assert_eq!(hashes(Method::None), hashes(Method::Cdr));
}

#[test]
fn output_is_byte_stable_and_manifested() {
    let doc = ResultsDocument::new(small(), run_volumetric(&small()).unwrap());
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let written = write_results(&doc, &ReportSpec::all(a.path())).unwrap();
    write_results(&doc, &ReportSpec::all(b.path())).unwrap();
    let manifest = std::fs::read_to_string(a.path().join("manifest.txt")).unwrap();
    for path in &written {
        let name = path.file_name().unwrap().to_str().unwrap();
        assert_eq!(std::fs::read(path).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
        if name != "manifest.txt" {
            assert!(manifest.contains(&format!("{}  {name}", sha256_hex(path))), "{name} missing from manifest");
        }
    }
    let reloaded = ResultsDocument::load(a.path().join("results.json")).unwrap();
    assert_eq!(reloaded.to_json().unwrap(), doc.to_json().unwrap());
}

#[test]
fn json_only_writes_one_data_file() {
    let doc = ResultsDocument::new(small(), run_volumetric(&small()).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let written = write_results(&doc, &ReportSpec::new(dir.path(), [Format::Json]).unwrap()).unwrap();
    let names: Vec<_> = written.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_string()).collect();
    assert_eq!(names, ["results.json", "manifest.txt"]);
}

#[test]
fn cli_run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    std::fs::write(&config, SMALL).unwrap();
    let out = dir.path().join("run");
    let status = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "5", "--threads", "2"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let doc = ResultsDocument::load(out.join("results.json")).unwrap();
    assert_eq!(doc.config.seed, 5);

    let again = dir.path().join("report");
    let status = bin().arg("report").arg("--results").arg(out.join("results.json")).arg("--out").arg(&again).status().unwrap();
    assert_eq!(status.code(), Some(0));
    for name in ["heatmap_zne.svg", "results.csv"] {
        assert_eq!(std::fs::read(out.join(name)).unwrap(), std::fs::read(again.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn cli_generate_writes_parseable_circuits() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    std::fs::write(&config, SMALL).unwrap();
    let out = dir.path().join("circuits");
    let status = bin().arg("generate").arg("--config").arg(&config).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let mut count = 0;
    for entry in std::fs::read_dir(&out).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "txt") && path.file_name().unwrap() != "manifest.txt" {
            mitbench::circuit::text::from_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
            count += 1;
        }
    }
    assert_eq!(count, 6);
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["run", "--config"]).output().unwrap().status.code(), Some(1));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, SMALL.replace("[3, 1]", "[9, 1]")).unwrap();
    let o = bin().arg("run").arg("--config").arg(&bad).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid[1]"));

    std::fs::write(&bad, format!("shotz = 1\n{SMALL}")).unwrap();
    let o = bin().arg("run").arg("--config").arg(&bad).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("shotz"));

    let good = dir.path().join("good.toml");
    std::fs::write(&good, SMALL).unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = bin().arg("run").arg("--config").arg(&good).arg("--out").arg(blocker.join("x")).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
}
