// SPDX-License-Identifier: MIT OR Apache-2.0

//! Black-box tests of the `relcon` binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn relcon(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relcon"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> Output {
    let o = relcon(out, args);
    assert!(
        o.status.success(),
        "relcon {args:?} failed with {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn code(out: &Path, args: &[&str]) -> i32 {
    relcon(out, args).status.code().expect("exit code")
}

fn json(path: impl AsRef<Path>) -> Value {
    let text = std::fs::read_to_string(path.as_ref()).expect("output exists");
    serde_json::from_str(&text).expect("valid JSON")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A temporary directory with one synthesized pack in it.
fn synth(args: &[&str]) -> (TempDir, PathBuf) {
    let tmp = TempDir::new().unwrap();
    let mut full = vec!["synth"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", "data.cpak"]);
    ok(tmp.path(), &full);
    let pack = tmp.path().join("data.cpak");
    (tmp, pack)
}

#[test]
fn synth_writes_a_loadable_pack_and_sidecar() {
    let (tmp, pack) = synth(&["--kind", "ideal", "--n", "200", "--d", "16", "--seed", "1"]);
    let set = relcon::load_pack(&pack).unwrap();
    assert_eq!((set.n_rows(), set.dim(), set.n_variants()), (200, 16, 2));
    assert!(set.label("truth").is_ok());
    let truth = json(tmp.path().join("data.truth.json"));
    assert_eq!(truth["t"].as_array().unwrap().len(), 16);
    let manifest = json(tmp.path().join("synth.data.manifest.json"));
    assert_eq!(manifest["command"], "synth");
    assert_eq!(manifest["params"]["seed"], 1);
    assert_eq!(manifest["params"]["n"], 200);
}

#[test]
fn synth_is_repeatable() {
    let args = ["--seed", "5", "synth", "--kind", "sheared", "--shear", "0.4", "--n", "60", "--d", "8"];
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    ok(a.path(), &args);
    ok(b.path(), &args);
    for f in ["synth.cpak", "synth.truth.json", "synth.synth.manifest.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between identical runs");
    }
}

#[test]
fn invalid_geometry_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(tmp.path(), &["synth", "--kind", "multivariate", "--d", "3"]), 2);
    assert_eq!(code(tmp.path(), &["synth", "--kind", "banana"]), 2);
    assert_eq!(code(tmp.path(), &["synth", "--n", "0"]), 2);
    assert!(!tmp.path().join("synth.cpak").exists());
}

#[test]
fn trained_probe_classifies_the_ideal_pack() {
    let (tmp, pack) = synth(&["--kind", "ideal", "--n", "200", "--d", "16", "--seed", "1"]);
    let dir = tmp.path();
    ok(dir, &["train", "--pack", s(&pack), "--seeds", "2"]);
    let report = json(dir.join("train_report.json"));
    assert_eq!(report["per_seed"].as_array().unwrap().len(), 2);
    assert_eq!(report["selected_accuracy"], 1.0);

    ok(dir, &["eval", "--pack", s(&pack), "--probe", s(&dir.join("probe.json"))]);
    let eval = json(dir.join("eval.json"));
    assert_eq!(eval["accuracy"], 1.0);
    assert_eq!(eval["source"], "probe");
    assert_eq!(eval["per_pair_scores"].as_array().unwrap().len(), 200);
}

#[test]
fn ablation_flags_map_onto_the_loss_configuration() {
    let (tmp, pack) = synth(&["--n", "50", "--d", "8"]);
    let dir = tmp.path();
    ok(dir, &["train", "--pack", s(&pack), "--no-conf", "--a1", "--steps", "20"]);
    let params = &json(dir.join("train.manifest.json"))["params"];
    assert_eq!(params["use_consistency"], true);
    assert_eq!(params["use_confidence"], false);
    assert_eq!(params["unit_norm"], true);
    assert_eq!(params["svd_project"], false);
    let config = &json(dir.join("train_report.json"))["config"];
    assert_eq!(config["use_confidence"], false);

    ok(dir, &["train", "--pack", s(&pack), "--no-cons", "--a2", "--steps", "20"]);
    let params = &json(dir.join("train.manifest.json"))["params"];
    assert_eq!(params["use_consistency"], false);
    assert_eq!(params["use_confidence"], true);
    assert_eq!(params["svd_project"], true);

    assert_eq!(code(dir, &["train", "--pack", s(&pack), "--no-cons", "--no-conf"]), 2);
}

#[test]
fn one_report_entry_per_seed() {
    let (tmp, pack) = synth(&["--n", "40", "--d", "6"]);
    let dir = tmp.path();
    ok(dir, &["--seed", "100", "train", "--pack", s(&pack), "--seeds", "30", "--steps", "10"]);
    let report = json(dir.join("train_report.json"));
    let seeds: Vec<u64> = report["per_seed"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, (100..130).collect::<Vec<_>>());
    assert!(report["accuracy_stats"]["max"].as_f64().unwrap() <= 1.0);
}

#[test]
fn train_rejects_a_four_variant_pack() {
    let (tmp, pack) = synth(&["--kind", "multivariate", "--n", "20", "--d", "6"]);
    assert_eq!(code(tmp.path(), &["train", "--pack", s(&pack), "--steps", "5"]), 3);
}

#[test]
fn distractor_spectrum_reports_multiple() {
    let (tmp, pack) = synth(&["--kind", "distractor", "--distractor-scale", "3", "--seed", "1"]);
    let dir = tmp.path();
    ok(dir, &["spectrum", "--pack", s(&pack), "--method", "drc", "--top", "10"]);
    let out = json(dir.join("spectrum.json"));
    assert_eq!(out["diagnostics"]["verdict"], "multiple");
    assert_eq!(out["spectrum"]["mu"].as_array().unwrap().len(), 32);

    let svg = std::fs::read_to_string(dir.join("spectrum.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="bar""#).count(), 10);

    let csv = std::fs::read_to_string(dir.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,mu,lambda_c"));
    assert_eq!(lines.count(), 10);
}

#[test]
fn ideal_spectrum_is_isolated_and_csv_matches_json() {
    let (tmp, pack) = synth(&["--kind", "ideal", "--n", "300", "--d", "12", "--seed", "4"]);
    let dir = tmp.path();
    ok(dir, &["spectrum", "--pack", s(&pack), "--method", "rrc", "--top", "3"]);
    let out = json(dir.join("spectrum.json"));
    assert_eq!(out["diagnostics"]["verdict"], "isolated");
    let mu = out["spectrum"]["mu"].as_array().unwrap();
    let csv = std::fs::read_to_string(dir.join("spectrum.csv")).unwrap();
    for (line, m) in csv.lines().skip(1).zip(mu) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, m.as_f64().unwrap());
    }
}

#[test]
fn spectrum_argument_errors() {
    let (tmp, pack) = synth(&["--n", "30", "--d", "5"]);
    let dir = tmp.path();
    assert_eq!(code(dir, &["spectrum", "--pack", s(&pack), "--method", "ccs"]), 2);
    assert_eq!(code(dir, &["spectrum", "--pack", s(&pack), "--method", "nope"]), 2);
    assert_eq!(code(dir, &["spectrum", "--pack", s(&pack), "--top", "1"]), 2);
    assert_eq!(code(dir, &["spectrum", "--pack", s(&pack), "--top", "6"]), 2);
    assert_eq!(code(dir, &["spectrum"]), 2);
    assert_eq!(code(dir, &["spectrum", "--pack", s(&dir.join("missing.cpak"))]), 3);
}

#[test]
fn multivariate_projection_separates_four_clusters() {
    let (tmp, pack) = synth(&["--kind", "multivariate", "--n", "80", "--d", "12", "--seed", "2"]);
    let dir = tmp.path();
    ok(dir, &["multivar", "--pack", s(&pack)]);

    let spectrum = json(dir.join("multivar_spectrum.json"));
    assert_eq!(spectrum["pairs"]["pairs"].as_array().unwrap().len(), 6);

    let proj = json(dir.join("projections.json"));
    assert_eq!(proj["pair_lines"].as_array().unwrap().len(), 6 * 80);
    let mut clusters: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for p in proj["points"].as_array().unwrap() {
        let c = p["coords"].as_array().unwrap();
        clusters
            .entry(p["variant"].as_str().unwrap().to_string())
            .or_default()
            .push((c[0].as_f64().unwrap(), c[1].as_f64().unwrap()));
    }
    assert_eq!(clusters.len(), 4);
    let centroid = |pts: &[(f64, f64)]| {
        let n = pts.len() as f64;
        (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n)
    };
    let centers: Vec<(f64, f64)> = clusters.values().map(|p| centroid(p)).collect();
    let d2 = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
    let mut min_sep = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            min_sep = min_sep.min(d2(centers[i], centers[j]).sqrt());
        }
    }
    // every point sits nearest its own centroid, and clusters are tight
    for (ci, pts) in clusters.values().enumerate() {
        let rms = (pts.iter().map(|&p| d2(p, centers[ci])).sum::<f64>() / pts.len() as f64).sqrt();
        assert!(rms < 0.5 * min_sep, "cluster {ci}: rms {rms} vs separation {min_sep}");
        for &p in pts {
            let nearest = (0..4)
                .min_by(|&a, &b| d2(p, centers[a]).total_cmp(&d2(p, centers[b])))
                .unwrap();
            assert_eq!(nearest, ci);
        }
    }

    for f in ["proj_12.svg", "proj_34.svg"] {
        let svg = std::fs::read_to_string(dir.join(f)).unwrap();
        assert_eq!(svg.matches(r#"class="point""#).count(), 4 * 80);
        assert_eq!(svg.matches("<line").count(), 6 * 80);
    }
}

#[test]
fn multivar_honours_a_custom_pair_file() {
    let (tmp, pack) = synth(&["--kind", "multivariate", "--n", "30", "--d", "8"]);
    let dir = tmp.path();
    let pairs = dir.join("pairs.json");
    std::fs::write(&pairs, r#"{"pairs": [{"a": "pc", "b": "nc"}, {"a": "pi", "b": "ni"}]}"#).unwrap();
    ok(dir, &["multivar", "--pack", s(&pack), "--pairs", s(&pairs)]);
    assert_eq!(json(dir.join("projections.json"))["pair_lines"].as_array().unwrap().len(), 60);
    assert_eq!(json(dir.join("multivar_spectrum.json"))["scale"], 1.0);

    std::fs::write(&pairs, r#"{"pairs": [{"a": "pc", "b": "zz"}]}"#).unwrap();
    assert_eq!(code(dir, &["multivar", "--pack", s(&pack), "--pairs", s(&pairs)]), 3);
}

#[test]
fn multivar_needs_four_eigenvectors() {
    let (tmp, pack) = synth(&["--n", "30", "--d", "3"]);
    assert_eq!(code(tmp.path(), &["multivar", "--pack", s(&pack)]), 2);
}

#[test]
fn planted_direction_scores_perfectly() {
    let (tmp, pack) = synth(&["--kind", "ideal", "--n", "200", "--d", "16", "--seed", "1"]);
    let dir = tmp.path();
    ok(dir, &["eval", "--pack", s(&pack), "--pc-overlap", "5"]);
    let eval = json(dir.join("eval.json"));
    assert_eq!(eval["accuracy"], 1.0);
    assert_eq!(eval["source"], "planted:t");
    let lambda = eval["pc_overlap"]["lambda"].as_array().unwrap();
    assert_eq!(lambda.len(), 5);
    let l: Vec<f64> = lambda.iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(l.windows(2).all(|w| w[0] <= w[1] + 1e-12));
}

#[test]
fn eval_error_classes() {
    let (tmp, pack) = synth(&["--n", "30", "--d", "6"]);
    let dir = tmp.path();
    // stacked centered data of 60 rows in 6 dims has rank 6
    assert_eq!(code(dir, &["eval", "--pack", s(&pack), "--pc-overlap", "7"]), 2);
    assert_eq!(code(dir, &["eval", "--pack", s(&pack), "--pc-overlap", "0"]), 2);
    assert_eq!(code(dir, &["eval", "--pack", s(&pack), "--label", "missing"]), 3);
    assert_eq!(code(dir, &["eval", "--pack", s(&pack), "--direction", "nope"]), 2);
    let junk = dir.join("junk.json");
    std::fs::write(&junk, "{not json").unwrap();
    assert_eq!(code(dir, &["eval", "--pack", s(&pack), "--probe", s(&junk)]), 3);
}

#[test]
fn eval_output_matches_the_published_schema() {
    let schema: Value = json(Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/eval.schema.json"));
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");

    let (tmp, pack) = synth(&["--kind", "ideal", "--n", "50", "--d", "8", "--noise", "0.5"]);
    let dir = tmp.path();
    for extra in [&[][..], &["--pc-overlap", "3"][..], &["--no-sign-resolution"][..]] {
        let mut args = vec!["eval", "--pack", s(&pack)];
        args.extend_from_slice(extra);
        ok(dir, &args);
        let out = json(dir.join("eval.json"));
        let errors: Vec<String> = validator.iter_errors(&out).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{extra:?}: {errors:?}");
    }
    let mut bad = json(dir.join("eval.json"));
    bad["accuracy"] = Value::from(1.5);
    assert!(!validator.is_valid(&bad));
}

#[test]
fn config_file_and_flags_layer() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"kind": "sheared", "n": 25, "d": 7, "shear": 0.3, "seed": 9}"#).unwrap();
    ok(dir, &["--config", s(&cfg), "synth", "--d", "9"]);
    let params = &json(dir.join("synth.synth.manifest.json"))["params"];
    assert_eq!(params["kind"], "sheared");
    assert_eq!(params["n"], 25);
    assert_eq!(params["d"], 9);
    assert_eq!(params["seed"], 9);

    std::fs::write(&cfg, r#"{"n": 25, "typo": 1}"#).unwrap();
    assert_eq!(code(dir, &["--config", s(&cfg), "synth"]), 2);
}

#[test]
fn manifests_work_as_configs_and_replays() {
    let (tmp, pack) = synth(&["--n", "40", "--d", "6", "--seed", "3"]);
    let dir = tmp.path();
    ok(dir, &["spectrum", "--pack", s(&pack), "--top", "4"]);
    let manifest = dir.join("spectrum.manifest.json");

    let again = dir.join("again");
    ok(&again, &["--config", s(&manifest), "spectrum"]);
    assert_eq!(
        std::fs::read(dir.join("spectrum.json")).unwrap(),
        std::fs::read(again.join("spectrum.json")).unwrap()
    );
    // a spectrum manifest cannot configure another command
    assert_eq!(code(dir, &["--config", s(&manifest), "train"]), 2);

    let replayed = dir.join("replayed");
    ok(&replayed, &["replay", s(&manifest)]);
    assert_eq!(
        std::fs::read(dir.join("spectrum.svg")).unwrap(),
        std::fs::read(replayed.join("spectrum.svg")).unwrap()
    );
    assert_eq!(code(dir, &["replay", s(&dir.join("data.truth.json"))]), 3);
}
