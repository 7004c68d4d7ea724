use std::fs;
use std::path::{Path, PathBuf};

use ada_asqp::cli::run;
use ada_asqp::corpus::{load_corpus, Format};
use serde_json::Value;

fn ada(args: &[&str]) -> i32 {
    run(std::iter::once("ada").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, seed: &str, n: &str) -> PathBuf {
    let out = dir.join(format!("synth-{seed}-{n}"));
    assert_eq!(ada(&["synth", "--seed", seed, "--n-samples", n, "--out", s(&out)]), 0);
    out.join("corpus.jsonl")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let corpus = synth(dir, "3", "300");

    let stats = dir.join("stats");
    assert_eq!(ada(&["stats", "--input", s(&corpus), "--out", s(&stats)]), 0);
    let report = read_json(&stats.join("report.json"));
    assert_eq!(report["n_samples"], 300);
    assert_eq!(report["category"]["kind"], "category");

    let aug = dir.join("aug");
    assert_eq!(
        ada(&[
            "augment",
            "--input",
            s(&corpus),
            "--preset",
            "rest",
            "--strategy",
            "joint",
            "--seed",
            "7",
            "--out",
            s(&aug)
        ]),
        0
    );
    let augmented = load_corpus(aug.join("corpus.jsonl"), Format::Jsonl).unwrap();
    let report = read_json(&aug.join("report.json"));
    let accepted = report["accepted_pairs"].as_array().unwrap().len();
    assert_eq!(augmented.len(), 300 + accepted);
    assert_eq!(report["config"]["kappa"], 2.0);
    assert_eq!(read_json(&aug.join("config.json"))["preset"], "rest");

    let over = dir.join("over");
    assert_eq!(
        ada(&[
            "oversample",
            "--input",
            s(&corpus),
            "--kind",
            "category",
            "--out",
            s(&over)
        ]),
        0
    );
    let report = read_json(&over.join("report.json"));
    let n1 = report["n1"].as_u64().unwrap();
    for row in report["final_counts"].as_array().unwrap() {
        assert_eq!(row[1].as_u64().unwrap(), n1);
    }

    let ser = dir.join("ser");
    assert_eq!(ada(&["serialize", "--input", s(&corpus), "--out", s(&ser)]), 0);
    let inputs = fs::read_to_string(ser.join("inputs.txt")).unwrap();
    let targets = fs::read_to_string(ser.join("targets.txt")).unwrap();
    assert_eq!(inputs.lines().count(), 300);
    assert_eq!(targets.lines().count(), 300);
    assert!(inputs.lines().all(|l| l.contains(" | ")));

    // decoder-style predictions: the gold targets themselves
    let ev = dir.join("eval");
    assert_eq!(
        ada(&[
            "eval",
            "--pred",
            s(&ser.join("targets.txt")),
            "--gold",
            s(&corpus),
            "--train",
            s(&corpus),
            "--breakdown",
            "category-headtail",
            "--threshold",
            "30",
            "--out",
            s(&ev),
        ]),
        0
    );
    let scores = read_json(&ev.join("scores.json"));
    assert_eq!(scores["overall"]["f1"], 1.0);
    let groups = scores["breakdown"]["groups"].as_array().unwrap();
    let tp: u64 = groups.iter().map(|g| g["tp"].as_u64().unwrap()).sum();
    assert_eq!(tp, scores["overall"]["tp"].as_u64().unwrap());

    let ev2 = dir.join("eval2");
    assert_eq!(
        ada(&[
            "eval",
            "--pred",
            s(&corpus),
            "--gold",
            s(&corpus),
            "--breakdown",
            "pattern-coarse",
            "--out",
            s(&ev2)
        ]),
        2,
        "a corpus file is not a predictions file"
    );

    let sweep = dir.join("sweep");
    assert_eq!(
        ada(&[
            "sweep",
            "--input",
            s(&corpus),
            "--kappa",
            "0.5,1,1.5,2,2.5",
            "--out",
            s(&sweep)
        ]),
        0
    );
    let report = read_json(&sweep.join("report.json"));
    for row in report["rows"].as_array().unwrap() {
        let counts: Vec<u64> = row["counts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_u64().unwrap())
            .collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{row}");
    }
}

#[test]
fn identical_runs_give_identical_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let corpus = synth(dir, "11", "200");
    let mut outputs = Vec::new();
    for run_id in ["a", "b"] {
        let out = dir.join(run_id);
        assert_eq!(
            ada(&["augment", "--input", s(&corpus), "--seed", "5", "--out", s(&out)]),
            0
        );
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    assert_eq!(outputs[0].len(), 3);
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let corpus = synth(dir, "2", "120");
    let cfg = dir.join("ada.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"input": "{}", "preset": "lap", "seed": 1, "kappa": 0.5}}"#,
            s(&corpus)
        ),
    )
    .unwrap();
    let out = dir.join("out");
    assert_eq!(
        ada(&["augment", "--config", s(&cfg), "--kappa", "1.5", "--out", s(&out)]),
        0
    );
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["config"]["kappa"], 1.5);
    assert_eq!(report["config"]["gamma"], -0.1);
    assert_eq!(report["config"]["seed"], 1);
    let echoed = read_json(&out.join("config.json"));
    assert_eq!(echoed["kappa"], 1.5);
    assert!(echoed.get("out").is_none());
}

#[test]
fn import_legacy_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let legacy = dir.join("train.txt");
    fs::write(
        &legacy,
        "This hamburger is over priced .####[['hamburger', 'FOOD#PRICES', 'negative', 'over priced']]\n\
         Nice vibe .####[['NULL', 'AMBIENCE#GENERAL', 'positive', 'Nice vibe']]\n",
    )
    .unwrap();
    let out = dir.join("imp");
    assert_eq!(
        ada(&["import", "--input", s(&legacy), "--split", "dev", "--out", s(&out)]),
        0
    );
    let text = fs::read_to_string(out.join("corpus.jsonl")).unwrap();
    let header: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["split"], "dev");
    assert_eq!(
        header["category_inventory"],
        serde_json::json!(["AMBIENCE#GENERAL", "FOOD#PRICES"])
    );
    let corpus = load_corpus(out.join("corpus.jsonl"), Format::Jsonl).unwrap();
    assert_eq!(corpus.len(), 2);
    assert!(corpus.samples()[1].quads()[0].aspect.is_implicit());

    let reordered = dir.join("acso.txt");
    fs::write(
        &reordered,
        "Nice vibe .####[['NULL', 'AMBIENCE#GENERAL', 'Nice vibe', 'positive']]\n",
    )
    .unwrap();
    let out = dir.join("imp2");
    assert_eq!(
        ada(&[
            "import",
            "--input",
            s(&reordered),
            "--order",
            "a,c,o,s",
            "--out",
            s(&out)
        ]),
        0
    );
    assert_eq!(
        ada(&["import", "--input", s(&reordered), "--out", s(&dir.join("imp3"))]),
        2
    );
}

#[test]
fn validation_and_runtime_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let corpus = synth(dir, "4", "50");
    let out = dir.join("x");
    assert_eq!(
        ada(&["augment", "--input", s(&corpus), "--kappa", "0", "--out", s(&out)]),
        1
    );
    assert_eq!(
        ada(&["augment", "--input", s(&corpus), "--kappa", "-1", "--out", s(&out)]),
        1
    );
    assert_eq!(ada(&["augment", "--input", s(&corpus)]), 1, "missing --out");
    assert_eq!(ada(&["sweep", "--input", s(&corpus), "--kappa", "1,-2"]), 1);
    assert_eq!(ada(&["synth", "--mix", "0.5,0.5,0.5", "--out", s(&out)]), 1);
    assert_eq!(ada(&["synth", "--mix", "0.5,0.5", "--out", s(&out)]), 1);
    assert_eq!(
        ada(&["synth", "--mix", "0.5,0.25,0.25", "--n-samples", "20", "--out", s(&out)]),
        0
    );
    assert_eq!(ada(&["eval", "--gold", s(&corpus)]), 1);
    assert_eq!(ada(&["stats", "--config", s(&dir.join("missing.json"))]), 1);
    assert_eq!(
        ada(&["augment", "--input", s(&corpus), "--gamma", "-0.1", "--out", s(&out)]),
        0
    );
}
