use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn toy1() -> String {
    root().join("fixtures/toy1.ttl").display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schemaforge"))
        .args(args)
        .env_remove("SCHEMAFORGE_STORE")
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn cues_on_toy1() {
    let o = run(&["cues", &toy1()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "#cue_kr=0.6667"), "{out}");
    assert!(out.lines().any(|l| l == "#cue_k=2.0000"), "{out}");
}

#[test]
fn missing_input_is_an_input_error() {
    let o = run(&["fca", "missing.ttl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.ttl"));
}

#[test]
fn lotus_limit_is_a_usage_error() {
    let o = run(&["lotus", &toy1(), "--etypes", "e1,e2,e3,e4,e5,e6,e7", "--json-errors"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("at most 6"), "{err}");
    let json: serde_json::Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(json["error"]["status"], 1);
    assert_eq!(json["error"]["kind"], "usage");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["nope"]).status.code(), Some(1));
    assert_eq!(run(&["parse", &toy1(), "--to", "xml"]).status.code(), Some(1));
    assert_eq!(run(&["embed", &toy1(), "--dim", "0"]).status.code(), Some(1));
    assert_eq!(run(&["upset", &toy1(), "--etypes", "e1"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ttl");
    fs::write(&bad, "@prefix ex: <http://x/> .\nex:a ex:b .\n").unwrap();
    let o = run(&["parse", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    assert_eq!(run(&["lotus", &toy1(), "--etypes", "e1,nothing"]).status.code(), Some(2));
    let empty = dir.path().join("empty.ttl");
    fs::write(&empty, "").unwrap();
    assert_eq!(run(&["cues", empty.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn out_is_written_only_on_success() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.csv");
    let o = run(&["fca", &toy1(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let first = fs::read(&out).unwrap();
    assert!(first.starts_with(b"etype,"));

    let o = run(&["fca", "missing.ttl", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(fs::read(&out).unwrap(), first);

    let fresh = dir.path().join("fresh.json");
    let o = run(&["lotus", &toy1(), "--etypes", "e1,zzz", "--out", fresh.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!fresh.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn parse_round_trips_through_turtle() {
    let o = run(&["parse", &toy1(), "--to", "turtle"]);
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let ttl = dir.path().join("toy1-out.ttl");
    fs::write(&ttl, &o.stdout).unwrap();
    let direct = stdout(&run(&["parse", &toy1(), "--to", "ntriples"]));
    let again = stdout(&run(&["parse", ttl.to_str().unwrap(), "--to", "ntriples"]));
    assert_eq!(direct, again);
    assert_eq!(direct.lines().count(), 7);

    let csv = stdout(&run(&["parse", &toy1(), "--to", "triples-csv"]));
    assert_eq!(csv.lines().next(), Some("subject,predicate,object,object_kind,datatype,language"));
    assert_eq!(csv.lines().count(), 8);
}

#[test]
fn match_patterns() {
    let out = stdout(&run(&["match", &toy1(), "-p", "rdfs:domain"]));
    assert_eq!(out.lines().count(), 3);
    let out = stdout(&run(&["match", &toy1(), "-p", "a", "-o", "rdfs:Class"]));
    assert_eq!(out.lines().count(), 2);
    let out = stdout(&run(&["match", &toy1(), "-s", "<http://example.org/toy#p2>"]));
    assert_eq!(out.lines().count(), 3);
    assert_eq!(stdout(&run(&["match", &toy1()])).lines().count(), 7);
    assert_eq!(run(&["match", &toy1(), "-p", "nope:x"]).status.code(), Some(1));
}

#[test]
fn lotus_and_upset_outputs() {
    let out = stdout(&run(&["lotus", &toy1(), "--etypes", "e1,e2"]));
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["variant"], "lotus");
    let counts: Vec<u64> = doc["regions"].as_array().unwrap().iter().map(|r| r["count"].as_u64().unwrap()).collect();
    assert_eq!(counts, [1, 0, 1]);
    let svg = stdout(&run(&["upset", &toy1(), "--etypes", "e1,e2", "--svg"]));
    assert!(svg.starts_with("<svg"));
}

#[test]
fn embed_is_seeded() {
    let a = run(&["embed", &toy1(), "--seed", "7"]);
    let b = run(&["embed", &toy1(), "--seed", "7"]);
    let c = run(&["embed", &toy1(), "--seed", "8"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert!(stdout(&a).starts_with("emb v1 dim=8 entities=4 relations=1 seed=7\n"));
}

#[test]
fn harvest_and_search() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let catalog = root().join("fixtures/catalog");
    let source = catalog.join("lov-source.json");
    let manifest = catalog.join("manifest.json");
    let args = [
        "harvest",
        "--source",
        source.to_str().unwrap(),
        "--fixtures",
        manifest.to_str().unwrap(),
        "--politeness-ms",
        "0",
    ];
    let run_store = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_schemaforge"))
            .args(args)
            .args(extra)
            .env("SCHEMAFORGE_STORE", &store)
            .output()
            .unwrap()
    };
    let o = run_store(&[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["checked"], 3);
    assert_eq!(report["added"], 2);
    assert_eq!(report["skipped_license"], 1);

    let o = run_store(&[]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((report["added"].as_u64(), report["updated"].as_u64()), (Some(0), Some(0)));

    let o = run_store(&["--if-due"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["due"], false);

    let s = store.to_str().unwrap();
    assert_eq!(stdout(&run(&["search", "--store", s, "--q", "sport"])), "lov-sport\n");
    assert_eq!(stdout(&run(&["search", "--store", s, "--q", "sprot"])), "");
    assert_eq!(stdout(&run(&["search", "--store", s, "--q", "sprot", "--fuzzy"])), "lov-sport\n");
    assert_eq!(stdout(&run(&["search", "--store", s, "--q", ""])), "lov-dcterms\nlov-sport\n");
    assert_eq!(run(&["search", "--q", "x"]).status.code(), Some(1));
    let missing = dir.path().join("nowhere");
    assert_eq!(run(&["search", "--store", missing.to_str().unwrap(), "--q", "x"]).status.code(), Some(2));
}

#[test]
fn unreachable_index_is_a_network_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("src.json");
    fs::write(&cfg, r#"{"id": "gone", "kind": "lov", "index_url": "http://catalog.fixture.test/missing.json"}"#).unwrap();
    let manifest = root().join("fixtures/catalog/manifest.json");
    let store = dir.path().join("store");
    let o = run(&[
        "harvest",
        "--source",
        cfg.to_str().unwrap(),
        "--store",
        store.to_str().unwrap(),
        "--fixtures",
        manifest.to_str().unwrap(),
        "--json-errors",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains(r#""kind":"network""#));
}
