use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/risk").canonicalize().unwrap()
}

fn factual(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_factual")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes a manifest into `dir` that uses the shipped Risk inputs, with
/// `overrides` replacing or adding keys.
fn manifest(dir: &Path, mode: &str, overrides: &[(&str, String)]) -> PathBuf {
    let d = data();
    let mut keys = vec![
        ("mode", format!("{mode:?}")),
        ("schema", format!("{:?}", d.join("schema.txt"))),
        ("ontology", format!("{:?}", d.join("ontology.txt"))),
        ("rules", format!("{:?}", d.join("rules/default.rules"))),
        ("config", format!("{:?}", d.join("engine.toml"))),
        ("output_dir", format!("{:?}", dir.join("out"))),
    ];
    for (k, v) in overrides {
        keys.retain(|(name, _)| name != k);
        keys.push((k, v.clone()));
    }
    let text: String = keys.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn quoted(p: &Path) -> String {
    format!("{:?}", p)
}

#[test]
fn alaska_events_reach_minus_two() {
    let out = tempfile::tempdir().unwrap();
    let o = factual(&[
        "run",
        "--manifest",
        data().join("scenarios/alaska.toml").to_str().unwrap(),
        "--output-dir",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = fs::read_to_string(out.path().join("trace.jsonl")).unwrap();
    let line = trace
        .lines()
        .find(|l| l.contains(r#""kind":"IndicatorsUpdated","agent":"Alaska""#) && l.contains("time, 49)"))
        .expect("Alaska updated at step 49");
    assert!(line.contains(r#""pp":-2.0"#), "{line}");
    assert!(line.contains(r#""delta":"(Alaska, player, red, nbArmies, -2, time, 49)""#), "{line}");
    for file in ["clusters.jsonl", "snapshot.json"] {
        assert!(out.path().join(file).is_file());
    }
}

#[test]
fn missing_ontology_exits_one_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(
        dir.path(),
        "risk-simulate",
        &[("ontology", quoted(&dir.path().join("nope.txt"))), ("seed", "1".into()), ("steps", "10".into())],
    );
    let o = factual(&["run", "--manifest", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.txt: cannot read"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_indicator_located_in_rules() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("bad.rules");
    fs::write(
        &rules,
        fs::read_to_string(data().join("rules/default.rules")).unwrap().replace("PS > 0 and PA", "PS > 0 and XX"),
    )
    .unwrap();
    let m = manifest(
        dir.path(),
        "risk-simulate",
        &[("rules", quoted(&rules)), ("seed", "1".into()), ("steps", "10".into())],
    );
    let o = factual(&["validate", "--manifest", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let expected = format!("{}:4: ", rules.display());
    assert!(stdout(&o).lines().any(|l| l.starts_with(&expected)), "{}", stdout(&o));
}

#[test]
fn out_of_order_feature_located() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.txt");
    fs::write(&input, "(Alaska, player, red, nbArmies, 3, time, 10)\n\n(Alaska, player, red, nbArmies, 2, time, 4)\n")
        .unwrap();
    let m = manifest(dir.path(), "features", &[("input", quoted(&input))]);
    let o = factual(&["validate", "--manifest", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with(&format!("{}:3: ", input.display())), "{out}");
    assert!(out.contains("line 1"), "{out}");
}

#[test]
fn invalid_engine_config_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("engine.toml");
    fs::write(&config, "alpha = 2.0\n").unwrap();
    let m = manifest(
        dir.path(),
        "risk-simulate",
        &[("config", quoted(&config)), ("seed", "1".into()), ("steps", "5".into())],
    );
    let o = factual(&["validate", "--manifest", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("alpha 2 must lie in (0, 1)"), "{}", stdout(&o));
}

#[test]
fn features_from_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), "features", &[("input", "\"-\"".into())]);
    let mut child = Command::new(env!("CARGO_BIN_EXE_factual"))
        .args(["run", "--manifest", m.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(fs::read_to_string(data().join("scenarios/alaska.features")).unwrap().as_bytes())
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("2 ticks, 3 agents"), "{}", stdout(&o));
    assert!(fs::read_to_string(dir.path().join("out/trace.jsonl")).unwrap().contains("nbArmies, -2, time, 49"));
}

#[test]
fn simulate_is_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.events");
    let b = dir.path().join("b.events");
    for p in [&a, &b] {
        let o = factual(&["simulate", "--seed", "11", "--steps", "300", "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(text).unwrap().lines().filter(|l| !l.is_empty()).count(), 300);

    let m = manifest(dir.path(), "risk-events", &[("input", quoted(&a)), ("board", quoted(&data().join("board.txt")))]);
    let o = factual(&["run", "--manifest", m.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn illegal_event_located() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bad.events");
    let mut text = fs::read_to_string(data().join("scenarios/alaska.events")).unwrap();
    text.push_str("60 battle Alaska Alaska 1 1\n");
    fs::write(&log, &text).unwrap();
    let m = manifest(dir.path(), "risk-events", &[("input", quoted(&log))]);
    let o = factual(&["validate", "--manifest", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let line = text.lines().count();
    assert!(stdout(&o).starts_with(&format!("{}:{line}: illegal event", log.display())), "{}", stdout(&o));
}

#[test]
fn report_names_the_conquering_cluster() {
    let out = tempfile::tempdir().unwrap();
    let manifest = data().join("scenarios/continent_conquest.toml");
    let o = factual(&["run", "--manifest", manifest.to_str().unwrap(), "--output-dir", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = out.path().join("trace.jsonl");
    let o = factual(&["report", "--trace", trace.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let clusters = text.split("\nclusters\n").nth(1).expect("cluster section");
    assert!(clusters.lines().any(|l| l.ends_with("Argentina, Brazil, Peru, Venezuela, red")), "{clusters}");
    assert!(text.contains("\nstate timeline\n"));
}

#[test]
fn report_on_empty_trace_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    fs::write(&trace, "").unwrap();
    let o = factual(&["report", "--trace", trace.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "");
    assert_eq!(stderr(&o), "");
}

#[test]
fn shipped_manifests_validate() {
    for entry in fs::read_dir(data().join("scenarios")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let o = factual(&["validate", "--manifest", path.to_str().unwrap()]);
            assert!(o.status.success(), "{}: {}", path.display(), stdout(&o));
        }
    }
}

#[test]
fn shipped_rules_are_the_default_table() {
    let text = fs::read_to_string(data().join("rules/default.rules")).unwrap();
    let rules = factual_core::agent::RuleTable::parse(&text).unwrap();
    assert_eq!(rules, factual_core::agent::RuleTable::default_table());
    let config: factual_core::swarm::EngineConfig =
        toml::from_str(&fs::read_to_string(data().join("engine.toml")).unwrap()).unwrap();
    assert_eq!(config, factual_core::swarm::EngineConfig::default());
}
