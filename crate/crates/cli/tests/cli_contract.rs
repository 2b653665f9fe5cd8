use lapsum_cli::{run, Outcome, DEFAULT_SEED};
use serde_json::Value;

fn cli(args: &[&str]) -> Outcome {
    let mut full = vec!["lapsum"];
    full.extend_from_slice(args);
    run(full)
}

fn doc(out: &Outcome) -> Value {
    serde_json::from_str(&out.stdout).expect("JSON output")
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&["count", "--q", "2", "--kmax", "6"]).code, 0);
    assert_eq!(cli(&["--help"]).code, 0);
    assert_eq!(cli(&["count", "--bogus"]).code, 2);
    assert_eq!(cli(&["nonsense"]).code, 2);
    assert_eq!(cli(&["exact", "--n", "3", "--p", "3/2"]).code, 2);
    assert_eq!(cli(&["count", "--q", "1"]).code, 2);
    assert_eq!(cli(&["exact", "--n", "8"]).code, 3);
    assert_eq!(cli(&["diagrams", "--k", "7", "--q", "2"]).code, 3);
    assert_eq!(cli(&["weights", "--k", "7"]).code, 3);
    assert_eq!(cli(&["count", "--kmax", "600"]).code, 3);
    assert_eq!(cli(&["free-energy", "--g", "0.5"]).code, 2);
    assert_eq!(cli(&["mc", "--replicates", "3", "--n", "100", "--cbar", "2"]).code, 2);
    assert_eq!(cli(&["count", "--threads", "0"]).code, 2);
}

#[test]
fn budget_errors_name_the_flag() {
    let out = cli(&["exact", "--n", "8"]);
    assert!(out.stderr.contains("--max-n"), "{}", out.stderr);
    assert!(out.stdout.is_empty());
}

#[test]
fn json_has_provenance() {
    let out = cli(&["count", "--q", "2", "--kmax", "3", "--format", "json"]);
    let v = doc(&out);
    for key in ["command", "params", "results", "provenance"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["command"], "count");
    assert_eq!(v["provenance"]["tool"], "lapsum");
    assert_eq!(v["provenance"]["seed"], DEFAULT_SEED);
    assert_eq!(v["provenance"]["params"]["kmax"], 3);
    assert_eq!(v["provenance"]["params"], v["params"]);
}

#[test]
fn seed_flag_is_echoed() {
    let v = doc(&cli(&["mc", "--n", "500", "--cbar", "5", "--replicates", "30", "--seed", "17", "--format", "json"]));
    assert_eq!(v["provenance"]["seed"], 17);
    assert_eq!(v["results"]["estimates"][0]["seed"], 17);
}

#[test]
fn seeds_change_mc_output() {
    let a = cli(&["mc", "--n", "500", "--cbar", "5", "--replicates", "30", "--seed", "1"]);
    let b = cli(&["mc", "--n", "500", "--cbar", "5", "--replicates", "30", "--seed", "2"]);
    assert_eq!(a.code, 0);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn mc_csv_columns() {
    let out = cli(&["mc", "--n", "500", "--cbar", "5", "--replicates", "30", "--format", "csv"]);
    let mut lines = out.stdout.lines();
    assert_eq!(lines.next(), Some("n,cbar,k,R,estimate,std_error,normalized,target,seed"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn exact_values_are_rational_strings() {
    let v = doc(&cli(&["exact", "--n", "3", "--p", "1/3", "--kmax", "3", "--format", "json"]));
    for c in v["results"]["cumulants"].as_array().unwrap() {
        let s = c.as_str().expect("string");
        assert!(s.chars().all(|ch| ch.is_ascii_digit() || ch == '/' || ch == '-'), "{s}");
    }
}

#[test]
fn histogram_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("n5.hist");
    let p = path.to_str().unwrap();
    let fresh = cli(&["exact", "--n", "5", "--kmax", "3", "--cache", p]);
    assert_eq!(fresh.code, 0, "{}", fresh.stderr);
    assert!(path.exists());
    let cached = cli(&["exact", "--n", "5", "--kmax", "3", "--cache", p]);
    assert_eq!(cached.code, 0);
    assert_eq!(fresh.stdout, cached.stdout);

    let wrong_n = cli(&["exact", "--n", "4", "--cache", p]);
    assert_eq!(wrong_n.code, 2);

    std::fs::write(&path, "garbage").unwrap();
    assert_eq!(cli(&["exact", "--n", "5", "--cache", p]).code, 2);
}

#[test]
fn diagrams_emit_streams_canonical_forms() {
    let out = cli(&["diagrams", "--k", "2", "--q", "2", "--emit"]);
    assert_eq!(out.code, 0);
    let forms: Vec<&str> = out.stdout.lines().filter(|l| l.starts_with('[')).collect();
    assert_eq!(forms.len(), 4, "{}", out.stdout);
    assert!(forms.contains(&"[1.1 2.1]"));
}

#[test]
fn q3_count_flags_tabulated_discrepancy_but_succeeds() {
    let out = cli(&["count", "--q", "3", "--kmax", "4", "--format", "json"]);
    assert_eq!(out.code, 0);
    let v = doc(&out);
    assert_eq!(v["results"]["sources_agree"], true);
    assert_eq!(v["results"]["discrepancy"], true);
    assert!(out.stderr.contains("153"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["mc", "--n-list", "1000", "--cbar-list", "4,8", "--replicates", "30", "--format", "json"];
    assert_eq!(cli(&args), cli(&args));
}
