use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aecode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aecode"))
        .args(args)
        .env_remove("AECODE_SEED")
        .env_remove("RUST_BACKTRACE")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = aecode(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .trim()
}

#[test]
fn encode_reports_blocks_and_overhead() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let out = ok(&[
        "encode",
        "--code",
        "AE(3,2,5)",
        "--synthetic",
        "100",
        "--block-size",
        "64",
        "--out",
        store.to_str().unwrap(),
    ]);
    assert_eq!(field(&out, "data"), "100 blocks of 64 bytes");
    assert_eq!(field(&out, "parities"), "300");
    assert_eq!(field(&out, "overhead"), "300%");
    assert_eq!(fs::read_dir(store.join("blocks")).unwrap().count(), 400);
    let manifest = fs::read_to_string(store.join("manifest.txt")).unwrap();
    assert!(manifest.contains("counter=100"));
}

#[test]
fn empty_input_gives_empty_store() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty");
    fs::write(&input, b"").unwrap();
    let store = dir.path().join("store");
    let out = ok(&[
        "encode",
        "--alpha",
        "2",
        "--s",
        "2",
        "--p",
        "5",
        "--input",
        input.to_str().unwrap(),
        "--out",
        store.to_str().unwrap(),
    ]);
    assert_eq!(field(&out, "parities"), "0");
    assert!(fs::read_to_string(store.join("manifest.txt"))
        .unwrap()
        .contains("counter=0"));
}

fn remove_every(dir: &Path, step: usize) -> usize {
    let mut names: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    let mut removed = 0;
    for path in names.iter().step_by(step) {
        fs::remove_file(path).unwrap();
        removed += 1;
    }
    removed
}

#[test]
fn repair_restores_the_original_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.bin");
    let original: Vec<u8> = (0..50_000u32)
        .map(|i| (i.wrapping_mul(2_654_435_761) >> 13) as u8)
        .collect();
    fs::write(&input, &original).unwrap();
    let store = dir.path().join("store");
    let store_arg = store.to_str().unwrap();
    ok(&[
        "encode",
        "--code",
        "AE(3,2,5)",
        "--input",
        input.to_str().unwrap(),
        "--block-size",
        "512",
        "--out",
        store_arg,
    ]);
    let removed = remove_every(&store.join("blocks"), 10);
    assert!(removed >= 35);
    let decoded = dir.path().join("decoded.bin");
    let out = ok(&["repair", "--store", store_arg, "--out", decoded.to_str().unwrap()]);
    assert_eq!(field(&out, "missing"), format!("{removed} blocks"));
    assert_eq!(field(&out, "still out"), "0");
    assert_eq!(fs::read(&decoded).unwrap(), original);
    // the store itself is whole again
    assert_eq!(fs::read_dir(store.join("blocks")).unwrap().count(), 98 * 4);
}

#[test]
fn unrecoverable_store_fails() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let store_arg = store.to_str().unwrap();
    ok(&[
        "encode",
        "--alpha",
        "1",
        "--synthetic",
        "20",
        "--block-size",
        "16",
        "--out",
        store_arg,
    ]);
    for key in ["d5", "d6", "p5-6"] {
        fs::remove_file(store.join("blocks").join(key)).unwrap();
    }
    let out = aecode(&["repair", "--store", store_arg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 data blocks are unrecoverable"));
}

#[test]
fn tamper_lists_strand_parities() {
    let out = ok(&["tamper", "--code", "AE(3,5,5)", "--node", "26", "--window-end", "40"]);
    let lines: Vec<&str> = out.lines().collect();
    for key in ["p26-31", "p31-36", "p36-41", "p26-32", "p26-35"] {
        assert!(lines.contains(&key), "{key} missing from {out}");
    }
    assert_eq!(*lines.last().unwrap(), format!("{} parities", lines.len() - 1));
}

#[test]
fn analyze_me_writes_csv() {
    let out = ok(&["analyze-me", "--grid", "AE(3,1,4)", "--grid", "AE(1,-,-)", "--x", "2"]);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "params,x,min_size,pattern_count,example_pattern,complete_flag"
    );
    assert!(lines.next().unwrap().starts_with("\"AE(3,1,4)\",2,8,"));
    assert!(lines.next().unwrap().starts_with("\"AE(1,-,-)\",2,3,"));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(name);
        ok(&[
            "simulate",
            "--scheme",
            "AE(2,2,5)",
            "--rs",
            "5,5",
            "--replicas",
            "2",
            "--blocks",
            "3000",
            "--fractions",
            "0,20,40",
            "--seeds",
            "7,8",
            "--out",
            csv.to_str().unwrap(),
        ]);
        fs::read_to_string(csv).unwrap()
    };
    let first = run("a.csv");
    assert_eq!(first, run("b.csv"));
    let rows: Vec<&str> = first.lines().collect();
    assert_eq!(rows.len(), 1 + 3 * 3 * 2);
    assert!(rows[0].starts_with("scheme,alpha,s,p,k,m,n_locations,fraction,seed,"));
    for row in rows.iter().filter(|r| r.contains(",0.00,")) {
        assert!(row.ends_with(",0,0,0.000000,0,"), "{row}");
    }
    assert!(rows.iter().any(|r| r.starts_with("2-way,,,,1,1,100,0.40,")));
}

#[test]
fn simulate_writes_plot_tables() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("plots");
    let out = ok(&[
        "--jobs",
        "1",
        "simulate",
        "--code",
        "AE(3,2,5)",
        "--blocks",
        "2000",
        "--fractions",
        "10,30",
        "--seeds",
        "1",
        "--data-dir",
        data.to_str().unwrap(),
    ]);
    assert!(out.contains("rounds to repair all data blocks"));
    let rounds = fs::read_to_string(data.join("rounds.dat")).unwrap();
    assert!(rounds.starts_with("# percent AE(3,2,5) AE(3,2,5)_sd\n10 "));
    for name in ["data_loss", "vulnerable", "sf_fraction"] {
        assert!(data.join(format!("{name}.dat")).exists());
    }
}

#[test]
fn bad_parameters_are_rejected() {
    let out = aecode(&[
        "encode",
        "--code",
        "AE(2,5,2)",
        "--synthetic",
        "1",
        "--out",
        "/nonexistent",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("p >= s"));
    let out = aecode(&["simulate", "--fractions", "120"]);
    assert!(!out.status.success());
    let out = aecode(&["tamper", "--code", "AE(3,2,5)", "--node", "5", "--window-end", "2"]);
    assert!(!out.status.success());
    let out = aecode(&["encode", "--bogus"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--bogus"));
}
