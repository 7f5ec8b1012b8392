use std::path::Path;
use std::process::Command;

use ipm_lab::experiments::checkpoint_name;
use ipm_lab::manifest::{sha256_hex, RunStatus, MANIFEST_NAME};
use ipm_lab::report::report;
use ipm_lab::spec::{parse_config, Overrides};
use ipm_lab::{execute, LabError};

const SIM: &str = "kind = \"simulate2d\"\nseed = 5\n[params]\nn = 32\nepsilon = 1e-3\nt_end = 3.0\n\
                   dt = { type = \"fixed\", dt = 0.05 }\ncheckpoint_stride = 20\ndiagnostic_stride = 5\n";

fn run(doc: &str, out: &Path) -> ipm_lab::Execution {
    let spec = parse_config(doc, &Overrides::default()).unwrap();
    execute(&spec, out, None).unwrap()
}

fn read(p: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn identical_spec_and_seed_give_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let forms = "kind = \"stability-forms\"\nseed = 4\n[params]\nsamples = 20\n";
    for (doc, csv) in [(SIM, "diagnostics.csv"), (forms, "forms.csv")] {
        let a = tmp.path().join("a");
        let b = tmp.path().join("b");
        assert_eq!(run(doc, &a).exit_code, 0);
        assert_eq!(run(doc, &b).exit_code, 0);
        assert_eq!(read(a.join(csv)), read(b.join(csv)), "{csv} differs between identical runs");
        let c = tmp.path().join("c");
        run(&doc.replace("seed = ", "seed = 1"), &c);
        assert_ne!(read(a.join(csv)), read(c.join(csv)), "{csv} ignores the seed");
    }
}

#[test]
fn resumed_run_is_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let full = tmp.path().join("full");
    run(SIM, &full);
    let spec = parse_config(SIM, &Overrides::default()).unwrap();
    let resumed = tmp.path().join("resumed");
    let ckpt = full.join(checkpoint_name(20));
    let exec = execute(&spec, &resumed, Some(&ckpt)).unwrap();
    assert_eq!(exec.exit_code, 0);

    let full_csv = String::from_utf8(read(full.join("diagnostics.csv"))).unwrap();
    let mut lines = full_csv.lines();
    let header = lines.next().unwrap();
    let tail: Vec<&str> = lines.filter(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap() >= 20).collect();
    let expected = format!("{header}\n{}\n", tail.join("\n"));
    assert_eq!(String::from_utf8(read(resumed.join("diagnostics.csv"))).unwrap(), expected);
    assert_eq!(read(full.join("final_state.bin")), read(resumed.join("final_state.bin")));
    assert_eq!(read(full.join(checkpoint_name(60))), read(resumed.join(checkpoint_name(60))));
}

#[test]
fn resume_needs_a_matching_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    let full = tmp.path().join("full");
    run(SIM, &full);
    let ckpt = full.join(checkpoint_name(0));
    let other = parse_config(&SIM.replace("n = 32", "n = 64"), &Overrides::default()).unwrap();
    let exec = execute(&other, &tmp.path().join("x"), Some(&ckpt)).unwrap();
    assert_eq!(exec.exit_code, 2);
    assert!(exec.manifest.error.unwrap().contains("--resume"));
    let lemmas = parse_config("kind = \"sharpness\"\n", &Overrides::default()).unwrap();
    assert!(matches!(execute(&lemmas, &tmp.path().join("y"), Some(&ckpt)), Err(LabError::Config(_))));
}

#[test]
fn manifest_lists_every_file_with_its_digest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let exec = run(SIM, &out);
    let m = &exec.manifest;
    assert_eq!(m.tool, "ipm-lab");
    assert_eq!(m.kind, "simulate2d");
    assert_eq!(m.status, RunStatus::Pass);
    assert_eq!(m.spec["params"]["n"], 32);
    assert!(m.started <= m.finished);
    let mut on_disk = Vec::new();
    for entry in walk(&out) {
        let rel = entry.strip_prefix(&out).unwrap().to_str().unwrap().to_string();
        if rel != MANIFEST_NAME {
            on_disk.push(rel);
        }
    }
    let mut listed: Vec<String> = m.files.iter().map(|f| f.path.clone()).collect();
    on_disk.sort();
    listed.sort();
    assert_eq!(listed, on_disk);
    for f in &m.files {
        let bytes = read(out.join(&f.path));
        assert_eq!(f.sha256, sha256_hex(&bytes));
        assert_eq!(f.bytes, bytes.len() as u64);
    }
    let written: ipm_lab::manifest::RunManifest = serde_json::from_slice(&read(out.join(MANIFEST_NAME))).unwrap();
    assert_eq!(&written, m);
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn report_fits_whole_space_series() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ws");
    assert_eq!(run("kind = \"linear-whole-space\"\n[params]\nsamples = 16\n", &out).exit_code, 0);
    let r = report(&out).unwrap();
    let names: Vec<&str> = r.exponents.iter().map(|e| e.series.as_str()).collect();
    assert_eq!(names, ["identity", "r1", "r1_squared"]);
    for e in &r.exponents {
        assert_eq!(e.pass, Some(true), "{e:?}");
        assert!(e.deviation.unwrap().abs() < 0.01);
    }
    assert_eq!(r.exit_code(), 0);
    assert!(r.markdown().contains("| r1_squared |"));
    let json: serde_json::Value = serde_json::from_slice(&read(out.join("report.json"))).unwrap();
    assert_eq!(json["exponents"].as_array().unwrap().len(), 3);
}

#[test]
fn report_rejects_empty_and_tampered_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let err = report(&empty).unwrap_err();
    assert!(matches!(err, LabError::Integrity(_)), "{err}");
    assert_eq!(err.exit_code(), 2);

    let out = tmp.path().join("ws");
    run("kind = \"linear-whole-space\"\n[params]\nsamples = 10\nweights = [\"identity\"]\n", &out);
    let csv = out.join("decay.csv");
    let mut bytes = read(&csv);
    let last = bytes.len() - 2;
    bytes[last] = if bytes[last] == b'1' { b'2' } else { b'1' };
    std::fs::write(&csv, bytes).unwrap();
    match report(&out) {
        Err(LabError::Integrity(msg)) => assert!(msg.contains("decay.csv"), "{msg}"),
        other => panic!("expected an integrity error, got {other:?}"),
    }
}

#[test]
fn fit_kind_reads_a_column() {
    let tmp = tempfile::tempdir().unwrap();
    let ws = tmp.path().join("ws");
    run("kind = \"linear-whole-space\"\n[params]\nsamples = 12\nweights = [\"identity\", \"r1\"]\n", &ws);
    let doc = format!(
        "kind = \"fit\"\n[params]\ninput = {:?}\nvalue_column = \"norm\"\nfilter_column = \"weight\"\nfilter_value = \"r1\"\n\
         window = [100.0, 1e5]\ntarget = -0.75\ntolerance = 0.03\n",
        ws.join("decay.csv")
    );
    let exec = run(&doc, &tmp.path().join("fit"));
    assert_eq!(exec.exit_code, 0, "{:?}", exec.checks);
    let missing = doc.replace("value_column = \"norm\"", "value_column = \"nope\"");
    let exec = run(&missing, &tmp.path().join("fit2"));
    assert_eq!(exec.exit_code, 2);
    assert!(exec.manifest.error.unwrap().contains("params.value_column"));
}

#[test]
fn strict_profile_halves_tolerances() {
    let tmp = tempfile::tempdir().unwrap();
    let doc = "kind = \"linear-whole-space\"\ntolerance_profile = \"strict\"\n[params]\nsamples = 10\nweights = [\"r1\"]\n";
    let exec = run(doc, &tmp.path().join("s"));
    let c = &exec.checks[0];
    assert!((c.high.unwrap() - (-0.75 + 0.015)).abs() < 1e-12);
    assert!((c.low.unwrap() - (-0.75 - 0.015)).abs() < 1e-12);
}

fn cli(args: &[&str], cwd: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_ipm-lab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn exit_codes_follow_the_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("ok.toml"), SIM).unwrap();
    std::fs::write(dir.join("bad.toml"), SIM.replace("n = 32", "n = 100")).unwrap();
    std::fs::write(
        dir.join("unstable.toml"),
        "kind = \"simulate2d\"\n[params]\nn = 32\nepsilon = 1e-3\nt_end = 40.0\nprofile = { slope = -1.0 }\n\
         dt = { type = \"fixed\", dt = 0.05 }\nenergy_index = 4.0\n",
    )
    .unwrap();
    assert_eq!(cli(&["simulate2d", "--config", "ok.toml", "--out", "ok"], dir), 0);
    assert_eq!(cli(&["report", "ok"], dir), 0);
    assert_eq!(cli(&["simulate2d", "--config", "bad.toml", "--out", "bad"], dir), 2);
    assert!(!dir.join("bad").exists(), "configuration errors must fail before any output");
    assert_eq!(cli(&["linear-torus", "--config", "ok.toml"], dir), 2);
    assert_eq!(cli(&["simulate2d", "--config", "unstable.toml", "--out", "unstable"], dir), 3);
    let m: serde_json::Value = serde_json::from_slice(&read(dir.join("unstable").join(MANIFEST_NAME))).unwrap();
    assert_eq!(m["exit_code"], 3);
    assert!(dir.join("unstable/diagnostics.csv").exists());
    assert_eq!(cli(&["sharpness", "--out", "sh", "--tolerance-profile", "strict", "--seed", "3"], dir), 0);
    assert_eq!(cli(&["report", "missing"], dir), 2);
    std::fs::write(dir.join("loose.toml"), "kind = \"sharpness\"\n[params]\nfloor = 0.99\n").unwrap();
    assert_eq!(cli(&["sharpness", "--config", "loose.toml", "--out", "loose"], dir), 1);
}
