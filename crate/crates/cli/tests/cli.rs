use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bandsel(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bandsel"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Default synthetic scene written as `scene.*` in a fresh directory.
fn scene_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = bandsel(dir.path(), &["synth", "--out", "scene"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn synth_writes_all_files_deterministically() {
    let dir = scene_dir();
    for f in ["scene.hsch", "scene.hscd", "scene.gt", "scene.truth.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let header: serde_json::Value = serde_json::from_slice(&read(dir.path(), "scene.hsch")).unwrap();
    assert_eq!(header["bands"], 9);
    let payload = read(dir.path(), "scene.hscd");
    assert_eq!(code(&bandsel(dir.path(), &["synth", "--out", "again"])), 0);
    assert_eq!(payload, read(dir.path(), "again.hscd"));
    assert_eq!(
        code(&bandsel(dir.path(), &["synth", "--out", "other", "--seed", "7"])),
        0
    );
    assert_ne!(payload, read(dir.path(), "other.hscd"));
}

#[test]
fn synth_rejects_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("one.json"), r#"{"class_count": 1}"#).unwrap();
    fs::write(dir.path().join("junk.json"), "{ nope").unwrap();
    fs::write(dir.path().join("extra.json"), r#"{"colour": 3}"#).unwrap();
    for spec in ["one.json", "junk.json", "extra.json", "missing.json"] {
        let out = bandsel(dir.path(), &["synth", "--spec", spec, "--out", "x"]);
        assert_eq!(code(&out), 2, "{spec}");
    }
    assert!(!dir.path().join("x.hsch").exists());
}

#[test]
fn select_outputs_are_byte_identical() {
    let dir = scene_dir();
    let d = dir.path();
    for method in ["nms", "mifs", "mifs_u", "mrmr", "jmi", "disr", "mibf", "nmi"] {
        let a = bandsel(
            d,
            &[
                "select", "--cube", "scene", "--method", method, "--k", "4", "--out", "a.csv",
            ],
        );
        assert_eq!(code(&a), 0);
        let b = bandsel(
            d,
            &[
                "--sequential",
                "select",
                "--cube",
                "scene.hsch",
                "--method",
                method,
                "--k",
                "4",
                "--out",
                "b.csv",
            ],
        );
        assert_eq!(code(&b), 0);
        assert_eq!(read(d, "a.csv"), read(d, "b.csv"), "{method}");
    }
    let text = String::from_utf8(read(d, "a.csv")).unwrap();
    assert!(text.starts_with("rank,band_index,score\n"));
    let full = bandsel(d, &["select", "--cube", "scene", "--method", "nms", "--k", "9"]);
    assert_eq!(stdout(&full).lines().count(), 10);
}

#[test]
fn select_config_errors_exit_3_without_output() {
    let dir = scene_dir();
    let d = dir.path();
    for args in [
        ["--method", "nms", "--k", "0"],
        ["--method", "nms", "--k", "10"],
        ["--method", "svm", "--k", "2"],
    ] {
        let mut full = vec!["select", "--cube", "scene", "--out", "bands.csv"];
        full.extend(args);
        assert_eq!(code(&bandsel(d, &full)), 3, "{args:?}");
        assert!(!d.join("bands.csv").exists());
    }
    let out = bandsel(
        d,
        &["select", "--cube", "scene", "--method", "mifs", "--k", "2", "--beta=-1"],
    );
    assert_eq!(code(&out), 3);
    let out = bandsel(
        d,
        &[
            "select", "--cube", "scene", "--method", "nms", "--k", "2", "--bins", "1",
        ],
    );
    assert_eq!(code(&out), 3);
}

#[test]
fn missing_or_malformed_inputs_exit_2() {
    let dir = scene_dir();
    let d = dir.path();
    assert_eq!(
        code(&bandsel(
            d,
            &["select", "--cube", "nope", "--method", "nms", "--k", "2"]
        )),
        2
    );
    assert_eq!(
        code(&bandsel(
            d,
            &["select", "--cube", "scene", "--gt", "nope.gt", "--method", "nms", "--k", "2"]
        )),
        2
    );
    fs::write(d.join("short.gt"), [1u8, 0]).unwrap();
    assert_eq!(
        code(&bandsel(
            d,
            &["select", "--cube", "scene", "--gt", "short.gt", "--method", "nms", "--k", "2"]
        )),
        2
    );
    fs::write(d.join("garbage.csv"), "rank,band,score\n1,2,3\n").unwrap();
    for list in ["garbage.csv", "absent.csv"] {
        let out = bandsel(d, &["classify", "--cube", "scene", "--band-list", list]);
        assert_eq!(code(&out), 2, "{list}");
    }
}

#[test]
fn classify_is_reproducible_and_maps_the_scene() {
    let dir = scene_dir();
    let d = dir.path();
    assert_eq!(
        code(&bandsel(
            d,
            &["select", "--cube", "scene", "--method", "nms", "--k", "3", "--out", "b.csv"]
        )),
        0
    );
    let run = |json: &str, map: &str| {
        let out = bandsel(
            d,
            &[
                "classify",
                "--cube",
                "scene",
                "--band-list",
                "b.csv",
                "--out",
                json,
                "--map",
                map,
            ],
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    };
    run("m1.json", "m1.ppm");
    run("m2.json", "m2.ppm");
    assert_eq!(read(d, "m1.json"), read(d, "m2.json"));
    assert_eq!(read(d, "m1.ppm"), read(d, "m2.ppm"));

    let report: serde_json::Value = serde_json::from_slice(&read(d, "m1.json")).unwrap();
    assert_eq!(report["oa"], 1.0);
    let ppm = String::from_utf8(read(d, "m1.ppm")).unwrap();
    let mut lines = ppm.lines();
    assert_eq!(lines.next(), Some("P3"));
    assert_eq!(lines.next(), Some("32 32"));
    assert_eq!(lines.next(), Some("255"));
    let values: usize = lines.map(|l| l.split_whitespace().count()).sum();
    assert_eq!(values, 32 * 32 * 3);
}

#[test]
fn classify_config_errors_exit_3() {
    let dir = scene_dir();
    let d = dir.path();
    fs::write(d.join("b.csv"), "rank,band_index,score\n1,0,0.5\n").unwrap();
    fs::write(d.join("far.csv"), "rank,band_index,score\n1,99,0.5\n").unwrap();
    let base = ["classify", "--cube", "scene", "--band-list"];
    let cases: [&[&str]; 4] = [
        &["b.csv", "--train-frac", "1.0"],
        &["b.csv", "--train-frac", "0"],
        &["b.csv", "--neighbors", "0"],
        &["far.csv"],
    ];
    for extra in cases {
        let mut args = base.to_vec();
        args.extend_from_slice(extra);
        assert_eq!(code(&bandsel(d, &args)), 3, "{extra:?}");
    }
    let too_many = bandsel(
        d,
        &[
            "classify",
            "--cube",
            "scene",
            "--band-list",
            "b.csv",
            "--neighbors",
            "100000",
        ],
    );
    assert_eq!(code(&too_many), 3);
}

#[test]
fn sweep_grid_and_determinism() {
    let dir = scene_dir();
    let d = dir.path();
    let args = [
        "sweep",
        "--cube",
        "scene",
        "--methods",
        "nms,mrmr,jmi",
        "--k-max",
        "8",
        "--step",
        "1",
        "--train-frac",
        "0.1,0.5",
    ];
    let a = bandsel(d, &args);
    assert_eq!(code(&a), 0);
    let mut seq = vec!["--sequential"];
    seq.extend(args);
    let b = bandsel(d, &seq);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 1 + 3 * 8 * 2);
    assert!(stdout(&a).starts_with("method,k,train_fraction,oa,aa,kappa\n"));

    let bad = bandsel(
        d,
        &[
            "sweep",
            "--cube",
            "scene",
            "--methods",
            "nms",
            "--k-max",
            "20",
            "--step",
            "5",
        ],
    );
    assert_eq!(code(&bad), 3);
    let bad = bandsel(
        d,
        &[
            "sweep",
            "--cube",
            "scene",
            "--methods",
            "nms",
            "--k-max",
            "4",
            "--step",
            "0",
        ],
    );
    assert_eq!(code(&bad), 3);
}

fn truth_of(dir: &Path, stem: &str) -> serde_json::Value {
    serde_json::from_slice(&read(dir, &format!("{stem}.truth.json"))).unwrap()
}

fn band_with_role(truth: &serde_json::Value, role: &str) -> usize {
    truth["roles"]
        .as_array()
        .unwrap()
        .iter()
        .position(|r| r["role"] == role)
        .unwrap()
}

#[test]
fn info_measures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("clean.json"), r#"{"duplicate_noise": 0.0}"#).unwrap();
    assert_eq!(
        code(&bandsel(d, &["synth", "--spec", "clean.json", "--out", "clean"])),
        0
    );
    let truth = truth_of(d, "clean");
    let rel = band_with_role(&truth, "relevant").to_string();
    let dup = band_with_role(&truth, "duplicate").to_string();

    let mi = bandsel(
        d,
        &[
            "info",
            "--cube",
            "clean",
            "--op",
            "mi",
            "--bands",
            &format!("{dup},{dup}"),
        ],
    );
    let h = bandsel(d, &["info", "--cube", "clean", "--op", "entropy", "--bands", &dup]);
    assert_eq!(stdout(&mi), stdout(&h));

    let nms = bandsel(
        d,
        &[
            "info",
            "--cube",
            "clean",
            "--op",
            "nms",
            "--bands",
            &format!("{rel},{dup}"),
        ],
    );
    assert_eq!(stdout(&nms), "-1.000000\n");

    let pair = truth["roles"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["role"] == "synergy_pair")
        .unwrap()
        .clone();
    let bands = format!("{},{}", pair["first"], pair["second"]);
    let ii = bandsel(d, &["info", "--cube", "clean", "--op", "ii", "--bands", &bands]);
    assert_eq!(stdout(&ii), "1.000000\n");
    let jmi = bandsel(d, &["info", "--cube", "clean", "--op", "jmi", "--bands", &bands]);
    assert_eq!(stdout(&jmi), "1.000000\n");

    assert_eq!(
        code(&bandsel(d, &["info", "--cube", "clean", "--op", "ii", "--bands", "3"])),
        3
    );
    assert_eq!(
        code(&bandsel(
            d,
            &["info", "--cube", "clean", "--op", "entropy", "--bands", "1,2"]
        )),
        3
    );
    assert_eq!(
        code(&bandsel(
            d,
            &["info", "--cube", "clean", "--op", "gain", "--bands", "1"]
        )),
        3
    );
    assert_eq!(
        code(&bandsel(
            d,
            &["info", "--cube", "clean", "--op", "entropy", "--bands", "40"]
        )),
        3
    );
}

#[test]
fn outputs_land_in_nested_directories() {
    let dir = scene_dir();
    let d = dir.path();
    fs::create_dir(d.join("out")).unwrap();
    let target: PathBuf = d.join("out").join("bands.csv");
    let out = bandsel(
        d,
        &[
            "select",
            "--cube",
            "scene",
            "--method",
            "jmi",
            "--k",
            "2",
            "--out",
            target.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_dir(d.join("out")).unwrap().count(), 1);
}
