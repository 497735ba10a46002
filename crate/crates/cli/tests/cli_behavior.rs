//! End-to-end behavior of the `sniffy` binary: exit codes, determinism of
//! file outputs, config handling, resume semantics, and replay rendering.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sniffy")
}

/// Run the binary with a clean seed environment.
fn sniffy(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("SNIFFY_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

struct Fixture {
    _dir: TempDir,
    /// Two generated multi-room training bundles.
    train: PathBuf,
    /// One empty-arena bundle (file path, not directory).
    empty_dir: PathBuf,
    empty_bundle: PathBuf,
}

fn fixture() -> &'static Fixture {
    static FIX: OnceLock<Fixture> = OnceLock::new();
    FIX.get_or_init(|| {
        let dir = TempDir::new().expect("tempdir");
        let train = dir.path().join("train");
        let empty_dir = dir.path().join("empty");
        let out = sniffy(&[
            "gen-env",
            "--count",
            "2",
            "--rooms",
            "4",
            "--seed",
            "42",
            "--gas-duration",
            "25",
            "--out",
            train.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "fixture gen-env failed: {}", stderr(&out));
        let out = sniffy(&[
            "gen-env",
            "--count",
            "1",
            "--rooms",
            "0",
            "--seed",
            "5",
            "--gas-duration",
            "25",
            "--out",
            empty_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "fixture empty gen-env failed: {}", stderr(&out));
        let empty_bundle = std::fs::read_dir(&empty_dir)
            .unwrap()
            .filter_map(|e| e.ok().map(|e| e.path()))
            .find(|p| p.extension().is_some_and(|x| x == "gdm"))
            .expect("empty bundle file");
        Fixture {
            _dir: dir,
            train,
            empty_dir,
            empty_bundle,
        }
    })
}

#[test]
fn help_covers_every_flag() {
    let cases: &[(&str, &[&str])] = &[
        (
            "gen-env",
            &[
                "--count",
                "--size",
                "--rooms",
                "--door-width",
                "--seed",
                "--out",
                "--flow-res",
                "--flow-tol",
                "--gas-duration",
                "--jobs",
            ],
        ),
        (
            "evolve",
            &[
                "--bundles",
                "--out",
                "--config",
                "--population",
                "--generations",
                "--tournament",
                "--crossover-prob",
                "--mutation-prob",
                "--eta",
                "--envs-per-gen",
                "--doping",
                "--checkpoint-every",
                "--seed",
                "--episode-len",
                "--agents",
                "--resume",
                "--jobs",
            ],
        ),
        (
            "eval",
            &[
                "--policy",
                "--genome",
                "--bundles",
                "--seeds",
                "--seed",
                "--out",
                "--episode-len",
                "--agents",
                "--jobs",
            ],
        ),
        (
            "replay",
            &[
                "--bundle",
                "--seed",
                "--policy",
                "--genome",
                "--out",
                "--expect-hash",
                "--episode-len",
                "--agents",
                "--jobs",
            ],
        ),
    ];
    let top = sniffy(&["--help"]);
    assert_eq!(code(&top), 0);
    let top_text = stdout(&top);
    for (sub, flags) in cases {
        assert!(top_text.contains(sub), "top help lists {sub}");
        let out = sniffy(&[sub, "--help"]);
        assert_eq!(code(&out), 0);
        let text = stdout(&out);
        for flag in *flags {
            assert!(text.contains(flag), "{sub} --help covers {flag}");
        }
    }
    assert!(top_text.contains("SNIFFY_SEED"));
    assert!(top_text.contains("Exit codes"));
}

#[test]
fn usage_errors_exit_1() {
    let cases: &[&[&str]] = &[
        &["gen-env", "--count", "1", "--no-such-flag"],
        &["eval", "--policy", "teleport", "--bundles", "x", "--out", "y"],
        &["gen-env", "--count", "0", "--out", "/tmp/unused"],
        &["gen-env", "--count", "1", "--size", "wide", "--out", "/tmp/unused"],
    ];
    for args in cases {
        let out = sniffy(args);
        assert_eq!(code(&out), 1, "expected usage error for {args:?}");
        assert!(!stderr(&out).is_empty());
    }
}

#[test]
fn data_errors_exit_2() {
    let fx = fixture();
    let missing = sniffy(&[
        "eval",
        "--policy",
        "pso",
        "--bundles",
        "/nonexistent-bundle-dir",
        "--out",
        "/tmp/unused-eval-out",
    ]);
    assert_eq!(code(&missing), 2);
    let missing_bundle = sniffy(&[
        "replay",
        "--bundle",
        "/nonexistent.gdm",
        "--seed",
        "1",
        "--out",
        "/tmp/unused.svg",
    ]);
    assert_eq!(code(&missing_bundle), 2);
    // Genome preset path that does not exist is broken input data.
    let missing_preset = sniffy(&[
        "eval",
        "--policy",
        "pso",
        "--genome",
        "/nonexistent.genome",
        "--bundles",
        fx.train.to_str().unwrap(),
        "--out",
        "/tmp/unused-eval-out2",
    ]);
    assert_eq!(code(&missing_preset), 2);
}

#[test]
fn unknown_config_key_is_rejected_by_name() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "population = 4\ngenerrations = 2\n").unwrap();
    let out = sniffy(&[
        "evolve",
        "--bundles",
        fx.train.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(
        stderr(&out).contains("\"generrations\""),
        "error names the key: {}",
        stderr(&out)
    );
}

#[test]
fn manifest_is_deterministic_and_seed_sensitive() {
    let dir = TempDir::new().unwrap();
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    for (out, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let run = sniffy(&[
            "gen-env",
            "--count",
            "2",
            "--gas-duration",
            "10",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&run), 0, "{}", stderr(&run));
    }
    let (ma, mb, mc) = (
        read(&a.join("manifest.txt")),
        read(&b.join("manifest.txt")),
        read(&c.join("manifest.txt")),
    );
    assert_eq!(ma, mb, "same seed, same manifest");
    assert_ne!(ma, mc, "different seed, different manifest");
    assert!(ma.contains("# root-seed: 7"));
    // Bundle files are byte-identical too.
    for entry in std::fs::read_dir(&a).unwrap() {
        let pa = entry.unwrap().path();
        let name = pa.file_name().unwrap();
        let pb = b.join(name);
        assert_eq!(
            std::fs::read(&pa).unwrap(),
            std::fs::read(&pb).unwrap(),
            "{name:?} differs between identical runs"
        );
    }
}

#[test]
fn sniffy_seed_env_is_the_fallback() {
    let dir = TempDir::new().unwrap();
    let via_env = Command::new(bin())
        .args([
            "gen-env",
            "--count",
            "1",
            "--gas-duration",
            "10",
            "--out",
            dir.path().join("e").to_str().unwrap(),
        ])
        .env("SNIFFY_SEED", "31")
        .output()
        .unwrap();
    assert_eq!(code(&via_env), 0, "{}", stderr(&via_env));
    let via_flag = sniffy(&[
        "gen-env",
        "--count",
        "1",
        "--gas-duration",
        "10",
        "--seed",
        "31",
        "--out",
        dir.path().join("f").to_str().unwrap(),
    ]);
    assert_eq!(code(&via_flag), 0);
    assert_eq!(
        read(&dir.path().join("e/manifest.txt")),
        read(&dir.path().join("f/manifest.txt"))
    );
    // A malformed SNIFFY_SEED is a usage error when no --seed overrides it.
    let bad = Command::new(bin())
        .args([
            "gen-env",
            "--count",
            "1",
            "--out",
            dir.path().join("g").to_str().unwrap(),
        ])
        .env("SNIFFY_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 1);
}

#[test]
fn eval_rows_match_runs_and_single_run_aggregate_is_that_run() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("eval");
    let out = sniffy(&[
        "eval",
        "--policy",
        "pso",
        "--bundles",
        fx.empty_dir.to_str().unwrap(),
        "--seeds",
        "1",
        "--seed",
        "3",
        "--episode-len",
        "20",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = read(&out_dir.join("metrics.csv"));
    let rows: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("env_id") && !l.is_empty())
        .collect();
    assert_eq!(rows.len(), 1, "1 env x 1 seed -> 1 row");
    let cols: Vec<&str> = rows[0].split(',').collect();
    let mean_distance: f64 = cols[4].parse().unwrap();
    let success: u8 = cols[7].parse().unwrap();
    let summary = read(&out_dir.join("summary.txt"));
    assert!(summary.contains("runs: 1"));
    assert!(summary.contains(&format!("success-rate: {:.6}", f64::from(success))));
    assert!(summary.contains(&format!("mean-distance: {mean_distance:.6}")));

    // 1 env x 3 seeds -> 3 rows.
    let out3 = sniffy(&[
        "eval",
        "--policy",
        "pso",
        "--bundles",
        fx.empty_dir.to_str().unwrap(),
        "--seeds",
        "3",
        "--seed",
        "3",
        "--episode-len",
        "20",
        "--out",
        dir.path().join("eval3").to_str().unwrap(),
    ]);
    assert_eq!(code(&out3), 0);
    let csv3 = read(&dir.path().join("eval3/metrics.csv"));
    let n3 = csv3
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("env_id") && !l.is_empty())
        .count();
    assert_eq!(n3, 3);
}

#[test]
fn eval_output_is_deterministic() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for name in ["x", "y"] {
        let out_dir = dir.path().join(name);
        let out = sniffy(&[
            "eval",
            "--policy",
            "chemotaxis",
            "--bundles",
            fx.train.to_str().unwrap(),
            "--seeds",
            "2",
            "--seed",
            "11",
            "--episode-len",
            "20",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        outputs.push(read(&out_dir.join("metrics.csv")));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].contains("# root-seed: 11"));
}

#[test]
fn evolve_writes_history_preset_and_checkpoint() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("evo");
    let out = sniffy(&[
        "evolve",
        "--bundles",
        fx.train.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--population",
        "4",
        "--generations",
        "3",
        "--tournament",
        "2",
        "--envs-per-gen",
        "1",
        "--episode-len",
        "15",
        "--seed",
        "21",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let history = read(&out_dir.join("history.csv"));
    assert!(history.contains("# root-seed: 21"));
    assert!(history.contains("generation,best_cost,median_cost,env_ids"));
    let rows = history
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("generation") && !l.is_empty())
        .count();
    assert_eq!(rows, 3, "one history row per generation");
    let preset = read(&out_dir.join("best.genome"));
    for key in ["omega=", "phi_p=", "k_swarm=", "d_laser_prime="] {
        assert!(preset.contains(key), "preset has {key}");
    }
    assert!(out_dir.join("checkpoint.json").exists());

    // The written preset is accepted back as a --genome argument.
    let replay = sniffy(&[
        "replay",
        "--bundle",
        fx.empty_bundle.to_str().unwrap(),
        "--seed",
        "4",
        "--genome",
        out_dir.join("best.genome").to_str().unwrap(),
        "--episode-len",
        "10",
        "--out",
        dir.path().join("r.svg").to_str().unwrap(),
    ]);
    assert_eq!(code(&replay), 0, "{}", stderr(&replay));
}

#[test]
fn doping_off_changes_history_for_same_seed() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let mut csvs = Vec::new();
    for (name, doping) in [("on", "on"), ("off", "off")] {
        let out_dir = dir.path().join(name);
        let out = sniffy(&[
            "evolve",
            "--bundles",
            fx.train.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--population",
            "4",
            "--generations",
            "3",
            "--tournament",
            "2",
            "--envs-per-gen",
            "1",
            "--episode-len",
            "15",
            "--seed",
            "21",
            "--doping",
            doping,
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        csvs.push(read(&out_dir.join("history.csv")));
    }
    assert_ne!(csvs[0], csvs[1], "doping on/off must diverge");
}

#[test]
fn resume_reproduces_the_uninterrupted_trace() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let base: &[&str] = &[
        "--population",
        "4",
        "--tournament",
        "2",
        "--envs-per-gen",
        "1",
        "--episode-len",
        "15",
        "--seed",
        "33",
        "--checkpoint-every",
        "1",
    ];
    let full_dir = dir.path().join("full");
    let mut args = vec![
        "evolve",
        "--bundles",
        fx.train.to_str().unwrap(),
        "--out",
        full_dir.to_str().unwrap(),
        "--generations",
        "4",
    ];
    args.extend_from_slice(base);
    let full = sniffy(&args);
    assert_eq!(code(&full), 0, "{}", stderr(&full));

    let half_dir = dir.path().join("half");
    let mut args = vec![
        "evolve",
        "--bundles",
        fx.train.to_str().unwrap(),
        "--out",
        half_dir.to_str().unwrap(),
        "--generations",
        "2",
    ];
    args.extend_from_slice(base);
    let half = sniffy(&args);
    assert_eq!(code(&half), 0, "{}", stderr(&half));

    let res_dir = dir.path().join("res");
    let ckpt = half_dir.join("checkpoint.json");
    let resumed = sniffy(&[
        "evolve",
        "--bundles",
        fx.train.to_str().unwrap(),
        "--out",
        res_dir.to_str().unwrap(),
        "--resume",
        ckpt.to_str().unwrap(),
        "--generations",
        "4",
        "--episode-len",
        "15",
    ]);
    assert_eq!(code(&resumed), 0, "{}", stderr(&resumed));
    assert_eq!(
        read(&full_dir.join("history.csv")),
        read(&res_dir.join("history.csv")),
        "resumed trace must equal the uninterrupted run"
    );
    assert_eq!(
        read(&full_dir.join("best.genome")),
        read(&res_dir.join("best.genome"))
    );

    // Contradictory knobs alongside --resume are usage errors.
    let bad = sniffy(&[
        "evolve",
        "--bundles",
        fx.train.to_str().unwrap(),
        "--out",
        dir.path().join("bad").to_str().unwrap(),
        "--resume",
        ckpt.to_str().unwrap(),
        "--population",
        "8",
    ]);
    assert_eq!(code(&bad), 1);
    assert!(stderr(&bad).contains("--population"));
}

#[test]
fn replay_empty_arena_draws_three_trajectories() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let svg_path = dir.path().join("replay.svg");
    let out = sniffy(&[
        "replay",
        "--bundle",
        fx.empty_bundle.to_str().unwrap(),
        "--seed",
        "9",
        "--episode-len",
        "20",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let hash_line = text
        .lines()
        .find(|l| l.starts_with("trajectory-hash: "))
        .expect("hash printed");
    let hash = hash_line.trim_start_matches("trajectory-hash: ").trim();
    let svg = read(&svg_path);
    assert_eq!(
        svg.matches("<polyline").count(),
        3,
        "three agents, three trajectory polylines"
    );
    assert!(svg.contains("class=\"source\""));
    assert!(svg.contains("class=\"wall\""));
    assert!(svg.contains("episode-seed=9"));

    // Same seed verifies against its own hash; a wrong hash is a data error.
    let ok = sniffy(&[
        "replay",
        "--bundle",
        fx.empty_bundle.to_str().unwrap(),
        "--seed",
        "9",
        "--episode-len",
        "20",
        "--expect-hash",
        hash,
        "--out",
        dir.path().join("ok.svg").to_str().unwrap(),
    ]);
    assert_eq!(code(&ok), 0);
    let bad = sniffy(&[
        "replay",
        "--bundle",
        fx.empty_bundle.to_str().unwrap(),
        "--seed",
        "9",
        "--episode-len",
        "20",
        "--expect-hash",
        "12345",
        "--out",
        dir.path().join("bad.svg").to_str().unwrap(),
    ]);
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("hash mismatch"));
}

#[test]
fn eval_hash_column_replays_identically() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("eval");
    let out = sniffy(&[
        "eval",
        "--policy",
        "pso",
        "--bundles",
        fx.empty_dir.to_str().unwrap(),
        "--seeds",
        "1",
        "--seed",
        "17",
        "--episode-len",
        "20",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = read(&out_dir.join("metrics.csv"));
    let row = csv
        .lines()
        .find(|l| !l.starts_with('#') && !l.starts_with("env_id") && !l.is_empty())
        .expect("one data row");
    let cols: Vec<&str> = row.split(',').collect();
    let (episode_seed, hash) = (cols[2], cols[9]);
    let replay = sniffy(&[
        "replay",
        "--bundle",
        fx.empty_bundle.to_str().unwrap(),
        "--seed",
        episode_seed,
        "--episode-len",
        "20",
        "--expect-hash",
        hash,
        "--out",
        dir.path().join("r.svg").to_str().unwrap(),
    ]);
    assert_eq!(
        code(&replay),
        0,
        "recorded hash must verify: {}",
        stderr(&replay)
    );
}

#[test]
fn jobs_flag_caps_workers_without_changing_results() {
    let fx = fixture();
    let dir = TempDir::new().unwrap();
    let mut csvs = Vec::new();
    for (name, jobs) in [("j1", "1"), ("j2", "2")] {
        let out_dir = dir.path().join(name);
        let out = sniffy(&[
            "--jobs",
            jobs,
            "eval",
            "--policy",
            "pso",
            "--bundles",
            fx.train.to_str().unwrap(),
            "--seeds",
            "2",
            "--seed",
            "13",
            "--episode-len",
            "15",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        csvs.push(read(&out_dir.join("metrics.csv")));
    }
    assert_eq!(csvs[0], csvs[1], "worker count must not change results");
    let zero = sniffy(&["--jobs", "0", "eval", "--policy", "pso", "--bundles", "x", "--out", "y"]);
    assert_eq!(code(&zero), 1);
}

#[test]
fn outputs_contain_no_absolute_paths() {
    let fx = fixture();
    for file in ["manifest.txt"] {
        let text = read(&fx.train.join(file));
        assert!(
            !text.contains("/tmp") && !text.contains("/root"),
            "{file} must not embed absolute paths:\n{text}"
        );
    }
}
