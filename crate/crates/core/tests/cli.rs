use std::fs;
use std::path::Path;
use std::process::Command;

use flowstyle::cli::cli_main;
use flowstyle::io::{read_image, write_image};
use flowstyle::train::synthetic_pairs;
use flowstyle::Tensor;

macro_rules! argv {
    ($($a:expr),* $(,)?) => { [$($a.to_string()),*] };
}

fn run<S: AsRef<str>>(args: &[S]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("flowstyle").chain(args.iter().map(AsRef::as_ref));
    let code = cli_main(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(path: &Path) -> String {
    path.to_str().unwrap().to_string()
}

/// Trains a tiny model for a few steps and writes one content/style pair.
fn fixture(dir: &Path) {
    let cfg = dir.join("train.cfg");
    fs::write(&cfg, "# tiny\niterations = 3\narch = Flow2-Block2\nhidden = 4\ncrop = 16\npairs = 2\nseed = 5\n").unwrap();
    let (code, out, err) = run(&argv!["train", "--config", p(&cfg), "--out", p(&dir.join("m.pfn"))]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 3);
    let (c, s) = synthetic_pairs(1, 32, 9);
    write_image(&dir.join("c.ppm"), &c[0]).unwrap();
    write_image(&dir.join("s.ppm"), &s[0]).unwrap();
}

#[test]
fn help_and_usage_codes() {
    assert_eq!(run(&argv!["--help"]).0, 0);
    assert_eq!(run::<&str>(&[]).0, 2);
    let (code, _, err) = run(&argv!["stylize", "--style", "s.ppm", "--model", "m.pfn", "--out", "o.ppm"]);
    assert_eq!(code, 2);
    assert!(err.contains("--content"));
    let (code, _, _) = run(&argv![
        "stylize", "--content", "c.ppm", "--style", "s.ppm", "--model", "m.pfn", "--out", "o.ppm", "--transfer", "gram",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn missing_file_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&argv![
        "stylize", "--content", "nope.ppm", "--style", "nope.ppm", "--model", p(&dir.path().join("none.pfn")), "--out", "o.ppm",
    ]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn train_is_deterministic_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    let first = fs::read(d.join("m.pfn")).unwrap();
    fixture(d);
    assert_eq!(fs::read(d.join("m.pfn")).unwrap(), first);

    let bad = d.join("bad.cfg");
    fs::write(&bad, "iterations = 1\nlearning_rate = 3\n").unwrap();
    let (code, _, err) = run(&argv!["train", "--config", p(&bad), "--out", p(&d.join("x.pfn"))]);
    assert_eq!(code, 1);
    assert!(err.contains("learning_rate"));
}

#[test]
fn stylize_alpha_zero_reproduces_content() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    for transfer in ["adain", "wct", "patchswap"] {
        let out = d.join(format!("{transfer}.ppm"));
        let (code, _, err) = run(&argv![
            "stylize", "--content", p(&d.join("c.ppm")), "--style", p(&d.join("s.ppm")), "--model", p(&d.join("m.pfn")),
            "--transfer", transfer, "--alpha", "0", "--out", p(&out),
        ]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(fs::read(&out).unwrap(), fs::read(d.join("c.ppm")).unwrap(), "{transfer}");
    }
}

#[test]
fn stylize_center_crops_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    let odd = Tensor::full([1, 3, 35, 38], 0.4);
    write_image(&d.join("odd.ppm"), &odd).unwrap();
    let base = argv![
        "stylize", "--content", p(&d.join("odd.ppm")), "--style", p(&d.join("s.ppm")), "--model", p(&d.join("m.pfn")),
        "--out", p(&d.join("o.ppm")),
    ];
    assert_eq!(run(&base).0, 1);
    let mut cropped = base.to_vec();
    cropped.push("--center-crop".into());
    let (code, _, err) = run(&cropped);
    assert_eq!(code, 0, "{err}");
    assert_eq!(read_image(&d.join("o.ppm")).unwrap().shape(), [1, 3, 32, 36]);
}

#[test]
fn leak_reverse_and_factor_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    let common = |cmd: &'static str| {
        vec![
            cmd.to_string(),
            "--content".into(),
            p(&d.join("c.ppm")),
            "--model".into(),
            p(&d.join("m.pfn")),
        ]
    };

    let mut leak = common("leak-test");
    leak.extend(["--style".into(), p(&d.join("s.ppm")), "--rounds".into(), "5".into()]);
    let (code, out, err) = run(&leak);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "round\tssim\tdrift");
    assert_eq!(lines.len(), 6);
    assert_eq!(run(&leak).1, out);

    let mut rev = common("reverse");
    rev.extend([
        "--style".into(),
        p(&d.join("s.ppm")),
        "--out-stylized".into(),
        p(&d.join("st.ppm")),
        "--out-recovered".into(),
        p(&d.join("rec.ppm")),
    ]);
    let (code, out, err) = run(&rev);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("recovery_error="));
    assert_eq!(fs::read(d.join("rec.ppm")).unwrap(), fs::read(d.join("c.ppm")).unwrap());

    let mut factor = common("factor");
    factor.extend(["--out".into(), p(&d.join("f.ppm"))]);
    assert_eq!(run(&factor).0, 0);
    assert_eq!(read_image(&d.join("f.ppm")).unwrap().shape(), [1, 3, 32, 32]);

    let mut biased = factor.clone();
    biased.extend(argv!["--transfer", "patchswap"]);
    assert_eq!(run(&biased).0, 1);
}

#[test]
fn verify_passes_and_is_deterministic() {
    let args = argv!["verify", "--arch", "Flow2-Block1", "--hidden", "4", "--seed", "3"];
    let (code, out, err) = run(&args);
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.trim_end().ends_with("0 failed"));
    assert_eq!(run(&args).1, out);
}

#[test]
fn verify_loads_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let (code, out, _) = run(&argv!["verify", "--model", p(&dir.path().join("m.pfn"))]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("# verifying Flow2-Block2 hidden=4"));
}

#[test]
fn ablate_prints_table() {
    let (code, out, err) = run(&argv!["ablate", "--iterations", "1", "--size", "16", "--pairs", "1", "--hidden", "2"]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "arch\tlatent_channels\tparams\trecon_error\tssim\tgram_loss");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("Flow8-Block2\t48\t"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_flowstyle");
    assert_eq!(Command::new(bin).arg("--version").output().unwrap().status.code(), Some(0));
    assert_eq!(Command::new(bin).arg("stylize").output().unwrap().status.code(), Some(2));
}
