use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const ZH: &str = "你好 世界\n我们 你好\n你好吗 世界\n今天 天气 很好\n";
const EN: &str = "hello world\nhello there\nthe world\n";

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bbpekit"));
    cmd.env_remove("BBPEKIT_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn status(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace {
            dir: TempDir::new().unwrap(),
        };
        ws.write("zh.txt", ZH);
        ws.write("en.txt", EN);
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_owned()
    }

    fn write(&self, name: &str, contents: &str) {
        fs::write(self.path(name), contents).unwrap();
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }

    fn train_bbpe(&self, out: &str) -> Output {
        run(&[
            "train", "--mode", "bbpe", "--alpha", "0.99", "--n", "3", "--beta", "0.999", "--size", "300", "--in",
            &self.p("zh.txt"), "--out", &self.p(out),
        ])
    }
}

#[test]
fn every_subcommand_has_help() {
    for sub in ["train", "encode", "decode", "repair", "analyze", "compare"] {
        let out = run(&[sub, "--help"]);
        assert_eq!(status(&out), 0, "{sub} --help");
        assert!(stdout(&out).contains("Usage"), "{sub} --help prints usage");
    }
    assert_eq!(status(&run(&["--help"])), 0);
}

#[test]
fn usage_errors_exit_1() {
    let ws = Workspace::new();
    let out = run(&["train", "--bogus"]);
    assert_eq!(status(&out), 1);
    assert!(stderr(&out).contains("--bogus"));
    assert_eq!(status(&run(&["frobnicate"])), 1);
    assert_eq!(status(&run(&[])), 1);

    // Penalties only make sense where merges are learned.
    let out = run(&["train", "--mode", "byte", "--alpha", "0.5", "--in", &ws.p("zh.txt"), "--out", &ws.p("b.vocab")]);
    assert_eq!(status(&out), 1);
    assert!(!ws.path("b.vocab").exists());
    let out = run(&["train", "--mode", "bpe", "--in", &ws.p("zh.txt"), "--out", &ws.p("b.vocab")]);
    assert_eq!(status(&out), 1, "bpe needs --size");
    let out = run(&[
        "train", "--mode", "bbpe", "--size", "300", "--alpha", "1.5", "--in", &ws.p("zh.txt"), "--out",
        &ws.p("b.vocab"),
    ]);
    assert_eq!(status(&out), 1, "alpha outside [0, 1]");

    let out = bin()
        .env("BBPEKIT_THREADS", "zero")
        .args(["repair", "--in", &ws.p("zh.txt")])
        .output()
        .unwrap();
    assert_eq!(status(&out), 1);
}

#[test]
fn data_errors_exit_2_before_writing() {
    let ws = Workspace::new();
    let out = run(&["train", "--mode", "bbpe", "--size", "300", "--in", &ws.p("missing.txt"), "--out", &ws.p("v")]);
    assert_eq!(status(&out), 2);
    assert!(!ws.path("v").exists());

    let out = run(&["train", "--mode", "bbpe", "--size", "300", "--in", &ws.p("zh.txt"), "--out", &ws.p("no/dir/v")]);
    assert_eq!(status(&out), 2);

    fs::write(ws.path("bad.txt"), b"ok\n\xff\xfe\n").unwrap();
    let out = run(&["train", "--mode", "bbpe", "--size", "300", "--in", &ws.p("bad.txt"), "--out", &ws.p("v")]);
    assert_eq!(status(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    assert!(!ws.path("v").exists());

    ws.write("corrupt.vocab", "bbpekit-vocab v1 mode=byte\nnonsense\n");
    let out = run(&["compare", "--vocab-a", &ws.p("corrupt.vocab"), "--vocab-b", &ws.p("corrupt.vocab")]);
    assert_eq!(status(&out), 2);

    let out = run(&["train", "--mode", "bbpe", "--size", "10", "--in", &ws.p("zh.txt"), "--out", &ws.p("v")]);
    assert_eq!(status(&out), 2, "target below the base size");
}

#[test]
fn train_writes_vocab_and_summary() {
    let ws = Workspace::new();
    let out = run(&[
        "train", "--mode", "bbpe", "--size", "300", "--in", &ws.p("zh.txt"), "--out", &ws.p("zh.vocab"), "--log",
        &ws.p("merges.log"),
    ]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["mode"], "bbpe");
    let vocab = ws.read("zh.vocab");
    assert!(vocab.starts_with("bbpekit-vocab v1 mode=bbpe\n"));
    assert!(vocab.contains("\npenalty alpha=9.8999999999999999e-1 n=3 beta=9.9900000000000000e-1\n"));
    let merges = summary["merges"].as_u64().unwrap();
    assert_eq!(ws.read("merges.log").lines().count() as u64, merges);
    assert!(summary["composition"]["cjk_character"].as_u64().unwrap() > 0);
    assert_eq!(summary["composition"]["single_byte"], 256);
}

#[test]
fn byte_and_character_modes_need_no_size() {
    let ws = Workspace::new();
    let out = run(&["train", "--mode", "byte", "--in", &ws.p("zh.txt"), "--out", &ws.p("b.vocab")]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["size"], 262);
    let out = run(&["train", "--mode", "character", "--in", &ws.p("zh.txt"), "--out", &ws.p("c.vocab")]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let distinct: std::collections::BTreeSet<char> = ZH.chars().filter(|c| !c.is_whitespace()).collect();
    assert_eq!(summary["size"].as_u64().unwrap() as usize, 6 + distinct.len());
}

#[test]
fn identical_invocations_give_identical_files() {
    let ws = Workspace::new();
    assert_eq!(status(&ws.train_bbpe("a.vocab")), 0);
    assert_eq!(status(&ws.train_bbpe("b.vocab")), 0);
    let threaded = bin()
        .env("BBPEKIT_THREADS", "3")
        .args([
            "train", "--mode", "bbpe", "--alpha", "0.99", "--n", "3", "--beta", "0.999", "--size", "300", "--in",
            &ws.p("zh.txt"), "--out", &ws.p("c.vocab"),
        ])
        .output()
        .unwrap();
    assert_eq!(status(&threaded), 0);
    let a = fs::read(ws.path("a.vocab")).unwrap();
    assert_eq!(a, fs::read(ws.path("b.vocab")).unwrap());
    assert_eq!(a, fs::read(ws.path("c.vocab")).unwrap());
}

#[test]
fn penalize_marks_only_the_preceding_input() {
    let ws = Workspace::new();
    let out = run(&[
        "train", "--mode", "bbpe", "--size", "300", "--in", &ws.p("en.txt"), "--in", &ws.p("zh.txt"), "--penalize",
        "--out", &ws.p("joint.vocab"), "--log", &ws.p("joint.log"),
    ]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    // "he" occurs 4 times in the unpenalized English text (hello twice,
    // there, the): its adjusted count stays at its raw count.
    let log = ws.read("joint.log");
    let he = log.lines().find(|l| l.split(' ').nth(1) == Some("68") && l.split(' ').nth(2) == Some("65"));
    let fields: Vec<&str> = he.expect("he merge learned").split(' ').collect();
    assert_eq!(fields[3], "4");
    assert_eq!(fields[4].parse::<f64>().unwrap(), 4.0);

    // Penalizing everything suppresses it instead.
    let out = run(&[
        "train", "--mode", "bbpe", "--size", "300", "--in", &ws.p("en.txt"), "--in", &ws.p("zh.txt"), "--out",
        &ws.p("all.vocab"), "--log", &ws.p("all.log"),
    ]);
    assert_eq!(status(&out), 0);
    assert!(!ws.read("all.log").lines().any(|l| l.contains(" 68 65 ")));
}

#[test]
fn encode_decode_round_trip() {
    let ws = Workspace::new();
    assert_eq!(status(&ws.train_bbpe("zh.vocab")), 0);
    let text = "你好 hello 世界\n今天 很好\n";
    ws.write("in.txt", text);
    let out = run(&["encode", "--vocab", &ws.p("zh.vocab"), "--in", &ws.p("in.txt"), "--out", &ws.p("ids.txt")]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    assert!(ws.read("ids.txt").contains(" | "));
    let out = run(&["decode", "--vocab", &ws.p("zh.vocab"), "--in", &ws.p("ids.txt"), "--repair-report"]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), text);
    let reports: Vec<Value> = stderr(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r["dropped_count"] == 0));

    let out = run(&["encode", "--vocab", &ws.p("zh.vocab"), "--in", &ws.p("in.txt"), "--format", "hex-symbols"]);
    assert_eq!(status(&out), 0);
    let first = stdout(&out).lines().next().unwrap().to_owned();
    let joined: String = first.split(' ').filter(|t| *t != "|").collect();
    assert_eq!(joined, hex_of("你好hello世界"));
}

fn hex_of(s: &str) -> String {
    s.bytes().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn decode_repairs_broken_output() {
    let ws = Workspace::new();
    assert_eq!(status(&run(&["train", "--mode", "byte", "--in", &ws.p("zh.txt"), "--out", &ws.p("b.vocab")])), 0);
    // Byte ids are 6 + byte value: E4 BD (truncated 你), then 'A'.
    ws.write("ids.txt", &format!("{} {} {}\n", 6 + 0xE4, 6 + 0xBD, 6 + 0x41));
    let out = run(&["decode", "--vocab", &ws.p("b.vocab"), "--in", &ws.p("ids.txt"), "--repair-report"]);
    assert_eq!(status(&out), 0);
    assert_eq!(stdout(&out), "A\n");
    let report: Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(report["dropped_count"], 2);
    assert_eq!(report["dropped_indices"], serde_json::json!([0, 1]));

    ws.write("bad_ids.txt", "99999\n");
    assert_eq!(status(&run(&["decode", "--vocab", &ws.p("b.vocab"), "--in", &ws.p("bad_ids.txt")])), 2);
}

#[test]
fn repair_hex_lines_and_raw_bytes() {
    let ws = Workspace::new();
    ws.write("hex.txt", "e4bd a0\nc3 a9 e4\n\n");
    let out = run(&["repair", "--in", &ws.p("hex.txt"), "--report"]);
    assert_eq!(status(&out), 0);
    assert_eq!(stdout(&out), "你\né\n\n");
    let reports: Vec<Value> = stderr(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(reports[1]["dropped_indices"], serde_json::json!([2]));

    fs::write(ws.path("raw.bin"), b"a\xffb\n\xe4\xbd").unwrap();
    let out = run(&["repair", "--raw", "--in", &ws.p("raw.bin"), "--out", &ws.p("fixed.txt")]);
    assert_eq!(status(&out), 0);
    assert_eq!(ws.read("fixed.txt"), "ab\n");

    ws.write("nothex.txt", "zz\n");
    assert_eq!(status(&run(&["repair", "--in", &ws.p("nothex.txt")])), 2);
}

#[test]
fn compare_reports_sharing() {
    let ws = Workspace::new();
    assert_eq!(status(&run(&["train", "--mode", "character", "--in", &ws.p("zh.txt"), "--out", &ws.p("zh.vocab")])), 0);
    assert_eq!(status(&run(&["train", "--mode", "character", "--in", &ws.p("en.txt"), "--out", &ws.p("en.vocab")])), 0);
    let out = run(&["compare", "--vocab-a", &ws.p("en.vocab"), "--vocab-b", &ws.p("zh.vocab")]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["shared_symbols"], 0);
    assert_eq!(report["rate"], 0.0);
    let out = run(&["compare", "--vocab-a", &ws.p("zh.vocab"), "--vocab-b", &ws.p("zh.vocab")]);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["rate"], 1.0);
}

#[test]
fn analyze_combines_available_measures() {
    let ws = Workspace::new();
    assert_eq!(status(&run(&["train", "--mode", "byte", "--in", &ws.p("zh.txt"), "--out", &ws.p("b.vocab")])), 0);
    ws.write("ref.txt", "你好 世界\nhello world\n");
    ws.write("hyp.txt", "你好 世\nhello word\n");
    ws.write("labels.txt", "zh\nen\n");
    let out = run(&[
        "analyze", "--ref", &ws.p("ref.txt"), "--hyp", &ws.p("hyp.txt"), "--unit", "char", "--vocab", &ws.p("b.vocab"),
        "--labels", &ws.p("labels.txt"),
    ]);
    assert_eq!(status(&out), 0, "{}", stderr(&out));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["alignment"]["deletions"], 2);
    assert_eq!(report["alignment"]["ref_len"], 14);
    assert_eq!(report["alignment"]["unit"], "char");
    // 你好世 is 9 bytes, "hello" + "word" 9 more.
    assert_eq!(report["avg_length"], 9.0);
    assert_eq!(report["confusion"]["english_rate"], 0.0);
    assert_eq!(report["composition"]["counts"]["single_byte"], 256);
    assert!(report["sharing"].is_null());

    let out = run(&["analyze", "--vocab", &ws.p("b.vocab")]);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["alignment"].is_null() && report["confusion"].is_null());
    assert_eq!(status(&run(&["analyze"])), 1);
}

#[test]
fn output_is_replaced_atomically() {
    let ws = Workspace::new();
    ws.write("zh.vocab", "old contents");
    assert_eq!(status(&ws.train_bbpe("zh.vocab")), 0);
    assert!(ws.read("zh.vocab").starts_with("bbpekit-vocab"));
    let leftovers: Vec<_> = fs::read_dir(ws.dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}
