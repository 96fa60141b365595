use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn aifv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aifv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("aifv-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn solve_mcmc_fixture() {
    let o = aifv(&["solve-mcmc", "--problem", &data("four_chain.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "chain=[1,1] x=[3/5] cost=6/5\n");
    let b = aifv(&[
        "solve-mcmc",
        "--problem",
        &data("four_chain.json"),
        "--algo",
        "brute",
    ]);
    assert_eq!(stdout(&b), stdout(&o));
}

#[test]
fn solve_mcmc_trace_and_start() {
    let trace = tmp("trace.csv");
    let o = aifv(&[
        "solve-mcmc",
        "--problem",
        &data("four_chain.json"),
        "--start",
        "0,0",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("step,c,x1,chain\n0,4/3,2/3,0 0\n"), "{csv}");
    assert!(csv.trim_end().ends_with("6/5,3/5,1 1"), "{csv}");
    let bad = aifv(&[
        "solve-mcmc",
        "--problem",
        &data("four_chain.json"),
        "--start",
        "0,5",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn bad_inputs_exit_one() {
    let path = tmp("broken.json");
    std::fs::write(&path, "{ \"m\": 2, ").unwrap();
    let o = aifv(&["solve-mcmc", "--problem", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("malformed JSON"));
    let o = aifv(&["solve-mcmc", "--problem", &data("zero_q0.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("q_0 must be positive"),
        "{}",
        stderr(&o)
    );
    let o = aifv(&["verify", "--problem", &data("zero_q0.json")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_aifv_algorithms_agree() {
    let src = data("source7.json");
    let code_out = tmp("code7.json");
    let it = aifv(&[
        "solve-aifv",
        "--source",
        &src,
        "--m",
        "3",
        "--out",
        code_out.to_str().unwrap(),
    ]);
    assert_eq!(it.status.code(), Some(0), "{}", stderr(&it));
    let sl = aifv(&[
        "solve-aifv",
        "--source",
        &src,
        "--m",
        "3",
        "--algo",
        "slice",
    ]);
    assert_eq!(sl.status.code(), Some(0), "{}", stderr(&sl));
    assert_eq!(stdout(&sl), stdout(&it));
    let br = aifv(&[
        "solve-aifv",
        "--source",
        &src,
        "--m",
        "3",
        "--algo",
        "brute",
    ]);
    let cost = |s: String| s.split("cost=").nth(1).unwrap().trim().to_string();
    assert_eq!(cost(stdout(&br)), cost(stdout(&it)));
    assert_eq!(cost(stdout(&it)), "11/4");

    // the written code encodes and decodes, and re-serialises identically
    let code = code_out.to_str().unwrap();
    let enc = aifv(&["encode", "--code", code, "--in", "a g b f c e d"]);
    assert_eq!(enc.status.code(), Some(0), "{}", stderr(&enc));
    let bits = stdout(&enc);
    let dec = aifv(&[
        "decode",
        "--code",
        code,
        "--in",
        bits.trim(),
        "--count",
        "7",
    ]);
    assert_eq!(stdout(&dec), "a g b f c e d\n");
    let again = tmp("code7-again.json");
    let first = std::fs::read_to_string(code).unwrap();
    let value: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(value["m"], 3);
    std::fs::write(&again, &first).unwrap();
    let v = aifv(&[
        "verify",
        "--code",
        again.to_str().unwrap(),
        "--suite",
        "roundtrip",
        "--max-len",
        "3",
    ]);
    assert_eq!(v.status.code(), Some(0), "{}", stderr(&v));
}

#[test]
fn solve_aifv_gates() {
    let src = data("source7.json");
    let o = aifv(&[
        "solve-aifv",
        "--source",
        &src,
        "--m",
        "2",
        "--algo",
        "slice",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("slice requires m=3"));
    let o = aifv(&[
        "solve-aifv",
        "--source",
        &src,
        "--m",
        "3",
        "--max-nodes",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cap too small"));
    let o = aifv(&[
        "solve-aifv",
        "--source",
        &data("source4.json"),
        "--m",
        "3",
        "--algo",
        "slice",
    ]);
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn figure_code_encode_decode() {
    let code = data("figure_code.json");
    let o = aifv(&["encode", "--code", &code, "--in", "c b a b"]);
    assert_eq!(stdout(&o), "0001010\n");
    let o = aifv(&["decode", "--code", &code, "--in", "0001010", "--count", "4"]);
    assert_eq!(stdout(&o), "c b a b\n");
    let o = aifv(&["decode", "--code", &code, "--in", "0001010", "--count", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = aifv(&["encode", "--code", &code, "--in", "c z"]);
    assert_eq!(o.status.code(), Some(1));
    let o = aifv(&["decode", "--code", &code, "--in", "000101", "--count", "4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn binary_container_round_trip() {
    let code = data("figure_code.json");
    let bin = tmp("msg.bin");
    let o = aifv(&[
        "encode",
        "--code",
        &code,
        "--in",
        "c b a b",
        "--binary",
        "--out",
        bin.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let bytes = std::fs::read(&bin).unwrap();
    assert_eq!(&bytes[..8], &4u64.to_be_bytes());
    assert_eq!(&bytes[8..16], &7u64.to_be_bytes());
    assert_eq!(&bytes[16..], &[0b0001_0100]);
    let o = aifv(&[
        "decode",
        "--code",
        &code,
        "--input-file",
        bin.to_str().unwrap(),
        "--binary",
    ]);
    assert_eq!(stdout(&o), "c b a b\n");
    let o = aifv(&[
        "decode",
        "--code",
        &code,
        "--input-file",
        bin.to_str().unwrap(),
        "--binary",
        "--count",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn envelope_table() {
    let o = aifv(&[
        "envelope",
        "--problem",
        &data("four_chain.json"),
        "--grid",
        "5",
        "--box",
        "0,1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "x1,g0,g1,h,x1_approx,g0_approx,g1_approx,h_approx"
    );
    assert_eq!(lines.len(), 7);
    assert!(lines.iter().any(|l| l.starts_with("3/5,6/5,6/5,6/5,")));
    let o = aifv(&[
        "envelope",
        "--problem",
        &data("four_chain.json"),
        "--grid",
        "0",
        "--box",
        "0,0",
    ]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0,3/4,3/2,3/4,"));
    let o = aifv(&["envelope", "--problem", &data("four_types.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("limited to m ≤ 3"));
    let o = aifv(&[
        "envelope",
        "--problem",
        &data("four_chain.json"),
        "--box",
        "1,0",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_suites() {
    let o = aifv(&[
        "verify",
        "--problem",
        &data("four_chain.json"),
        "--seed",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("lemma4: pass"));
    assert!(stdout(&o).contains("cones: pass"));
    let o = aifv(&[
        "verify",
        "--code",
        &data("mutated_code.json"),
        "--suite",
        "roundtrip",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stdout(&o).contains("roundtrip: FAIL message"),
        "{}",
        stdout(&o)
    );
    let o = aifv(&[
        "verify",
        "--code",
        &data("figure_code.json"),
        "--suite",
        "roundtrip",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = aifv(&[
        "verify",
        "--source",
        &data("source7.json"),
        "--suite",
        "boundary",
    ]);
    assert_eq!(stdout(&o), "boundary: pass (80 points)\n");
}

#[test]
fn thread_count_does_not_change_output() {
    let one = aifv(&[
        "--threads",
        "1",
        "solve-aifv",
        "--source",
        &data("source7.json"),
    ]);
    let many = aifv(&[
        "--threads",
        "4",
        "solve-aifv",
        "--source",
        &data("source7.json"),
    ]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(stdout(&one), stdout(&many));
    let env = Command::new(env!("CARGO_BIN_EXE_aifv"))
        .env("AIFV_THREADS", "2")
        .args(["solve-aifv", "--source", &data("source7.json")])
        .output()
        .unwrap();
    assert_eq!(stdout(&env), stdout(&one));
}
