use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cayley-affine-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cayley-affine-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn desk_config() -> PathBuf {
    let path = scratch("safe36.conf");
    fs::write(&path, "p=safe36\nt=8\ng_inv_word=10110\nseed=1\n").unwrap();
    path
}

#[test]
fn hash_examples() {
    let out = lab(&["hash", "01", "--p", "101"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("digest=9,3\nhex=0x9,0x3\n"));

    let out = lab(&[
        "hash", "10", "--fn", "hatH", "--p", "101", "--t", "2", "--g", "6,3",
    ]);
    assert!(stdout(&out).starts_with("digest=36,22\n"));

    let out = lab(&["hash", "", "--p", "101"]);
    assert!(stdout(&out).starts_with("digest=1,0\n"));
}

#[test]
fn hash_reads_files_and_rejects_garbage() {
    let path = scratch("msg.txt");
    fs::write(&path, "4:6\n").unwrap();
    let arg = format!("@{}", path.display());
    let from_file = lab(&["hash", &arg, "--p", "101"]);
    let inline = lab(&["hash", "0110", "--p", "101"]);
    assert_eq!(stdout(&from_file), stdout(&inline));
    assert!(stdout(&inline).starts_with("digest=63,27\n"));

    let bad = lab(&["hash", "01x", "--p", "101"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = lab(&["hash", "01", "--p", "100"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn second_preimage_examples() {
    let out = lab(&[
        "second-preimage",
        "--digest",
        "63,27",
        "--length",
        "4",
        "--p",
        "101",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("preimage_bits=0110\n"));
    assert!(text.contains("stage=verify verdict=ok"));

    let out = lab(&[
        "second-preimage",
        "--digest",
        "1,0",
        "--length",
        "0",
        "--p",
        "101",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("preimage_bits=\n"));

    let out = lab(&[
        "second-preimage",
        "--digest",
        "3,1",
        "--length",
        "3",
        "--p",
        "101",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not an H-image"));
}

#[test]
fn second_preimage_from_message_at_desk_scale() {
    let msg = "01".repeat(700);
    let out = lab(&[
        "second-preimage",
        "--message",
        &msg,
        "--p",
        "safe36",
        "--seed",
        "5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("verdict=broken"));
    assert!(!text.contains(&msg));
}

#[test]
fn forge_without_insertable_preimage_exits_3() {
    let out = lab(&[
        "forge", "--p", "101", "--t", "2", "--g", "6,3", "--length", "8",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn forge_at_desk_scale_is_verified_and_deterministic() {
    let config = desk_config();
    let config = config.to_str().unwrap();
    let record = scratch("forge.txt");
    let record_arg = record.to_str().unwrap();
    let a = lab(&[
        "forge", "--config", config, "--length", "4096", "--out", record_arg,
    ]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let text = stdout(&a);
    for check in [
        "hatH_m_star",
        "hatH_m_star_prime",
        "hatH2_m_star",
        "hatH2_m_star_prime",
    ] {
        assert!(text.contains(&format!("check.{check}=ok\n")));
    }
    assert!(text.contains("verdict=broken\n"));
    assert_eq!(fs::read_to_string(&record).unwrap(), text);

    let b = lab(&["forge", "--config", config, "--length", "4096"]);
    assert_eq!(a.stdout, b.stdout);

    let other_seed = lab(&[
        "forge", "--config", config, "--length", "4096", "--seed", "2",
    ]);
    assert!(other_seed.status.success());
    assert_ne!(a.stdout, other_seed.stdout);

    let verified = lab(&["verify", "--record", record_arg]);
    assert!(verified.status.success());

    let m_star = text
        .lines()
        .find(|l| l.starts_with("m_star="))
        .unwrap()
        .to_string();
    let m = text.lines().find(|l| l.starts_with("m=")).unwrap();
    let tampered = text.replace(&m_star, &format!("m_star={}", &m[2..]));
    fs::write(&record, tampered).unwrap();
    let rejected = lab(&["verify", "--record", record_arg]);
    assert_eq!(rejected.status.code(), Some(1));
}

#[test]
fn flags_override_config() {
    let config = desk_config();
    let out = lab(&[
        "hash",
        "01",
        "--config",
        config.to_str().unwrap(),
        "--p",
        "101",
    ]);
    assert!(stdout(&out).starts_with("digest=9,3\n"));
}

#[test]
fn verify_pairs() {
    let yes = lab(&["verify", "00101110", "01010101", "--p", "101"]);
    assert!(yes.status.success());
    assert!(stdout(&yes).contains("verdict=collision"));
    let no = lab(&["verify", "0110", "0101", "--p", "101"]);
    assert_eq!(no.status.code(), Some(1));
    let same = lab(&["verify", "0110", "0110", "--p", "101"]);
    assert_eq!(same.status.code(), Some(1));
}

#[test]
fn bench_reports_counts() {
    let out = lab(&[
        "bench",
        "--sizes",
        "0,1000",
        "--p",
        "safe512",
        "--segment",
        "100",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("stage=size n=0 multiplications=0 additions=0 bound_2n=ok"));
    assert!(text.contains("n=1000 multiplications=1000 additions=1000 bound_2n=ok parallel_agrees=true hat_parallel_agrees=true"));
}

#[test]
fn selftest_passes() {
    let out = lab(&["selftest", "--max-length", "9"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
}

#[test]
fn prime_commands() {
    let out = lab(&["prime", "check", "safe36"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("safe=true"));
    let out = lab(&["prime", "check", "561"]);
    assert_eq!(out.status.code(), Some(1));
    let a = lab(&["prime", "gen", "--bits", "40", "--safe", "--seed", "3"]);
    let b = lab(&["prime", "gen", "--bits", "40", "--safe", "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let p = stdout(&a);
    let check = lab(&["prime", "check", p.trim()]);
    assert!(stdout(&check).contains("safe=true"));
}
