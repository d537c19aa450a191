use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "\
[simulation]
trials = 300
snr_db = 0, 20
[fig3]
varthetas = 0.07, 0.2
[fig5]
varthetas = 0.04, 0.2, 0.35
";

fn hmt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmt"))
        .args(args)
        .output()
        .expect("run hmt")
}

fn write_config(dir: &Path) -> String {
    let p = dir.join("small.cfg");
    std::fs::write(&p, SMALL).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn figure_commands_are_byte_identical_across_workers_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    for fig in ["fig2", "fig3", "fig4", "fig5", "sweep"] {
        let one = hmt(&[fig, "--config", &cfg, "--workers", "1", "--seed", "42"]);
        let eight = hmt(&[fig, "--config", &cfg, "--workers", "8", "--seed", "42"]);
        assert_eq!(
            one.status.code(),
            Some(0),
            "{fig}: {}",
            String::from_utf8_lossy(&one.stderr)
        );
        assert!(one.stdout == eight.stdout, "{fig}: 1 vs 8 workers differ");

        // the output file alone reproduces itself
        let csv = dir.path().join(format!("{fig}.csv"));
        std::fs::write(&csv, &one.stdout).unwrap();
        let again = hmt(&[fig, "--config", csv.to_str().unwrap()]);
        assert!(
            again.stdout == one.stdout,
            "{fig}: rerun from header differs"
        );
    }
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("f5.csv");
    let a = hmt(&["fig5", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert!(a.stdout.is_empty());
    let b = hmt(&["fig5", "--config", &cfg]);
    assert_eq!(std::fs::read(&out).unwrap(), b.stdout);
}

#[test]
fn header_records_flags_and_truncation_notice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let o = hmt(&[
        "fig3", "--config", &cfg, "--mode", "paper", "--eq26", "printed", "--seed", "9",
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("#@ noise_mode = paper"));
    assert!(text.contains("#@ eq26 = printed"));
    assert!(text.contains("#@ seed = 9"));
    assert!(text.contains("tau_max = 10 x tau_rms"));
    assert!(
        text.contains("# flags: noise_mode=paper exclude_coset2_origin=false eq26=printed seed=9")
    );
}

#[test]
fn mode_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let paper = hmt(&["fig5", "--config", &cfg, "--mode", "paper"]);
    let physical = hmt(&["fig5", "--config", &cfg, "--mode", "physical"]);
    assert_ne!(paper.stdout, physical.stdout);
}

#[test]
fn config_errors_exit_2_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "[lattice]\nsigma = 1e-9\nbogus = 3\n").unwrap();
    let o = hmt(&["fig3", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("bogus"), "{err}");

    std::fs::write(&bad, "[channel]\ntau_rms = -1\n").unwrap();
    let o = hmt(&["fig3", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let missing = hmt(&[
        "fig3",
        "--config",
        dir.path().join("nope.cfg").to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn unknown_flag_values_are_rejected() {
    let o = hmt(&["fig3", "--mode", "loud"]);
    assert_eq!(o.status.code(), Some(2));
}
