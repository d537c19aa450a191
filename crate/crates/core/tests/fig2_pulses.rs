use hmt::cli::{run_fig2, ExperimentConfig};
use hmt::selftest::pulse_translation_error;

fn note_value(notes: &[String], vartheta: &str, key: &str) -> f64 {
    let line = notes
        .iter()
        .find(|n| n.starts_with(&format!("vartheta={vartheta} ")))
        .expect("note for vartheta");
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .expect("key in note")
        .parse()
        .unwrap()
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}

#[test]
fn columns_and_shift_ordering() {
    let cfg = ExperimentConfig::default();
    let t = run_fig2(&cfg).unwrap();
    assert_eq!(
        t.columns,
        [
            "t_s",
            "tpr_pulse",
            "maxsinr_pulse_theta_0p10",
            "maxsinr_pulse_theta_0p04"
        ]
    );
    assert_eq!(t.rows.len(), 601);
    let d10 = note_value(&t.notes, "0.1", "dt");
    let d04 = note_value(&t.notes, "0.04", "dt");
    assert!(d10 > d04 && d04 > 0.0, "{d10} {d04}");
}

#[test]
fn tpr_column_peaks_at_zero() {
    let t = run_fig2(&ExperimentConfig::default()).unwrap();
    let ts = t.column("t_s").unwrap();
    let tpr = t.column("tpr_pulse").unwrap();
    assert_eq!(ts[argmax(&tpr)], 0.0);
}

#[test]
fn maxsinr_columns_are_translates_of_tpr() {
    let cfg = ExperimentConfig::default();
    let t = run_fig2(&cfg).unwrap();
    let tpr = t.column("tpr_pulse").unwrap();
    let pulse = cfg.lattice().unwrap().pulse();
    for (tag, v) in [("0p10", "0.1"), ("0p04", "0.04")] {
        let col = t.column(&format!("maxsinr_pulse_theta_{tag}")).unwrap();
        let dt = note_value(&t.notes, v, "dt");
        // integer lag of the column cross-correlation
        let n = tpr.len() as i64;
        let corr: Vec<f64> = (0..120)
            .map(|lag| {
                (0..n - lag)
                    .map(|i| tpr[i as usize] * col[(i + lag) as usize])
                    .sum()
            })
            .collect();
        let lag = argmax(&corr) as f64;
        assert!(
            (lag - dt / cfg.sample_interval).abs() <= 0.5 + 1e-9,
            "{tag}: lag {lag} dt {dt}"
        );
        // sub-sample refinement on the analytic correlation
        let err = pulse_translation_error(&pulse, dt, cfg.sample_interval);
        assert!(err < 1e-4, "{tag}: {err}");
        // and pointwise
        for (row, c) in col.iter().enumerate() {
            let time = t.column("t_s").unwrap()[row];
            assert!((c - pulse.eval(time - dt)).abs() < 1e-9 * pulse.eval(0.0));
        }
    }
}
