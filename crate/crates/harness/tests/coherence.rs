use std::path::Path;

use renyi_harness::{run_verify, Experiment};

fn top_octave_is_non_increasing(json: &str) {
    let exp = Experiment::from_json(json, Path::new(".")).unwrap();
    let rows = run_verify(&exp, None).unwrap();
    let top = *exp.n_values.last().unwrap();
    for &index in &exp.indices {
        let scaled: Vec<f64> = rows
            .iter()
            .filter(|row| row.index == index && 2 * row.n >= top)
            .map(|row| row.scaled_residual.abs())
            .collect();
        assert!(scaled.len() >= 2);
        for w in scaled.windows(2) {
            assert!(w[1] <= w[0], "r = {index}: {scaled:?}");
        }
    }
}

#[test]
fn gamma_scaled_residuals_shrink() {
    top_octave_is_non_increasing(
        r#"{"distribution": "gamma", "alpha": 4, "r_values": [1, 1.5, 2, 3, "inf"], "n_values": [64, 96, 128, 192, 256]}"#,
    );
}

#[test]
fn uniform_scaled_residuals_shrink() {
    top_octave_is_non_increasing(
        r#"{"distribution": "uniform", "r_values": [1, 2, 5, "inf"], "moment_order": 4, "n_values": [64, 128, 256]}"#,
    );
}

#[test]
fn laplace_scaled_residuals_shrink() {
    top_octave_is_non_increasing(
        r#"{"distribution": "two_sided_exponential", "r_values": [1, 2, "inf"], "n_values": [32, 48, 64]}"#,
    );
}
