//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use edgeworth_renyi::cumulants::MomentVector;
use edgeworth_renyi::expansion::a1_closed_form;
use edgeworth_renyi::numerics::{kl_to_gaussian, lr_integral, sup_norm};
use edgeworth_renyi::{
    a2_via_integrals, aj_coefficient, cumulants_from_moments, gauss_power_integral, gauss_power_mass, hermite,
    hermite_integral, monotonicity_prediction, q_polynomial, CumulantVector, Rational, RenyiIndex, Verdict,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use renyi_harness::commands::{density_grid, richardson_summary};
use renyi_harness::{run_locallimit, run_monotonicity, run_verify, Experiment};

type Outcome = Result<String, String>;

fn experiment(json: &str) -> Experiment {
    Experiment::from_json(json, Path::new(".")).expect("acceptance config is valid")
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Probabilists' Hermite coefficients from `H_{k+1} = x H_k - k H_{k-1}`.
fn hermite_coeffs(k: usize) -> Vec<Rational> {
    let mut prev = vec![Rational::one()];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![Rational::zero(), Rational::one()];
    for j in 1..k {
        let mut next = vec![Rational::zero(); j + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c * q(j as i64, 1);
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn combine(terms: &[(Rational, usize)]) -> Vec<Rational> {
    let len = terms.iter().map(|t| t.1 + 1).max().unwrap_or(0);
    let mut out = vec![Rational::zero(); len];
    for (c, k) in terms {
        for (i, h) in hermite_coeffs(*k).iter().enumerate() {
            out[i] += c * h;
        }
    }
    while out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

fn criterion_1() -> Outcome {
    let (g3, g4, g5, g6) = (q(2, 3), q(-6, 5), q(7, 11), q(-13, 4));
    let c = CumulantVector::from_higher(vec![g3.clone(), g4.clone(), g5.clone(), g6.clone()]);
    let f = |k: i64| -> Rational { (1..=k).fold(q(1, 1), |acc, i| acc * q(i, 1)) };
    let printed = [
        combine(&[(&g3 / f(3), 3)]),
        combine(&[(&g3 * &g3 / (f(2) * f(3) * f(3)), 6), (&g4 / f(4), 4)]),
        combine(&[
            (&g3 * &g3 * &g3 / (f(3) * f(3) * f(3) * f(3)), 9),
            (&g3 * &g4 / (f(3) * f(4)), 7),
            (&g5 / f(5), 5),
        ]),
        combine(&[
            (&g3 * &g3 * &g3 * &g3 / (f(4) * f(3) * f(3) * f(3) * f(3)), 12),
            (&g3 * &g3 * &g4 / (f(2) * f(3) * f(3) * f(4)), 10),
            (&g3 * &g5 / (f(3) * f(5)), 8),
            (&g4 * &g4 / (f(2) * f(4) * f(4)), 8),
            (&g6 / f(6), 6),
        ]),
    ];
    for (k, want) in printed.iter().enumerate() {
        let got = q_polynomial(k + 1, &c).map_err(|e| e.to_string())?;
        if got.coeffs() != want.as_slice() {
            return Err(format!("Q_{} differs from the printed form", k + 1));
        }
    }
    let (a3, a4, a5) = (q(5, 7), q(17, 3), q(-9, 2));
    let m = MomentVector::new(vec![q(0, 1), q(1, 1), a3.clone(), a4.clone(), a5.clone()]).map_err(|e| e.to_string())?;
    let c = cumulants_from_moments(&m);
    if *c.gamma(3) != a3 || *c.gamma(4) != &a4 - q(3, 1) || *c.gamma(5) != &a5 - &a3 * q(10, 1) {
        return Err("low-order cumulant identities fail".into());
    }
    Ok("Q_1..Q_4 and gamma_3..gamma_5 exact".into())
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for r in [1.1, 1.5, 2.0, 3.0, 10.0] {
        let pref = (2.0 * std::f64::consts::PI).powf(-(r - 1.0) / 2.0);
        for k in 0..=6 {
            let closed = hermite_integral(2 * k, r).map_err(|e| e.to_string())?;
            let direct = gauss_power_integral(&hermite::<Rational>(2 * k), r).map_err(|e| e.to_string())?;
            worst = worst.max(rel_err(closed, direct));
        }
        let printed = [
            (2, -(r - 1.0) / r.powf(1.5) * pref),
            (4, 3.0 * (r - 1.0).powi(2) / r.powf(2.5) * pref),
            (6, -15.0 * (r - 1.0).powi(3) / r.powf(3.5) * pref),
        ];
        for (k, want) in printed {
            worst = worst.max(rel_err(hermite_integral(k, r).map_err(|e| e.to_string())?, want));
        }
        let h3 = hermite::<Rational>(3);
        let got = gauss_power_integral(&(&h3 * &h3), r).map_err(|e| e.to_string())?;
        worst = worst.max(rel_err(got, 3.0 * (5.0 - 6.0 * r + 3.0 * r * r) / r.powf(3.5) * pref));
    }
    if worst <= 1e-12 {
        Ok(format!("max relative error {worst:.2e}"))
    } else {
        Err(format!("max relative error {worst:.2e} > 1e-12"))
    }
}

fn criterion_3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20_240_601);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        // nonzero draws keep A_1 away from the structural zero at gamma_4 = 0, r = 2
        let higher: Vec<Rational> = (0..4)
            .map(|_| {
                let num = rng.gen_range(1..=40) * if rng.gen_bool(0.5) { 1 } else { -1 };
                q(num, rng.gen_range(1..=12))
            })
            .collect();
        let c = CumulantVector::from_higher(higher);
        for r in [1.5, 2.0, 3.0] {
            let mass = gauss_power_mass(r).map_err(|e| e.to_string())?;
            let e = |x: edgeworth_renyi::Result<f64>| x.map_err(|e| e.to_string());
            worst = worst.max(rel_err(e(aj_coefficient(1, r, &c))? * mass, e(a1_closed_form(r, &c))?));
            worst = worst.max(rel_err(e(aj_coefficient(2, r, &c))? * mass, e(a2_via_integrals(r, &c))?));
        }
    }
    if worst <= 1e-10 {
        Ok(format!("max relative error {worst:.2e} over 20 vectors"))
    } else {
        Err(format!("max relative error {worst:.2e} > 1e-10"))
    }
}

fn criterion_4() -> Outcome {
    let exp = experiment(r#"{"distribution": "uniform", "r_values": [2], "n_values": [32, 64, 128, 256]}"#);
    let rows = run_verify(&exp, None).map_err(|e| e.to_string())?;
    let lines = richardson_summary(&exp, &rows).map_err(|e| e.to_string())?;
    let worst = lines.iter().map(|l| l.relative_error()).fold(0.0, f64::max);
    let last = lines.last().ok_or("no Richardson pairs")?;
    if lines.len() == 3 && (last.target - 0.075).abs() < 1e-15 && worst <= 0.05 {
        Ok(format!("estimate {:.6e} vs 3/40, worst relative error {worst:.2e}", last.estimate))
    } else {
        Err(format!("worst relative error {worst:.2e} against b = {}", last.target))
    }
}

fn criterion_5() -> Outcome {
    let exp = experiment(r#"{"distribution": "uniform", "n_values": [64, 128]}"#);
    let phi0 = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let scaled = |n: usize| -> Result<f64, String> {
        let g = density_grid(&exp, n).map_err(|e| e.to_string())?;
        Ok(n as f64 * (sup_norm(&g) / phi0 - 1.0))
    };
    let estimate = 2.0 * scaled(128)? - scaled(64)?;
    let err = rel_err(estimate, -0.15);
    if err <= 0.05 {
        Ok(format!("extrapolated {estimate:.6e}, relative error {err:.2e}"))
    } else {
        Err(format!("extrapolated {estimate:.6e}, relative error {err:.2e}"))
    }
}

fn criterion_6() -> Outcome {
    let ns: Vec<String> = (8..=64).map(|n| n.to_string()).collect();
    let mut notes = Vec::new();
    for (dist, want_sign, want_verdict) in [
        (r#""uniform""#, '-', Verdict::EventuallyDecreasing),
        (r#""gamma", "alpha": 4"#, '+', Verdict::EventuallyIncreasing),
    ] {
        let exp = experiment(&format!(r#"{{"distribution": {dist}, "r_values": [2], "n_values": [{}]}}"#, ns.join(",")));
        let c = renyi_harness::commands::base_cumulants(&exp.spec).map_err(|e| e.to_string())?;
        let verdict = monotonicity_prediction(RenyiIndex::Finite(2.0), &c).map_err(|e| e.to_string())?;
        let rows = run_monotonicity(&exp, None).map_err(|e| e.to_string())?;
        let signs_ok = rows.iter().filter_map(|row| row.sign).all(|s| s == want_sign);
        let counted = rows.iter().filter(|row| row.sign.is_some()).count();
        if verdict != want_verdict || !signs_ok || counted != 56 || !rows.iter().all(|row| row.verdict_match) {
            return Err(format!("{}: verdict {verdict}, expected differences of sign {want_sign}", exp.spec.name()));
        }
        notes.push(format!("{} {verdict}", exp.spec.name()));
    }
    Ok(notes.join("; "))
}

fn criterion_7() -> Outcome {
    let exp = experiment(r#"{"distribution": "gamma", "alpha": 4, "n_values": [64, 128]}"#);
    let scaled = |n: usize| -> Result<f64, String> {
        let g = density_grid(&exp, n).map_err(|e| e.to_string())?;
        Ok(n as f64 * kl_to_gaussian(&g))
    };
    let estimate = 2.0 * scaled(128)? - scaled(64)?;
    let err = rel_err(estimate, 1.0 / 12.0);
    if err <= 0.10 {
        Ok(format!("extrapolated n*D = {estimate:.6e}, relative error {err:.2e}"))
    } else {
        Err(format!("extrapolated n*D = {estimate:.6e}, relative error {err:.2e}"))
    }
}

fn criterion_8() -> Outcome {
    let exp = experiment(r#"{"distribution": "uniform", "edgeworth_order": 4, "n_values": [16, 32, 64, 128, 256]}"#);
    let rows = run_locallimit(&exp, None).map_err(|e| e.to_string())?;
    let slope = rows[0].fitted_slope.ok_or("no slope")?;
    if slope <= -0.9 {
        Ok(format!("fitted slope {slope:.4}"))
    } else {
        Err(format!("fitted slope {slope:.4} > -0.9"))
    }
}

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// `∫ p_T²` for the sum `T` of `n` uniforms on `[0, 1]`: the density of
/// `T - T'` at zero, i.e. the sum of `2n` uniforms evaluated at `n`.
fn irwin_hall_square_integral(n: u64) -> Rational {
    let m = 2 * n;
    let mut total = BigInt::zero();
    for k in 0..=n {
        let term = binomial(m, k) * BigInt::from(n - k).pow((m - 1) as u32);
        total += if k % 2 == 0 { term } else { -term };
    }
    let fact: BigInt = (1..m).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
    Rational::new(total, fact)
}

fn criterion_9() -> Outcome {
    let exp = experiment(r#"{"distribution": "uniform", "n_values": [2, 3, 4]}"#);
    let mut worst = 0.0f64;
    for n in [2u64, 3, 4] {
        let exact = irwin_hall_square_integral(n);
        let exact = edgeworth_renyi::exactpoly::rational_to_f64(&exact.abs()) * (n as f64).sqrt() / (2.0 * 3f64.sqrt());
        let g = density_grid(&exp, n as usize).map_err(|e| e.to_string())?;
        worst = worst.max((lr_integral(&g, 2.0).map_err(|e| e.to_string())? - exact).abs());
    }
    if worst <= 1e-7 {
        Ok(format!("max absolute error {worst:.2e}"))
    } else {
        Err(format!("max absolute error {worst:.2e} > 1e-7"))
    }
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("verify.json");
    std::fs::write(
        &config,
        r#"{"distribution": "gamma", "alpha": 4, "r_values": [1, 2, 3, "inf"], "n_values": [4, 8, 16, 32]}"#,
    )
    .map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_renyi-clt"))
            .args(["verify", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("verify exited with {}", status.status));
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    if outputs[0] == outputs[1] && !outputs[0].is_empty() {
        Ok(format!("{} identical bytes", outputs[0].len()))
    } else {
        Err("verify outputs differ between runs".into())
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("symbolic goldens", Duration::from_secs(1), criterion_1),
        ("Hermite power integrals", Duration::from_secs(1), criterion_2),
        ("two-route A1/A2 identity", Duration::from_secs(10), criterion_3),
        ("uniform Richardson n(h_2 - h_2(Z)) -> 3/40", Duration::from_secs(30), criterion_4),
        ("uniform sup-norm coefficient -> -0.15", Duration::from_secs(30), criterion_5),
        ("N_2 monotonicity, uniform and Gamma(4)", Duration::from_secs(60), criterion_6),
        ("Gamma(4) n*D(Z_n||Z) -> 1/12", Duration::from_secs(30), criterion_7),
        ("uniform local limit slope, m = 4", Duration::from_secs(60), criterion_8),
        ("Irwin-Hall L2 oracle", Duration::from_secs(30), criterion_9),
        ("verify determinism", Duration::from_secs(120), criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= *budget => (true, d),
            Ok(d) => (false, format!("{d}; exceeded budget {budget:?}")),
            Err(d) => (false, d),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} [{:>2}] {name}: {detail} ({:.2}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
