//! Exit criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p bellcond --test acceptance -- --nocapture --test-threads=1`
//! to see them in order.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use bellcond::{cmd_analytic, cmd_simulate, OutputRecord, Overrides, RunConfigFile, RunSettings};
use bellcond_core::random;
use bellcond_core::rng::CounterStream;
use bellcond_core::{
    chsh_complete, chsh_conditional, complete_correlation_km, composite_average,
    conditional_correlation, expectation, pair_correlation, polarization_observable, product_state,
    setting_weight, BellState, ChshAngles, SettingModel,
};

const IDENTITY_TOL: f64 = 1e-12;
const SIGMAS: f64 = 5.0;
const TSIRELSON: f64 = 2.0 * SQRT_2;

fn report(id: u32, name: &str, passed: bool, elapsed: Duration, detail: String) {
    let status = if passed { "PASS" } else { "FAIL" };
    println!(
        "[{status}] AC{id} {name} ({:.3} s): {detail}",
        elapsed.as_secs_f64()
    );
    assert!(passed, "AC{id} {name}: {detail}");
}

fn tsirelson_settings(trials: u64, seed: u64, workers: usize) -> RunSettings {
    let overrides = Overrides {
        trials: Some(trials),
        seed: Some(seed),
        workers: Some(workers),
        ..Default::default()
    };
    RunSettings::resolve(RunConfigFile::default(), &overrides).unwrap()
}

fn random_angles(rng: &mut CounterStream) -> ChshAngles {
    ChshAngles::new(
        random::angle(rng),
        random::angle(rng),
        random::angle(rng),
        random::angle(rng),
    )
    .unwrap()
}

#[test]
fn ac1_tsirelson_bound_reproduction() {
    let t = Instant::now();
    let r = cmd_analytic(&tsirelson_settings(1, 0, 1)).unwrap();
    let el = t.elapsed();
    let c = r.analytic.chsh_conditional;
    let ok = (c - TSIRELSON).abs() <= IDENTITY_TOL && el < Duration::from_secs(1);
    report(
        1,
        "Tsirelson bound C = 2√2",
        ok,
        el,
        format!("C = {c:.15}, |C - 2√2| = {:.1e}", (c - TSIRELSON).abs()),
    );
}

#[test]
fn ac2_deflation_law() {
    let t = Instant::now();
    let r = cmd_analytic(&tsirelson_settings(1, 0, 1)).unwrap();
    let el = t.elapsed();
    let (big, small) = (r.analytic.chsh_conditional, r.analytic.chsh_complete);
    let ok = (small - big / 4.0).abs() <= IDENTITY_TOL
        && (small - FRAC_1_SQRT_2).abs() <= IDENTITY_TOL
        && el < Duration::from_secs(1);
    report(
        2,
        "deflation c = C/4 = √2/2",
        ok,
        el,
        format!("c = {small:.15}, C/4 = {:.15}", big / 4.0),
    );
}

#[test]
fn ac3_sigma_cancellation() {
    let t = Instant::now();
    let mut rng = CounterStream::new(3, 0);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for _ in 0..100 {
        let model = SettingModel::new(
            random::probability_pair(&mut rng, 0.01),
            random::probability_pair(&mut rng, 0.01),
        )
        .unwrap();
        let angles = random_angles(&mut rng);
        for bell in BellState::ALL {
            let rho = bell.density();
            for i in 0..2 {
                for j in 0..2 {
                    let (a, b) = (angles.left(i).unwrap(), angles.right(j).unwrap());
                    let cond = conditional_correlation(&rho, &model, i, j, &a, &b).unwrap();
                    let pair = pair_correlation(&rho, &a, &b).unwrap();
                    worst = worst.max((cond - pair).abs());
                    cases += 1;
                }
            }
        }
    }
    let el = t.elapsed();
    let ok = worst <= IDENTITY_TOL && el < Duration::from_secs(10);
    report(
        3,
        "sigma cancellation",
        ok,
        el,
        format!("{cases} cases, max |C_cond - C| = {worst:.1e}"),
    );
}

#[test]
fn ac4_factorization_identities() {
    let t = Instant::now();
    let mut rng = CounterStream::new(4, 0);
    let mut worst_avg: f64 = 0.0;
    for _ in 0..100 {
        let rho = random::density(&mut rng, 4).unwrap();
        let sigma = random::density(&mut rng, 4).unwrap();
        let a = random::hermitian(&mut rng, 4).unwrap();
        let p = random::rank_one_projector(&mut rng, 4).unwrap();
        let m = composite_average(&rho, &sigma, &a, &p).unwrap();
        let want = expectation(rho.matrix(), &a).unwrap()
            * expectation(sigma.matrix(), p.matrix()).unwrap();
        worst_avg = worst_avg.max((m - want).abs());
    }
    let mut worst_corr: f64 = 0.0;
    for _ in 0..100 {
        let rho = random::density(&mut rng, 4).unwrap();
        let model = SettingModel::new(
            random::probability_pair(&mut rng, 0.0),
            random::probability_pair(&mut rng, 0.0),
        )
        .unwrap();
        let a = polarization_observable(random::angle(&mut rng));
        let b = random::dichotomic(&mut rng).unwrap();
        let k = usize::from(rng.next_uniform() < 0.5);
        let m = usize::from(rng.next_uniform() < 0.5);
        let full = complete_correlation_km(&rho, &model, &a, &b, k, m).unwrap();
        let want = pair_correlation(&rho, &a, &b).unwrap() * setting_weight(&model, k, m).unwrap();
        worst_corr = worst_corr.max((full - want).abs());
    }
    let el = t.elapsed();
    let ok =
        worst_avg <= IDENTITY_TOL && worst_corr <= IDENTITY_TOL && el < Duration::from_secs(30);
    report(
        4,
        "factorization m = M g and c_ij,km = C_ij g_km",
        ok,
        el,
        format!("max residuals {worst_avg:.1e} (averages), {worst_corr:.1e} (16-dim traces)"),
    );
}

struct McRun {
    record: OutputRecord,
    elapsed: Duration,
}

fn million_trial_run() -> &'static McRun {
    static RUN: OnceLock<McRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let t = Instant::now();
        let record = cmd_simulate(&tsirelson_settings(1_000_000, 42, 4)).unwrap();
        McRun {
            record,
            elapsed: t.elapsed(),
        }
    })
}

#[test]
fn ac5_monte_carlo_consistency() {
    let run = million_trial_run();
    let sim = run.record.simulation.as_ref().unwrap();
    let est = &sim.estimates;
    let se = &est.standard_errors;
    let mut ok = run.elapsed < Duration::from_secs(60);
    let mut worst_z: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let z = (est.conditional[i][j].unwrap() - run.record.analytic.pair[i][j]).abs()
                / se.conditional[i][j].unwrap();
            worst_z = worst_z.max(z);
            ok &= z <= SIGMAS;
        }
    }
    let c_hat = est.chsh_complete_hat;
    let z_c = (c_hat - FRAC_1_SQRT_2).abs() / se.chsh_complete_hat.unwrap();
    let big_hat = est.chsh_conditional_hat.unwrap();
    ok &= z_c <= SIGMAS && (big_hat - TSIRELSON).abs() < 0.01;
    report(
        5,
        "Monte Carlo consistency",
        ok,
        run.elapsed,
        format!(
            "max z(C_ij) = {worst_z:.2}, c_hat = {c_hat:.5} (z = {z_c:.2}), C_hat = {big_hat:.5} (|diff| = {:.4})",
            (big_hat - TSIRELSON).abs()
        ),
    );
}

#[test]
fn ac6_empirical_inflation() {
    let run = million_trial_run();
    let est = &run.record.simulation.as_ref().unwrap().estimates;
    let mut ok = true;
    let mut worst_z: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let z = (est.inflation[i][j].unwrap() - 4.0).abs()
                / est.standard_errors.inflation[i][j].unwrap();
            worst_z = worst_z.max(z);
            ok &= z <= SIGMAS;
        }
    }
    report(
        6,
        "empirical inflation total/N_ij -> 4",
        ok,
        run.elapsed,
        format!("N_ij = {:?}, max z = {worst_z:.2}", est.setting_counts),
    );
}

#[test]
fn ac7_bound_properties() {
    let t = Instant::now();
    let mut rng = CounterStream::new(7, 0);
    let rho = BellState::PhiPlus.density();
    let mut max_bell: f64 = 0.0;
    for _ in 0..10_000 {
        max_bell = max_bell.max(
            chsh_conditional(&rho, &random_angles(&mut rng))
                .unwrap()
                .abs(),
        );
    }
    let mut max_product: f64 = 0.0;
    for _ in 0..1_000 {
        let prod = product_state(
            &random::density(&mut rng, 2).unwrap(),
            &random::density(&mut rng, 2).unwrap(),
        )
        .unwrap();
        max_product = max_product.max(
            chsh_conditional(&prod, &random_angles(&mut rng))
                .unwrap()
                .abs(),
        );
    }
    let mut max_complete: f64 = 0.0;
    for _ in 0..1_000 {
        let state = random::density(&mut rng, 4).unwrap();
        let model = SettingModel::new(
            random::probability_pair(&mut rng, 0.0),
            random::probability_pair(&mut rng, 0.0),
        )
        .unwrap();
        max_complete = max_complete.max(
            chsh_complete(&state, &model, &random_angles(&mut rng))
                .unwrap()
                .abs(),
        );
    }
    let el = t.elapsed();
    let ok =
        max_bell <= TSIRELSON + 1e-9 && max_product <= 2.0 + 1e-9 && max_complete <= 1.0 + 1e-9;
    report(
        7,
        "bounds |C| <= 2√2, product |C| <= 2, |c| <= 1",
        ok,
        el,
        format!("max |C| = {max_bell:.12}, product max |C| = {max_product:.12}, max |c| = {max_complete:.12}"),
    );
}

#[test]
fn ac8_determinism_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"state": "phi_plus", "trials": 1000000, "seed": 42}"#,
    )
    .unwrap();
    let t = Instant::now();
    let run = |workers: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_bellcond"))
            .args(["simulate", "--config"])
            .arg(&config)
            .args(["--workers", workers])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let one = run("1");
    let eight = run("8");
    let el = t.elapsed();
    let ok = !one.is_empty() && one == eight;
    report(
        8,
        "determinism workers=1 vs workers=8",
        ok,
        el,
        format!("{} bytes each, identical = {}", one.len(), one == eight),
    );
}
