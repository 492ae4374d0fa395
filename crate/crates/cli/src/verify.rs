//! Randomized identity suite behind `bellcond verify`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use bellcond_core::correlations::chsh_sign;
use bellcond_core::random;
use bellcond_core::rng::CounterStream;
use bellcond_core::{
    chsh_complete, chsh_conditional, complete_correlation_km, composite_average,
    conditional_correlation, expectation, luders_update, pair_correlation, product_state,
    setting_weight, validate_density, BellState, ChshAngles, DensityOperator, SettingModel,
};
use serde::Serialize;

/// Fixed seed for the suite.
pub const VERIFY_SEED: u64 = 0x5eed_c45e;

const CASES: usize = 40;
const TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Scale every generator state by 1.25 before use. Debugging aid that
    /// should make every generator-dependent check fail validation.
    pub unnormalized_sigma: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} {:<36} {}\n", c.name, c.detail));
        }
        out.push_str(&format!(
            "{} checks, {} failed\n",
            self.checks.len(),
            self.failures()
        ));
        out
    }
}

type CheckResult = Result<String, String>;

struct Ctx {
    opts: VerifyOptions,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{what}: {got} vs {want} (|diff| {:e})", (got - want).abs())
    })
}

fn random_angles(rng: &mut CounterStream) -> ChshAngles {
    ChshAngles {
        a0: random::angle(rng),
        a1: random::angle(rng),
        b0: random::angle(rng),
        b1: random::angle(rng),
    }
}

impl Ctx {
    fn perturb(&self, sigma: &DensityOperator) -> Result<(), String> {
        if self.opts.unnormalized_sigma {
            validate_density(sigma.matrix().scale(1.25))
                .map(|_| ())
                .map_err(|e| format!("generator state rejected: {e}"))
        } else {
            Ok(())
        }
    }

    fn generator_state(&self, rng: &mut CounterStream) -> Result<DensityOperator, String> {
        let s = random::density(rng, 4).map_err(|e| e.to_string())?;
        self.perturb(&s)?;
        Ok(s)
    }

    fn model(&self, p: [f64; 2], q: [f64; 2]) -> Result<SettingModel, String> {
        let m = SettingModel::new(p, q).map_err(|e| e.to_string())?;
        self.perturb(m.sigma())?;
        Ok(m)
    }

    fn random_model(&self, rng: &mut CounterStream, lo: f64) -> Result<SettingModel, String> {
        let p = random::probability_pair(rng, lo);
        let q = random::probability_pair(rng, lo);
        self.model(p, q)
    }
}

fn e<T: std::fmt::Display>(err: T) -> String {
    err.to_string()
}

fn kron_mixed_product(_: &Ctx, rng: &mut CounterStream) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..CASES {
        let m: Vec<_> = (0..4)
            .map(|_| random::hermitian(rng, 2))
            .collect::<Result<_, _>>()
            .map_err(e)?;
        let lhs = m[0]
            .kron(&m[1])
            .map_err(e)?
            .matmul(&m[2].kron(&m[3]).map_err(e)?)
            .map_err(e)?;
        let rhs = m[0]
            .matmul(&m[2])
            .map_err(e)?
            .kron(&m[1].matmul(&m[3]).map_err(e)?)
            .map_err(e)?;
        worst = worst.max(lhs.max_abs_diff(&rhs).map_err(e)?);
    }
    ensure(worst <= TOL, || format!("max residual {worst:e}"))?;
    Ok(format!("max residual {worst:.1e}"))
}

fn trace_multiplicativity(_: &Ctx, rng: &mut CounterStream) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..CASES {
        let a = random::hermitian(rng, 2).map_err(e)?;
        let b = random::hermitian(rng, 4).map_err(e)?;
        let d = a.kron(&b).map_err(e)?.trace() - a.trace() * b.trace();
        worst = worst.max(d.norm());
    }
    ensure(worst <= TOL, || format!("max residual {worst:e}"))?;
    Ok(format!("max residual {worst:.1e}"))
}

fn expectation_linearity(_: &Ctx, rng: &mut CounterStream) -> CheckResult {
    for _ in 0..CASES {
        let rho = random::density(rng, 4).map_err(e)?;
        let a = random::hermitian(rng, 4).map_err(e)?;
        let b = random::hermitian(rng, 4).map_err(e)?;
        let (s, t) = (rng.uniform_in(-2.0, 2.0), rng.uniform_in(-2.0, 2.0));
        let lhs = expectation(rho.matrix(), &(&a.scale(s) + &b.scale(t))).map_err(e)?;
        let rhs = s * expectation(rho.matrix(), &a).map_err(e)?
            + t * expectation(rho.matrix(), &b).map_err(e)?;
        close("Tr(rho(sA+tB))", lhs, rhs, TOL)?;
    }
    Ok(format!("{CASES} cases"))
}

fn setting_weights(ctx: &Ctx, rng: &mut CounterStream) -> CheckResult {
    for _ in 0..CASES {
        let model = ctx.random_model(rng, 0.0)?;
        for k in 0..2 {
            for m in 0..2 {
                let trace = model.weight_from_trace(k, m).map_err(e)?;
                close("g_km", trace, setting_weight(&model, k, m).map_err(e)?, TOL)?;
            }
        }
    }
    Ok(format!("{CASES} models"))
}

fn composite_factorization(ctx: &Ctx, rng: &mut CounterStream) -> CheckResult {
    for _ in 0..CASES {
        let rho = random::density(rng, 4).map_err(e)?;
        let sigma = ctx.generator_state(rng)?;
        let a = random::hermitian(rng, 4).map_err(e)?;
        let p = random::rank_one_projector(rng, 4).map_err(e)?;
        let m = composite_average(&rho, &sigma, &a, &p).map_err(e)?;
        let want = expectation(rho.matrix(), &a).map_err(e)?
            * expectation(sigma.matrix(), p.matrix()).map_err(e)?;
        close("m_j = M_j g_j", m, want, TOL)?;
    }
    Ok(format!("{CASES} random (rho, sigma, A, P)"))
}

fn inflation_law(ctx: &Ctx, rng: &mut CounterStream) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..CASES {
        let rho = random::density(rng, 2).map_err(e)?;
        let sigma = ctx.generator_state(rng)?;
        let a = random::hermitian(rng, 2).map_err(e)?;
        let p = random::rank_one_projector(rng, 4).map_err(e)?;
        let g = expectation(sigma.matrix(), p.matrix()).map_err(e)?;
        if g <= 1e-12 {
            continue;
        }
        let m = composite_average(&rho, &sigma, &a, &p).map_err(e)?;
        let big = expectation(rho.matrix(), &a).map_err(e)?;
        worst = worst.max((m / g - big).abs() * g.min(1.0));
    }
    ensure(worst <= TOL, || format!("scaled residual {worst:e}"))?;
    Ok(format!("scaled residual {worst:.1e}"))
}

fn complete_factorization(ctx: &Ctx, rng: &mut CounterStream) -> CheckResult {
    for _ in 0..CASES {
        let rho = random::density(rng, 4).map_err(e)?;
        let model = ctx.random_model(rng, 0.0)?;
        let a = random::dichotomic(rng).map_err(e)?;
        let b = random::dichotomic(rng).map_err(e)?;
        let (k, m) = (
            (rng.next_uniform() * 2.0) as usize,
            (rng.next_uniform() * 2.0) as usize,
        );
        let full = complete_correlation_km(&rho, &model, &a, &b, k, m).map_err(e)?;
        let want =
            pair_correlation(&rho, &a, &b).map_err(e)? * setting_weight(&model, k, m).map_err(e)?;
        close("c_ij,km = C_ij g_km", full, want, TOL)?;
    }
    Ok(format!("{CASES} 16-dim traces"))
}

fn deflation_law(ctx: &Ctx, rng: &mut CounterStream) -> CheckResult {
    let uniform = ctx.model([0.5, 0.5], [0.5, 0.5])?;
    for _ in 0..CASES {
        let rho = random::density(rng, 4).map_err(e)?;
        let angles = random_angles(rng);
        let big = chsh_conditional(&rho, &angles).map_err(e)?;
        let small = chsh_complete(&rho, &uniform, &angles).map_err(e)?;
        close("c = C/4", small, big / 4.0, TOL)?;
    }
    Ok(format!("{CASES} random states and angles"))
}

fn sigma_cancellation(ctx: &Ctx, rng: &mut CounterStream) -> CheckResult {
    for _ in 0..CASES / 4 {
        let rho = random::density(rng, 4).map_err(e)?;
        let model = ctx.random_model(rng, 0.01)?;
        let a = random::dichotomic(rng).map_err(e)?;
        let b = random::dichotomic(rng).map_err(e)?;
        let c = pair_correlation(&rho, &a, &b).map_err(e)?;
        for i in 0..2 {
            for j in 0..2 {
                let cond = conditional_correlation(&rho, &model, i, j, &a, &b).map_err(e)?;
                close("C_ij|cond", cond, c, TOL)?;
            }
        }
    }
    Ok(format!("{} random models x 4 settings", CASES / 4))
}

fn luders_idempotence(_: &Ctx, rng: &mut CounterStream) -> CheckResult {
    for _ in 0..CASES {
        let r = random::density(rng, 4).map_err(e)?;
        let m = random::rank_one_projector(rng, 4).map_err(e)?;
        let (post, w) = luders_update(&r, &m).map_err(e)?;
        close(
            "weight",
            w,
            expectation(r.matrix(), m.matrix()).map_err(e)?,
            TOL,
        )?;
        let (again, _) = luders_update(&post, &m).map_err(e)?;
        let d = again.matrix().max_abs_diff(post.matrix()).map_err(e)?;
        ensure(d <= TOL, || {
            format!("second update moved the state by {d:e}")
        })?;
    }
    Ok(format!("{CASES} cases"))
}

fn tsirelson_value(ctx: &Ctx, _: &mut CounterStream) -> CheckResult {
    let rho = BellState::PhiPlus.density();
    let t = ChshAngles::tsirelson();
    let big = chsh_conditional(&rho, &t).map_err(e)?;
    let small = chsh_complete(&rho, &ctx.model([0.5, 0.5], [0.5, 0.5])?, &t).map_err(e)?;
    close("C", big, 2.0 * SQRT_2, TOL)?;
    close("c", small, FRAC_1_SQRT_2, TOL)?;
    Ok(format!("C = {big:.15}, c = {small:.15}"))
}

fn tsirelson_bound(_: &Ctx, rng: &mut CounterStream) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..CASES * 10 {
        let angles = random_angles(rng);
        for bell in BellState::ALL {
            worst = worst.max(chsh_conditional(&bell.density(), &angles).map_err(e)?.abs());
        }
    }
    ensure(worst <= 2.0 * SQRT_2 + 1e-9, || {
        format!("|C| reached {worst}")
    })?;
    Ok(format!("max |C| = {worst:.12}"))
}

fn product_state_bound(_: &Ctx, rng: &mut CounterStream) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..CASES * 5 {
        let rho = product_state(
            &random::density(rng, 2).map_err(e)?,
            &random::density(rng, 2).map_err(e)?,
        )
        .map_err(e)?;
        worst = worst.max(
            chsh_conditional(&rho, &random_angles(rng))
                .map_err(e)?
                .abs(),
        );
    }
    ensure(worst <= 2.0 + 1e-9, || format!("|C| reached {worst}"))?;
    Ok(format!("max |C| = {worst:.12}"))
}

fn complete_bound(ctx: &Ctx, rng: &mut CounterStream) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..CASES * 5 {
        let rho = random::density(rng, 4).map_err(e)?;
        let model = ctx.random_model(rng, 0.0)?;
        let angles = random_angles(rng);
        let c = chsh_complete(&rho, &model, &angles).map_err(e)?;
        let mut sum = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                sum += chsh_sign(i, j)
                    * pair_correlation(
                        &rho,
                        &angles.left(i).map_err(e)?,
                        &angles.right(j).map_err(e)?,
                    )
                    .map_err(e)?
                    * model.p()[i]
                    * model.q()[j];
            }
        }
        close("c = sum c_ij", c, sum, TOL)?;
        worst = worst.max(c.abs());
    }
    ensure(worst <= 1.0 + 1e-9, || format!("|c| reached {worst}"))?;
    Ok(format!("max |c| = {worst:.12}"))
}

type Check = fn(&Ctx, &mut CounterStream) -> CheckResult;

const CHECKS: [(&str, Check); 14] = [
    ("kron mixed product", kron_mixed_product),
    ("kron trace multiplicativity", trace_multiplicativity),
    ("expectation linearity", expectation_linearity),
    ("setting weights g_km = p_k q_m", setting_weights),
    ("composite average m = M g", composite_factorization),
    ("inflation law m / g = M", inflation_law),
    ("complete correlation c = C g", complete_factorization),
    ("deflation law c = C/4", deflation_law),
    ("sigma cancellation", sigma_cancellation),
    ("Luders idempotence", luders_idempotence),
    ("Tsirelson value", tsirelson_value),
    ("Tsirelson bound on Bell states", tsirelson_bound),
    ("product-state bound 2", product_state_bound),
    ("complete CHSH bound 1", complete_bound),
];

/// Runs every check; each gets its own counter stream.
pub fn cmd_verify(opts: VerifyOptions) -> VerifyReport {
    let ctx = Ctx { opts };
    let checks = CHECKS
        .iter()
        .enumerate()
        .map(|(idx, (name, check))| {
            let mut rng = CounterStream::new(VERIFY_SEED, idx as u64);
            let (passed, detail) = match check(&ctx, &mut rng) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome {
                name,
                passed,
                detail,
            }
        })
        .collect();
    VerifyReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_suite_passes() {
        let r = cmd_verify(VerifyOptions::default());
        assert!(r.checks.len() >= 8);
        assert_eq!(r.failures(), 0, "{}", r.render());
    }

    #[test]
    fn unnormalized_sigma_is_caught() {
        let r = cmd_verify(VerifyOptions {
            unnormalized_sigma: true,
        });
        assert!(r.failures() >= 6, "{}", r.render());
        assert!(r
            .checks
            .iter()
            .filter(|c| !c.passed)
            .all(|c| c.detail.contains("generator state rejected")));
    }
}
