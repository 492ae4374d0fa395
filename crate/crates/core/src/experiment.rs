//! Event-by-event simulation of the random-setting CHSH experiment.
//!
//! In every trial the generators `G1`, `G2` pick which analyzer is open on
//! each wing, and the photon pair yields one `±1` outcome per wing with Born
//! probabilities `Tr(rho (Π_a ⊗ Π_b))`, `Π_± = (I ± A)/2`. Detectors are
//! ideal. A blocked channel contributes the value 0 to the ternary
//! observables, which is what the unconditional estimator averages over.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::correlations::{chsh_sign, ChshAngles, DichotomicObservable};
use crate::error::{Error, Result};
use crate::linalg::{real_trace, ComplexMatrix};
use crate::rng::draw_uniform;
use crate::states::{DensityOperator, SettingModel};

/// Trials per work item when tallying in parallel.
pub const CHUNK_TRIALS: u64 = 1 << 14;

const DRAW_G1: u64 = 0;
const DRAW_G2: u64 = 1;
const DRAW_OUTCOME: u64 = 2;

/// Outcome index used throughout the tallies: 0 is `+1`, 1 is `-1`.
#[inline]
pub fn outcome_index(value: i8) -> usize {
    usize::from(value < 0)
}

#[inline]
pub fn outcome_value(index: usize) -> i8 {
    if index == 0 {
        1
    } else {
        -1
    }
}

/// Everything needed to run the experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub state: DensityOperator,
    pub angles: ChshAngles,
    pub model: SettingModel,
    pub trials: u64,
    pub seed: u64,
    /// Thread count hint. Never affects results.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(
        state: DensityOperator,
        angles: ChshAngles,
        p: [f64; 2],
        q: [f64; 2],
        trials: u64,
        seed: u64,
        workers: usize,
    ) -> Result<Self> {
        if state.dim() != 4 {
            return Err(Error::DimensionMismatch {
                left: 4,
                right: state.dim(),
            });
        }
        if trials == 0 {
            return Err(Error::NoTrials);
        }
        if workers == 0 {
            return Err(Error::NoWorkers);
        }
        let angles = ChshAngles::new(angles.a0, angles.a1, angles.b0, angles.b1)?;
        Ok(Self {
            state,
            angles,
            model: SettingModel::new(p, q)?,
            trials,
            seed,
            workers,
        })
    }
}

/// One trial: the generator outputs and the outcome at each open channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub g1: u8,
    pub g2: u8,
    pub a: i8,
    pub b: i8,
}

impl TrialRecord {
    /// Ternary left observable `𝒜_i`: the outcome if channel `i` was open, else 0.
    pub fn left_value(&self, i: u8) -> i8 {
        if self.g1 == i {
            self.a
        } else {
            0
        }
    }

    /// Ternary right observable `ℬ_j`.
    pub fn right_value(&self, j: u8) -> i8 {
        if self.g2 == j {
            self.b
        } else {
            0
        }
    }
}

/// Outcome counts indexed `[i][j][a][b]` with `a`, `b` in outcome-index form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyTable {
    pub counts: [[[[u64; 2]; 2]; 2]; 2],
    pub total: u64,
}

impl TallyTable {
    pub fn record(&mut self, r: &TrialRecord) {
        self.counts[r.g1 as usize][r.g2 as usize][outcome_index(r.a)][outcome_index(r.b)] += 1;
        self.total += 1;
    }

    /// `N_ij`.
    pub fn setting_count(&self, i: usize, j: usize) -> u64 {
        self.counts[i][j].iter().flatten().sum()
    }

    /// `Σ a·b` over trials with settings `(i, j)`.
    pub fn product_sum(&self, i: usize, j: usize) -> i64 {
        let c = &self.counts[i][j];
        (c[0][0] + c[1][1]) as i64 - (c[0][1] + c[1][0]) as i64
    }
}

impl AddAssign<&TallyTable> for TallyTable {
    fn add_assign(&mut self, rhs: &TallyTable) {
        for (a, b) in self
            .counts
            .iter_mut()
            .flatten()
            .flatten()
            .flatten()
            .zip(rhs.counts.iter().flatten().flatten().flatten())
        {
            *a += b;
        }
        self.total += rhs.total;
    }
}

impl Add for TallyTable {
    type Output = TallyTable;
    fn add(mut self, rhs: TallyTable) -> TallyTable {
        self += &rhs;
        self
    }
}

fn spectral_projectors(obs: &DichotomicObservable) -> Result<[ComplexMatrix; 2]> {
    let id = ComplexMatrix::identity(2)?;
    Ok([
        (&id + obs.matrix()).scale(0.5),
        (&id - obs.matrix()).scale(0.5),
    ])
}

/// Born-rule joint distribution `P(a, b)` for each setting pair, in
/// outcome-index order `[(+,+), (+,-), (-,+), (-,-)]`.
#[allow(clippy::needless_range_loop)]
pub fn joint_distributions(
    state: &DensityOperator,
    angles: &ChshAngles,
) -> Result<[[[f64; 4]; 2]; 2]> {
    let mut out = [[[0.0; 4]; 2]; 2];
    for i in 0..2 {
        let left = spectral_projectors(&angles.left(i)?)?;
        for j in 0..2 {
            let right = spectral_projectors(&angles.right(j)?)?;
            for (ai, pa) in left.iter().enumerate() {
                for (bi, pb) in right.iter().enumerate() {
                    let prob = real_trace(state.matrix(), &pa.kron(pb)?)?;
                    out[i][j][ai * 2 + bi] = prob.max(0.0);
                }
            }
        }
    }
    Ok(out)
}

/// A configuration with its outcome distributions precomputed.
#[derive(Clone, Debug)]
pub struct Experiment {
    config: ExperimentConfig,
    joint: [[[f64; 4]; 2]; 2],
    cumulative: [[[f64; 4]; 2]; 2],
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let joint = joint_distributions(&config.state, &config.angles)?;
        let mut cumulative = [[[0.0; 4]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += joint[i][j][k];
                    cumulative[i][j][k] = acc;
                }
            }
        }
        Ok(Self {
            config,
            joint,
            cumulative,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn joint(&self) -> &[[[f64; 4]; 2]; 2] {
        &self.joint
    }

    pub fn run_trial(&self, trial: u64) -> TrialRecord {
        let seed = self.config.seed;
        let p0 = self.config.model.p()[0];
        let q0 = self.config.model.q()[0];
        let g1 = usize::from(draw_uniform(seed, trial, DRAW_G1) >= p0);
        let g2 = usize::from(draw_uniform(seed, trial, DRAW_G2) >= q0);
        // scale by the total so rounding in the normalization cannot leave a gap
        let cum = &self.cumulative[g1][g2];
        let u = draw_uniform(seed, trial, DRAW_OUTCOME) * cum[3];
        let probs = &self.joint[g1][g2];
        let k = (0..4)
            .find(|&k| u < cum[k] && probs[k] > 0.0)
            .unwrap_or_else(|| (0..4).rev().find(|&k| probs[k] > 0.0).unwrap_or(3));
        TrialRecord {
            g1: g1 as u8,
            g2: g2 as u8,
            a: outcome_value(k / 2),
            b: outcome_value(k % 2),
        }
    }

    fn tally_range(&self, start: u64, end: u64) -> TallyTable {
        let mut t = TallyTable::default();
        for trial in start..end {
            t.record(&self.run_trial(trial));
        }
        t
    }

    /// Single-threaded tally of all trials.
    pub fn run_sequential(&self) -> TallyTable {
        self.tally_range(0, self.config.trials)
    }

    /// Tally on a dedicated pool of `workers` threads.
    #[cfg(feature = "parallel")]
    pub fn run_parallel(&self, workers: usize) -> TallyTable {
        use rayon::prelude::*;

        let trials = self.config.trials;
        let chunks = trials.div_ceil(CHUNK_TRIALS);
        let work = || {
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let start = c * CHUNK_TRIALS;
                    self.tally_range(start, (start + CHUNK_TRIALS).min(trials))
                })
                .reduce(TallyTable::default, |a, b| a + b)
        };
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(work),
            Err(_) => self.run_sequential(),
        }
    }

    /// Tally honoring the configured worker count. Identical output for any
    /// worker count.
    pub fn run(&self) -> TallyTable {
        #[cfg(feature = "parallel")]
        if self.config.workers > 1 {
            return self.run_parallel(self.config.workers);
        }
        self.run_sequential()
    }
}

/// One trial of `config`. Prefer [`Experiment::run_trial`] in loops; this
/// recomputes the outcome distributions on every call.
pub fn run_trial(config: &ExperimentConfig, trial: u64) -> Result<TrialRecord> {
    Ok(Experiment::new(config.clone())?.run_trial(trial))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<TallyTable> {
    Ok(Experiment::new(config.clone())?.run())
}

/// Estimates from a tally. Conditional quantities are `None` for setting
/// pairs that never occurred and standard errors are `None` where fewer
/// than two samples exist.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub total: u64,
    pub setting_counts: [[u64; 2]; 2],
    /// `Ĉ_ij`: mean of `a·b` over trials with settings `(i, j)`.
    pub conditional: [[Option<f64>; 2]; 2],
    /// `ĉ_ij`: mean of `𝒜_i ℬ_j` over all trials, zeros included.
    pub unconditional: [[f64; 2]; 2],
    pub chsh_conditional_hat: Option<f64>,
    pub chsh_complete_hat: f64,
    /// `total / N_ij`, the empirical inflation factor.
    pub inflation: [[Option<f64>; 2]; 2],
    pub standard_errors: StandardErrors,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub conditional: [[Option<f64>; 2]; 2],
    pub unconditional: [[Option<f64>; 2]; 2],
    pub chsh_conditional_hat: Option<f64>,
    pub chsh_complete_hat: Option<f64>,
    pub inflation: [[Option<f64>; 2]; 2],
}

/// Standard error of a sample mean given `n`, the mean and the mean square.
fn mean_se(n: u64, mean: f64, mean_sq: f64) -> Option<f64> {
    if n < 2 {
        return None;
    }
    let n = n as f64;
    let var = (n / (n - 1.0)) * (mean_sq - mean * mean).max(0.0);
    Some((var / n).sqrt())
}

pub fn estimate(tally: &TallyTable) -> Result<EstimateReport> {
    if tally.total == 0 {
        return Err(Error::NoTrials);
    }
    let total = tally.total;
    let t = total as f64;
    let mut setting_counts = [[0u64; 2]; 2];
    let mut conditional = [[None; 2]; 2];
    let mut unconditional = [[0.0; 2]; 2];
    let mut inflation = [[None; 2]; 2];
    let mut se = StandardErrors {
        conditional: [[None; 2]; 2],
        unconditional: [[None; 2]; 2],
        chsh_conditional_hat: None,
        chsh_complete_hat: None,
        inflation: [[None; 2]; 2],
    };
    let mut chsh_cond = Some(0.0);
    let mut chsh_cond_var = Some(0.0);
    let mut chsh_complete = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let n = tally.setting_count(i, j);
            let s = tally.product_sum(i, j) as f64;
            setting_counts[i][j] = n;
            unconditional[i][j] = s / t;
            se.unconditional[i][j] = mean_se(total, s / t, n as f64 / t);
            chsh_complete += chsh_sign(i, j) * s / t;
            if n > 0 {
                let nf = n as f64;
                let mean = s / nf;
                conditional[i][j] = Some(mean);
                se.conditional[i][j] = mean_se(n, mean, 1.0);
                let ratio = t / nf;
                inflation[i][j] = Some(ratio);
                let g = nf / t;
                se.inflation[i][j] = Some(ratio * ratio * (g * (1.0 - g) / t).sqrt());
            }
            chsh_cond = chsh_cond
                .zip(conditional[i][j])
                .map(|(acc, c)| acc + chsh_sign(i, j) * c);
            chsh_cond_var = chsh_cond_var
                .zip(se.conditional[i][j])
                .map(|(acc, e)| acc + e * e);
        }
    }
    se.chsh_conditional_hat = chsh_cond_var.map(f64::sqrt);
    // every trial contributes exactly one signed product, so E[X^2] = 1
    se.chsh_complete_hat = mean_se(total, chsh_complete, 1.0);
    Ok(EstimateReport {
        total,
        setting_counts,
        conditional,
        unconditional,
        chsh_conditional_hat: chsh_cond,
        chsh_complete_hat: chsh_complete,
        inflation,
        standard_errors: se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::BellState;

    fn config(angles: ChshAngles, p: [f64; 2], q: [f64; 2], trials: u64) -> ExperimentConfig {
        ExperimentConfig::new(BellState::PhiPlus.density(), angles, p, q, trials, 42, 1).unwrap()
    }

    fn zero_angles() -> ChshAngles {
        ChshAngles::new(0.0, 0.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn aligned_analyzers_always_agree() {
        let exp = Experiment::new(config(zero_angles(), [0.5, 0.5], [0.5, 0.5], 1000)).unwrap();
        for s in 0..2 {
            for t in 0..2 {
                let d = exp.joint()[s][t];
                assert!((d[0] - 0.5).abs() < 1e-12 && (d[3] - 0.5).abs() < 1e-12);
                assert!(d[1].abs() < 1e-12 && d[2].abs() < 1e-12);
            }
        }
        for trial in 0..1000 {
            let r = exp.run_trial(trial);
            assert_eq!(r.a * r.b, 1);
        }
    }

    #[test]
    fn deterministic_generator_never_switches() {
        let exp =
            Experiment::new(config(ChshAngles::tsirelson(), [1.0, 0.0], [0.5, 0.5], 500)).unwrap();
        assert!((0..500).all(|t| exp.run_trial(t).g1 == 0));
        let tally = exp.run();
        assert_eq!(tally.setting_count(1, 0) + tally.setting_count(1, 1), 0);
    }

    #[test]
    fn single_trial_tally() {
        let tally =
            run_experiment(&config(ChshAngles::tsirelson(), [0.5, 0.5], [0.5, 0.5], 1)).unwrap();
        assert_eq!(tally.total, 1);
        let est = estimate(&tally).unwrap();
        assert_eq!(
            est.conditional
                .iter()
                .flatten()
                .filter(|c| c.is_none())
                .count(),
            3
        );
        assert_eq!(est.chsh_conditional_hat, None);
    }

    #[test]
    fn setting_counts_concentrate() {
        let tally = run_experiment(&config(
            ChshAngles::tsirelson(),
            [0.5, 0.5],
            [0.5, 0.5],
            1000,
        ))
        .unwrap();
        let bound = 5.0 * (1000.0f64 * 0.25 * 0.75).sqrt();
        for i in 0..2 {
            for j in 0..2 {
                let n = tally.setting_count(i, j) as f64;
                assert!((n - 250.0).abs() <= bound, "N_{i}{j} = {n}");
            }
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn worker_count_does_not_change_tally() {
        let trials = 3 * CHUNK_TRIALS + 17;
        let exp = Experiment::new(config(
            ChshAngles::tsirelson(),
            [0.3, 0.7],
            [0.6, 0.4],
            trials,
        ))
        .unwrap();
        let seq = exp.run_sequential();
        assert_eq!(seq, exp.run_parallel(8));
        assert_eq!(seq, exp.run_parallel(3));
    }

    #[test]
    fn hand_built_tally_estimates() {
        let mut tally = TallyTable::default();
        for _ in 0..7 {
            tally.record(&TrialRecord {
                g1: 0,
                g2: 0,
                a: 1,
                b: 1,
            });
        }
        for _ in 0..3 {
            tally.record(&TrialRecord {
                g1: 0,
                g2: 0,
                a: -1,
                b: -1,
            });
        }
        let est = estimate(&tally).unwrap();
        assert_eq!(est.conditional[0][0], Some(1.0));
        assert_eq!(est.unconditional[0][0], 1.0);
        assert_eq!(est.setting_counts[0][0], 10);
        assert_eq!(est.conditional[1][0], None);
        assert_eq!(est.standard_errors.conditional[0][0], Some(0.0));
        assert!(estimate(&TallyTable::default()).is_err());
    }

    #[test]
    fn ternary_views() {
        let r = TrialRecord {
            g1: 1,
            g2: 0,
            a: -1,
            b: 1,
        };
        assert_eq!((r.left_value(0), r.left_value(1)), (0, -1));
        assert_eq!((r.right_value(0), r.right_value(1)), (1, 0));
    }

    #[test]
    fn config_validation() {
        let rho = BellState::PhiPlus.density();
        let t = ChshAngles::tsirelson();
        let u = [0.5, 0.5];
        assert!(ExperimentConfig::new(rho.clone(), t, u, u, 0, 1, 1).is_err());
        assert!(ExperimentConfig::new(rho.clone(), t, u, u, 1, 1, 0).is_err());
        assert!(ExperimentConfig::new(rho.clone(), t, [0.5, 0.6], u, 1, 1, 1).is_err());
        let q = DensityOperator::maximally_mixed(2).unwrap();
        assert!(ExperimentConfig::new(q, t, u, u, 1, 1, 1).is_err());
    }
}
