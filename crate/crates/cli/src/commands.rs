use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use bellcond_core::{
    chsh_complete, chsh_conditional, estimate, ChshAngles, CorrelationReport, Experiment,
    SettingModel,
};
use serde::Serialize;

use crate::config::RunSettings;
use crate::error::{CliError, Result};
use crate::output::{cell, csv_writer, finish, OutputRecord, SimulationSection, VERSION};

fn analytic_report(settings: &RunSettings) -> Result<CorrelationReport> {
    let cfg = &settings.experiment;
    Ok(CorrelationReport::compute(
        &cfg.state,
        &cfg.model,
        &cfg.angles,
    )?)
}

/// Closed-form tables for the configured state, generators and angles.
pub fn cmd_analytic(settings: &RunSettings) -> Result<OutputRecord> {
    Ok(OutputRecord {
        version: VERSION.to_owned(),
        command: "analytic".to_owned(),
        config: settings.echo.clone(),
        analytic: analytic_report(settings)?,
        simulation: None,
    })
}

/// Monte Carlo run with the analytic values alongside.
pub fn cmd_simulate(settings: &RunSettings) -> Result<OutputRecord> {
    let analytic = analytic_report(settings)?;
    let experiment = Experiment::new(settings.experiment.clone())?;
    let tally = experiment.run();
    let estimates = estimate(&tally)?;
    Ok(OutputRecord {
        version: VERSION.to_owned(),
        command: "simulate".to_owned(),
        config: settings.echo.clone(),
        analytic,
        simulation: Some(SimulationSection { tally, estimates }),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepAxis {
    /// Offset added to `b0`.
    #[value(name = "b0-offset")]
    B0Offset,
    P0,
    Q0,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::B0Offset => "b0-offset",
            SweepAxis::P0 => "p0",
            SweepAxis::Q0 => "q0",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "b0-offset" => Ok(SweepAxis::B0Offset),
            "p0" => Ok(SweepAxis::P0),
            "q0" => Ok(SweepAxis::Q0),
            other => Err(CliError::Config(format!("unknown sweep axis '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRange {
    pub axis: SweepAxis,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl SweepRange {
    /// `start`/`end` default to `[0, 1]` for probabilities and `[-π, π]` for
    /// the angle offset (in degrees when `degrees` is set).
    pub fn new(
        axis: SweepAxis,
        start: Option<f64>,
        end: Option<f64>,
        steps: usize,
        degrees: bool,
    ) -> Result<Self> {
        let (lo, hi) = match axis {
            SweepAxis::B0Offset if degrees => (-180.0, 180.0),
            SweepAxis::B0Offset => (-PI, PI),
            _ => (0.0, 1.0),
        };
        let (mut start, mut end) = (start.unwrap_or(lo), end.unwrap_or(hi));
        if steps < 2 {
            return Err(CliError::Config(format!(
                "sweep needs at least 2 steps, got {steps}"
            )));
        }
        if !start.is_finite() || !end.is_finite() {
            return Err(CliError::Config("sweep range must be finite".into()));
        }
        match axis {
            SweepAxis::P0 | SweepAxis::Q0 => {
                let ok = |x: f64| (0.0..=1.0).contains(&x);
                if !ok(start) || !ok(end) {
                    return Err(CliError::Config(format!(
                        "{axis} range [{start}, {end}] leaves [0, 1]"
                    )));
                }
            }
            SweepAxis::B0Offset if degrees => {
                start = start.to_radians();
                end = end.to_radians();
            }
            SweepAxis::B0Offset => {}
        }
        Ok(Self {
            axis,
            start,
            end,
            steps,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let last = self.steps - 1;
        (0..self.steps).map(move |k| {
            if k == last {
                self.end
            } else {
                self.start + (self.end - self.start) * k as f64 / last as f64
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: f64,
    #[serde(rename = "C")]
    pub chsh_conditional: f64,
    #[serde(rename = "c")]
    pub chsh_complete: f64,
    /// Absent where `C` vanishes.
    #[serde(rename = "c_over_C")]
    pub c_over_c: Option<f64>,
}

pub const SWEEP_HEADER: [&str; 4] = ["parameter", "C", "c", "c_over_C"];

/// Evaluates `C` and `c` along one axis with everything else held fixed.
pub fn cmd_sweep(settings: &RunSettings, range: &SweepRange) -> Result<Vec<SweepRow>> {
    let cfg = &settings.experiment;
    range
        .points()
        .map(|x| {
            let (mut p, mut q) = (cfg.model.p(), cfg.model.q());
            let mut angles: ChshAngles = cfg.angles;
            match range.axis {
                SweepAxis::B0Offset => angles.b0 += x,
                // 1 - x keeps the pair exactly normalized
                SweepAxis::P0 => p = [x, 1.0 - x],
                SweepAxis::Q0 => q = [x, 1.0 - x],
            }
            let model = SettingModel::new(p, q)?;
            let big = chsh_conditional(&cfg.state, &angles)?;
            let small = chsh_complete(&cfg.state, &model, &angles)?;
            Ok(SweepRow {
                parameter: x,
                chsh_conditional: big,
                chsh_complete: small,
                c_over_c: (big.abs() > 1e-12).then(|| small / big),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv_writer();
    w.write_record(SWEEP_HEADER).unwrap();
    for r in rows {
        w.write_record([
            cell(Some(r.parameter)),
            cell(Some(r.chsh_conditional)),
            cell(Some(r.chsh_complete)),
            cell(r.c_over_c),
        ])
        .unwrap();
    }
    finish(w)
}
