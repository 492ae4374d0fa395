//! Quantum-measurement model of CHSH experiments in which the setting
//! generators are treated as measured subsystems.
//!
//! The analytic side ([`correlations`]) computes conditional correlations
//! `C_ij`, generator weights `g_ij` and complete correlations
//! `c_ij = C_ij g_ij` by density-operator algebra on `H1 ⊗ H2 ⊗ K1 ⊗ K2`.
//! The empirical side ([`experiment`]) samples trials one by one and
//! estimates the same quantities from outcome counts.

pub mod correlations;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod random;
pub mod rng;
pub mod states;

pub use correlations::{
    chsh_complete, chsh_conditional, complete_correlation, complete_correlation_km,
    composite_average, conditional_correlation, pair_correlation, polarization_observable,
    setting_weight, ChshAngles, CorrelationReport, DichotomicObservable,
};
pub use error::{Error, Result};
pub use experiment::{
    estimate, run_experiment, run_trial, EstimateReport, Experiment, ExperimentConfig, TallyTable,
    TrialRecord,
};
pub use linalg::{expectation, validate_density, ComplexMatrix};
pub use states::{
    bell_state, classical_mixture, luders_update, product_state, BellState, DensityOperator,
    Projector, SettingModel,
};

pub use num_complex::Complex64;
