//! Conditional and complete correlations of the CHSH setup.
//!
//! The measured system lives on `H = H1 ⊗ H2` (the photon pair) and the
//! setting generators on `K = K1 ⊗ K2`. Every composite quantity is computed
//! twice, once as a full trace on `H ⊗ K` and once in factorized form, and the
//! two are required to agree to [`IDENTITY_TOL`].

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expectation, pauli_x, pauli_z, ComplexMatrix, VALIDATION_TOL};
use crate::states::{luders_update, product_state, DensityOperator, Projector, SettingModel};

/// Agreement required between the full and the factorized computation.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Sign of the `(i, j)` term in `C00 + C01 + C10 - C11`.
pub fn chsh_sign(i: usize, j: usize) -> f64 {
    if i == 1 && j == 1 {
        -1.0
    } else {
        1.0
    }
}

/// A qubit observable with spectrum `{+1, -1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DichotomicObservable {
    matrix: ComplexMatrix,
    angle: Option<f64>,
}

impl DichotomicObservable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 2 {
            return Err(Error::DimensionMismatch {
                left: 2,
                right: matrix.dim(),
            });
        }
        matrix.ensure_hermitian()?;
        let residual = matrix
            .matmul(&matrix)?
            .max_abs_diff(&ComplexMatrix::identity(2)?)?;
        if residual > VALIDATION_TOL {
            return Err(Error::NotDichotomic { residual });
        }
        Ok(Self {
            matrix,
            angle: None,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Analyzer angle in radians, when built by [`polarization_observable`].
    pub fn angle(&self) -> Option<f64> {
        self.angle
    }
}

/// `cos(theta) Z + sin(theta) X`.
pub fn polarization_observable(theta: f64) -> DichotomicObservable {
    let (s, c) = theta.sin_cos();
    let matrix = &pauli_z().scale(c) + &pauli_x().scale(s);
    DichotomicObservable {
        matrix,
        angle: Some(theta),
    }
}

/// Analyzer angles: `a0, a1` on the left wing, `b0, b1` on the right.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshAngles {
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
}

impl ChshAngles {
    pub fn new(a0: f64, a1: f64, b0: f64, b1: f64) -> Result<Self> {
        for x in [a0, a1, b0, b1] {
            if !x.is_finite() {
                return Err(Error::NonFiniteAngle(x));
            }
        }
        Ok(Self { a0, a1, b0, b1 })
    }

    /// Angles attaining `2√2` on `phi_plus`: `(0, π/2, π/4, -π/4)`.
    pub fn tsirelson() -> Self {
        Self {
            a0: 0.0,
            a1: FRAC_PI_2,
            b0: FRAC_PI_4,
            b1: -FRAC_PI_4,
        }
    }

    pub fn left(&self, i: usize) -> Result<DichotomicObservable> {
        match i {
            0 => Ok(polarization_observable(self.a0)),
            1 => Ok(polarization_observable(self.a1)),
            _ => Err(Error::InvalidSetting(i)),
        }
    }

    pub fn right(&self, j: usize) -> Result<DichotomicObservable> {
        match j {
            0 => Ok(polarization_observable(self.b0)),
            1 => Ok(polarization_observable(self.b1)),
            _ => Err(Error::InvalidSetting(j)),
        }
    }
}

fn agree(what: &'static str, full: f64, factorized: f64) -> Result<f64> {
    if (full - factorized).abs() <= IDENTITY_TOL {
        Ok(full)
    } else {
        Err(Error::FactorizationMismatch {
            what,
            full,
            factorized,
        })
    }
}

fn check_setting(k: usize) -> Result<()> {
    if k < 2 {
        Ok(())
    } else {
        Err(Error::InvalidSetting(k))
    }
}

/// Average of `A ⊗ P` in the product state `rho ⊗ sigma`. Agrees with
/// `Tr(rho A) · Tr(sigma P)`.
pub fn composite_average(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    observable: &ComplexMatrix,
    projector: &Projector,
) -> Result<f64> {
    let joint = product_state(rho, sigma)?;
    let full = expectation(joint.matrix(), &observable.kron(projector.matrix())?)?;
    let factorized =
        expectation(rho.matrix(), observable)? * expectation(sigma.matrix(), projector.matrix())?;
    agree("composite average", full, factorized)
}

/// `C_ij = Tr(rho (A ⊗ B))`.
pub fn pair_correlation(
    rho: &DensityOperator,
    a: &DichotomicObservable,
    b: &DichotomicObservable,
) -> Result<f64> {
    let value = expectation(rho.matrix(), &a.matrix().kron(b.matrix())?)?;
    debug_assert!(value.abs() <= 1.0 + VALIDATION_TOL, "|C| = {value}");
    Ok(value)
}

/// `g_km = p_k q_m`, the probability that the generators select `(k, m)`.
pub fn setting_weight(model: &SettingModel, k: usize, m: usize) -> Result<f64> {
    check_setting(k)?;
    check_setting(m)?;
    Ok(model.p()[k] * model.q()[m])
}

/// `c_ij,km = Tr((rho ⊗ sigma)(A ⊗ B ⊗ P_k ⊗ Q_m))`, checked against
/// `C_ij · g_km`.
pub fn complete_correlation_km(
    rho: &DensityOperator,
    model: &SettingModel,
    a: &DichotomicObservable,
    b: &DichotomicObservable,
    k: usize,
    m: usize,
) -> Result<f64> {
    let joint = product_state(rho, model.sigma())?;
    let op = a
        .matrix()
        .kron(b.matrix())?
        .kron(model.setting_projector(k, m)?.matrix())?;
    let full = expectation(joint.matrix(), &op)?;
    let factorized = pair_correlation(rho, a, b)? * setting_weight(model, k, m)?;
    agree("complete correlation", full, factorized)
}

/// The complete correlation `c_ij = C_ij g_ij` for settings `(i, j)`.
pub fn complete_correlation(
    rho: &DensityOperator,
    model: &SettingModel,
    i: usize,
    j: usize,
    a: &DichotomicObservable,
    b: &DichotomicObservable,
) -> Result<f64> {
    complete_correlation_km(rho, model, a, b, i, j)
}

/// The CHSH operator `A0⊗B0 + A1⊗B0 + A0⊗B1 - A1⊗B1`.
pub fn chsh_operator(angles: &ChshAngles) -> Result<ComplexMatrix> {
    let mut gamma = ComplexMatrix::zeros(4)?;
    for i in 0..2 {
        for j in 0..2 {
            let term = angles.left(i)?.matrix().kron(angles.right(j)?.matrix())?;
            gamma = &gamma + &term.scale(chsh_sign(i, j));
        }
    }
    Ok(gamma)
}

/// `C = Tr(rho Γ)`, checked against the sum of the four pair correlations.
pub fn chsh_conditional(rho: &DensityOperator, angles: &ChshAngles) -> Result<f64> {
    let full = expectation(rho.matrix(), &chsh_operator(angles)?)?;
    let mut sum = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            sum += chsh_sign(i, j) * pair_correlation(rho, &angles.left(i)?, &angles.right(j)?)?;
        }
    }
    agree("CHSH combination", full, sum)
}

/// The operator `γ = Σ ± O_ij ⊗ O'_ij` on `H ⊗ K`.
pub fn complete_chsh_operator(model: &SettingModel, angles: &ChshAngles) -> Result<ComplexMatrix> {
    let mut gamma = ComplexMatrix::zeros(16)?;
    for i in 0..2 {
        for j in 0..2 {
            let term = angles
                .left(i)?
                .matrix()
                .kron(angles.right(j)?.matrix())?
                .kron(model.setting_projector(i, j)?.matrix())?;
            gamma = &gamma + &term.scale(chsh_sign(i, j));
        }
    }
    Ok(gamma)
}

/// `c = Tr((rho ⊗ sigma) γ)`, checked against `Σ ± C_ij g_ij`.
pub fn chsh_complete(
    rho: &DensityOperator,
    model: &SettingModel,
    angles: &ChshAngles,
) -> Result<f64> {
    let joint = product_state(rho, model.sigma())?;
    let full = expectation(joint.matrix(), &complete_chsh_operator(model, angles)?)?;
    let mut sum = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let c = pair_correlation(rho, &angles.left(i)?, &angles.right(j)?)?
                * setting_weight(model, i, j)?;
            sum += chsh_sign(i, j) * c;
        }
    }
    agree("complete CHSH combination", full, sum)
}

/// Correlation of `A_i ⊗ B_j` after conditioning `rho ⊗ sigma` on the
/// generators having produced `(i, j)`.
///
/// The Lüders update by `I ⊗ P_i ⊗ Q_j` is carried out on the 16-dimensional
/// state; the generator weight cancels, so the result must equal
/// [`pair_correlation`].
pub fn conditional_correlation(
    rho: &DensityOperator,
    model: &SettingModel,
    i: usize,
    j: usize,
    a: &DichotomicObservable,
    b: &DichotomicObservable,
) -> Result<f64> {
    let joint = product_state(rho, model.sigma())?;
    let condition = Projector::identity(rho.dim())?.kron(&model.setting_projector(i, j)?)?;
    let (post, _weight) = luders_update(&joint, &condition)?;
    let observable = a
        .matrix()
        .kron(b.matrix())?
        .kron(&ComplexMatrix::identity(model.sigma().dim())?)?;
    let full = expectation(post.matrix(), &observable)?;
    agree(
        "conditional correlation",
        full,
        pair_correlation(rho, a, b)?,
    )
}

/// All analytic quantities for one state, generator model and angle set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    #[serde(rename = "C_ij")]
    pub pair: [[f64; 2]; 2],
    #[serde(rename = "g_ij")]
    pub weights: [[f64; 2]; 2],
    #[serde(rename = "c_ij")]
    pub complete: [[f64; 2]; 2],
    #[serde(rename = "C")]
    pub chsh_conditional: f64,
    #[serde(rename = "c")]
    pub chsh_complete: f64,
    /// `None` where the setting pair has zero probability.
    #[serde(rename = "conditional_ij")]
    pub conditional: [[Option<f64>; 2]; 2],
}

impl CorrelationReport {
    pub fn compute(
        rho: &DensityOperator,
        model: &SettingModel,
        angles: &ChshAngles,
    ) -> Result<Self> {
        let mut pair = [[0.0; 2]; 2];
        let mut weights = [[0.0; 2]; 2];
        let mut complete = [[0.0; 2]; 2];
        let mut conditional = [[None; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let (a, b) = (angles.left(i)?, angles.right(j)?);
                pair[i][j] = pair_correlation(rho, &a, &b)?;
                weights[i][j] = setting_weight(model, i, j)?;
                complete[i][j] = complete_correlation(rho, model, i, j, &a, &b)?;
                conditional[i][j] = match conditional_correlation(rho, model, i, j, &a, &b) {
                    Ok(v) => Some(v),
                    Err(Error::ZeroProbabilityBranch { .. }) => None,
                    Err(e) => return Err(e),
                };
            }
        }
        Ok(Self {
            pair,
            weights,
            complete,
            chsh_conditional: chsh_conditional(rho, angles)?,
            chsh_complete: chsh_complete(rho, model, angles)?,
            conditional,
        })
    }
}
