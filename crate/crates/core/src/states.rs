//! States and projector families: Bell states, diagonal generator
//! mixtures, product states and the Lüders update.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{real_trace, validate_density_labeled, ComplexMatrix, VALIDATION_TOL};

/// Tolerance on probability normalization and on projector resolutions.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Smallest branch weight that may be conditioned on.
pub const MIN_BRANCH_WEIGHT: f64 = 1e-12;

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    label: String,
}

impl DensityOperator {
    /// Validates `matrix` and attaches `label`.
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        validate_density_labeled(matrix, &label.into())
    }

    pub(crate) fn from_validated(matrix: ComplexMatrix, label: &str) -> Self {
        Self {
            matrix,
            label: label.to_owned(),
        }
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        let m = ComplexMatrix::identity(dim)?.scale(1.0 / dim as f64);
        Ok(Self::from_validated(m, "maximally_mixed"))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// An orthogonal projector: Hermitian and idempotent.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.ensure_hermitian()?;
        let residual = matrix.matmul(&matrix)?.max_abs_diff(&matrix)?;
        if residual > VALIDATION_TOL {
            return Err(Error::NotProjector { residual });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Ok(Self {
            matrix: ComplexMatrix::identity(dim)?,
        })
    }

    /// `|index><index|` in the computational basis.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        let mut diag = vec![0.0; dim];
        *diag.get_mut(index).ok_or(Error::InvalidSetting(index))? = 1.0;
        Ok(Self {
            matrix: ComplexMatrix::diag(&diag)?,
        })
    }

    /// Tensor product of two projectors, itself a projector.
    pub fn kron(&self, other: &Projector) -> Result<Self> {
        Ok(Self {
            matrix: self.matrix.kron(&other.matrix)?,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// The four maximally entangled two-qubit states, basis order
/// `|00>, |01>, |10>, |11>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi_plus",
            BellState::PhiMinus => "phi_minus",
            BellState::PsiPlus => "psi_plus",
            BellState::PsiMinus => "psi_minus",
        }
    }

    /// Density operator of the pure state.
    pub fn density(self) -> DensityOperator {
        // (|x> + s|y>)/sqrt(2) has entries 1/2 at (x,x), (y,y) and s/2 at (x,y), (y,x)
        let (x, y, s) = match self {
            BellState::PhiPlus => (0, 3, 1.0),
            BellState::PhiMinus => (0, 3, -1.0),
            BellState::PsiPlus => (1, 2, 1.0),
            BellState::PsiMinus => (1, 2, -1.0),
        };
        let mut entries = [0.0; 16];
        entries[x * 4 + x] = 0.5;
        entries[y * 4 + y] = 0.5;
        entries[x * 4 + y] = 0.5 * s;
        entries[y * 4 + x] = 0.5 * s;
        let m = ComplexMatrix::from_real(4, &entries).expect("4x4");
        DensityOperator::from_validated(m, self.name())
    }
}

impl fmt::Display for BellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BellState::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownBellState(s.to_owned()))
    }
}

/// Looks up a Bell state by label.
pub fn bell_state(name: &str) -> Result<DensityOperator> {
    Ok(name.parse::<BellState>()?.density())
}

/// A validated probability pair `(w0, w1)`.
pub fn check_probabilities(pair: [f64; 2]) -> Result<[f64; 2]> {
    let [w0, w1] = pair;
    let valid = w0.is_finite()
        && w1.is_finite()
        && w0 >= 0.0
        && w1 >= 0.0
        && (w0 + w1 - 1.0).abs() <= PROBABILITY_TOL;
    if valid {
        Ok(pair)
    } else {
        Err(Error::InvalidProbabilities(w0, w1))
    }
}

/// The generator state `w0 |0><0| + w1 |1><1|`.
pub fn classical_mixture(w0: f64, w1: f64) -> Result<DensityOperator> {
    check_probabilities([w0, w1])?;
    let m = ComplexMatrix::diag(&[w0, w1])?;
    Ok(DensityOperator::from_validated(m, "classical_mixture"))
}

/// `a ⊗ b`, revalidated.
pub fn product_state(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    let m = a.matrix().kron(b.matrix())?;
    let label = format!("{}⊗{}", a.label(), b.label());
    DensityOperator::new(m, label)
}

/// Projects `state` with `projector` and renormalizes. Returns the
/// post-measurement state together with the branch weight `Tr(M R M)`.
pub fn luders_update(
    state: &DensityOperator,
    projector: &Projector,
) -> Result<(DensityOperator, f64)> {
    let m = projector.matrix();
    if m.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: m.dim(),
        });
    }
    let projected = m.matmul(state.matrix())?.matmul(m)?;
    let weight = projected.trace().re;
    if weight <= MIN_BRANCH_WEIGHT {
        return Err(Error::ZeroProbabilityBranch { weight });
    }
    let post = DensityOperator::new(projected.scale(1.0 / weight), state.label())?;
    Ok((post, weight))
}

/// Two binary random generators, one per wing, modeled as diagonal
/// mixtures on `K1` and `K2` together with their outcome projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SettingModel {
    p: [f64; 2],
    q: [f64; 2],
    p_projectors: [Projector; 2],
    q_projectors: [Projector; 2],
    sigma: DensityOperator,
}

impl SettingModel {
    pub fn new(p: [f64; 2], q: [f64; 2]) -> Result<Self> {
        let p = check_probabilities(p)?;
        let q = check_probabilities(q)?;
        let sigma1 = classical_mixture(p[0], p[1])?;
        let sigma2 = classical_mixture(q[0], q[1])?;
        let sigma = product_state(&sigma1, &sigma2)?.with_label("sigma");
        let basis = |k| Projector::basis(2, k).expect("2x2 basis projector");
        Ok(Self {
            p,
            q,
            p_projectors: [basis(0), basis(1)],
            q_projectors: [basis(0), basis(1)],
            sigma,
        })
    }

    /// Both generators fair.
    pub fn uniform() -> Self {
        Self::new([0.5, 0.5], [0.5, 0.5]).expect("uniform generators")
    }

    pub fn p(&self) -> [f64; 2] {
        self.p
    }

    pub fn q(&self) -> [f64; 2] {
        self.q
    }

    pub fn p_projector(&self, k: usize) -> Result<&Projector> {
        self.p_projectors.get(k).ok_or(Error::InvalidSetting(k))
    }

    pub fn q_projector(&self, m: usize) -> Result<&Projector> {
        self.q_projectors.get(m).ok_or(Error::InvalidSetting(m))
    }

    /// `P_k ⊗ Q_m` on `K = K1 ⊗ K2`.
    pub fn setting_projector(&self, k: usize, m: usize) -> Result<Projector> {
        self.p_projector(k)?.kron(self.q_projector(m)?)
    }

    /// The generator-pair state `sigma1 ⊗ sigma2`.
    pub fn sigma(&self) -> &DensityOperator {
        &self.sigma
    }

    /// `Tr((P_k ⊗ Q_m) sigma)` from the 4x4 trace.
    pub fn weight_from_trace(&self, k: usize, m: usize) -> Result<f64> {
        real_trace(self.setting_projector(k, m)?.matrix(), self.sigma.matrix())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expectation, pauli_z};
    use num_complex::Complex64;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.max_abs_diff(b).unwrap() <= tol
    }

    #[test]
    fn bell_states_match_outer_products() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let amp = |x: f64| Complex64::new(x * r, 0.0);
        let vectors = [
            (BellState::PhiPlus, [amp(1.0), z, z, amp(1.0)]),
            (BellState::PhiMinus, [amp(1.0), z, z, amp(-1.0)]),
            (BellState::PsiPlus, [z, amp(1.0), amp(1.0), z]),
            (BellState::PsiMinus, [z, amp(1.0), amp(-1.0), z]),
        ];
        for (b, v) in vectors {
            let oracle = ComplexMatrix::outer(&v).unwrap();
            assert!(close(b.density().matrix(), &oracle, 1e-15), "{b}");
            assert!(DensityOperator::new(b.density().matrix().clone(), "x").is_ok());
            assert_eq!(b.density().matrix().trace().re, 1.0);
        }
    }

    #[test]
    fn bell_state_zz_correlations() {
        let zz = pauli_z().kron(&pauli_z()).unwrap();
        let phi = bell_state("phi_plus").unwrap();
        let psi = bell_state("psi_minus").unwrap();
        assert_eq!(expectation(phi.matrix(), &zz).unwrap(), 1.0);
        assert_eq!(expectation(psi.matrix(), &zz).unwrap(), -1.0);
        assert_eq!(
            bell_state("chi_plus"),
            Err(Error::UnknownBellState("chi_plus".into()))
        );
    }

    #[test]
    fn classical_mixture_examples() {
        let m = classical_mixture(0.5, 0.5).unwrap();
        assert_eq!(m.matrix(), &ComplexMatrix::identity(2).unwrap().scale(0.5));
        let m = classical_mixture(1.0, 0.0).unwrap();
        assert_eq!(m.matrix(), &ComplexMatrix::diag(&[1.0, 0.0]).unwrap());
        let m = classical_mixture(0.3, 0.7).unwrap();
        assert_eq!(m.matrix(), &ComplexMatrix::diag(&[0.3, 0.7]).unwrap());
        assert!(classical_mixture(0.5, 0.6).is_err());
        assert!(classical_mixture(-0.1, 1.1).is_err());
        assert!(classical_mixture(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn product_state_examples() {
        let half = classical_mixture(0.5, 0.5).unwrap();
        let quarter = product_state(&half, &half).unwrap();
        assert_eq!(
            quarter.matrix(),
            &ComplexMatrix::identity(4).unwrap().scale(0.25)
        );
        let a = classical_mixture(0.3, 0.7).unwrap();
        let b = classical_mixture(0.6, 0.4).unwrap();
        let ab = product_state(&a, &b).unwrap();
        let expected = ComplexMatrix::diag(&[0.18, 0.12, 0.42, 0.28]).unwrap();
        assert!(close(ab.matrix(), &expected, 1e-15));
        let big = product_state(&BellState::PhiPlus.density(), &quarter).unwrap();
        assert!((big.matrix().trace().re - 1.0).abs() < 1e-15);
        assert!(matches!(
            product_state(&big, &half),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn luders_update_examples() {
        let half = classical_mixture(0.5, 0.5).unwrap();
        let p0 = Projector::basis(2, 0).unwrap();
        let (post, w) = luders_update(&half, &p0).unwrap();
        assert_eq!(w, 0.5);
        assert_eq!(post.matrix(), p0.matrix());

        let rho = BellState::PsiPlus.density();
        let (post, w) = luders_update(&rho, &Projector::identity(4).unwrap()).unwrap();
        assert_eq!(w, 1.0);
        assert!(close(post.matrix(), rho.matrix(), 1e-15));

        let pure = classical_mixture(1.0, 0.0).unwrap();
        let p1 = Projector::basis(2, 1).unwrap();
        assert!(matches!(
            luders_update(&pure, &p1),
            Err(Error::ZeroProbabilityBranch { .. })
        ));
    }

    #[test]
    fn luders_update_factorizes_on_product_states() {
        let model = SettingModel::new([0.3, 0.7], [0.6, 0.4]).unwrap();
        let rho = BellState::PhiMinus.density();
        let r = product_state(&rho, model.sigma()).unwrap();
        let o = model.setting_projector(0, 1).unwrap();
        let full = Projector::identity(4).unwrap().kron(&o).unwrap();
        let (post, w) = luders_update(&r, &full).unwrap();
        let g01 = 0.3 * 0.4;
        assert!((w - g01).abs() < 1e-12);
        let sigma_post = o
            .matrix()
            .matmul(model.sigma().matrix())
            .unwrap()
            .matmul(o.matrix())
            .unwrap()
            .scale(1.0 / g01);
        let expected = rho.matrix().kron(&sigma_post).unwrap();
        assert!(close(post.matrix(), &expected, 1e-12));
    }

    #[test]
    fn projector_validation() {
        assert!(Projector::new(ComplexMatrix::diag(&[1.0, 0.5]).unwrap()).is_err());
        assert!(Projector::new(ComplexMatrix::identity(2).unwrap()).is_ok());
        assert!(Projector::basis(2, 2).is_err());
    }

    #[test]
    fn setting_model_resolves_identity() {
        let m = SettingModel::new([0.2, 0.8], [0.9, 0.1]).unwrap();
        let i2 = ComplexMatrix::identity(2).unwrap();
        let sum_p = m.p_projector(0).unwrap().matrix() + m.p_projector(1).unwrap().matrix();
        let sum_q = m.q_projector(0).unwrap().matrix() + m.q_projector(1).unwrap().matrix();
        assert!(close(&sum_p, &i2, 1e-12) && close(&sum_q, &i2, 1e-12));
        for k in 0..2 {
            for j in 0..2 {
                let g = m.weight_from_trace(k, j).unwrap();
                assert!((g - m.p()[k] * m.q()[j]).abs() < 1e-12);
            }
        }
        assert!(SettingModel::new([0.2, 0.7], [0.5, 0.5]).is_err());
    }
}
