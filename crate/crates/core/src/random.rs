//! Random states and observables for property checks, driven by a
//! [`CounterStream`] so every instance is reproducible from a seed.

use crate::correlations::DichotomicObservable;
use crate::error::Result;
use crate::linalg::{pauli_x, pauli_y, pauli_z, ComplexMatrix};
use crate::rng::CounterStream;
use crate::states::{check_probabilities, DensityOperator, Projector};
use num_complex::Complex64;

fn gaussian_vec(rng: &mut CounterStream, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.next_gaussian(), rng.next_gaussian()))
        .collect()
}

/// Hermitian matrix with Gaussian entries.
pub fn hermitian(rng: &mut CounterStream, dim: usize) -> Result<ComplexMatrix> {
    let g = ComplexMatrix::from_vec(dim, gaussian_vec(rng, dim * dim))?;
    Ok((&g + &g.adjoint()).scale(0.5))
}

/// Full-rank mixed state `G G† / Tr(G G†)` with Gaussian `G`.
pub fn density(rng: &mut CounterStream, dim: usize) -> Result<DensityOperator> {
    let g = ComplexMatrix::from_vec(dim, gaussian_vec(rng, dim * dim))?;
    let gg = g.matmul(&g.adjoint())?;
    let tr = gg.trace().re;
    DensityOperator::new(gg.scale(1.0 / tr), "random")
}

/// Rank-one projector onto a random unit vector.
pub fn rank_one_projector(rng: &mut CounterStream, dim: usize) -> Result<Projector> {
    let v = gaussian_vec(rng, dim);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v: Vec<Complex64> = v.into_iter().map(|z| z / norm).collect();
    Projector::new(ComplexMatrix::outer(&v)?)
}

/// `n·σ` for a uniformly random unit vector `n`.
pub fn dichotomic(rng: &mut CounterStream) -> Result<DichotomicObservable> {
    let (x, y, z) = (
        rng.next_gaussian(),
        rng.next_gaussian(),
        rng.next_gaussian(),
    );
    let r = (x * x + y * y + z * z).sqrt();
    let m = &(&pauli_x().scale(x / r) + &pauli_y().scale(y / r)) + &pauli_z().scale(z / r);
    DichotomicObservable::new(m)
}

/// Probability pair with both entries in `[lo, 1 - lo]`.
pub fn probability_pair(rng: &mut CounterStream, lo: f64) -> [f64; 2] {
    let w = rng.uniform_in(lo, 1.0 - lo);
    check_probabilities([w, 1.0 - w]).expect("valid by construction")
}

/// Angle in `[-π, π)`.
pub fn angle(rng: &mut CounterStream) -> f64 {
    rng.uniform_in(-std::f64::consts::PI, std::f64::consts::PI)
}
