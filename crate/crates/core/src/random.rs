//! Seeded random states and operators for sweeps and property checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::hilbert::{Matrix, PureState, SpaceLayout, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random normalized state on `layout`.
pub fn random_state<R: Rng + ?Sized>(layout: &SpaceLayout, rng: &mut R) -> Result<PureState> {
    let amps = (0..layout.total_dim()).map(|_| gaussian(rng)).collect();
    PureState::new(layout.clone(), amps)
}

/// Haar-random unit vector (α, β).
pub fn random_qubit_amplitudes<R: Rng + ?Sized>(rng: &mut R) -> (C64, C64) {
    let a = gaussian(rng);
    let b = gaussian(rng);
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    (a / n, b / n)
}

/// Haar-random n×n unitary (Gram-Schmidt on a Ginibre matrix).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
        // Two passes keep the columns orthogonal to rounding precision.
        for _ in 0..2 {
            for u in &cols {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    let mut m = Matrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            m[(i, j)] = *x;
        }
    }
    m
}

/// Random Hermitian n×n matrix (GUE-like).
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(rng.sample(StandardNormal), 0.0);
        for j in (i + 1)..n {
            let z = gaussian(rng) * std::f64::consts::FRAC_1_SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 4, 16] {
            assert!(random_unitary(n, &mut rng).unitarity_defect() < 1e-13);
        }
    }

    #[test]
    fn random_hermitian_is_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(random_hermitian(5, &mut rng).hermiticity_defect(), 0.0);
    }
}
