use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Result, SimError};
use crate::hilbert::C64;

/// Discretized one-dimensional Gaussian meter.
///
/// Grid positions are x_j = (j − N/2)·Δx, j = 0..N. Translations are
/// circular on the grid; couplings are only allowed to move the packet by
/// up to N/4 sites, so nothing of consequence ever wraps.
#[derive(Clone)]
pub struct Pointer {
    grid_points: usize,
    spacing: f64,
    width: f64,
    wavefunction: Vec<C64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Pointer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pointer")
            .field("grid_points", &self.grid_points)
            .field("spacing", &self.spacing)
            .field("width", &self.width)
            .finish()
    }
}

impl PartialEq for Pointer {
    fn eq(&self, other: &Self) -> bool {
        self.grid_points == other.grid_points
            && self.spacing == other.spacing
            && self.width == other.width
    }
}

impl Pointer {
    pub const DEFAULT_GRID_POINTS: usize = 4096;
    pub const DEFAULT_WIDTH: f64 = 1.0;
    /// Grid span in units of the width.
    pub const DEFAULT_SPAN: f64 = 20.0;

    /// ψ(x) ∝ exp(−x²/(4σ²)) on N points spaced by Δx, normalized on the grid.
    pub fn gaussian(grid_points: usize, spacing: f64, width: f64) -> Result<Self> {
        if grid_points < 8 || !grid_points.is_power_of_two() {
            return Err(SimError::InvalidPointer(format!(
                "grid size {grid_points} must be a power of two >= 8"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite() && width > 0.0 && width.is_finite()) {
            return Err(SimError::InvalidPointer(format!(
                "spacing {spacing} and width {width} must be positive"
            )));
        }
        let mut wavefunction: Vec<C64> = (0..grid_points)
            .map(|j| {
                let x = (j as f64 - (grid_points / 2) as f64) * spacing;
                C64::new((-x * x / (4.0 * width * width)).exp(), 0.0)
            })
            .collect();
        let norm = wavefunction.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut wavefunction {
            *a /= norm;
        }
        let mut planner = FftPlanner::new();
        Ok(Pointer {
            grid_points,
            spacing,
            width,
            wavefunction,
            fft: planner.plan_fft_forward(grid_points),
            ifft: planner.plan_fft_inverse(grid_points),
        })
    }

    /// N points covering `span` (position units) with width σ.
    pub fn with_span(grid_points: usize, width: f64, span: f64) -> Result<Self> {
        Pointer::gaussian(grid_points, span / grid_points as f64, width)
    }

    /// N = 4096, σ = 1, span 20σ.
    pub fn standard() -> Self {
        Pointer::with_span(
            Self::DEFAULT_GRID_POINTS,
            Self::DEFAULT_WIDTH,
            Self::DEFAULT_SPAN * Self::DEFAULT_WIDTH,
        )
        .expect("default pointer is valid")
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn wavefunction(&self) -> &[C64] {
        &self.wavefunction
    }

    pub fn position(&self, j: usize) -> f64 {
        (j as f64 - (self.grid_points / 2) as f64) * self.spacing
    }

    /// Largest total translation (in sites) a packet may accumulate.
    pub fn margin(&self) -> i64 {
        (self.grid_points / 4) as i64
    }

    /// Nearest whole number of sites to a strength g (position units).
    pub fn sites_for(&self, strength: f64) -> Result<i64> {
        if !(strength > 0.0 && strength.is_finite()) {
            return Err(SimError::InvalidStrengths(format!(
                "strength {strength} must be positive"
            )));
        }
        let sites = (strength / self.spacing).round() as i64;
        if sites < 1 {
            return Err(SimError::InvalidStrengths(format!(
                "strength {strength} is below one grid spacing ({})",
                self.spacing
            )));
        }
        Ok(sites)
    }

    /// Circular translation of `psi` by `sites` grid points.
    pub fn translate(&self, psi: &[C64], sites: i64) -> Vec<C64> {
        let n = self.grid_points as i64;
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for (j, a) in psi.iter().enumerate() {
            out[(j as i64 + sites).rem_euclid(n) as usize] = *a;
        }
        out
    }

    /// The initial packet translated by `sites`.
    pub fn shifted_packet(&self, sites: i64) -> Vec<C64> {
        self.translate(&self.wavefunction, sites)
    }

    /// p̂ψ = −i dψ/dx by spectral differentiation on the periodic grid.
    /// The Nyquist component is dropped so real packets keep real means.
    pub fn momentum_apply(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.grid_points;
        let mut buf = psi.to_vec();
        self.fft.process(&mut buf);
        let dk = 2.0 * std::f64::consts::PI / (n as f64 * self.spacing);
        for (j, a) in buf.iter_mut().enumerate() {
            let k = if j < n / 2 {
                j as f64
            } else if j == n / 2 {
                0.0
            } else {
                j as f64 - n as f64
            } * dk;
            *a *= k / n as f64;
        }
        self.ifft.process(&mut buf);
        buf
    }

    /// Σ_j x_j conj(a_j) b_j
    pub fn position_matrix_element(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(j, (x, y))| x.conj() * y * self.position(j))
            .sum()
    }

    /// ⟨x⟩ of an arbitrary (not necessarily normalized) grid wavefunction.
    pub fn mean_position(&self, psi: &[C64]) -> f64 {
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        self.position_matrix_element(psi, psi).re / norm
    }

    /// ⟨p⟩ of an arbitrary (not necessarily normalized) grid wavefunction.
    pub fn mean_momentum(&self, psi: &[C64]) -> f64 {
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        let p = self.momentum_apply(psi);
        dot(psi, &p).re / norm
    }
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_pointer_is_centered_and_normalized() {
        let p = Pointer::standard();
        let norm: f64 = p.wavefunction().iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(p.mean_position(p.wavefunction()).abs() < 1e-10);
        assert!(p.mean_momentum(p.wavefunction()).abs() < 1e-12);
    }

    #[test]
    fn translation_moves_mean_by_whole_sites() {
        let p = Pointer::standard();
        let moved = p.shifted_packet(37);
        assert!((p.mean_position(&moved) - 37.0 * p.spacing()).abs() < 1e-10);
    }

    #[test]
    fn momentum_of_a_boosted_packet() {
        // exp(i k0 x) boost: ⟨p⟩ = k0 exactly for a well-resolved packet.
        let p = Pointer::standard();
        let k0 = 0.75;
        let boosted: Vec<C64> = p
            .wavefunction()
            .iter()
            .enumerate()
            .map(|(j, a)| a * C64::from_polar(1.0, k0 * p.position(j)))
            .collect();
        assert!((p.mean_momentum(&boosted) - k0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_grids_and_strengths() {
        assert!(Pointer::gaussian(100, 0.1, 1.0).is_err());
        assert!(Pointer::gaussian(64, -0.1, 1.0).is_err());
        let p = Pointer::standard();
        assert!(p.sites_for(0.0).is_err());
        assert!(p.sites_for(p.spacing() * 0.2).is_err());
        assert_eq!(p.sites_for(0.05).unwrap(), 10);
    }
}
