use num_complex::Complex64 as C64;

use super::layout::SpaceLayout;
use crate::error::{Result, SimError};
use crate::tolerance;

/// Amplitude vector over a labeled composite space.
///
/// Public constructors normalize. Sub-normalized states only come out of
/// crate-internal branch bookkeeping and always travel with their weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: SpaceLayout,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(layout: SpaceLayout, amplitudes: Vec<C64>) -> Result<Self> {
        PureState::unnormalized(layout, amplitudes)?.normalized()
    }

    /// Computational basis state given one digit per subsystem.
    pub fn basis(layout: SpaceLayout, digits: &[usize]) -> Result<Self> {
        if digits.len() != layout.len() {
            return Err(SimError::DimensionMismatch {
                expected: layout.len(),
                found: digits.len(),
            });
        }
        let strides = layout.strides();
        let mut index = 0;
        for ((d, s), sub) in digits.iter().zip(&strides).zip(layout.subsystems()) {
            if *d >= sub.dim {
                return Err(SimError::DimensionMismatch {
                    expected: sub.dim,
                    found: *d,
                });
            }
            index += d * s;
        }
        let mut amps = vec![C64::new(0.0, 0.0); layout.total_dim()];
        amps[index] = C64::new(1.0, 0.0);
        Ok(PureState {
            layout,
            amplitudes: amps,
        })
    }

    /// One-qubit state a|0⟩ + b|1⟩, normalized.
    pub fn qubit(name: &str, a: C64, b: C64) -> Result<Self> {
        PureState::new(SpaceLayout::qubit(name), vec![a, b])
    }

    /// Unit scalar on the empty layout.
    pub fn scalar(value: C64) -> Self {
        PureState {
            layout: SpaceLayout::empty(),
            amplitudes: vec![value],
        }
    }

    pub(crate) fn unnormalized(layout: SpaceLayout, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(SimError::DimensionMismatch {
                expected: layout.total_dim(),
                found: amplitudes.len(),
            });
        }
        Ok(PureState { layout, amplitudes })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tolerance::ASSERT
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(SimError::ZeroNorm);
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        Ok(self)
    }

    /// Same amplitudes under a renamed subsystem.
    pub fn relabeled(&self, from: &str, to: &str) -> Result<Self> {
        Ok(PureState {
            layout: self.layout.renamed(from, to)?,
            amplitudes: self.amplitudes.clone(),
        })
    }

    /// |⟨self|other⟩|² / (‖self‖²‖other‖²); global phase is ignored.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        let ov = super::inner(self, other)?;
        Ok(ov.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }

    /// Phase θ such that other ≈ e^{iθ} self.
    pub fn relative_phase(&self, other: &PureState) -> Result<f64> {
        Ok(super::inner(self, other)?.arg())
    }
}
