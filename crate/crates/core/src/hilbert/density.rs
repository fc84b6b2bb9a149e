use num_complex::Complex64 as C64;

use super::layout::SpaceLayout;
use super::matrix::Matrix;
use super::state::PureState;
use crate::error::{Result, SimError};
use crate::tolerance;

/// Trace-one positive semidefinite matrix on a sub-layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: SpaceLayout,
    matrix: Matrix,
}

impl DensityMatrix {
    /// Validates hermiticity, trace and positivity.
    pub fn new(layout: SpaceLayout, matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != layout.total_dim() {
            return Err(SimError::DimensionMismatch {
                expected: layout.total_dim(),
                found: matrix.rows(),
            });
        }
        let herm = matrix.hermiticity_defect();
        if herm > tolerance::ASSERT {
            return Err(SimError::InvariantViolation(format!(
                "density matrix not hermitian ({herm:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tolerance::ASSERT {
            return Err(SimError::InvariantViolation(format!(
                "density matrix trace {tr} != 1"
            )));
        }
        let rho = DensityMatrix { layout, matrix };
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -tolerance::ASSERT {
            return Err(SimError::InvariantViolation(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(rho)
    }

    pub fn from_pure(state: &PureState) -> Result<Self> {
        let s = state.clone().normalized()?;
        let m = Matrix::outer(s.amplitudes(), s.amplitudes());
        DensityMatrix::new(s.layout().clone(), m)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.hermitian_eigen().0
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Tr ρ²
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// ⟨s|ρ|s⟩
    pub fn fidelity_with_pure(&self, s: &PureState) -> Result<f64> {
        if s.layout() != &self.layout {
            return Err(SimError::LayoutMismatch(
                "state and density matrix live on different layouts".into(),
            ));
        }
        let rs = self.matrix.mul_vec(s.amplitudes());
        let v: C64 = s.amplitudes().iter().zip(&rs).map(|(a, b)| a.conj() * b).sum();
        Ok(v.re / s.norm_sqr())
    }

    /// ½ Σ |λ_k(ρ − σ)|
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.check_same_layout(other)?;
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * diff.hermitian_eigen().0.iter().map(|l| l.abs()).sum::<f64>())
    }

    /// ‖ρ − σ‖_F
    pub fn hs_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.check_same_layout(other)?;
        Ok((&self.matrix - &other.matrix).frobenius())
    }

    /// Same matrix under a renamed subsystem.
    pub fn relabeled(&self, from: &str, to: &str) -> Result<Self> {
        Ok(DensityMatrix {
            layout: self.layout.renamed(from, to)?,
            matrix: self.matrix.clone(),
        })
    }

    fn check_same_layout(&self, other: &DensityMatrix) -> Result<()> {
        if self.layout.subsystems().iter().map(|s| s.dim).collect::<Vec<_>>()
            != other.layout.subsystems().iter().map(|s| s.dim).collect::<Vec<_>>()
        {
            return Err(SimError::LayoutMismatch(
                "density matrices have different shapes".into(),
            ));
        }
        Ok(())
    }
}
