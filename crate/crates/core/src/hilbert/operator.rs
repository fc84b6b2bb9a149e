use num_complex::Complex64 as C64;

use super::layout::SpaceLayout;
use super::matrix::Matrix;
use crate::error::{Result, SimError};
use crate::tolerance;

/// Asserted operator properties, verified whenever an operator is built.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OperatorFlags {
    pub hermitian: bool,
    pub unitary: bool,
    pub projector: bool,
}

impl OperatorFlags {
    pub const NONE: OperatorFlags = OperatorFlags {
        hermitian: false,
        unitary: false,
        projector: false,
    };
    pub const HERMITIAN: OperatorFlags = OperatorFlags {
        hermitian: true,
        unitary: false,
        projector: false,
    };
    pub const UNITARY: OperatorFlags = OperatorFlags {
        hermitian: false,
        unitary: true,
        projector: false,
    };
    pub const PROJECTOR: OperatorFlags = OperatorFlags {
        hermitian: true,
        unitary: false,
        projector: true,
    };
}

/// Dense square matrix acting on the named target subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    targets: SpaceLayout,
    matrix: Matrix,
    flags: OperatorFlags,
}

impl Operator {
    pub fn new(targets: SpaceLayout, matrix: Matrix, flags: OperatorFlags) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != targets.total_dim() {
            return Err(SimError::DimensionMismatch {
                expected: targets.total_dim(),
                found: matrix.rows(),
            });
        }
        let check = |property, deviation: f64| {
            if deviation > tolerance::ASSERT {
                Err(SimError::OperatorProperty {
                    property,
                    deviation,
                })
            } else {
                Ok(())
            }
        };
        if flags.unitary {
            check("unitary", matrix.unitarity_defect())?;
        }
        if flags.hermitian || flags.projector {
            check("hermitian", matrix.hermiticity_defect())?;
        }
        if flags.projector {
            check("a projector", matrix.projector_defect())?;
        }
        Ok(Operator {
            targets,
            matrix,
            flags,
        })
    }

    pub fn unitary(targets: SpaceLayout, matrix: Matrix) -> Result<Self> {
        Operator::new(targets, matrix, OperatorFlags::UNITARY)
    }

    pub fn hermitian(targets: SpaceLayout, matrix: Matrix) -> Result<Self> {
        Operator::new(targets, matrix, OperatorFlags::HERMITIAN)
    }

    pub fn projector(targets: SpaceLayout, matrix: Matrix) -> Result<Self> {
        Operator::new(targets, matrix, OperatorFlags::PROJECTOR)
    }

    pub fn general(targets: SpaceLayout, matrix: Matrix) -> Result<Self> {
        Operator::new(targets, matrix, OperatorFlags::NONE)
    }

    /// |s⟩⟨s| for a normalized state.
    pub fn projector_onto(state: &super::PureState) -> Result<Self> {
        let s = state.clone().normalized()?;
        let m = Matrix::outer(s.amplitudes(), s.amplitudes());
        Operator::projector(s.layout().clone(), m)
    }

    pub fn identity(targets: SpaceLayout) -> Self {
        let n = targets.total_dim();
        Operator {
            targets,
            matrix: Matrix::identity(n),
            flags: OperatorFlags {
                hermitian: true,
                unitary: true,
                projector: true,
            },
        }
    }

    pub fn targets(&self) -> &SpaceLayout {
        &self.targets
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn flags(&self) -> OperatorFlags {
        self.flags
    }

    pub fn is_unitary(&self) -> bool {
        self.flags.unitary
    }

    pub fn is_projector(&self) -> bool {
        self.flags.projector
    }

    pub fn adjoint(&self) -> Self {
        Operator {
            targets: self.targets.clone(),
            matrix: self.matrix.adjoint(),
            flags: self.flags,
        }
    }

    /// `self · other`. Targets are unified: whatever either side lacks is
    /// padded with identity. Flags are re-derived from the result.
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        let targets = union(&self.targets, &other.targets)?;
        let a = super::embed(self, &targets)?;
        let b = super::embed(other, &targets)?;
        Operator::infer(targets, &a.matrix * &b.matrix)
    }

    /// Linear combination Σ c_k A_k over possibly different targets.
    pub fn combine(terms: &[(C64, &Operator)]) -> Result<Self> {
        let mut targets = SpaceLayout::empty();
        for (_, op) in terms {
            targets = union(&targets, &op.targets)?;
        }
        let mut m = Matrix::zeros(targets.total_dim(), targets.total_dim());
        for (c, op) in terms {
            m = &m + &super::embed(op, &targets)?.matrix.scale(*c);
        }
        Operator::infer(targets, m)
    }

    /// Tensor product on disjoint targets.
    pub fn tensor(&self, other: &Operator) -> Result<Self> {
        let targets = self.targets.concat(&other.targets)?;
        let flags = OperatorFlags {
            hermitian: self.flags.hermitian && other.flags.hermitian,
            unitary: self.flags.unitary && other.flags.unitary,
            projector: self.flags.projector && other.flags.projector,
        };
        Operator::new(targets, self.matrix.kron(&other.matrix), flags)
    }

    /// Same matrix relabeled onto other subsystem names of equal dimensions.
    pub fn retarget(&self, names: &[&str]) -> Result<Self> {
        if names.len() != self.targets.len() {
            return Err(SimError::DimensionMismatch {
                expected: self.targets.len(),
                found: names.len(),
            });
        }
        let targets = SpaceLayout::new(
            names
                .iter()
                .zip(self.targets.subsystems())
                .map(|(n, s)| (n.to_string(), s.dim)),
        )?;
        Ok(Operator {
            targets,
            matrix: self.matrix.clone(),
            flags: self.flags,
        })
    }

    /// Spectral decomposition A = Σ a P_a of a Hermitian operator, with
    /// degenerate eigenvalues (within `tol`) merged.
    pub fn spectral_projectors(&self, tol: f64) -> Result<Vec<(f64, Operator)>> {
        let defect = self.matrix.hermiticity_defect();
        if defect > tolerance::ASSERT {
            return Err(SimError::OperatorProperty {
                property: "hermitian",
                deviation: defect,
            });
        }
        let (values, vectors) = self.matrix.hermitian_eigen();
        let n = values.len();
        let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
        for (k, &v) in values.iter().enumerate() {
            match out.last_mut() {
                Some((last, cols)) if (v - *last).abs() <= tol => cols.push(k),
                _ => out.push((v, vec![k])),
            }
        }
        out.into_iter()
            .map(|(_, cols)| {
                let mut p = Matrix::zeros(n, n);
                for &c in &cols {
                    let col: Vec<C64> = (0..n).map(|i| vectors[(i, c)]).collect();
                    p = &p + &Matrix::outer(&col, &col);
                }
                let mean = cols.iter().map(|&c| values[c]).sum::<f64>() / cols.len() as f64;
                Ok((mean, Operator::projector(self.targets.clone(), p)?))
            })
            .collect()
    }

    fn infer(targets: SpaceLayout, matrix: Matrix) -> Result<Self> {
        let flags = OperatorFlags {
            hermitian: matrix.hermiticity_defect() <= tolerance::ASSERT,
            unitary: matrix.unitarity_defect() <= tolerance::ASSERT,
            projector: matrix.projector_defect() <= tolerance::ASSERT,
        };
        Operator::new(targets, matrix, flags)
    }
}

/// Targets of `a` followed by the ones only `b` has.
fn union(a: &SpaceLayout, b: &SpaceLayout) -> Result<SpaceLayout> {
    let mut out = a.clone();
    for s in b.subsystems() {
        match a.dim_of(&s.name) {
            Ok(d) if d == s.dim => {}
            Ok(d) => {
                return Err(SimError::DimensionMismatch {
                    expected: d,
                    found: s.dim,
                })
            }
            Err(_) => out.push(s.name.clone(), s.dim)?,
        }
    }
    Ok(out)
}
