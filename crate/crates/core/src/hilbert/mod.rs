//! Dense linear algebra over labeled tensor-product spaces.
//!
//! Flat amplitude indices are row-major in declaration order: the first
//! subsystem of a layout is the most significant digit. Operators never get
//! materialized at full size unless [`embed`] is asked for explicitly;
//! [`apply`] works on the target digits in place.

mod density;
mod layout;
mod matrix;
mod operator;
mod state;

pub use density::DensityMatrix;
pub use layout::{SpaceLayout, Subsystem};
pub(crate) use layout::SubsetIndex;
pub use matrix::{Matrix, C64};
pub use operator::{Operator, OperatorFlags};
pub use state::PureState;

use crate::error::{Result, SimError};
use crate::tolerance;

/// Outcome of a projective postselection.
#[derive(Debug, Clone)]
pub struct Projection {
    pub probability: f64,
    /// Normalized conditional state.
    pub state: PureState,
}

/// Kronecker product in the order given.
pub fn tensor(states: &[&PureState]) -> Result<PureState> {
    let mut layout = SpaceLayout::empty();
    let mut amps = vec![C64::new(1.0, 0.0)];
    for s in states {
        layout = layout.concat(s.layout())?;
        amps = amps
            .iter()
            .flat_map(|a| s.amplitudes().iter().map(move |b| a * b))
            .collect();
    }
    PureState::unnormalized(layout, amps)
}

/// `op ⊗ I` on every subsystem of `layout` that `op` does not target.
pub fn embed(op: &Operator, layout: &SpaceLayout) -> Result<Operator> {
    let idx = SubsetIndex::new(layout, op.targets())?;
    let n = layout.total_dim();
    let m = op.matrix();
    let mut full = Matrix::zeros(n, n);
    for &b in &idx.bases {
        for (r, &ro) in idx.offsets.iter().enumerate() {
            for (c, &co) in idx.offsets.iter().enumerate() {
                full[(b + ro, b + co)] = m[(r, c)];
            }
        }
    }
    Operator::new(layout.clone(), full, op.flags())
}

/// `op |s⟩`. The result is the raw image: its norm is preserved only when
/// `op` is unitary.
pub fn apply(op: &Operator, s: &PureState) -> Result<PureState> {
    let idx = SubsetIndex::new(s.layout(), op.targets())?;
    let m = op.matrix();
    let src = s.amplitudes();
    let mut out = vec![C64::new(0.0, 0.0); src.len()];
    let mut gathered = vec![C64::new(0.0, 0.0); idx.offsets.len()];
    for &b in &idx.bases {
        for (g, &o) in gathered.iter_mut().zip(&idx.offsets) {
            *g = src[b + o];
        }
        for (r, &ro) in idx.offsets.iter().enumerate() {
            out[b + ro] = m.row(r).iter().zip(&gathered).map(|(x, y)| x * y).sum();
        }
    }
    PureState::unnormalized(s.layout().clone(), out)
}

/// ⟨a|b⟩, conjugate-linear in `a`.
pub fn inner(a: &PureState, b: &PureState) -> Result<C64> {
    if a.layout() != b.layout() {
        return Err(SimError::LayoutMismatch(format!(
            "{:?} vs {:?}",
            a.layout().names().collect::<Vec<_>>(),
            b.layout().names().collect::<Vec<_>>()
        )));
    }
    Ok(a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Projective postselection with projector `p`.
pub fn project(p: &Operator, s: &PureState) -> Result<Projection> {
    if !p.is_projector() {
        return Err(SimError::OperatorProperty {
            property: "a projector",
            deviation: f64::NAN,
        });
    }
    let image = apply(p, s)?;
    let probability = image.norm_sqr() / s.norm_sqr();
    if probability <= tolerance::IMPOSSIBLE {
        return Err(SimError::ImpossiblePostselection { probability });
    }
    Ok(Projection {
        probability,
        state: image.normalized()?,
    })
}

/// Partial trace onto `keep` (in the order given).
pub fn reduced(s: &PureState, keep: &[&str]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(SimError::InvalidInput("reduced() needs at least one subsystem".into()));
    }
    let kept = s.layout().select(keep)?;
    let idx = SubsetIndex::new(s.layout(), &kept)?;
    let amps = s.amplitudes();
    let n = kept.total_dim();
    let mut rho = Matrix::zeros(n, n);
    for &b in &idx.bases {
        for (i, &oi) in idx.offsets.iter().enumerate() {
            let ai = amps[b + oi];
            if ai == C64::new(0.0, 0.0) {
                continue;
            }
            for (j, &oj) in idx.offsets.iter().enumerate() {
                rho[(i, j)] += ai * amps[b + oj].conj();
            }
        }
    }
    let norm = s.norm_sqr();
    if norm == 0.0 {
        return Err(SimError::ZeroNorm);
    }
    DensityMatrix::new(kept, rho.scale(C64::new(1.0 / norm, 0.0)))
}

/// Partial inner product `(⟨bra| ⊗ I)|ket⟩`, left on the subsystems of
/// `ket` that `bra` does not cover. Not normalized.
pub fn contract(bra: &PureState, ket: &PureState) -> Result<PureState> {
    let idx = SubsetIndex::new(ket.layout(), bra.layout())?;
    let names: Vec<&str> = bra.layout().names().collect();
    let rest = ket.layout().complement(&names);
    let src = ket.amplitudes();
    let out = idx
        .bases
        .iter()
        .map(|&b| {
            bra.amplitudes()
                .iter()
                .zip(&idx.offsets)
                .map(|(x, &o)| x.conj() * src[b + o])
                .sum()
        })
        .collect();
    PureState::unnormalized(rest, out)
}

/// Reorders `s` so its subsystems follow `names`.
pub fn permute(s: &PureState, names: &[&str]) -> Result<PureState> {
    if names.len() != s.layout().len() {
        return Err(SimError::LayoutMismatch(
            "permutation must name every subsystem".into(),
        ));
    }
    let target = s.layout().select(names)?;
    let idx = SubsetIndex::new(s.layout(), &target)?;
    let amps = idx.offsets.iter().map(|&o| s.amplitudes()[o]).collect();
    PureState::unnormalized(target, amps)
}
