//! Interferometer components and the detector-based postselection block.
//!
//! Path basis: index 0 = left arm |L⟩, index 1 = right arm |R⟩. After BS2
//! the same subsystem carries the output ports, index 0 = O1 (toward the
//! PBS) and index 1 = O2 (toward D2). Polarization basis: 0 = |H⟩, 1 = |V⟩.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::hilbert::{self, Matrix, Operator, PureState, SpaceLayout, C64};
use crate::tolerance;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn horizontal(pol: &str) -> PureState {
    PureState::qubit(pol, ONE, ZERO).expect("unit vector")
}

pub fn vertical(pol: &str) -> PureState {
    PureState::qubit(pol, ZERO, ONE).expect("unit vector")
}

pub fn left(path: &str) -> PureState {
    PureState::qubit(path, ONE, ZERO).expect("unit vector")
}

pub fn right(path: &str) -> PureState {
    PureState::qubit(path, ZERO, ONE).expect("unit vector")
}

/// (|H⟩ + i|V⟩)/√2
pub fn circular_plus(pol: &str) -> PureState {
    PureState::qubit(pol, ONE, I).expect("unit vector")
}

/// (|H⟩ − i|V⟩)/√2
pub fn circular_minus(pol: &str) -> PureState {
    PureState::qubit(pol, ONE, -I).expect("unit vector")
}

/// Π_L = |L⟩⟨L|
pub fn pi_left(path: &str) -> Operator {
    Operator::projector_onto(&left(path)).expect("projector")
}

/// Π_R = |R⟩⟨R|
pub fn pi_right(path: &str) -> Operator {
    Operator::projector_onto(&right(path)).expect("projector")
}

/// σ_z = |+⟩⟨+| − |−⟩⟨−| in the circular basis.
pub fn sigma_z(pol: &str) -> Operator {
    let p = Operator::projector_onto(&circular_plus(pol)).expect("projector");
    let m = Operator::projector_onto(&circular_minus(pol)).expect("projector");
    Operator::combine(&[(ONE, &p), (-ONE, &m)]).expect("same targets")
}

/// Π_arm ⊗ `pol_op`, the arm-local version of a polarization observable.
pub fn arm_local(arm: &Operator, pol_op: &Operator) -> Result<Operator> {
    arm.tensor(pol_op)
}

/// |ψ⊥⟩ = β*|H⟩ − α*|V⟩ for |ψ⟩ = α|H⟩ + β|V⟩.
pub fn orthogonal_polarization(psi: &PureState) -> Result<PureState> {
    let [a, b] = qubit_amplitudes(psi)?;
    PureState::unnormalized(psi.layout().clone(), vec![b.conj(), -a.conj()])
}

/// U with U|ψ⟩ = |H⟩ and U|ψ⊥⟩ = |V⟩, i.e. U = |H⟩⟨ψ| + |V⟩⟨ψ⊥|, with
/// ψ⊥ as given by [`orthogonal_polarization`].
pub fn rotation_to_horizontal(psi: &PureState) -> Result<Operator> {
    analyzer_rotation(psi, &orthogonal_polarization(psi)?)
}

/// U = |H⟩⟨psi| + |V⟩⟨perp| for an orthonormal pair.
pub fn analyzer_rotation(psi: &PureState, perp: &PureState) -> Result<Operator> {
    let [a, b] = qubit_amplitudes(psi)?;
    let [p, q] = qubit_amplitudes(perp)?;
    let m = Matrix::from_rows(&[vec![a.conj(), b.conj()], vec![p.conj(), q.conj()]])?;
    Operator::unitary(psi.layout().clone(), m)
}

fn qubit_amplitudes(psi: &PureState) -> Result<[C64; 2]> {
    if psi.layout().len() != 1 || psi.dim() != 2 {
        return Err(SimError::InvalidInput(
            "expected a single polarization qubit".into(),
        ));
    }
    if !psi.is_normalized() {
        return Err(SimError::InvalidInput("polarization must be normalized".into()));
    }
    Ok([psi.amplitudes()[0], psi.amplitudes()[1]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentKind {
    Bs1,
    /// Wave plate turning the analysis basis {ψ, ψ⊥} into {H, V} on both arms.
    /// Identity for ψ = H.
    Analyzer,
    Hwp,
    Ps,
    Bs2,
    Pbs,
}

/// Where a component sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// Acts on the path mode.
    Path,
    /// Acts on the polarization in both arms.
    BothArms,
    /// Acts only on the right arm (path-controlled).
    RightArm,
    /// Acts on the output ports after BS2.
    Outputs,
}

#[derive(Debug, Clone)]
pub struct Component {
    pub kind: ComponentKind,
    pub unitary: Operator,
    pub placement: Placement,
}

impl Component {
    fn new(kind: ComponentKind, unitary: Operator, placement: Placement) -> Result<Self> {
        if !unitary.is_unitary() {
            return Err(SimError::OperatorProperty {
                property: "unitary",
                deviation: unitary.matrix().unitarity_defect(),
            });
        }
        Ok(Component {
            kind,
            unitary,
            placement,
        })
    }
}

/// BS1: (1/√2)[[1, i], [i, 1]] on (L, R). A photon entering through the R
/// port leaves as (i|L⟩ + |R⟩)/√2, the reflected arm picking up the i.
pub fn bs1(path: &str) -> Component {
    let r = FRAC_1_SQRT_2;
    let m = Matrix::from_rows(&[vec![c(r, 0.), c(0., r)], vec![c(0., r), c(r, 0.)]]).expect("2x2");
    Component::new(
        ComponentKind::Bs1,
        Operator::unitary(SpaceLayout::qubit(path), m).expect("unitary"),
        Placement::Path,
    )
    .expect("unitary")
}

/// Charlie's source: BS1 applied to a photon in the R input port.
pub fn bs1_prepare(pol: &PureState, path: &str) -> Result<PureState> {
    if !pol.is_normalized() {
        return Err(SimError::InvalidInput("polarization must be normalized".into()));
    }
    let input = hilbert::tensor(&[&right(path), pol])?;
    hilbert::apply(&bs1(path).unitary, &input)
}

/// BS2 with output rows (1, −i)/√2 → O1 and (1, i)/√2 → O2.
pub fn bs2_unitary(path: &str) -> Operator {
    let r = FRAC_1_SQRT_2;
    let m = Matrix::from_rows(&[vec![c(r, 0.), c(0., -r)], vec![c(r, 0.), c(0., r)]]).expect("2x2");
    Operator::unitary(SpaceLayout::qubit(path), m).expect("unitary")
}

/// HWP on the right arm: |L⟩⟨L| ⊗ I + |R⟩⟨R| ⊗ X.
pub fn hwp_right_arm(path: &str, pol: &str) -> Operator {
    let x = Matrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).expect("2x2");
    controlled_on_right(path, pol, &x)
}

/// PS on the right arm: multiplies |R⟩ by i.
pub fn ps_right_arm(path: &str) -> Operator {
    Operator::unitary(SpaceLayout::qubit(path), Matrix::diagonal(&[ONE, I])).expect("unitary")
}

fn controlled_on_right(path: &str, pol: &str, block: &Matrix) -> Operator {
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    for i in 0..2 {
        for j in 0..2 {
            m[(2 + i, 2 + j)] = block[(i, j)];
        }
    }
    let layout = SpaceLayout::new([(path, 2), (pol, 2)]).expect("distinct names");
    Operator::unitary(layout, m).expect("unitary")
}

/// Exchanges the contents of two qubit modes.
pub fn swap(a: &str, b: &str) -> Result<Operator> {
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    Operator::unitary(SpaceLayout::new([(a, 2), (b, 2)])?, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Detector {
    D1,
    D2,
    D3,
}

impl Detector {
    pub const ALL: [Detector; 3] = [Detector::D1, Detector::D2, Detector::D3];
}

#[derive(Debug, Clone)]
pub struct DetectorEvent {
    pub detector: Detector,
    pub probability: f64,
    /// State of everything except the absorbed path and polarization modes;
    /// `None` when the detector cannot click.
    pub conditional_state: Option<PureState>,
}

/// HWP + PS + BS2 + PBS + D1/D2/D3 acting on (`path`, `slot`).
///
/// A D1 click is equivalent to projecting onto
/// (|L⟩|ψ⟩ + |R⟩|ψ⊥⟩)/√2, with ψ = H for the plain block.
#[derive(Debug, Clone)]
pub struct PostselectionBlock {
    path: String,
    slot: String,
    psi: PureState,
    perp: PureState,
    components: Vec<Component>,
}

impl PostselectionBlock {
    /// Block selecting (|L⟩|H⟩ + |R⟩|V⟩)/√2; the analyzer is the identity.
    pub fn standard(path: &str, slot: &str) -> Result<Self> {
        PostselectionBlock::with_basis(path, slot, &horizontal(slot), &vertical(slot))
    }

    /// Block selecting (|L⟩|ψ⟩ + |R⟩|ψ⊥⟩)/√2 with ψ⊥ = β*|H⟩ − α*|V⟩.
    ///
    /// For ψ = H this ψ⊥ is −|V⟩, so the target differs from
    /// [`PostselectionBlock::standard`] by the sign of the |R⟩|V⟩ term.
    pub fn for_polarization(path: &str, slot: &str, psi: &PureState) -> Result<Self> {
        let psi = relabel_qubit(psi, slot)?;
        let perp = orthogonal_polarization(&psi)?;
        PostselectionBlock::with_basis(path, slot, &psi, &perp)
    }

    /// Block selecting (|L⟩|psi⟩ + |R⟩|perp⟩)/√2. An analyzer plate maps
    /// {psi, perp} onto {H, V} in both arms ahead of the fixed
    /// HWP/PS/BS2/PBS chain.
    pub fn with_basis(path: &str, slot: &str, psi: &PureState, perp: &PureState) -> Result<Self> {
        let psi = relabel_qubit(psi, slot)?;
        let perp = relabel_qubit(perp, slot)?;
        let analyzer = analyzer_rotation(&psi, &perp)?;
        let pbs = Operator::identity(SpaceLayout::new([(path, 2), (slot, 2)])?);
        let components = vec![
            Component::new(ComponentKind::Analyzer, analyzer, Placement::BothArms)?,
            Component::new(ComponentKind::Hwp, hwp_right_arm(path, slot), Placement::RightArm)?,
            Component::new(ComponentKind::Ps, ps_right_arm(path), Placement::RightArm)?,
            Component::new(ComponentKind::Bs2, bs2_unitary(path), Placement::Path)?,
            Component::new(ComponentKind::Pbs, pbs, Placement::Outputs)?,
        ];
        Ok(PostselectionBlock {
            path: path.to_string(),
            slot: slot.to_string(),
            psi,
            perp,
            components,
        })
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn slot(&self) -> &str {
        &self.slot
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// The state whose D1 click certifies it, on (path, slot).
    pub fn target(&self) -> Result<PureState> {
        let l = hilbert::tensor(&[&left(&self.path), &self.psi])?;
        let r = hilbert::tensor(&[&right(&self.path), &self.perp])?;
        let amps = l
            .amplitudes()
            .iter()
            .zip(r.amplitudes())
            .map(|(a, b)| (a + b) * FRAC_1_SQRT_2)
            .collect();
        PureState::new(l.layout().clone(), amps)
    }

    /// Product of every component, first component rightmost, on (path, slot).
    pub fn chain_unitary(&self) -> Result<Operator> {
        let mut u = Operator::identity(SpaceLayout::new([
            (self.path.as_str(), 2),
            (self.slot.as_str(), 2),
        ])?);
        for comp in &self.components {
            u = comp.unitary.compose(&u)?;
        }
        Ok(u)
    }

    /// The mode state a detector absorbs: |O1,H⟩ for D1, |O1,V⟩ for D3,
    /// |O2⟩ (polarization untouched) for D2.
    pub fn detector_mode(&self, detector: Detector) -> Result<PureState> {
        let o1 = left(&self.path);
        let o2 = right(&self.path);
        match detector {
            Detector::D1 => hilbert::tensor(&[&o1, &horizontal(&self.slot)]),
            Detector::D2 => Ok(o2),
            Detector::D3 => hilbert::tensor(&[&o1, &vertical(&self.slot)]),
        }
    }

    /// Click projector on the post-chain modes.
    pub fn detector_projector(&self, detector: Detector) -> Result<Operator> {
        Operator::projector_onto(&self.detector_mode(detector)?)
    }

    /// Runs `s` through the chain and reports every detector.
    pub fn detect(&self, s: &PureState) -> Result<Vec<DetectorEvent>> {
        let out = hilbert::apply(&self.chain_unitary()?, s)?;
        let total = out.norm_sqr();
        Detector::ALL
            .iter()
            .map(|&d| {
                let rest = hilbert::contract(&self.detector_mode(d)?, &out)?;
                let probability = rest.norm_sqr() / total;
                let conditional_state = if probability > tolerance::IMPOSSIBLE {
                    Some(rest.normalized()?)
                } else {
                    None
                };
                Ok(DetectorEvent {
                    detector: d,
                    probability,
                    conditional_state,
                })
            })
            .collect()
    }
}

fn relabel_qubit(s: &PureState, name: &str) -> Result<PureState> {
    let from = s
        .layout()
        .names()
        .next()
        .ok_or_else(|| SimError::InvalidInput("empty polarization state".into()))?
        .to_string();
    s.relabeled(&from, name)
}

/// Physical postselection: the chain plus all three detectors.
pub fn postselect_block(s: &PureState, block: &PostselectionBlock) -> Result<Vec<DetectorEvent>> {
    block.detect(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn bs1_prepares_left_with_phase_i() {
        let s = bs1_prepare(&horizontal("pol1"), "path").unwrap();
        let r = FRAC_1_SQRT_2;
        let expected = [c(0., r), ZERO, c(r, 0.), ZERO];
        for (a, b) in s.amplitudes().iter().zip(expected) {
            assert!(close(*a, b));
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bs2_routes_to_o1_and_o2() {
        let u = bs2_unitary("path");
        let toward_pbs = PureState::qubit("path", ONE, I).unwrap();
        let out = hilbert::apply(&u, &toward_pbs).unwrap();
        assert!(close(out.amplitudes()[0], ONE));
        assert_eq!(out.amplitudes()[1].norm(), 0.0);
        let toward_d2 = PureState::qubit("path", ONE, -I).unwrap();
        let out = hilbert::apply(&u, &toward_d2).unwrap();
        assert!(out.amplitudes()[0].norm() < 1e-15);
        assert!(close(out.amplitudes()[1], ONE));
        assert!(u.matrix().unitarity_defect() < 1e-15);
    }

    #[test]
    fn hwp_flips_right_arm_only_and_is_an_involution() {
        let hwp = hwp_right_arm("path", "pol1");
        let rh = hilbert::tensor(&[&right("path"), &horizontal("pol1")]).unwrap();
        let rv = hilbert::tensor(&[&right("path"), &vertical("pol1")]).unwrap();
        assert_eq!(hilbert::apply(&hwp, &rh).unwrap(), rv);
        let lh = hilbert::tensor(&[&left("path"), &horizontal("pol1")]).unwrap();
        assert_eq!(hilbert::apply(&hwp, &lh).unwrap(), lh);
        let sq = hwp.compose(&hwp).unwrap();
        assert_eq!(sq.matrix(), &Matrix::identity(4));
    }

    #[test]
    fn phase_shifter_multiplies_right_arm_by_i() {
        let out = hilbert::apply(&ps_right_arm("path"), &right("path")).unwrap();
        assert_eq!(out.amplitudes(), &[ZERO, I]);
    }

    #[test]
    fn pbs_never_sends_vertical_to_d1() {
        let block = PostselectionBlock::standard("path", "pol1").unwrap();
        let d1 = block.detector_projector(Detector::D1).unwrap();
        let o1v = hilbert::tensor(&[&left("path"), &vertical("pol1")]).unwrap();
        let out = hilbert::apply(&d1, &o1v).unwrap();
        assert!(out.amplitudes().iter().all(|a| *a == ZERO));
    }

    #[test]
    fn target_clicks_d1_with_certainty() {
        let block = PostselectionBlock::standard("path", "pol1").unwrap();
        let events = postselect_block(&block.target().unwrap(), &block).unwrap();
        assert!((events[0].probability - 1.0).abs() < 1e-14);
        assert!(events[1].conditional_state.is_none());
        assert!(events[2].conditional_state.is_none());
    }

    #[test]
    fn orthogonal_input_never_clicks_d1() {
        let block = PostselectionBlock::standard("path", "pol1").unwrap();
        let r = FRAC_1_SQRT_2;
        // (|L⟩|H⟩ − |R⟩|V⟩)/√2 is orthogonal to the target.
        let s = PureState::new(
            SpaceLayout::new([("path", 2), ("pol1", 2)]).unwrap(),
            vec![c(r, 0.), ZERO, ZERO, c(-r, 0.)],
        )
        .unwrap();
        let events = postselect_block(&s, &block).unwrap();
        assert!(events[0].probability < 1e-28);
        assert!(events[0].conditional_state.is_none());
        let total: f64 = events.iter().map(|e| e.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psi_block_at_horizontal_flips_the_vertical_sign() {
        let plain = PostselectionBlock::standard("path", "pol1").unwrap().target().unwrap();
        let psi = PostselectionBlock::for_polarization("path", "pol1", &horizontal("p"))
            .unwrap()
            .target()
            .unwrap();
        let r = FRAC_1_SQRT_2;
        assert!(close(plain.amplitudes()[3], c(r, 0.)));
        assert!(close(psi.amplitudes()[3], c(-r, 0.)));
    }

    #[test]
    fn rotation_to_horizontal_maps_psi_and_perp() {
        let psi = PureState::qubit("p", c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let u = rotation_to_horizontal(&psi).unwrap();
        let a = hilbert::apply(&u, &psi).unwrap();
        assert!(close(a.amplitudes()[0], ONE) && close(a.amplitudes()[1], ZERO));
        let perp = orthogonal_polarization(&psi).unwrap();
        let b = hilbert::apply(&u, &perp).unwrap();
        assert!(close(b.amplitudes()[0], ZERO) && close(b.amplitudes()[1], ONE));
        assert!(hilbert::inner(&psi, &perp).unwrap().norm() < 1e-15);
    }

    #[test]
    fn sigma_z_has_circular_eigenstates() {
        let sz = sigma_z("p");
        let plus = hilbert::apply(&sz, &circular_plus("p")).unwrap();
        let minus = hilbert::apply(&sz, &circular_minus("p")).unwrap();
        for (x, y) in plus.amplitudes().iter().zip(circular_plus("p").amplitudes()) {
            assert!(close(*x, *y));
        }
        for (x, y) in minus.amplitudes().iter().zip(circular_minus("p").amplitudes()) {
            assert!(close(*x, -*y));
        }
    }
}
