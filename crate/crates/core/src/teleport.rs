//! Bell basis, Bell measurement, classical channel and Bob's corrections.
//!
//! Nothing here takes the teleported polarization as a parameter: every
//! operation is addressed by subsystem names only.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::hilbert::{self, Matrix, Operator, PureState, SpaceLayout, C64};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellLabel {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    /// Φ+ = 00, Φ− = 01, Ψ+ = 10, Ψ− = 11
    pub fn bits(self) -> [u8; 2] {
        match self {
            BellLabel::PhiPlus => [0, 0],
            BellLabel::PhiMinus => [0, 1],
            BellLabel::PsiPlus => [1, 0],
            BellLabel::PsiMinus => [1, 1],
        }
    }

    pub fn from_bits(bits: [u8; 2]) -> Result<Self> {
        BellLabel::ALL
            .into_iter()
            .find(|l| l.bits() == bits)
            .ok_or_else(|| SimError::InvalidInput(format!("not a Bell payload: {bits:?}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The Bell state on qubits (a, b), in the {H, V} basis with a leading.
pub fn bell_state(label: BellLabel, a: &str, b: &str) -> Result<PureState> {
    let layout = SpaceLayout::new([(a, 2), (b, 2)])?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = 0.0;
    // amplitudes of HH, HV, VH, VV
    let amps = match label {
        BellLabel::PhiPlus => [h, z, z, h],
        BellLabel::PhiMinus => [h, z, z, -h],
        BellLabel::PsiPlus => [z, h, h, z],
        BellLabel::PsiMinus => [z, h, -h, z],
    };
    PureState::new(layout, amps.iter().map(|&x| C64::new(x, 0.0)).collect())
}

/// One branch of a Bell measurement.
#[derive(Debug, Clone)]
pub struct BellOutcome {
    pub label: BellLabel,
    pub probability: f64,
    /// Normalized conditional state; None on a zero-probability branch.
    pub post_state: Option<PureState>,
}

/// Projects (a, b) onto each Bell state in turn. All four branches are
/// returned in [`BellLabel::ALL`] order.
pub fn bell_measure(s: &PureState, a: &str, b: &str) -> Result<Vec<BellOutcome>> {
    for name in [a, b] {
        let dim = s.layout().dim_of(name)?;
        if dim != 2 {
            return Err(SimError::InvalidDimension {
                name: name.to_string(),
                dim,
            });
        }
    }
    let total = s.norm_sqr();
    BellLabel::ALL
        .into_iter()
        .map(|label| {
            let p = Operator::projector_onto(&bell_state(label, a, b)?)?;
            let branch = hilbert::apply(&p, s)?;
            let probability = branch.norm_sqr() / total;
            let post_state = if probability > tolerance::IMPOSSIBLE {
                Some(branch.normalized()?)
            } else {
                None
            };
            Ok(BellOutcome {
                label,
                probability,
                post_state,
            })
        })
        .collect()
}

/// Two classical bits from one party to another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalMessage {
    pub sender: String,
    pub receiver: String,
    pub payload: [u8; 2],
}

impl ClassicalMessage {
    pub fn announce(sender: &str, receiver: &str, label: BellLabel) -> Self {
        ClassicalMessage {
            sender: sender.to_string(),
            receiver: receiver.to_string(),
            payload: label.bits(),
        }
    }

    pub fn label(&self) -> Result<BellLabel> {
        BellLabel::from_bits(self.payload)
    }
}

/// Draws one branch by inverse CDF from a ChaCha8 stream seeded with `seed`,
/// and writes Alice's announcement to Bob.
pub fn sample_outcome(outcomes: &[BellOutcome], seed: u64) -> Result<(BellOutcome, ClassicalMessage)> {
    let total: f64 = outcomes.iter().map(|o| o.probability).sum();
    if outcomes.is_empty() || (total - 1.0).abs() > tolerance::ASSERT {
        return Err(SimError::InvariantViolation(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for o in outcomes {
        if o.probability <= 0.0 {
            continue;
        }
        acc += o.probability;
        chosen = Some(o);
        if u < acc {
            break;
        }
    }
    let o = chosen.expect("some outcome has positive probability").clone();
    let msg = ClassicalMessage::announce("alice", "bob", o.label);
    Ok((o, msg))
}

/// Bob's fixed outcome → unitary dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionMap {
    entries: [(BellLabel, Matrix); 4],
}

impl CorrectionMap {
    /// Ψ− → I, Ψ+ → U_z, Φ− → U_x, Φ+ → U_y
    pub fn standard() -> Self {
        CorrectionMap {
            entries: [
                (BellLabel::PhiPlus, u_y()),
                (BellLabel::PhiMinus, u_x()),
                (BellLabel::PsiPlus, u_z()),
                (BellLabel::PsiMinus, Matrix::identity(2)),
            ],
        }
    }

    pub fn matrix(&self, label: BellLabel) -> &Matrix {
        &self.entries.iter().find(|(l, _)| *l == label).expect("all labels present").1
    }

    /// The correction as a unitary on the named qubit.
    pub fn operator(&self, label: BellLabel, qubit: &str) -> Result<Operator> {
        Operator::unitary(SpaceLayout::qubit(qubit), self.matrix(label).clone())
    }
}

/// |H⟩⟨H| − |V⟩⟨V|
pub fn u_z() -> Matrix {
    Matrix::diagonal(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)])
}

/// |H⟩⟨V| + |V⟩⟨H|
pub fn u_x() -> Matrix {
    let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    Matrix::from_rows(&[vec![o, l], vec![l, o]]).expect("square rows")
}

/// −i|H⟩⟨V| + i|V⟩⟨H|
pub fn u_y() -> Matrix {
    let o = C64::new(0.0, 0.0);
    Matrix::from_rows(&[vec![o, C64::new(0.0, -1.0)], vec![C64::new(0.0, 1.0), o]]).expect("square rows")
}

/// Applies Bob's correction for `label` to `bob_qubit`.
pub fn correct(label: BellLabel, s: &PureState, bob_qubit: &str) -> Result<PureState> {
    hilbert::apply(&CorrectionMap::standard().operator(label, bob_qubit)?, s)
}

/// One corrected teleportation branch.
#[derive(Debug, Clone)]
pub struct TeleportBranch {
    pub label: BellLabel,
    pub probability: f64,
    pub message: ClassicalMessage,
    /// After Alice's projection and Bob's correction; None if the branch
    /// never occurs.
    pub state: Option<PureState>,
}

/// Alice Bell-measures (input, alice_half), announces, Bob corrects
/// bob_half. Every branch is enumerated.
pub fn teleport_branches(s: &PureState, input: &str, alice_half: &str, bob_half: &str) -> Result<Vec<TeleportBranch>> {
    bell_measure(s, input, alice_half)?
        .into_iter()
        .map(|o| {
            let message = ClassicalMessage::announce("alice", "bob", o.label);
            let label = message.label()?;
            let state = o.post_state.map(|st| correct(label, &st, bob_half)).transpose()?;
            Ok(TeleportBranch {
                label,
                probability: o.probability,
                message,
                state,
            })
        })
        .collect()
}
