//! Weak values, computed analytically and read off simulated pointers.
//!
//! The meter is a Gaussian packet on a grid and the coupling
//! exp(−i g A ⊗ p̂) translates the packet of every eigenbranch of A by a
//! whole number of grid sites. With integer eigenvalues the translation is
//! exact, so the only approximation left in a pointer estimate is the finite
//! coupling strength itself.

mod coupling;
mod pointer;
mod register;

pub use coupling::{attach_pointer, pointer_means, pointer_readout, weak_couple, PointerReadout, WeakCoupling};
pub use pointer::Pointer;
pub use register::MeterState;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::hilbert::{self, Operator, PureState, C64};
use crate::optics::PostselectionBlock;
use crate::tolerance;

/// ⟨post|A|pre⟩ / ⟨post|pre⟩
pub fn analytic_weak_value(a: &Operator, pre: &PureState, post: &PureState) -> Result<C64> {
    let overlap = hilbert::inner(post, pre)?;
    if overlap.norm() <= tolerance::OVERLAP {
        return Err(SimError::UndefinedWeakValue {
            overlap: overlap.norm(),
        });
    }
    Ok(hilbert::inner(post, &hilbert::apply(a, pre)?)? / overlap)
}

/// How the ensemble is finally selected.
#[derive(Debug, Clone)]
pub enum Postselection {
    /// Direct projection.
    Projector(Operator),
    /// The detector block; only D1 clicks are kept.
    Block(PostselectionBlock),
}

impl Postselection {
    /// Applies the selection to a meter state, returning the probability.
    pub fn select(&self, state: &mut MeterState) -> Result<f64> {
        match self {
            Postselection::Projector(p) => state.project(p),
            Postselection::Block(block) => {
                state.apply(&block.chain_unitary()?)?;
                state.project(&block.detector_projector(crate::optics::Detector::D1)?)
            }
        }
    }

    /// The equivalent projector before any optics.
    pub fn effective_projector(&self) -> Result<Operator> {
        match self {
            Postselection::Projector(p) => Ok(p.clone()),
            Postselection::Block(block) => Operator::projector_onto(&block.target()?),
        }
    }
}

/// A labeled observable to be weakly measured.
#[derive(Debug, Clone)]
pub struct WeakMeasurement {
    pub label: String,
    pub observable: Operator,
}

impl WeakMeasurement {
    pub fn new(label: &str, observable: Operator) -> Self {
        WeakMeasurement {
            label: label.to_string(),
            observable,
        }
    }
}

/// Preparation, weak couplings (one pointer each, all at the same strength),
/// subsequent linear evolution, and final postselection.
#[derive(Debug, Clone)]
pub struct WeakScenario {
    pub pre: PureState,
    pub measurements: Vec<WeakMeasurement>,
    /// Applied in order after the couplings and before postselection.
    pub evolution: Vec<Operator>,
    pub postselection: Postselection,
    pub pointer: Pointer,
}

/// Pointer run at one coupling strength.
#[derive(Debug, Clone)]
pub struct PointerRun {
    pub strength: f64,
    pub probability: f64,
    /// (mean x, mean p) per measurement, in declaration order.
    pub means: Vec<(f64, f64)>,
    pub state: MeterState,
}

impl PointerRun {
    /// Re = ⟨x⟩/g, Im = ⟨p⟩·2σ²/g
    pub fn estimates(&self, width: f64) -> Vec<C64> {
        self.means
            .iter()
            .map(|(x, p)| C64::new(x / self.strength, p * 2.0 * width * width / self.strength))
            .collect()
    }
}

impl WeakScenario {
    pub fn pointer_name(k: usize) -> String {
        format!("meter{k}")
    }

    /// W† Π W |pre⟩, the state that plays the role of ⟨post| in the
    /// weak-value formula once the evolution W is folded in.
    pub fn retrodicted_post(&self) -> Result<PureState> {
        let mut s = self.pre.clone();
        for op in &self.evolution {
            s = hilbert::apply(op, &s)?;
        }
        s = hilbert::apply(&self.postselection.effective_projector()?, &s)?;
        for op in self.evolution.iter().rev() {
            s = hilbert::apply(&op.adjoint(), &s)?;
        }
        Ok(s)
    }

    pub fn analytic(&self) -> Result<Vec<C64>> {
        let post = self.retrodicted_post()?;
        self.measurements
            .iter()
            .map(|m| analytic_weak_value(&m.observable, &self.pre, &post))
            .collect()
    }

    /// Couples every measurement to its own pointer at strength `g`,
    /// evolves, postselects and reads out.
    pub fn run_at(&self, g: f64) -> Result<PointerRun> {
        self.run_with(g, &self.postselection)
    }

    /// Same as [`WeakScenario::run_at`] with a different final selection.
    pub fn run_with(&self, g: f64, postselection: &Postselection) -> Result<PointerRun> {
        let mut state = self.coupled(g)?;
        let strength = self.pointer.sites_for(g)? as f64 * self.pointer.spacing();
        for op in &self.evolution {
            state.apply(op)?;
        }
        let probability = postselection.select(&mut state)?;
        let means = (0..self.measurements.len())
            .map(|k| state.pointer_means(&Self::pointer_name(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PointerRun {
            strength,
            probability,
            means,
            state,
        })
    }

    /// The meter state right after the couplings.
    pub fn coupled(&self, g: f64) -> Result<MeterState> {
        let mut state = MeterState::new(&self.pre);
        for (k, m) in self.measurements.iter().enumerate() {
            let name = Self::pointer_name(k);
            state.attach(&name, &self.pointer)?;
            let c = WeakCoupling::from_strength(m.observable.clone(), &name, &self.pointer, g)?;
            state.couple(&c)?;
        }
        Ok(state)
    }
}

/// One observable's weak value: analytic, and pointer estimates per strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakValueResult {
    pub label: String,
    pub analytic: C64,
    /// Estimate at the smallest strength.
    pub estimated: C64,
    /// Grid-realized strengths, decreasing.
    pub strengths_used: Vec<f64>,
    pub estimates: Vec<C64>,
    pub errors: Vec<f64>,
}

impl WeakValueResult {
    /// Errors shrink over the last three strengths. Pairs already at the
    /// exact-shift floor (both ≤ 1e-12) count as converged.
    pub fn is_converging(&self) -> bool {
        let tail = &self.errors[self.errors.len().saturating_sub(3)..];
        tail.windows(2)
            .all(|w| w[1] < w[0] || (w[0] <= tolerance::ALGEBRA && w[1] <= tolerance::ALGEBRA))
    }

    /// Smallest C with |error(g)| ≤ C·g over the three smallest strengths.
    pub fn linear_bound(&self) -> f64 {
        let n = self.errors.len();
        (n.saturating_sub(3)..n)
            .map(|k| self.errors[k] / self.strengths_used[k])
            .fold(0.0, f64::max)
    }
}

/// Rejects anything but a strictly decreasing list of positive strengths
/// that stay distinct on the pointer grid.
pub fn validate_strengths(strengths: &[f64], pointer: &Pointer) -> Result<()> {
    if strengths.is_empty() {
        return Err(SimError::InvalidStrengths("no strengths given".into()));
    }
    let sites = strengths
        .iter()
        .map(|&g| pointer.sites_for(g))
        .collect::<Result<Vec<_>>>()?;
    if strengths.windows(2).any(|w| w[1] >= w[0]) || sites.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SimError::InvalidStrengths(format!(
            "strengths must be strictly decreasing on the grid: {strengths:?}"
        )));
    }
    Ok(())
}

/// Runs the scenario at every strength and collects one result per
/// measurement. Strengths run concurrently.
pub fn estimate_weak_value(scenario: &WeakScenario, strengths: &[f64]) -> Result<Vec<WeakValueResult>> {
    validate_strengths(strengths, &scenario.pointer)?;
    let analytic = scenario.analytic()?;
    let runs = strengths
        .par_iter()
        .map(|&g| scenario.run_at(g))
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_results(scenario, &analytic, &runs))
}

pub(crate) fn collect_results(scenario: &WeakScenario, analytic: &[C64], runs: &[PointerRun]) -> Vec<WeakValueResult> {
    let width = scenario.pointer.width();
    let per_run: Vec<Vec<C64>> = runs.iter().map(|r| r.estimates(width)).collect();
    scenario
        .measurements
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let estimates: Vec<C64> = per_run.iter().map(|e| e[k]).collect();
            let errors = estimates.iter().map(|e| (e - analytic[k]).norm()).collect();
            WeakValueResult {
                label: m.label.clone(),
                analytic: analytic[k],
                estimated: *estimates.last().expect("at least one strength"),
                strengths_used: runs.iter().map(|r| r.strength).collect(),
                estimates,
                errors,
            }
        })
        .collect()
}
