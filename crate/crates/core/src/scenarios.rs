//! End-to-end runs: the plain Cheshire interferometer, the same experiment
//! with the polarization teleported on its way to the detectors, and the
//! reduced-state bookkeeping of who holds what afterwards.
//!
//! Subsystem order is always path first, then polarizations by number.
//! Charlie's photon polarization is `pol1`, the shared singlet lives on
//! (`pol2`, `pol3`), Alice holds `pol1` and `pol2`, Bob holds `pol3`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::hilbert::{self, DensityMatrix, Operator, PureState, C64};
use crate::optics::{self, Detector, PostselectionBlock};
use crate::random::random_qubit_amplitudes;
use crate::teleport::{self, BellLabel, ClassicalMessage, CorrectionMap};
use crate::tolerance;
use crate::weakmeas::{
    self, MeterState, Pointer, PointerRun, Postselection, WeakMeasurement, WeakScenario, WeakValueResult,
};

pub const PATH: &str = "path";
pub const POL: &str = "pol";
pub const POL1: &str = "pol1";
pub const POL2: &str = "pol2";
pub const POL3: &str = "pol3";

/// α|H⟩ + β|V⟩
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationInput {
    pub alpha: C64,
    pub beta: C64,
}

impl PolarizationInput {
    /// Requires |α|² + |β|² = 1 within 1e-10.
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > tolerance::ASSERT {
            return Err(SimError::InvalidInput(format!(
                "|alpha|^2 + |beta|^2 = {n}, expected 1"
            )));
        }
        Ok(PolarizationInput { alpha, beta })
    }

    /// Rescales (α, β) to unit norm.
    pub fn normalized(alpha: C64, beta: C64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(SimError::ZeroNorm);
        }
        Ok(PolarizationInput {
            alpha: alpha / n,
            beta: beta / n,
        })
    }

    pub fn horizontal() -> Self {
        PolarizationInput {
            alpha: C64::new(1.0, 0.0),
            beta: C64::new(0.0, 0.0),
        }
    }

    /// Haar-random polarization from a ChaCha8 stream.
    pub fn random(seed: u64) -> Self {
        let (alpha, beta) = random_qubit_amplitudes(&mut ChaCha8Rng::seed_from_u64(seed));
        PolarizationInput { alpha, beta }
    }

    pub fn state(&self, pol: &str) -> Result<PureState> {
        PureState::new(hilbert::SpaceLayout::qubit(pol), vec![self.alpha, self.beta])
    }

    /// β*|H⟩ − α*|V⟩
    pub fn orthogonal(&self, pol: &str) -> Result<PureState> {
        optics::orthogonal_polarization(&self.state(pol)?)
    }

    /// (|ψ⟩ ± i|ψ⊥⟩)/√2 for sign = ±1.
    pub fn circular(&self, pol: &str, sign: f64) -> Result<PureState> {
        let psi = self.state(pol)?;
        let perp = self.orthogonal(pol)?;
        let amps = psi
            .amplitudes()
            .iter()
            .zip(perp.amplitudes())
            .map(|(a, b)| a + C64::new(0.0, sign) * b)
            .collect();
        PureState::new(psi.layout().clone(), amps)
    }
}

/// U with U|ψ⟩ = |H⟩ and U|ψ⊥⟩ = |V⟩.
pub fn basis_unitary(inp: &PolarizationInput, pol: &str) -> Result<Operator> {
    optics::rotation_to_horizontal(&inp.state(pol)?)
}

/// σ_ψz = U† σ_z U
pub fn sigma_psi_z(inp: &PolarizationInput, pol: &str) -> Result<Operator> {
    let u = basis_unitary(inp, pol)?;
    u.adjoint().compose(&optics::sigma_z(pol))?.compose(&u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerConfig {
    pub grid_points: usize,
    pub width: f64,
    /// Grid span in units of the width.
    pub span: f64,
}

impl Default for PointerConfig {
    fn default() -> Self {
        PointerConfig {
            grid_points: Pointer::DEFAULT_GRID_POINTS,
            width: Pointer::DEFAULT_WIDTH,
            span: Pointer::DEFAULT_SPAN,
        }
    }
}

impl PointerConfig {
    pub fn build(&self) -> Result<Pointer> {
        Pointer::with_span(self.grid_points, self.width, self.span * self.width)
    }
}

/// Everything a run needs besides the input polarization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Coupling strengths as g/σ, strictly decreasing.
    pub strengths: Vec<f64>,
    pub pointer: PointerConfig,
    /// Sample one Bell outcome with this seed instead of enumerating all four.
    pub seed: Option<u64>,
    /// Dave repeats the weak measurements after Bob's correction.
    pub dave_check: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            strengths: vec![0.4, 0.2, 0.1, 0.05],
            pointer: PointerConfig::default(),
            seed: None,
            dave_check: false,
        }
    }
}

impl ScenarioConfig {
    /// Strengths in position units.
    fn absolute_strengths(&self) -> Vec<f64> {
        self.strengths.iter().map(|r| r * self.pointer.width).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexValue {
    fn from(z: C64) -> Self {
        ComplexValue { re: z.re, im: z.im }
    }
}

impl From<ComplexValue> for C64 {
    fn from(z: ComplexValue) -> Self {
        C64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateEntry {
    /// Requested strength (position units).
    pub g: f64,
    /// Strength actually realized on the grid.
    pub g_grid: f64,
    pub re: f64,
    pub im: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakValueEntry {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<BellLabel>,
    pub analytic: ComplexValue,
    pub estimates: Vec<EstimateEntry>,
    pub converging: bool,
    pub linear_bound: f64,
}

impl WeakValueEntry {
    fn from_result(r: &WeakValueResult, requested: &[f64], branch: Option<BellLabel>) -> Self {
        WeakValueEntry {
            label: r.label.clone(),
            branch,
            analytic: r.analytic.into(),
            estimates: requested
                .iter()
                .zip(&r.strengths_used)
                .zip(r.estimates.iter().zip(&r.errors))
                .map(|((&g, &g_grid), (e, &abs_err))| EstimateEntry {
                    g,
                    g_grid,
                    re: e.re,
                    im: e.im,
                    abs_err,
                })
                .collect(),
            converging: r.is_converging(),
            linear_bound: r.linear_bound(),
        }
    }

    /// Estimate at the smallest strength.
    pub fn estimated(&self) -> ComplexValue {
        let e = self.estimates.last().expect("at least one strength");
        ComplexValue { re: e.re, im: e.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEntry {
    pub outcome: BellLabel,
    /// arg⟨ψ|Bob⟩ after correction, radians.
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchEntry {
    pub outcome: BellLabel,
    pub bell_probability: f64,
    /// Probability of this Bell outcome and a D1 click.
    pub joint_probability: f64,
    /// Bob's corrected qubit against |ψ⟩.
    pub fidelity: f64,
    /// Trace distance between what reaches Dave and the no-teleport
    /// baseline, on path and polarization.
    pub trace_distance: f64,
    /// 1 − F between the D1-conditional pointer-and-system state and the
    /// baseline's, at the smallest strength.
    pub pointer_infidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportSummary {
    /// Worst Bob-qubit fidelity over the reported branches.
    pub fidelity: f64,
    /// Classical messages of the reported branches.
    pub outcome: Vec<ClassicalMessage>,
    pub phases: Vec<PhaseEntry>,
    pub branches: Vec<BranchEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dave_check: Vec<WeakValueEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndgameEntry {
    pub party: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<BellLabel>,
    pub subsystems: Vec<String>,
    pub matrix: Vec<Vec<ComplexValue>>,
}

impl EndgameEntry {
    pub fn density(&self) -> Result<DensityMatrix> {
        let layout = hilbert::SpaceLayout::new(self.subsystems.iter().map(|s| (s.clone(), 2)))?;
        let n = self.matrix.len();
        let data = self.matrix.iter().flatten().map(|&z| C64::from(z)).collect();
        DensityMatrix::new(layout, hilbert::Matrix::from_vec(n, n, data)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub strengths: Vec<f64>,
    pub grid_points: usize,
    pub width: f64,
    pub span: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ComplexValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<ComplexValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub dave_check: bool,
}

impl ReportConfig {
    fn new(config: &ScenarioConfig, input: Option<&PolarizationInput>) -> Self {
        ReportConfig {
            strengths: config.strengths.clone(),
            grid_points: config.pointer.grid_points,
            width: config.pointer.width,
            span: config.pointer.span,
            alpha: input.map(|i| i.alpha.into()),
            beta: input.map(|i| i.beta.into()),
            seed: config.seed,
            dave_check: config.dave_check,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub config: ReportConfig,
    pub postselection_probability: f64,
    pub weak_values: Vec<WeakValueEntry>,
    pub teleport: Option<TeleportSummary>,
    pub endgame: Vec<EndgameEntry>,
}

/// Π_L, Π_R, Π_L⊗A, Π_R⊗A with A acting on `pol`.
fn arm_measurements(pol_label: &str, pol_op: &Operator) -> Result<Vec<WeakMeasurement>> {
    let (l, r) = (optics::pi_left(PATH), optics::pi_right(PATH));
    Ok(vec![
        WeakMeasurement::new("Pi_L", l.clone()),
        WeakMeasurement::new("Pi_R", r.clone()),
        WeakMeasurement::new(&format!("{pol_label}^L"), optics::arm_local(&l, pol_op)?),
        WeakMeasurement::new(&format!("{pol_label}^R"), optics::arm_local(&r, pol_op)?),
    ])
}

/// The plain experiment: H input, standard block on (`path`, `pol`).
pub fn cheshire_scenario(pointer: Pointer) -> Result<WeakScenario> {
    Ok(WeakScenario {
        pre: optics::bs1_prepare(&optics::horizontal(POL), PATH)?,
        measurements: arm_measurements("sigma_z", &optics::sigma_z(POL))?,
        evolution: vec![],
        postselection: Postselection::Block(PostselectionBlock::standard(PATH, POL)?),
        pointer,
    })
}

/// The experiment with arbitrary input ψ on `pol1` and no teleportation;
/// Dave's block selects (|L⟩|ψ⟩ + |R⟩|ψ⊥⟩)/√2.
pub fn baseline_scenario(inp: &PolarizationInput, pointer: Pointer) -> Result<WeakScenario> {
    let psi = inp.state(POL1)?;
    Ok(WeakScenario {
        pre: optics::bs1_prepare(&psi, PATH)?,
        measurements: arm_measurements("sigma_psi_z", &sigma_psi_z(inp, POL1)?)?,
        evolution: vec![],
        postselection: Postselection::Block(PostselectionBlock::for_polarization(PATH, POL1, &psi)?),
        pointer,
    })
}

/// Charlie's state: the prepared photon next to the shared singlet.
pub fn teleport_preparation(inp: &PolarizationInput) -> Result<PureState> {
    let photon = optics::bs1_prepare(&inp.state(POL1)?, PATH)?;
    hilbert::tensor(&[&photon, &teleport::bell_state(BellLabel::PsiMinus, POL2, POL3)?])
}

/// Alice's projection onto `label`, Bob's correction, then the routing of
/// Bob's qubit into the interferometer slot. Built from subsystem names
/// and the outcome only.
pub fn teleport_stage(label: BellLabel) -> Result<Vec<Operator>> {
    Ok(vec![
        Operator::projector_onto(&teleport::bell_state(label, POL1, POL2)?)?,
        CorrectionMap::standard().operator(label, POL3)?,
        optics::swap(POL1, POL3)?,
    ])
}

/// The baseline with the teleportation stage for one Bell branch inserted
/// between Charlie's couplings and Dave's block.
pub fn teleport_scenario(inp: &PolarizationInput, label: BellLabel, pointer: Pointer) -> Result<WeakScenario> {
    let base = baseline_scenario(inp, pointer)?;
    Ok(WeakScenario {
        pre: teleport_preparation(inp)?,
        evolution: teleport_stage(label)?,
        ..base
    })
}

/// Runs every strength through both the detector block and the direct
/// projector and insists they agree.
fn run_checked(scenario: &WeakScenario, strengths: &[f64]) -> Result<Vec<PointerRun>> {
    weakmeas::validate_strengths(strengths, &scenario.pointer)?;
    let direct = Postselection::Projector(scenario.postselection.effective_projector()?);
    strengths
        .par_iter()
        .map(|&g| {
            let block = scenario.run_at(g)?;
            let proj = scenario.run_with(g, &direct)?;
            let mut gap = (block.probability - proj.probability).abs();
            for (a, b) in block.means.iter().zip(&proj.means) {
                gap = gap.max((a.0 - b.0).abs()).max((a.1 - b.1).abs());
            }
            if gap > tolerance::ALGEBRA {
                return Err(SimError::InvariantViolation(format!(
                    "detector block and direct projection disagree by {gap:e} at g = {g}"
                )));
            }
            Ok(block)
        })
        .collect()
}

fn weak_value_entries(
    scenario: &WeakScenario,
    strengths: &[f64],
    branch: Option<BellLabel>,
) -> Result<(Vec<WeakValueEntry>, Vec<PointerRun>)> {
    let runs = run_checked(scenario, strengths)?;
    let analytic = scenario.analytic()?;
    let results = weakmeas::collect_results(scenario, &analytic, &runs);
    let entries = results
        .iter()
        .map(|r| WeakValueEntry::from_result(r, strengths, branch))
        .collect();
    Ok((entries, runs))
}

/// Probability of a D1 click for a pointer-free state.
fn d1_probability(block: &PostselectionBlock, s: &PureState) -> Result<f64> {
    let events = block.detect(s)?;
    Ok(events
        .iter()
        .find(|e| e.detector == Detector::D1)
        .expect("D1 reported")
        .probability)
}

/// The plain experiment with four weakly coupled pointers.
pub fn run_cheshire(config: &ScenarioConfig) -> Result<ScenarioReport> {
    let scenario = cheshire_scenario(config.pointer.build()?)?;
    let probability = match &scenario.postselection {
        Postselection::Block(block) => {
            let physical = d1_probability(block, &scenario.pre)?;
            let direct = hilbert::project(&scenario.postselection.effective_projector()?, &scenario.pre)?.probability;
            if (physical - direct).abs() > tolerance::ALGEBRA {
                return Err(SimError::InvariantViolation(format!(
                    "D1 probability {physical} differs from projection {direct}"
                )));
            }
            physical
        }
        Postselection::Projector(_) => unreachable!("the plain experiment uses the detector block"),
    };
    let strengths = config.absolute_strengths();
    let (weak_values, _) = weak_value_entries(&scenario, &strengths, None)?;
    Ok(ScenarioReport {
        scenario: "cheshire".into(),
        config: ReportConfig::new(config, None),
        postselection_probability: probability,
        weak_values,
        teleport: None,
        endgame: vec![],
    })
}

/// Which subsystems each party is reported on in the end-game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndgameParties {
    pub parties: Vec<(String, Vec<String>)>,
}

impl Default for EndgameParties {
    fn default() -> Self {
        let own = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
        EndgameParties {
            parties: vec![
                ("alice".into(), own(&[POL1, POL2])),
                ("bob".into(), own(&[POL3])),
                ("path".into(), own(&[PATH])),
                ("dave_slot".into(), own(&[PATH, POL3])),
            ],
        }
    }
}

/// Reduced states of each party, on a state taken after Bob's correction
/// and before routing into Dave's block.
pub fn endgame_analysis(
    state: &PureState,
    branch: Option<BellLabel>,
    parties: &EndgameParties,
) -> Result<Vec<EndgameEntry>> {
    parties
        .parties
        .iter()
        .map(|(party, names)| {
            let keep: Vec<&str> = names.iter().map(String::as_str).collect();
            let rho = hilbert::reduced(state, &keep)?;
            let m = rho.matrix();
            let matrix = (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| m[(i, j)].into()).collect())
                .collect();
            Ok(EndgameEntry {
                party: party.clone(),
                branch,
                subsystems: names.clone(),
                matrix,
            })
        })
        .collect()
}

/// Pointer-free picture of one teleportation branch.
struct BranchAudit {
    entry: BranchEntry,
    phase: f64,
    corrected: PureState,
    message: ClassicalMessage,
}

fn audit_branch(
    inp: &PolarizationInput,
    branch: &teleport::TeleportBranch,
    baseline_pre: &PureState,
    block: &PostselectionBlock,
) -> Result<Option<BranchAudit>> {
    let Some(corrected) = &branch.state else {
        return Ok(None);
    };
    let psi3 = inp.state(POL3)?;
    let fidelity = hilbert::reduced(corrected, &[POL3])?.fidelity_with_pure(&psi3)?;
    // Bob's qubit and the path, with Alice's Bell state peeled off.
    let alice = teleport::bell_state(branch.label, POL1, POL2)?;
    let bob = hilbert::contract(&alice, corrected)?.normalized()?;
    let expected = optics::bs1_prepare(&psi3, PATH)?;
    let phase = expected.relative_phase(&bob)?;
    let dave_in = hilbert::reduced(corrected, &[PATH, POL3])?.relabeled(POL3, POL1)?;
    let baseline = DensityMatrix::from_pure(baseline_pre)?;
    let trace_distance = dave_in.trace_distance(&baseline)?;
    let routed = hilbert::apply(&optics::swap(POL1, POL3)?, corrected)?;
    let joint_probability = branch.probability * d1_probability(block, &routed)?;
    Ok(Some(BranchAudit {
        entry: BranchEntry {
            outcome: branch.label,
            bell_probability: branch.probability,
            joint_probability,
            fidelity,
            trace_distance,
            pointer_infidelity: 0.0,
        },
        phase,
        corrected: corrected.clone(),
        message: branch.message.clone(),
    }))
}

/// 1 − F between two D1-conditional meter states; the teleported one
/// carries the extra polarizations, which are traced out.
fn pointer_infidelity(teleported: &MeterState, baseline: &MeterState) -> Result<f64> {
    Ok(1.0 - teleported.fidelity_with(baseline)?)
}

/// The experiment with the polarization teleported between Charlie's weak
/// couplings and Dave's postselection.
pub fn run_teleport_cheshire(inp: &PolarizationInput, config: &ScenarioConfig) -> Result<ScenarioReport> {
    let inp = PolarizationInput::new(inp.alpha, inp.beta)?;
    let pointer = config.pointer.build()?;
    let strengths = config.absolute_strengths();
    weakmeas::validate_strengths(&strengths, &pointer)?;

    let pre = teleport_preparation(&inp)?;
    let baseline = baseline_scenario(&inp, pointer.clone())?;
    let block = PostselectionBlock::for_polarization(PATH, POL1, &inp.state(POL1)?)?;

    let branches = teleport::teleport_branches(&pre, POL1, POL2, POL3)?;
    let mut audits = Vec::new();
    for b in &branches {
        if let Some(a) = audit_branch(&inp, b, &baseline.pre, &block)? {
            audits.push(a);
        }
    }
    let postselection_probability: f64 = audits.iter().map(|a| a.entry.joint_probability).sum();

    let chosen: Vec<BellLabel> = match config.seed {
        Some(seed) => {
            let outcomes = teleport::bell_measure(&pre, POL1, POL2)?;
            vec![teleport::sample_outcome(&outcomes, seed)?.0.label]
        }
        None => audits.iter().map(|a| a.entry.outcome).collect(),
    };

    let g_min = *strengths.last().expect("validated non-empty");
    let mut baseline_run = baseline.run_at(g_min)?;
    baseline_run.state.normalize()?;

    let mut weak_values = Vec::new();
    let mut dave_check = Vec::new();
    let mut endgame = Vec::new();
    let mut summary_branches = Vec::new();
    let mut outcome = Vec::new();
    let mut phases = Vec::new();
    let parties = EndgameParties::default();
    for label in chosen {
        let audit = audits
            .iter()
            .find(|a| a.entry.outcome == label)
            .ok_or_else(|| SimError::InvariantViolation(format!("sampled impossible outcome {label}")))?;
        let scenario = teleport_scenario(&inp, label, pointer.clone())?;
        let (entries, runs) = weak_value_entries(&scenario, &strengths, Some(label))?;
        weak_values.extend(entries);

        let mut entry = audit.entry.clone();
        let last = runs.last().expect("validated non-empty");
        entry.pointer_infidelity = pointer_infidelity(&last.state, &baseline_run.state)?;
        summary_branches.push(entry);
        outcome.push(audit.message.clone());
        phases.push(PhaseEntry {
            outcome: label,
            phase: audit.phase,
        });
        endgame.extend(endgame_analysis(&audit.corrected, Some(label), &parties)?);

        if config.dave_check {
            let routed = hilbert::apply(&optics::swap(POL1, POL3)?, &audit.corrected)?;
            let check = WeakScenario {
                pre: routed,
                evolution: vec![],
                ..scenario
            };
            let (entries, _) = weak_value_entries(&check, &strengths, Some(label))?;
            dave_check.extend(entries);
        }
    }
    let fidelity = summary_branches
        .iter()
        .map(|b| b.fidelity)
        .fold(f64::INFINITY, f64::min);

    Ok(ScenarioReport {
        scenario: "teleport".into(),
        config: ReportConfig::new(config, Some(&inp)),
        postselection_probability,
        weak_values,
        teleport: Some(TeleportSummary {
            fidelity,
            outcome,
            phases,
            branches: summary_branches,
            dave_check,
        }),
        endgame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ScenarioConfig {
        ScenarioConfig {
            strengths: vec![0.2, 0.1],
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn sigma_psi_z_eigenstates() {
        let inp = PolarizationInput::random(5);
        let s = sigma_psi_z(&inp, "p").unwrap();
        for sign in [1.0, -1.0] {
            let v = inp.circular("p", sign).unwrap();
            let image = hilbert::apply(&s, &v).unwrap();
            for (a, b) in image.amplitudes().iter().zip(v.amplitudes()) {
                assert!((a - b * sign).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn horizontal_basis_unitary_flips_only_the_vertical_row() {
        let u = basis_unitary(&PolarizationInput::horizontal(), "p").unwrap();
        let m = u.matrix();
        assert_eq!(m[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(m[(1, 1)], C64::new(-1.0, 0.0));
        assert_eq!(m[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn input_must_be_normalized() {
        assert!(PolarizationInput::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0)).is_err());
        let n = PolarizationInput::normalized(C64::new(3.0, 0.0), C64::new(0.0, 4.0)).unwrap();
        assert!((n.alpha - C64::new(0.6, 0.0)).norm() < 1e-15);
        assert!(PolarizationInput::normalized(C64::new(0.0, 0.0), C64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn cheshire_report_basics() {
        let r = run_cheshire(&small_config()).unwrap();
        assert!((r.postselection_probability - 0.25).abs() < 1e-12);
        let want = [1.0, 0.0, 0.0, 1.0];
        for (e, w) in r.weak_values.iter().zip(want) {
            assert!((C64::from(e.analytic) - C64::new(w, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn teleport_branch_bookkeeping() {
        let inp = PolarizationInput::random(9);
        let r = run_teleport_cheshire(&inp, &small_config()).unwrap();
        let t = r.teleport.as_ref().unwrap();
        assert_eq!(t.branches.len(), 4);
        for b in &t.branches {
            assert!((b.bell_probability - 0.25).abs() < 1e-12);
            assert!((b.joint_probability - 1.0 / 16.0).abs() < 1e-12);
            assert!(b.trace_distance < 1e-10);
            assert!(b.pointer_infidelity.abs() < 1e-10, "{}", b.pointer_infidelity);
        }
        assert!((r.postselection_probability - 0.25).abs() < 1e-12);
        assert!((t.fidelity - 1.0).abs() < 1e-10);
        assert_eq!(r.weak_values.len(), 16);
    }

    #[test]
    fn seeded_teleport_reports_one_branch() {
        let cfg = ScenarioConfig {
            seed: Some(7),
            dave_check: true,
            ..small_config()
        };
        let r = run_teleport_cheshire(&PolarizationInput::random(1), &cfg).unwrap();
        let t = r.teleport.unwrap();
        assert_eq!(t.outcome.len(), 1);
        assert_eq!(r.weak_values.len(), 4);
        assert_eq!(t.dave_check.len(), 4);
        let want = [1.0, 0.0, 0.0, 1.0];
        for (e, w) in t.dave_check.iter().zip(want) {
            assert!((C64::from(e.analytic) - C64::new(w, 0.0)).norm() < 1e-12);
        }
    }
}
