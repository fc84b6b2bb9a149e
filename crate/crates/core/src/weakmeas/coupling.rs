use super::pointer::{dot, Pointer};
use crate::error::{Result, SimError};
use crate::hilbert::{self, Operator, PureState, SpaceLayout, SubsetIndex, C64};

/// exp(−i g A ⊗ p̂) between a system observable and a named pointer, with
/// g a whole number of grid sites.
#[derive(Debug, Clone)]
pub struct WeakCoupling {
    observable: Operator,
    pointer_name: String,
    sites: i64,
    strength: f64,
    /// (integer eigenvalue, spectral projector)
    branches: Vec<(i64, Operator)>,
}

impl WeakCoupling {
    pub fn new(observable: Operator, pointer_name: &str, pointer: &Pointer, sites: i64) -> Result<Self> {
        if sites < 1 {
            return Err(SimError::InvalidStrengths(format!(
                "coupling must shift by at least one site, got {sites}"
            )));
        }
        if observable.targets().contains(pointer_name) {
            return Err(SimError::InvalidInput(format!(
                "observable acts on pointer `{pointer_name}`"
            )));
        }
        let mut branches = Vec::new();
        for (value, projector) in observable.spectral_projectors(1e-8)? {
            let rounded = value.round();
            if (value - rounded).abs() > 1e-8 {
                return Err(SimError::NonIntegerSpectrum(value));
            }
            branches.push((rounded as i64, projector));
        }
        let reach = sites * branches.iter().map(|(a, _)| a.abs()).max().unwrap_or(0);
        if reach > pointer.margin() {
            return Err(SimError::Wraparound {
                pointer: pointer_name.to_string(),
                sites: reach,
                margin: pointer.margin(),
            });
        }
        Ok(WeakCoupling {
            observable,
            pointer_name: pointer_name.to_string(),
            sites,
            strength: sites as f64 * pointer.spacing(),
            branches,
        })
    }

    /// Coupling at the grid strength nearest to `g`.
    pub fn from_strength(observable: Operator, pointer_name: &str, pointer: &Pointer, g: f64) -> Result<Self> {
        let sites = pointer.sites_for(g)?;
        WeakCoupling::new(observable, pointer_name, pointer, sites)
    }

    pub fn observable(&self) -> &Operator {
        &self.observable
    }

    pub fn pointer_name(&self) -> &str {
        &self.pointer_name
    }

    pub fn sites(&self) -> i64 {
        self.sites
    }

    /// g = sites · Δx
    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn branches(&self) -> &[(i64, Operator)] {
        &self.branches
    }
}

/// Mean pointer position and momentum after postselection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerReadout {
    pub mean_x: f64,
    pub mean_p: f64,
    pub probability: f64,
}

/// |s⟩ ⊗ |pointer⟩ with the pointer appended under `name`.
pub fn attach_pointer(s: &PureState, p: &Pointer, name: &str) -> Result<PureState> {
    let mut layout = SpaceLayout::empty();
    layout.push(name, p.grid_points())?;
    let ptr = PureState::new(layout, p.wavefunction().to_vec())?;
    hilbert::tensor(&[s, &ptr])
}

/// Translates the pointer branch of every eigenvalue a by a·sites.
pub fn weak_couple(s: &PureState, c: &WeakCoupling) -> Result<PureState> {
    let n = s.layout().dim_of(c.pointer_name())? as i64;
    let ptr_layout = s.layout().select(&[c.pointer_name()])?;
    let idx = SubsetIndex::new(s.layout(), &ptr_layout)?;
    let mut out = vec![C64::new(0.0, 0.0); s.dim()];
    for (a, proj) in c.branches() {
        let branch = hilbert::apply(proj, s)?;
        let amps = branch.amplitudes();
        let shift = a * c.sites();
        for &b in &idx.bases {
            for (j, &o) in idx.offsets.iter().enumerate() {
                let to = (j as i64 + shift).rem_euclid(n) as usize;
                out[b + idx.offsets[to]] += amps[b + o];
            }
        }
    }
    PureState::unnormalized(s.layout().clone(), out)
}

/// Postselects with `postselector`, then reads the named pointer's mean
/// position and momentum.
pub fn pointer_readout(
    s: &PureState,
    pointer_name: &str,
    p: &Pointer,
    postselector: &Operator,
) -> Result<PointerReadout> {
    if postselector.targets().contains(pointer_name) {
        return Err(SimError::InvalidInput(
            "postselector must act on system subsystems only".into(),
        ));
    }
    let projected = hilbert::project(postselector, s)?;
    let (mean_x, mean_p) = pointer_means(&projected.state, pointer_name, p)?;
    Ok(PointerReadout {
        mean_x,
        mean_p,
        probability: projected.probability,
    })
}

/// Pointer means of a state without any postselection.
pub fn pointer_means(s: &PureState, pointer_name: &str, p: &Pointer) -> Result<(f64, f64)> {
    let ptr_layout = s.layout().select(&[pointer_name])?;
    let idx = SubsetIndex::new(s.layout(), &ptr_layout)?;
    let amps = s.amplitudes();
    let (mut x, mut mom, mut norm) = (0.0, 0.0, 0.0);
    for &b in &idx.bases {
        let slice: Vec<C64> = idx.offsets.iter().map(|&o| amps[b + o]).collect();
        let w: f64 = slice.iter().map(|a| a.norm_sqr()).sum();
        if w == 0.0 {
            continue;
        }
        norm += w;
        x += p.position_matrix_element(&slice, &slice).re;
        mom += dot(&slice, &p.momentum_apply(&slice)).re;
    }
    if norm == 0.0 {
        return Err(SimError::ZeroNorm);
    }
    Ok((x / norm, mom / norm))
}
