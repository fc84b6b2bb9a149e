//! System state entangled with several pointers, stored in factored form.
//!
//! Every coupling translates whole pointer packets, so the joint state is
//! always a finite sum Σ_t |v_t⟩ ⊗ ⊗_k T^{s_tk} φ_k of system vectors times
//! translated Gaussians. Keeping the terms instead of the dense vector makes
//! four N = 4096 pointers cost the same as one. All inner products are
//! evaluated on the grid, so the result agrees with the dense route to
//! rounding (see the cross-check tests).

use std::collections::{BTreeMap, HashMap};

use super::coupling::WeakCoupling;
use super::pointer::{dot, Pointer};
use crate::error::{Result, SimError};
use crate::hilbert::{self, Operator, PureState, SpaceLayout, C64};
use crate::tolerance;

#[derive(Debug, Clone)]
struct Term {
    amplitudes: Vec<C64>,
    shifts: Vec<i64>,
}

/// Joint system + pointer state.
#[derive(Debug, Clone)]
pub struct MeterState {
    system: SpaceLayout,
    pointers: Vec<(String, Pointer)>,
    terms: Vec<Term>,
}

/// Grid integrals between translated copies of one pointer packet.
struct PacketCache<'a> {
    pointer: &'a Pointer,
    packets: HashMap<i64, Vec<C64>>,
    momenta: HashMap<i64, Vec<C64>>,
    overlaps: HashMap<(i64, i64), C64>,
    positions: HashMap<(i64, i64), C64>,
    momentum_elements: HashMap<(i64, i64), C64>,
}

impl<'a> PacketCache<'a> {
    fn new(pointer: &'a Pointer) -> Self {
        PacketCache {
            pointer,
            packets: HashMap::new(),
            momenta: HashMap::new(),
            overlaps: HashMap::new(),
            positions: HashMap::new(),
            momentum_elements: HashMap::new(),
        }
    }

    fn packet(&mut self, s: i64) -> &Vec<C64> {
        let pointer = self.pointer;
        self.packets
            .entry(s)
            .or_insert_with(|| pointer.shifted_packet(s))
    }

    fn overlap(&mut self, a: i64, b: i64) -> C64 {
        if let Some(v) = self.overlaps.get(&(a, b)) {
            return *v;
        }
        let pa = self.packet(a).clone();
        let v = dot(&pa, self.packet(b));
        self.overlaps.insert((a, b), v);
        v
    }

    fn position(&mut self, a: i64, b: i64) -> C64 {
        if let Some(v) = self.positions.get(&(a, b)) {
            return *v;
        }
        let pa = self.packet(a).clone();
        let v = self.pointer.position_matrix_element(&pa, self.packet(b));
        self.positions.insert((a, b), v);
        v
    }

    fn momentum(&mut self, a: i64, b: i64) -> C64 {
        if let Some(v) = self.momentum_elements.get(&(a, b)) {
            return *v;
        }
        let pointer = self.pointer;
        if !self.momenta.contains_key(&b) {
            let pb = self.packet(b).clone();
            self.momenta.insert(b, pointer.momentum_apply(&pb));
        }
        let pa = self.packet(a).clone();
        let v = dot(&pa, &self.momenta[&b]);
        self.momentum_elements.insert((a, b), v);
        v
    }
}

impl MeterState {
    /// A system state with no pointers yet.
    pub fn new(system: &PureState) -> Self {
        MeterState {
            system: system.layout().clone(),
            pointers: Vec::new(),
            terms: vec![Term {
                amplitudes: system.amplitudes().to_vec(),
                shifts: Vec::new(),
            }],
        }
    }

    pub fn system_layout(&self) -> &SpaceLayout {
        &self.system
    }

    pub fn pointer_names(&self) -> impl Iterator<Item = &str> {
        self.pointers.iter().map(|(n, _)| n.as_str())
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Appends a pointer in its initial packet.
    pub fn attach(&mut self, name: &str, pointer: &Pointer) -> Result<()> {
        if self.system.contains(name) || self.pointers.iter().any(|(n, _)| n == name) {
            return Err(SimError::DuplicateSubsystem(name.to_string()));
        }
        self.pointers.push((name.to_string(), pointer.clone()));
        for t in &mut self.terms {
            t.shifts.push(0);
        }
        Ok(())
    }

    fn pointer_index(&self, name: &str) -> Result<usize> {
        self.pointers
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| SimError::UnknownSubsystem(name.to_string()))
    }

    /// exp(−i g A ⊗ p̂) on the named pointer.
    pub fn couple(&mut self, c: &WeakCoupling) -> Result<()> {
        let k = self.pointer_index(c.pointer_name())?;
        let margin = self.pointers[k].1.margin();
        let mut split = Vec::with_capacity(self.terms.len() * c.branches().len());
        for t in &self.terms {
            let v = PureState::unnormalized(self.system.clone(), t.amplitudes.clone())?;
            for (a, proj) in c.branches() {
                let branch = hilbert::apply(proj, &v)?;
                let mut shifts = t.shifts.clone();
                shifts[k] += a * c.sites();
                if shifts[k].abs() > margin {
                    return Err(SimError::Wraparound {
                        pointer: c.pointer_name().to_string(),
                        sites: shifts[k],
                        margin,
                    });
                }
                split.push(Term {
                    amplitudes: branch.amplitudes().to_vec(),
                    shifts,
                });
            }
        }
        self.terms = split;
        self.merge();
        Ok(())
    }

    /// Applies a linear operator on system subsystems to every term.
    pub fn apply(&mut self, op: &Operator) -> Result<()> {
        for t in &mut self.terms {
            let v = PureState::unnormalized(self.system.clone(), std::mem::take(&mut t.amplitudes))?;
            t.amplitudes = hilbert::apply(op, &v)?.amplitudes().to_vec();
        }
        self.merge();
        Ok(())
    }

    /// Projective postselection on the system; returns the probability and
    /// leaves `self` normalized and conditioned.
    pub fn project(&mut self, p: &Operator) -> Result<f64> {
        if !p.is_projector() {
            return Err(SimError::OperatorProperty {
                property: "a projector",
                deviation: f64::NAN,
            });
        }
        let before = self.norm_sqr();
        self.apply(p)?;
        let after = self.norm_sqr();
        let probability = after / before;
        if probability <= tolerance::IMPOSSIBLE {
            return Err(SimError::ImpossiblePostselection { probability });
        }
        self.normalize()?;
        Ok(probability)
    }

    /// (⟨bra| ⊗ I) on the system part; pointers untouched. Not normalized.
    pub fn contract(&self, bra: &PureState) -> Result<MeterState> {
        let names: Vec<&str> = bra.layout().names().collect();
        let rest = self.system.complement(&names);
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let v = PureState::unnormalized(self.system.clone(), t.amplitudes.clone())?;
                Ok(Term {
                    amplitudes: hilbert::contract(bra, &v)?.amplitudes().to_vec(),
                    shifts: t.shifts.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = MeterState {
            system: rest,
            pointers: self.pointers.clone(),
            terms,
        };
        out.merge();
        Ok(out)
    }

    pub fn norm_sqr(&self) -> f64 {
        let mut caches = self.caches();
        let mut total = C64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &self.terms {
                let sys = dot(&a.amplitudes, &b.amplitudes);
                if sys == C64::new(0.0, 0.0) {
                    continue;
                }
                total += sys * pointer_product(&mut caches, &a.shifts, &b.shifts, None);
            }
        }
        total.re
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(SimError::ZeroNorm);
        }
        for t in &mut self.terms {
            for a in &mut t.amplitudes {
                *a /= n;
            }
        }
        Ok(())
    }

    /// ⟨x⟩ and ⟨p⟩ of the named pointer.
    pub fn pointer_means(&self, name: &str) -> Result<(f64, f64)> {
        let k = self.pointer_index(name)?;
        let mut caches = self.caches();
        let (mut norm, mut x, mut p) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for a in &self.terms {
            for b in &self.terms {
                let sys = dot(&a.amplitudes, &b.amplitudes);
                if sys == C64::new(0.0, 0.0) {
                    continue;
                }
                let others = pointer_product(&mut caches, &a.shifts, &b.shifts, Some(k));
                let (sa, sb) = (a.shifts[k], b.shifts[k]);
                norm += sys * others * caches[k].overlap(sa, sb);
                x += sys * others * caches[k].position(sa, sb);
                p += sys * others * caches[k].momentum(sa, sb);
            }
        }
        if norm.re <= 0.0 {
            return Err(SimError::ZeroNorm);
        }
        Ok((x.re / norm.re, p.re / norm.re))
    }

    /// ⟨self|other⟩ for identical system layouts and pointer sets.
    pub fn overlap(&self, other: &MeterState) -> Result<C64> {
        if self.system != other.system {
            return Err(SimError::LayoutMismatch("meter states on different systems".into()));
        }
        self.check_same_pointers(other)?;
        let mut caches = self.caches();
        let mut total = C64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                let sys = dot(&a.amplitudes, &b.amplitudes);
                if sys == C64::new(0.0, 0.0) {
                    continue;
                }
                total += sys * pointer_product(&mut caches, &a.shifts, &b.shifts, None);
            }
        }
        Ok(total)
    }

    /// ⟨pure|ρ|pure⟩ where ρ is `self` with the system subsystems that
    /// `pure` lacks traced out. `pure` must carry the same pointers.
    pub fn fidelity_with(&self, pure: &MeterState) -> Result<f64> {
        self.check_same_pointers(pure)?;
        let names: Vec<&str> = pure.system.names().collect();
        let rest = self.system.complement(&names);
        let mut caches = self.caches();
        let mut w = vec![C64::new(0.0, 0.0); rest.total_dim()];
        for b in &pure.terms {
            let bra = PureState::unnormalized(pure.system.clone(), b.amplitudes.clone())?;
            for a in &self.terms {
                let ptr = pointer_product(&mut caches, &b.shifts, &a.shifts, None);
                if ptr == C64::new(0.0, 0.0) {
                    continue;
                }
                let ket = PureState::unnormalized(self.system.clone(), a.amplitudes.clone())?;
                let part = hilbert::contract(&bra, &ket)?;
                for (x, y) in w.iter_mut().zip(part.amplitudes()) {
                    *x += ptr * y;
                }
            }
        }
        let f: f64 = w.iter().map(|x| x.norm_sqr()).sum();
        Ok(f / (self.norm_sqr() * pure.norm_sqr()))
    }

    /// Dense system ⊗ pointers vector (pointers appended in attach order).
    /// Only sensible for small grids.
    pub fn to_dense(&self) -> Result<PureState> {
        let mut layout = self.system.clone();
        for (name, p) in &self.pointers {
            layout.push(name.clone(), p.grid_points())?;
        }
        let mut out = vec![C64::new(0.0, 0.0); layout.total_dim()];
        for t in &self.terms {
            let mut parts = vec![PureState::unnormalized(self.system.clone(), t.amplitudes.clone())?];
            for ((name, p), &s) in self.pointers.iter().zip(&t.shifts) {
                let mut l = SpaceLayout::empty();
                l.push(name.clone(), p.grid_points())?;
                parts.push(PureState::unnormalized(l, p.shifted_packet(s))?);
            }
            let refs: Vec<&PureState> = parts.iter().collect();
            let joint = hilbert::tensor(&refs)?;
            for (o, a) in out.iter_mut().zip(joint.amplitudes()) {
                *o += a;
            }
        }
        PureState::unnormalized(layout, out)
    }

    fn caches(&self) -> Vec<PacketCache<'_>> {
        self.pointers.iter().map(|(_, p)| PacketCache::new(p)).collect()
    }

    fn check_same_pointers(&self, other: &MeterState) -> Result<()> {
        if self.pointers != other.pointers {
            return Err(SimError::LayoutMismatch("meter states carry different pointers".into()));
        }
        Ok(())
    }

    /// Sums terms sharing a shift vector and drops numerically empty ones.
    fn merge(&mut self) {
        let mut merged: BTreeMap<Vec<i64>, Vec<C64>> = BTreeMap::new();
        for t in self.terms.drain(..) {
            match merged.get_mut(&t.shifts) {
                Some(acc) => {
                    for (x, y) in acc.iter_mut().zip(&t.amplitudes) {
                        *x += y;
                    }
                }
                None => {
                    merged.insert(t.shifts, t.amplitudes);
                }
            }
        }
        let scale: f64 = merged
            .values()
            .map(|v| v.iter().map(|a| a.norm_sqr()).sum::<f64>())
            .sum();
        self.terms = merged
            .into_iter()
            .filter(|(_, v)| v.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-30 * scale)
            .map(|(shifts, amplitudes)| Term { amplitudes, shifts })
            .collect();
    }
}

/// Π_k ⟨φ_{a_k}|φ_{b_k}⟩, optionally skipping one pointer.
fn pointer_product(caches: &mut [PacketCache<'_>], a: &[i64], b: &[i64], skip: Option<usize>) -> C64 {
    let mut prod = C64::new(1.0, 0.0);
    for (k, cache) in caches.iter_mut().enumerate() {
        if Some(k) == skip {
            continue;
        }
        prod *= cache.overlap(a[k], b[k]);
    }
    prod
}
