use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// A named tensor factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subsystem {
    pub name: String,
    pub dim: usize,
}

/// Ordered list of subsystems. The first subsystem is the most significant
/// digit of the flat amplitude index.
///
/// An empty layout is the one-dimensional space left over after every
/// factor has been contracted away.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SpaceLayout {
    subsystems: Vec<Subsystem>,
}

impl SpaceLayout {
    pub fn new<S: Into<String>>(subsystems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut layout = SpaceLayout::default();
        for (name, dim) in subsystems {
            layout.push(name, dim)?;
        }
        Ok(layout)
    }

    pub fn empty() -> Self {
        SpaceLayout::default()
    }

    /// Single qubit-like subsystem.
    pub fn qubit(name: &str) -> Self {
        SpaceLayout {
            subsystems: vec![Subsystem {
                name: name.to_string(),
                dim: 2,
            }],
        }
    }

    pub fn push(&mut self, name: impl Into<String>, dim: usize) -> Result<()> {
        let name = name.into();
        if dim < 2 {
            return Err(SimError::InvalidDimension { name, dim });
        }
        if self.contains(&name) {
            return Err(SimError::DuplicateSubsystem(name));
        }
        self.subsystems.push(Subsystem { name, dim });
        Ok(())
    }

    /// Concatenation; names must stay unique.
    pub fn concat(&self, other: &SpaceLayout) -> Result<Self> {
        let mut out = self.clone();
        for s in &other.subsystems {
            out.push(s.name.clone(), s.dim)?;
        }
        Ok(out)
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|s| s.name.as_str())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.subsystems.iter().any(|s| s.name == name)
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| SimError::UnknownSubsystem(name.to_string()))
    }

    pub fn dim_of(&self, name: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(name)?].dim)
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    /// Flat-index stride of every subsystem.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.subsystems.len()];
        for k in (0..self.subsystems.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.subsystems[k + 1].dim;
        }
        strides
    }

    /// Sub-layout with the named subsystems, in the order given.
    pub fn select(&self, names: &[&str]) -> Result<Self> {
        let mut out = SpaceLayout::default();
        for name in names {
            out.push(*name, self.dim_of(name)?)?;
        }
        Ok(out)
    }

    /// Everything not named in `names`, in layout order.
    pub fn complement(&self, names: &[&str]) -> Self {
        SpaceLayout {
            subsystems: self
                .subsystems
                .iter()
                .filter(|s| !names.contains(&s.name.as_str()))
                .cloned()
                .collect(),
        }
    }

    /// Rename one subsystem.
    pub fn renamed(&self, from: &str, to: &str) -> Result<Self> {
        let idx = self.position(from)?;
        if from != to && self.contains(to) {
            return Err(SimError::DuplicateSubsystem(to.to_string()));
        }
        let mut out = self.clone();
        out.subsystems[idx].name = to.to_string();
        Ok(out)
    }
}

/// Index bookkeeping for acting on a subset of subsystems of a layout.
///
/// `offsets[c]` is the flat-index offset of the target configuration `c`
/// (enumerated in the order the targets were given), and `bases` lists the
/// flat indices at which every target digit is zero.
#[derive(Debug, Clone)]
pub(crate) struct SubsetIndex {
    pub offsets: Vec<usize>,
    pub bases: Vec<usize>,
}

impl SubsetIndex {
    pub fn new(layout: &SpaceLayout, targets: &SpaceLayout) -> Result<Self> {
        let strides = layout.strides();
        let mut target_pos = Vec::with_capacity(targets.len());
        for t in targets.subsystems() {
            let pos = layout.position(&t.name)?;
            if layout.subsystems[pos].dim != t.dim {
                return Err(SimError::DimensionMismatch {
                    expected: layout.subsystems[pos].dim,
                    found: t.dim,
                });
            }
            target_pos.push(pos);
        }

        let mut offsets = vec![0usize];
        for &pos in &target_pos {
            let dim = layout.subsystems[pos].dim;
            let mut next = Vec::with_capacity(offsets.len() * dim);
            for &o in &offsets {
                for d in 0..dim {
                    next.push(o + d * strides[pos]);
                }
            }
            offsets = next;
        }

        let mut bases = vec![0usize];
        for (k, s) in layout.subsystems.iter().enumerate() {
            if target_pos.contains(&k) {
                continue;
            }
            let mut next = Vec::with_capacity(bases.len() * s.dim);
            for &b in &bases {
                for d in 0..s.dim {
                    next.push(b + d * strides[k]);
                }
            }
            bases = next;
        }

        Ok(SubsetIndex { offsets, bases })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_dim_is_product() {
        let l = SpaceLayout::new([("path", 2), ("pol1", 2), ("ptr", 8)]).unwrap();
        assert_eq!(l.total_dim(), 32);
        assert_eq!(l.strides(), vec![16, 8, 1]);
    }

    #[test]
    fn rejects_duplicates_and_small_dims() {
        assert_eq!(
            SpaceLayout::new([("a", 2), ("a", 2)]),
            Err(SimError::DuplicateSubsystem("a".into()))
        );
        assert!(matches!(
            SpaceLayout::new([("a", 1)]),
            Err(SimError::InvalidDimension { .. })
        ));
    }

    #[test]
    fn subset_index_covers_every_flat_index_once() {
        let l = SpaceLayout::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let t = l.select(&["c", "a"]).unwrap();
        let idx = SubsetIndex::new(&l, &t).unwrap();
        let mut seen = vec![false; l.total_dim()];
        for &b in &idx.bases {
            for &o in &idx.offsets {
                assert!(!seen[b + o]);
                seen[b + o] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        // Configuration order follows the target order: c is the leading digit.
        assert_eq!(idx.offsets, vec![0, 6, 1, 7]);
    }
}
