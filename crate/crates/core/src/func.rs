//! Exact-rational finitely-valued functions on pattern spaces.

use std::sync::Arc;

use crate::error::Error;
use crate::rat::Rat;
use crate::space::{ClosedMark, MarkPattern, NodeAddress, NodeId, Space};

/// A function decorated on pattern nodes, uniform across cycle repetitions.
/// The value set is automatically finite, so the function is bounded.
#[derive(Clone, PartialEq, Eq)]
pub struct PatternFn {
    space: Arc<Space>,
    values: Vec<Rat>,
}

impl std::fmt::Debug for PatternFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PatternFn{:?}", self.values)
    }
}

impl PatternFn {
    pub fn new(space: Arc<Space>, values: Vec<Rat>) -> Result<PatternFn, Error> {
        if values.len() != space.len() {
            return Err(Error::ShapeMismatch(format!(
                "function has {} values for a space with {} nodes",
                values.len(),
                space.len()
            )));
        }
        Ok(PatternFn { space, values })
    }

    pub fn constant(space: &Arc<Space>, value: Rat) -> PatternFn {
        PatternFn {
            space: space.clone(),
            values: vec![value; space.len()],
        }
    }

    /// The indicator function of a marked set.
    pub fn indicator(mark: &MarkPattern) -> PatternFn {
        PatternFn {
            space: mark.space().clone(),
            values: mark
                .bits()
                .iter()
                .map(|&b| if b { Rat::one() } else { Rat::zero() })
                .collect(),
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn value(&self, id: NodeId) -> &Rat {
        &self.values[id]
    }

    /// Evaluates at a node address; cycle slots evaluate identically at
    /// every repetition.
    pub fn eval(&self, addr: &NodeAddress) -> Result<Rat, Error> {
        Ok(self.values[self.space.resolve(addr)?].clone())
    }

    pub fn same_space(&self, other: &PatternFn) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || self.space == other.space
    }

    pub fn same_space_as_mark(&self, mark: &MarkPattern) -> bool {
        Arc::ptr_eq(&self.space, mark.space()) || &self.space == mark.space()
    }

    fn zip_with(
        &self,
        other: &PatternFn,
        op: impl Fn(&Rat, &Rat) -> Rat,
    ) -> Result<PatternFn, Error> {
        if !self.same_space(other) {
            return Err(Error::SpaceMismatch);
        }
        Ok(PatternFn {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| op(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &PatternFn) -> Result<PatternFn, Error> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &PatternFn) -> Result<PatternFn, Error> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &PatternFn) -> Result<PatternFn, Error> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn vmax(&self, other: &PatternFn) -> Result<PatternFn, Error> {
        self.zip_with(other, |a, b| a.clone().max(b.clone()))
    }

    pub fn vmin(&self, other: &PatternFn) -> Result<PatternFn, Error> {
        self.zip_with(other, |a, b| a.clone().min(b.clone()))
    }

    pub fn scale(&self, c: &Rat) -> PatternFn {
        PatternFn {
            space: self.space.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn neg(&self) -> PatternFn {
        self.scale(&-Rat::one())
    }

    pub fn abs(&self) -> PatternFn {
        PatternFn {
            space: self.space.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Pointwise product with an indicator: the function that agrees with
    /// `self` on the marked set and vanishes off it.
    pub fn zero_off(&self, mark: &MarkPattern) -> PatternFn {
        assert!(self.same_space_as_mark(mark), "mark on a different space");
        PatternFn {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .zip(mark.bits())
                .map(|(v, &b)| if b { v.clone() } else { Rat::zero() })
                .collect(),
        }
    }

    pub fn sup_norm(&self) -> Rat {
        self.values
            .iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn sup_norm_within(&self, domain: &MarkPattern) -> Rat {
        domain
            .iter_marked()
            .map(|id| self.values[id].abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    /// Distinct values taken on the marked set.
    pub fn distinct_values_within(&self, domain: &MarkPattern) -> Vec<Rat> {
        let mut vals: Vec<Rat> = domain.iter_marked().map(|id| self.values[id].clone()).collect();
        vals.sort();
        vals.dedup();
        vals
    }
}

/// Extremes of a function over a marked set, with the empty set signaled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SupInf {
    Empty,
    Bounds { max: Rat, min: Rat },
}

pub fn sup_inf(f: &PatternFn, within: &MarkPattern) -> Result<SupInf, Error> {
    if !f.same_space_as_mark(within) {
        return Err(Error::SpaceMismatch);
    }
    let mut it = within.iter_marked().map(|id| f.value(id));
    let first = match it.next() {
        None => return Ok(SupInf::Empty),
        Some(v) => v,
    };
    let (mut max, mut min) = (first.clone(), first.clone());
    for v in it {
        if v > &max {
            max = v.clone();
        }
        if v < &min {
            min = v.clone();
        }
    }
    Ok(SupInf::Bounds { max, min })
}

/// Semicontinuity checks relative to an arbitrary subspace mark. At a node
/// of the subspace, the tail values are the function values on marked nodes
/// in its cycle subtrees; each such value recurs in every repetition, so the
/// limit relations are exact maxima and minima.
pub fn is_usc_within(f: &PatternFn, domain: &MarkPattern) -> bool {
    let space = f.space();
    domain.iter_marked().all(|id| {
        space
            .tail_nodes(id)
            .filter(|&t| domain.get(t))
            .all(|t| f.value(t) <= f.value(id))
    })
}

pub fn is_lsc_within(f: &PatternFn, domain: &MarkPattern) -> bool {
    let space = f.space();
    domain.iter_marked().all(|id| {
        space
            .tail_nodes(id)
            .filter(|&t| domain.get(t))
            .all(|t| f.value(t) >= f.value(id))
    })
}

pub fn is_continuous_within(f: &PatternFn, domain: &MarkPattern) -> bool {
    let space = f.space();
    domain.iter_marked().all(|id| {
        space
            .tail_nodes(id)
            .filter(|&t| domain.get(t))
            .all(|t| f.value(t) == f.value(id))
    })
}

fn check_domain(f: &PatternFn, within: &ClosedMark) -> Result<(), Error> {
    if !f.same_space_as_mark(within.mark()) {
        return Err(Error::SpaceMismatch);
    }
    if within.is_empty_set() {
        return Err(Error::EmptySubspace);
    }
    Ok(())
}

pub fn is_usc(f: &PatternFn, within: &ClosedMark) -> Result<bool, Error> {
    check_domain(f, within)?;
    Ok(is_usc_within(f, within.mark()))
}

pub fn is_lsc(f: &PatternFn, within: &ClosedMark) -> Result<bool, Error> {
    check_domain(f, within)?;
    Ok(is_lsc_within(f, within.mark()))
}

pub fn is_continuous(f: &PatternFn, within: &ClosedMark) -> Result<bool, Error> {
    check_domain(f, within)?;
    Ok(is_continuous_within(f, within.mark()))
}
