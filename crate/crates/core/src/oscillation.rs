//! Semicontinuous envelopes, oscillations, oscillation-set derivations, and
//! index computations.
//!
//! All quantities are computed relative to a subspace mark. At a node `x` of
//! the subspace, the values realized cofinally in every neighborhood of `x`
//! are exactly the values on marked nodes of its cycle subtrees, each of
//! which recurs in every repetition; lim sups are therefore exact maxima.
//! Lim sups are non-exclusive (the point itself participates), which makes
//! the lower oscillation vanish at isolated points automatically.

use crate::error::Error;
use crate::func::PatternFn;
use crate::rat::Rat;
use crate::space::{is_closed_within, ClosedMark, MarkPattern};

/// Which oscillation drives a derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// The oscillation sets, driven by `osc = U(uosc)`.
    Osc,
    /// The companion sets driven by the upper oscillation `Uf - Lf`.
    UpperOsc,
}

pub(crate) struct EnvTables {
    pub upper: Vec<Rat>,
    pub lower: Vec<Rat>,
    pub uosc: Vec<Rat>,
    pub osc: Vec<Rat>,
    pub oosc: Vec<Rat>,
}

/// Exact envelope and oscillation tables relative to `domain`. Entries off
/// the domain are placeholders (the function value for the envelopes, zero
/// for the oscillations).
pub(crate) fn envelope_tables(f: &PatternFn, domain: &MarkPattern) -> EnvTables {
    let space = f.space();
    let n = space.len();
    let mut upper: Vec<Rat> = f.values().to_vec();
    let mut lower: Vec<Rat> = f.values().to_vec();
    let mut uosc = vec![Rat::zero(); n];
    for id in domain.iter_marked() {
        let fx = f.value(id);
        let mut u = fx.clone();
        let mut l = fx.clone();
        let mut w = Rat::zero();
        for t in space.tail_nodes(id).filter(|&t| domain.get(t)) {
            let v = f.value(t);
            if v > &u {
                u = v.clone();
            }
            if v < &l {
                l = v.clone();
            }
            let d = (v - fx).abs();
            if d > w {
                w = d;
            }
        }
        upper[id] = u;
        lower[id] = l;
        uosc[id] = w;
    }
    let mut osc = uosc.clone();
    for id in domain.iter_marked() {
        for t in space.tail_nodes(id).filter(|&t| domain.get(t)) {
            if uosc[t] > osc[id] {
                osc[id] = uosc[t].clone();
            }
        }
    }
    let oosc = (0..n)
        .map(|id| {
            if domain.get(id) {
                &upper[id] - &lower[id]
            } else {
                Rat::zero()
            }
        })
        .collect();
    EnvTables {
        upper,
        lower,
        uosc,
        osc,
        oosc,
    }
}

/// Envelopes and oscillations of a function relative to a stated closed
/// domain.
#[derive(Clone, Debug)]
pub struct OscReport {
    /// Least upper-semicontinuous majorant on the domain.
    pub upper: PatternFn,
    /// Greatest lower-semicontinuous minorant on the domain.
    pub lower: PatternFn,
    /// Lower oscillation: the deviation of nearby values from the value at
    /// the point.
    pub uosc: PatternFn,
    /// Oscillation: the upper envelope of the lower oscillation.
    pub osc: PatternFn,
    /// Upper oscillation: `upper - lower`, the diameter of nearby values.
    pub oosc: PatternFn,
    pub domain: ClosedMark,
}

pub fn envelopes(f: &PatternFn, within: &ClosedMark) -> Result<OscReport, Error> {
    if !f.same_space_as_mark(within.mark()) {
        return Err(Error::SpaceMismatch);
    }
    if within.is_empty_set() {
        return Err(Error::EmptySubspace);
    }
    let t = envelope_tables(f, within.mark());
    let mk = |v: Vec<Rat>| PatternFn::new(f.space().clone(), v).expect("table shape");
    Ok(OscReport {
        upper: mk(t.upper),
        lower: mk(t.lower),
        uosc: mk(t.uosc),
        osc: mk(t.osc),
        oosc: mk(t.oosc),
        domain: within.clone(),
    })
}

/// Internal derivation relative to an arbitrary starting mark. Every step is
/// validated closed within the starting mark; the chain must reach the empty
/// set within `rank + 2` steps (a soundness tripwire, not an expected path).
pub(crate) fn derivation_within_raw(
    f: &PatternFn,
    eps: &Rat,
    flavor: Flavor,
    start: &MarkPattern,
) -> Result<Vec<MarkPattern>, Error> {
    assert!(eps.is_positive(), "derivation threshold must be positive");
    let cap = f.space().rank() as usize + 2;
    let mut chain = vec![start.clone()];
    loop {
        let cur = chain.last().unwrap();
        if cur.is_empty_set() {
            return Ok(chain);
        }
        if chain.len() > cap {
            return Err(Error::Fault(format!(
                "derivation did not reach the empty set within {cap} steps"
            )));
        }
        let tables = envelope_tables(f, cur);
        let table = match flavor {
            Flavor::Osc => &tables.osc,
            Flavor::UpperOsc => &tables.oosc,
        };
        let bits: Vec<bool> = (0..f.space().len())
            .map(|id| cur.get(id) && &table[id] >= eps)
            .collect();
        let next = MarkPattern::new(f.space().clone(), bits).expect("shape");
        if !is_closed_within(&next, start) {
            return Err(Error::Fault(
                "derivation step produced a non-closed set".into(),
            ));
        }
        if !next.is_subset_of(cur) || &next == cur {
            return Err(Error::Fault("derivation step failed to shrink".into()));
        }
        chain.push(next);
    }
}

/// The full oscillation-set chain of `f` at threshold `eps`, starting from
/// the whole space and ending with the empty set.
#[derive(Clone, Debug)]
pub struct DerivationTrail {
    pub eps: Rat,
    pub flavor: Flavor,
    /// Strictly decreasing chain starting at the whole space; the last
    /// element is the empty set.
    pub sets: Vec<ClosedMark>,
    /// Whether the chain reached the empty set (always true; kept for the
    /// serialized report).
    pub terminal: bool,
}

impl DerivationTrail {
    /// The index at this threshold: the last step with a nonempty set.
    pub fn index(&self) -> usize {
        self.sets.len() - 2
    }
}

pub fn derivation(f: &PatternFn, eps: &Rat, flavor: Flavor) -> DerivationTrail {
    let start = MarkPattern::full(f.space());
    let chain = derivation_within_raw(f, eps, flavor, &start)
        .expect("derivation must reach the empty set");
    let sets = chain
        .into_iter()
        .map(|m| ClosedMark::validate(m).expect("derivation steps are closed"))
        .collect();
    DerivationTrail {
        eps: eps.clone(),
        flavor,
        sets,
        terminal: true,
    }
}

pub fn index(f: &PatternFn, eps: &Rat) -> usize {
    index_within(f, eps, &MarkPattern::full(f.space()))
}

pub fn index_within(f: &PatternFn, eps: &Rat, domain: &MarkPattern) -> usize {
    let chain = derivation_within_raw(f, eps, Flavor::Osc, domain)
        .expect("derivation must reach the empty set");
    // An empty starting domain yields the one-element chain and index zero.
    chain.len().saturating_sub(2)
}

/// Distinct nonzero value differences of `f` on `domain`. The oscillation
/// values arising anywhere in a derivation of `f` are maxima of such
/// differences (restriction only shrinks the value set), so the map
/// `eps -> i(f, eps)` is a step function constant on the half-open intervals
/// between consecutive elements of this set.
pub fn critical_set_within(f: &PatternFn, domain: &MarkPattern) -> Vec<Rat> {
    let vals = f.distinct_values_within(domain);
    let mut out = Vec::new();
    for (i, a) in vals.iter().enumerate() {
        for b in &vals[i + 1..] {
            out.push((b - a).abs());
        }
    }
    out.sort();
    out.dedup();
    out.retain(|d| d.is_positive());
    out
}

pub fn critical_set(f: &PatternFn) -> Vec<Rat> {
    critical_set_within(f, &MarkPattern::full(f.space()))
}

/// The step function `eps -> i(f, eps)`, frozen at the critical thresholds.
/// `i` is constant on each interval `(d_k, d_{k+1}]` and zero above the
/// largest threshold.
#[derive(Clone, Debug)]
pub struct IndexStepFn {
    /// Ascending thresholds, each with the index value on the interval
    /// ending there.
    pub points: Vec<(Rat, usize)>,
}

impl IndexStepFn {
    pub fn eval(&self, eps: &Rat) -> usize {
        assert!(eps.is_positive(), "index threshold must be positive");
        self.points
            .iter()
            .find(|(d, _)| d >= eps)
            .map(|(_, i)| *i)
            .unwrap_or(0)
    }

    pub fn max_index(&self) -> usize {
        self.points.iter().map(|(_, i)| *i).max().unwrap_or(0)
    }

    /// `sup_eps eps * i(f, eps)`: on each constancy interval the supremum is
    /// attained at the right endpoint, which the interval contains.
    pub fn quasinorm(&self) -> Rat {
        self.points
            .iter()
            .map(|(d, i)| d * &Rat::from_int(*i as i64))
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

pub fn index_step_fn_within(f: &PatternFn, domain: &MarkPattern) -> IndexStepFn {
    let points = critical_set_within(f, domain)
        .into_iter()
        .map(|d| {
            let i = index_within(f, &d, domain);
            (d, i)
        })
        .collect();
    IndexStepFn { points }
}

/// Per-threshold indices, the oscillation index, and the quasi-norm.
#[derive(Clone, Debug, serde::Serialize)]
pub struct IndexReport {
    /// The critical thresholds: distinct nonzero value differences.
    pub critical: Vec<Rat>,
    /// `i(f, d)` for each critical `d`, ascending in `d`.
    pub per_eps: Vec<(Rat, usize)>,
    /// The oscillation index `i(f)`.
    pub index: usize,
    /// `beta = i(f) + 1`.
    pub beta: usize,
    /// `sup_eps eps * i(f, eps)`, exact.
    pub quasinorm: Rat,
}

pub fn full_index(f: &PatternFn) -> IndexReport {
    full_index_within(f, &MarkPattern::full(f.space()))
}

pub fn full_index_within(f: &PatternFn, domain: &MarkPattern) -> IndexReport {
    let step = index_step_fn_within(f, domain);
    let index = step.max_index();
    IndexReport {
        critical: step.points.iter().map(|(d, _)| d.clone()).collect(),
        per_eps: step.points.clone(),
        index,
        beta: index + 1,
        quasinorm: step.quasinorm(),
    }
}

/// The alternating refinement sets used to relate the index of a combination
/// to the indices of its operands: starting from the whole space, each bit
/// keeps the points where the oscillation of `f` (bit 0) or `g` (bit 1),
/// relative to the current set, is at least `eps / 2`.
pub fn ltheta_sets(
    f: &PatternFn,
    g: &PatternFn,
    eps: &Rat,
    theta: &[bool],
) -> Result<ClosedMark, Error> {
    if !f.same_space(g) {
        return Err(Error::SpaceMismatch);
    }
    assert!(eps.is_positive(), "threshold must be positive");
    let half = eps / &Rat::from_int(2);
    let mut cur = MarkPattern::full(f.space());
    for &bit in theta {
        let h = if bit { g } else { f };
        let tables = envelope_tables(h, &cur);
        let bits: Vec<bool> = (0..f.space().len())
            .map(|id| cur.get(id) && tables.osc[id] >= half)
            .collect();
        cur = MarkPattern::new(f.space().clone(), bits).expect("shape");
    }
    ClosedMark::validate(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{derived_set, MarkPattern, Space, SpaceDesc};
    use std::sync::Arc;

    fn t(n: usize) -> Arc<Space> {
        Space::new(SpaceDesc::homogeneous(n)).unwrap()
    }

    fn chi_root(space: &Arc<Space>) -> PatternFn {
        PatternFn::indicator(&MarkPattern::singleton(space, 0))
    }

    /// Indicator of the even-height nodes.
    fn chi_even(space: &Arc<Space>) -> PatternFn {
        let bits = space.nodes().iter().map(|m| m.height % 2 == 0).collect();
        PatternFn::indicator(&MarkPattern::new(space.clone(), bits).unwrap())
    }

    #[test]
    fn constant_function_has_zero_oscillation() {
        let t2 = t(2);
        let f = PatternFn::constant(&t2, Rat::new(1, 3));
        let r = envelopes(&f, &ClosedMark::full(&t2)).unwrap();
        assert_eq!(r.upper, f);
        assert_eq!(r.lower, f);
        assert_eq!(r.osc, PatternFn::constant(&t2, Rat::zero()));
        assert_eq!(r.oosc, PatternFn::constant(&t2, Rat::zero()));
    }

    #[test]
    fn envelope_of_root_indicator() {
        let t1 = t(1);
        let f = chi_root(&t1);
        let r = envelopes(&f, &ClosedMark::full(&t1)).unwrap();
        assert_eq!(r.uosc.values(), &[Rat::one(), Rat::zero()]);
        assert_eq!(r.osc.values(), &[Rat::one(), Rat::zero()]);
        assert_eq!(r.oosc.values(), &[Rat::one(), Rat::zero()]);
        assert_eq!(r.upper.values(), &[Rat::one(), Rat::zero()]);
        assert_eq!(r.lower.values(), &[Rat::zero(), Rat::zero()]);
    }

    #[test]
    fn envelope_of_even_height_indicator_on_t2() {
        let t2 = t(2);
        let f = chi_even(&t2); // root and leaves marked
        let r = envelopes(&f, &ClosedMark::full(&t2)).unwrap();
        assert_eq!(
            r.osc.values(),
            &[Rat::one(), Rat::one(), Rat::zero()],
            "oscillation at root, level one, leaves"
        );
    }

    #[test]
    fn derivation_examples() {
        let t1 = t(1);
        let c = PatternFn::constant(&t1, Rat::new(2, 5));
        let trail = derivation(&c, &Rat::new(1, 2), Flavor::Osc);
        assert_eq!(trail.sets.len(), 2);
        assert!(trail.sets[1].is_empty_set());
        assert_eq!(trail.index(), 0);

        let f = chi_root(&t1);
        let trail = derivation(&f, &Rat::new(1, 2), Flavor::Osc);
        assert_eq!(trail.sets.len(), 3);
        assert_eq!(trail.sets[1].mark().bits(), &[true, false]);
        assert_eq!(trail.index(), 1);

        let t2 = t(2);
        let e = chi_even(&t2);
        let trail = derivation(&e, &Rat::one(), Flavor::Osc);
        assert_eq!(trail.sets.len(), 4);
        assert_eq!(trail.sets[1].mark().bits(), derived_set(&t2).mark().bits());
        assert_eq!(trail.sets[2].mark().bits(), &[true, false, false]);
        assert!(trail.sets[3].is_empty_set());
    }

    #[test]
    fn index_examples() {
        let t1 = t(1);
        assert_eq!(index(&PatternFn::constant(&t1, Rat::one()), &Rat::new(1, 3)), 0);
        assert_eq!(index(&chi_root(&t1), &Rat::new(1, 2)), 1);
        let t2 = t(2);
        let e = chi_even(&t2);
        for eps in [Rat::new(1, 10), Rat::new(1, 2), Rat::one()] {
            assert_eq!(index(&e, &eps), 2);
        }
    }

    #[test]
    fn full_index_examples() {
        let t2 = t(2);
        let e = chi_even(&t2);
        let r = full_index(&e);
        assert_eq!(r.critical, vec![Rat::one()]);
        assert_eq!(r.index, 2);
        assert_eq!(r.beta, 3);
        assert_eq!(r.quasinorm, Rat::from_int(2));

        let c = PatternFn::constant(&t2, Rat::new(-1, 2));
        let r = full_index(&c);
        assert_eq!(r.index, 0);
        assert_eq!(r.beta, 1);
        assert_eq!(r.quasinorm, Rat::zero());

        // A continuous non-constant decoration: free prefix, constant tails.
        let s = Space::new(SpaceDesc::limit(
            vec![SpaceDesc::Leaf],
            vec![SpaceDesc::Leaf],
        ))
        .unwrap();
        let f = PatternFn::new(
            s.clone(),
            vec![Rat::zero(), Rat::one(), Rat::zero()],
        )
        .unwrap();
        assert!(crate::func::is_continuous(&f, &ClosedMark::full(&s)).unwrap());
        assert_eq!(full_index(&f).index, 0);
    }

    #[test]
    fn index_is_nonincreasing_in_eps() {
        let t2 = t(2);
        let f = PatternFn::new(
            t2.clone(),
            vec![Rat::zero(), Rat::new(1, 2), Rat::one()],
        )
        .unwrap();
        let step = index_step_fn_within(&f, &MarkPattern::full(&t2));
        for w in step.points.windows(2) {
            assert!(w[0].1 >= w[1].1);
        }
    }

    #[test]
    fn ltheta_examples() {
        let t1 = t(1);
        let f = chi_root(&t1);
        let g = PatternFn::constant(&t1, Rat::zero());
        let l0 = ltheta_sets(&f, &g, &Rat::one(), &[false]).unwrap();
        assert_eq!(l0.mark().bits(), &[true, false]);

        // Nesting under extension.
        let t2 = t(2);
        let f = chi_even(&t2);
        let g = PatternFn::indicator(derived_set(&t2).mark());
        for len in 1..=3usize {
            for pat in 0..(1 << len) {
                let theta: Vec<bool> = (0..len).map(|b| (pat >> b) & 1 == 1).collect();
                let l = ltheta_sets(&f, &g, &Rat::new(1, 2), &theta).unwrap();
                let parent = ltheta_sets(&f, &g, &Rat::new(1, 2), &theta[..len - 1]).unwrap();
                assert!(l.mark().is_subset_of(parent.mark()));
            }
        }

        // All-zero bits reproduce the oscillation sets of f at eps/2.
        let eps = Rat::new(1, 2);
        let trail = derivation(&f, &(&eps / &Rat::from_int(2)), Flavor::Osc);
        for j in 1..trail.sets.len() {
            let theta = vec![false; j];
            let l = ltheta_sets(&f, &g, &eps, &theta).unwrap();
            assert_eq!(l.mark(), trail.sets[j].mark());
        }
    }

    #[test]
    fn sandwich_and_nesting_on_a_mixed_space() {
        let s = Space::new(SpaceDesc::limit(
            vec![SpaceDesc::homogeneous(1)],
            vec![SpaceDesc::homogeneous(1), SpaceDesc::Leaf],
        ))
        .unwrap();
        let f = PatternFn::new(
            s.clone(),
            vec![
                Rat::zero(),
                Rat::one(),
                Rat::zero(),
                Rat::new(1, 2),
                Rat::one(),
                Rat::new(-1, 2),
            ],
        )
        .unwrap();
        let r = envelopes(&f, &ClosedMark::full(&s)).unwrap();
        let two = Rat::from_int(2);
        for id in 0..s.len() {
            let osc = r.osc.value(id);
            let oosc = r.oosc.value(id);
            assert!(oosc <= &(&two * osc), "half upper oscillation below oscillation");
            assert!(osc <= oosc, "oscillation below upper oscillation");
        }
        for eps in critical_set(&f) {
            let os = derivation(&f, &eps, Flavor::Osc);
            let ko = derivation(&f, &eps, Flavor::UpperOsc);
            let k2 = derivation(&f, &(&eps * &two), Flavor::UpperOsc);
            for j in 0..os.sets.len() {
                let osj = os.sets[j].mark();
                if j < k2.sets.len() {
                    assert!(k2.sets[j].mark().is_subset_of(osj));
                }
                if j < ko.sets.len() {
                    assert!(osj.is_subset_of(ko.sets[j].mark()));
                } else {
                    assert!(osj.is_empty_set());
                }
            }
        }
    }
}
