//! Finite expansion oracle.
//!
//! `expand` unrolls a pattern space into a finite rooted graph in which every
//! infinite tail is replaced by its prefix followed by a fixed number of full
//! cycle repetitions; each limit node records which children stand in for its
//! tail. Every limit quantity (heights, envelopes, derivations, indices) is
//! then recomputed on the unrolled graph from scratch, walking actual copies
//! instead of exploiting cycle uniformity, and compared exactly against the
//! symbolic engine. Structural disagreement between copy counts 2 and 3, or
//! between the oracle and the symbolic answer, is a hard failure.

use std::sync::Arc;

use crate::error::Error;
use crate::func::PatternFn;
use crate::oscillation::{self, Flavor};
use crate::rat::Rat;
use crate::space::{MarkPattern, NodeId, Space};

#[derive(Clone, Debug)]
pub struct ExNode {
    /// Subtree size; the subtree occupies ids `[id, id + size)`.
    pub size: usize,
    pub children: Vec<usize>,
    /// The children standing in for the node's infinite tail (the unrolled
    /// cycle copies). Empty exactly when the pattern node is a leaf.
    pub tail_children: Vec<usize>,
    /// Pattern node this vertex instantiates.
    pub pattern: NodeId,
}

/// Finite unrolling of a pattern space with limit annotations.
#[derive(Clone, Debug)]
pub struct Expanded {
    pub space: Arc<Space>,
    pub copies: usize,
    pub nodes: Vec<ExNode>,
}

impl Expanded {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn tail_nodes(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.nodes[id]
            .tail_children
            .iter()
            .flat_map(move |&c| c..c + self.nodes[c].size)
    }

    /// Materializes a pattern decoration on every unrolled vertex.
    pub fn lift_values(&self, values: &[Rat]) -> Vec<Rat> {
        self.nodes.iter().map(|n| values[n.pattern].clone()).collect()
    }

    pub fn lift_bits(&self, bits: &[bool]) -> Vec<bool> {
        self.nodes.iter().map(|n| bits[n.pattern]).collect()
    }

    /// Checks that a per-vertex table is the lift of a per-pattern-node
    /// table, i.e. uniform across cycle copies, and equal to it.
    pub fn agrees<T: PartialEq>(&self, symbolic: &[T], oracle: &[T]) -> bool {
        self.nodes
            .iter()
            .zip(oracle)
            .all(|(n, v)| &symbolic[n.pattern] == v)
    }
}

/// Unrolls every tail into `copies` full cycle repetitions; `copies >= 2`.
pub fn expand(space: &Arc<Space>, copies: usize) -> Result<Expanded, Error> {
    if copies < 2 {
        return Err(Error::Precondition {
            what: format!("expansion requires copies >= 2, got {copies}"),
            addr: "root".into(),
        });
    }
    let mut nodes = Vec::new();
    expand_rec(space, 0, copies, &mut nodes);
    Ok(Expanded {
        space: space.clone(),
        copies,
        nodes,
    })
}

fn expand_rec(space: &Arc<Space>, pattern: NodeId, copies: usize, out: &mut Vec<ExNode>) -> usize {
    let id = out.len();
    out.push(ExNode {
        size: 0,
        children: vec![],
        tail_children: vec![],
        pattern,
    });
    let meta = space.node(pattern);
    for &p in &meta.prefix_children {
        let c = expand_rec(space, p, copies, out);
        out[id].children.push(c);
    }
    for _rep in 0..copies {
        for &s in &meta.cycle_children {
            let c = expand_rec(space, s, copies, out);
            out[id].children.push(c);
            out[id].tail_children.push(c);
        }
    }
    out[id].size = out.len() - id;
    id
}

/// Closedness on the unrolled graph: no unmarked limit vertex may have a
/// marked vertex in its stand-in tail.
pub fn ex_is_closed(ex: &Expanded, bits: &[bool]) -> bool {
    (0..ex.len()).all(|id| bits[id] || !ex.tail_nodes(id).any(|t| bits[t]))
}

/// Closure on the unrolled graph (children follow parents in preorder, so
/// one reverse pass suffices).
pub fn ex_closure(ex: &Expanded, bits: &[bool]) -> Vec<bool> {
    let mut out = bits.to_vec();
    for id in (0..ex.len()).rev() {
        if !out[id] && ex.tail_nodes(id).any(|t| out[t]) {
            out[id] = true;
        }
    }
    out
}

/// Heights by iterated cluster-point removal on the unrolled graph: a vertex
/// survives a round iff its (stand-in) tail still contains a survivor.
pub fn ex_heights(ex: &Expanded) -> (Vec<u32>, u32) {
    let mut heights = vec![0u32; ex.len()];
    let mut alive = vec![true; ex.len()];
    loop {
        let next: Vec<bool> = (0..ex.len())
            .map(|id| ex.tail_nodes(id).any(|t| alive[t]))
            .collect();
        if !next.iter().any(|&b| b) {
            break;
        }
        for (h, &n) in heights.iter_mut().zip(&next) {
            if n {
                *h += 1;
            }
        }
        alive = next;
    }
    let rank = heights.iter().copied().max().unwrap_or(0);
    (heights, rank)
}

/// Envelope and oscillation tables on the unrolled graph, relative to a
/// per-vertex domain. Entries off the domain are zero and not meaningful.
pub struct ExEnvelopes {
    pub upper: Vec<Rat>,
    pub lower: Vec<Rat>,
    pub uosc: Vec<Rat>,
    pub osc: Vec<Rat>,
    pub oosc: Vec<Rat>,
}

pub fn ex_envelopes(ex: &Expanded, values: &[Rat], domain: &[bool]) -> ExEnvelopes {
    let n = ex.len();
    let mut upper = vec![Rat::zero(); n];
    let mut lower = vec![Rat::zero(); n];
    let mut uosc = vec![Rat::zero(); n];
    for id in 0..n {
        if !domain[id] {
            continue;
        }
        let mut u = values[id].clone();
        let mut l = values[id].clone();
        let mut w = Rat::zero();
        for t in ex.tail_nodes(id).filter(|&t| domain[t]) {
            u = u.max(values[t].clone());
            l = l.min(values[t].clone());
            w = w.max((&values[t] - &values[id]).abs());
        }
        upper[id] = u;
        lower[id] = l;
        uosc[id] = w;
    }
    let mut osc = uosc.clone();
    for id in 0..n {
        if !domain[id] {
            continue;
        }
        for t in ex.tail_nodes(id).filter(|&t| domain[t]) {
            if uosc[t] > osc[id] {
                osc[id] = uosc[t].clone();
            }
        }
    }
    let oosc = (0..n)
        .map(|id| if domain[id] { &upper[id] - &lower[id] } else { Rat::zero() })
        .collect();
    ExEnvelopes {
        upper,
        lower,
        uosc,
        osc,
        oosc,
    }
}

/// Oscillation-set derivation on the unrolled graph; returns the full chain
/// of per-vertex marks starting from `domain` and ending with the empty set.
pub fn ex_derivation(
    ex: &Expanded,
    values: &[Rat],
    eps: &Rat,
    flavor: Flavor,
    domain: &[bool],
) -> Vec<Vec<bool>> {
    let mut chain = vec![domain.to_vec()];
    loop {
        let cur = chain.last().unwrap();
        if !cur.iter().any(|&b| b) {
            break;
        }
        let env = ex_envelopes(ex, values, cur);
        let table = match flavor {
            Flavor::Osc => &env.osc,
            Flavor::UpperOsc => &env.oosc,
        };
        let next: Vec<bool> = (0..ex.len()).map(|id| cur[id] && &table[id] >= eps).collect();
        chain.push(next);
        if chain.len() > ex.space.rank() as usize + 3 {
            panic!("oracle derivation failed to reach the empty set");
        }
    }
    chain
}

pub fn ex_index(ex: &Expanded, values: &[Rat], eps: &Rat, domain: &[bool]) -> usize {
    let chain = ex_derivation(ex, values, eps, Flavor::Osc, domain);
    chain.iter().filter(|m| m.iter().any(|&b| b)).count().saturating_sub(1)
}

/// One oracle disagreement, for reporting.
#[derive(Clone, Debug, serde::Serialize)]
pub struct OracleMismatch {
    pub what: String,
    pub copies: usize,
}

/// Recomputes heights, envelopes, the derivation chains at the given
/// thresholds (both flavors), and the per-threshold indices of `f` on the
/// unrolled graph, and diffs everything against the symbolic engine.
pub fn check_function(f: &PatternFn, copies: usize, eps_grid: &[Rat]) -> Result<(), OracleMismatch> {
    let space = f.space();
    let ex = expand(space, copies).expect("copies >= 2");
    let mismatch = |what: &str| OracleMismatch {
        what: what.to_string(),
        copies,
    };

    let (sym_heights, sym_rank) = crate::space::cb_height(space);
    let (orc_heights, orc_rank) = ex_heights(&ex);
    if !ex.agrees(&sym_heights, &orc_heights) || sym_rank != orc_rank {
        return Err(mismatch("heights"));
    }

    let values = ex.lift_values(f.values());
    let full = vec![true; ex.len()];
    let env = ex_envelopes(&ex, &values, &full);
    let sym = oscillation::envelopes(f, &crate::space::ClosedMark::full(space))
        .expect("nonempty domain");
    for (name, sym_t, orc_t) in [
        ("upper envelope", sym.upper.values(), &env.upper),
        ("lower envelope", sym.lower.values(), &env.lower),
        ("lower oscillation", sym.uosc.values(), &env.uosc),
        ("oscillation", sym.osc.values(), &env.osc),
        ("upper oscillation", sym.oosc.values(), &env.oosc),
    ] {
        if !ex.agrees(sym_t, orc_t) {
            return Err(mismatch(name));
        }
    }

    for eps in eps_grid {
        for flavor in [Flavor::Osc, Flavor::UpperOsc] {
            let sym_chain = oscillation::derivation(f, eps, flavor);
            let orc_chain = ex_derivation(&ex, &values, eps, flavor, &full);
            if sym_chain.sets.len() != orc_chain.len() {
                return Err(mismatch("derivation length"));
            }
            for (s, o) in sym_chain.sets.iter().zip(&orc_chain) {
                if !ex.agrees(s.mark().bits(), o) {
                    return Err(mismatch("derivation step"));
                }
            }
            if flavor == Flavor::Osc {
                let orc_i = orc_chain
                    .iter()
                    .filter(|m| m.iter().any(|&b| b))
                    .count()
                    .saturating_sub(1);
                if oscillation::index(f, eps) != orc_i {
                    return Err(mismatch("index"));
                }
            }
        }
    }
    Ok(())
}

/// Oracle check of a derivation relative to a closed domain mark.
pub fn check_relative_index(
    f: &PatternFn,
    domain: &MarkPattern,
    copies: usize,
    eps: &Rat,
) -> Result<(), OracleMismatch> {
    let ex = expand(f.space(), copies).expect("copies >= 2");
    let values = ex.lift_values(f.values());
    let dom = ex.lift_bits(domain.bits());
    let sym = oscillation::index_within(f, eps, domain);
    let orc = ex_index(&ex, &values, eps, &dom);
    if sym != orc {
        return Err(OracleMismatch {
            what: "relative index".into(),
            copies,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceDesc;

    #[test]
    fn expansion_node_counts() {
        let leaf = Space::new(SpaceDesc::Leaf).unwrap();
        assert_eq!(expand(&leaf, 2).unwrap().len(), 1);
        let t1 = Space::new(SpaceDesc::homogeneous(1)).unwrap();
        let e1 = expand(&t1, 2).unwrap();
        assert_eq!(e1.len(), 3);
        assert_eq!(e1.nodes[0].tail_children, vec![1, 2]);
        let t2 = Space::new(SpaceDesc::homogeneous(2)).unwrap();
        assert_eq!(expand(&t2, 3).unwrap().len(), 13);
    }

    #[test]
    fn copies_below_two_rejected() {
        let t1 = Space::new(SpaceDesc::homogeneous(1)).unwrap();
        assert!(expand(&t1, 1).is_err());
    }

    #[test]
    fn oracle_heights_match_symbolic_on_towers_and_mixed_trees() {
        let descs = vec![
            SpaceDesc::Leaf,
            SpaceDesc::homogeneous(1),
            SpaceDesc::homogeneous(2),
            SpaceDesc::homogeneous(3),
            SpaceDesc::limit(vec![SpaceDesc::homogeneous(2)], vec![SpaceDesc::Leaf]),
            SpaceDesc::limit(
                vec![],
                vec![SpaceDesc::limit(
                    vec![SpaceDesc::homogeneous(2)],
                    vec![SpaceDesc::Leaf],
                )],
            ),
        ];
        for d in descs {
            let s = Space::new(d).unwrap();
            let (sym, sym_rank) = crate::space::cb_height(&s);
            for copies in [2, 3] {
                let ex = expand(&s, copies).unwrap();
                let (orc, orc_rank) = ex_heights(&ex);
                assert!(ex.agrees(&sym, &orc), "copies {copies}");
                assert_eq!(sym_rank, orc_rank);
            }
        }
    }
}
