//! Finite presentations of countable compact scattered metric spaces.
//!
//! A space is presented by a pattern tree: a `Leaf` is a single isolated
//! point; a `Limit` node is a point that is the limit of the concrete point
//! sequence formed by its prefix subtrees followed by its cycle subtrees
//! repeated forever. Subsets and functions are decorated on pattern nodes,
//! uniformly across cycle repetitions, which makes every limit quantity an
//! exact maximum over one cycle.

use std::fmt;
use std::sync::Arc;

use crate::error::Error;

/// Syntactic presentation of a space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SpaceDesc {
    Leaf,
    Limit {
        prefix: Vec<SpaceDesc>,
        cycle: Vec<SpaceDesc>,
    },
}

impl SpaceDesc {
    pub fn leaf() -> SpaceDesc {
        SpaceDesc::Leaf
    }

    /// Builds a limit node; the cycle must be nonempty.
    pub fn limit(prefix: Vec<SpaceDesc>, cycle: Vec<SpaceDesc>) -> SpaceDesc {
        assert!(!cycle.is_empty(), "limit node requires a nonempty cycle");
        SpaceDesc::Limit { prefix, cycle }
    }

    /// The homogeneous rank-`n` tower: a single-slot cycle chain with
    /// `T_0 = Leaf` and `T_k = Limit{[], [T_{k-1}]}`.
    pub fn homogeneous(n: usize) -> SpaceDesc {
        let mut t = SpaceDesc::Leaf;
        for _ in 0..n {
            t = SpaceDesc::limit(vec![], vec![t]);
        }
        t
    }

    pub fn node_count(&self) -> usize {
        match self {
            SpaceDesc::Leaf => 1,
            SpaceDesc::Limit { prefix, cycle } => {
                1 + prefix.iter().chain(cycle).map(|c| c.node_count()).sum::<usize>()
            }
        }
    }

    fn validate(&self) -> Result<(), Error> {
        match self {
            SpaceDesc::Leaf => Ok(()),
            SpaceDesc::Limit { prefix, cycle } => {
                if cycle.is_empty() {
                    return Err(Error::ShapeMismatch(
                        "limit node with empty cycle".into(),
                    ));
                }
                prefix.iter().chain(cycle).try_for_each(|c| c.validate())
            }
        }
    }
}

/// Identifier of a pattern node: its preorder position in the tree.
pub type NodeId = usize;

/// One step of a node address.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Selector {
    Prefix(usize),
    /// A cycle slot; denotes every repetition of that slot uniformly.
    Cycle(usize),
}

/// Path from the root to a pattern node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct NodeAddress(pub Vec<Selector>);

impl fmt::Display for NodeAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "root");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| match s {
                Selector::Prefix(i) => format!("p{i}"),
                Selector::Cycle(i) => format!("c{i}"),
            })
            .collect();
        write!(f, "{}", parts.join("."))
    }
}

#[derive(Clone, Debug)]
pub struct NodeMeta {
    /// Subtree node count; the subtree occupies ids `[id, id + size)`.
    pub size: usize,
    pub parent: Option<NodeId>,
    pub prefix_children: Vec<NodeId>,
    pub cycle_children: Vec<NodeId>,
    pub addr: NodeAddress,
    /// Cantor–Bendixson height: largest `j` with the point in the `j`-th
    /// derived set.
    pub height: u32,
    /// Maximum height over the node's whole subtree.
    pub subtree_max_height: u32,
}

impl NodeMeta {
    pub fn is_leaf(&self) -> bool {
        self.cycle_children.is_empty()
    }
}

/// A validated, preorder-indexed pattern space.
#[derive(Debug)]
pub struct Space {
    desc: SpaceDesc,
    nodes: Vec<NodeMeta>,
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        self.desc == other.desc
    }
}
impl Eq for Space {}

impl Space {
    pub fn new(desc: SpaceDesc) -> Result<Arc<Space>, Error> {
        desc.validate()?;
        let mut nodes = Vec::with_capacity(desc.node_count());
        build_meta(&desc, None, NodeAddress::default(), &mut nodes);
        // Heights bottom-up; in preorder every child id exceeds its parent's.
        for id in (0..nodes.len()).rev() {
            let (h, sm) = {
                let m = &nodes[id];
                if m.is_leaf() {
                    (0, 0)
                } else {
                    let h = 1 + m
                        .cycle_children
                        .iter()
                        .map(|&c| nodes[c].subtree_max_height)
                        .max()
                        .unwrap();
                    let sm = m
                        .prefix_children
                        .iter()
                        .chain(&m.cycle_children)
                        .map(|&c| nodes[c].subtree_max_height)
                        .max()
                        .unwrap()
                        .max(h);
                    (h, sm)
                }
            };
            nodes[id].height = h;
            nodes[id].subtree_max_height = sm;
        }
        Ok(Arc::new(Space { desc, nodes }))
    }

    pub fn desc(&self) -> &SpaceDesc {
        &self.desc
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a presented space always has at least its root point
    }

    pub fn node(&self, id: NodeId) -> &NodeMeta {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[NodeMeta] {
        &self.nodes
    }

    /// Ids of all pattern nodes inside the cycle subtrees of `id`.
    /// These are exactly the nodes realized cofinally in every neighborhood
    /// of the point `id`.
    pub fn tail_nodes(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes[id]
            .cycle_children
            .iter()
            .flat_map(move |&c| c..c + self.nodes[c].size)
    }

    /// Cantor–Bendixson rank of the presented space.
    pub fn rank(&self) -> u32 {
        self.nodes[0].subtree_max_height
    }

    pub fn heights(&self) -> Vec<u32> {
        self.nodes.iter().map(|m| m.height).collect()
    }

    pub fn resolve(&self, addr: &NodeAddress) -> Result<NodeId, Error> {
        let mut id = 0;
        for sel in &addr.0 {
            let m = &self.nodes[id];
            let next = match sel {
                Selector::Prefix(i) => m.prefix_children.get(*i),
                Selector::Cycle(i) => m.cycle_children.get(*i),
            };
            id = *next.ok_or_else(|| Error::InvalidAddress {
                addr: addr.to_string(),
                msg: "selector out of range".into(),
            })?;
        }
        Ok(id)
    }

    pub fn all_addresses(&self) -> Vec<NodeAddress> {
        self.nodes.iter().map(|m| m.addr.clone()).collect()
    }
}

fn build_meta(
    desc: &SpaceDesc,
    parent: Option<NodeId>,
    addr: NodeAddress,
    nodes: &mut Vec<NodeMeta>,
) -> NodeId {
    let id = nodes.len();
    nodes.push(NodeMeta {
        size: 0,
        parent,
        prefix_children: vec![],
        cycle_children: vec![],
        addr: addr.clone(),
        height: 0,
        subtree_max_height: 0,
    });
    if let SpaceDesc::Limit { prefix, cycle } = desc {
        for (i, c) in prefix.iter().enumerate() {
            let mut a = addr.clone();
            a.0.push(Selector::Prefix(i));
            let cid = build_meta(c, Some(id), a, nodes);
            nodes[id].prefix_children.push(cid);
        }
        for (i, c) in cycle.iter().enumerate() {
            let mut a = addr.clone();
            a.0.push(Selector::Cycle(i));
            let cid = build_meta(c, Some(id), a, nodes);
            nodes[id].cycle_children.push(cid);
        }
    }
    nodes[id].size = nodes.len() - id;
    id
}

/// Computes per-node heights together with the rank.
pub fn cb_height(space: &Space) -> (Vec<u32>, u32) {
    (space.heights(), space.rank())
}

/// A subset of a space, decorated per pattern node (uniform across cycle
/// repetitions).
#[derive(Clone, PartialEq, Eq)]
pub struct MarkPattern {
    space: Arc<Space>,
    bits: Vec<bool>,
}

impl fmt::Debug for MarkPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<usize> = self.iter_marked().collect();
        write!(f, "Mark{ids:?}")
    }
}

impl MarkPattern {
    pub fn new(space: Arc<Space>, bits: Vec<bool>) -> Result<MarkPattern, Error> {
        if bits.len() != space.len() {
            return Err(Error::ShapeMismatch(format!(
                "mark has {} bits for a space with {} nodes",
                bits.len(),
                space.len()
            )));
        }
        Ok(MarkPattern { space, bits })
    }

    pub fn full(space: &Arc<Space>) -> MarkPattern {
        MarkPattern {
            space: space.clone(),
            bits: vec![true; space.len()],
        }
    }

    pub fn empty(space: &Arc<Space>) -> MarkPattern {
        MarkPattern {
            space: space.clone(),
            bits: vec![false; space.len()],
        }
    }

    pub fn singleton(space: &Arc<Space>, id: NodeId) -> MarkPattern {
        let mut m = MarkPattern::empty(space);
        m.bits[id] = true;
        m
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, id: NodeId) -> bool {
        self.bits[id]
    }

    pub fn set(&mut self, id: NodeId, v: bool) {
        self.bits[id] = v;
    }

    pub fn is_empty_set(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn iter_marked(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn same_space(&self, other: &MarkPattern) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || self.space == other.space
    }

    pub fn and(&self, other: &MarkPattern) -> MarkPattern {
        assert!(self.same_space(other), "mark spaces differ");
        MarkPattern {
            space: self.space.clone(),
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a && b)
                .collect(),
        }
    }

    pub fn or(&self, other: &MarkPattern) -> MarkPattern {
        assert!(self.same_space(other), "mark spaces differ");
        MarkPattern {
            space: self.space.clone(),
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a || b)
                .collect(),
        }
    }

    pub fn minus(&self, other: &MarkPattern) -> MarkPattern {
        assert!(self.same_space(other), "mark spaces differ");
        MarkPattern {
            space: self.space.clone(),
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a && !b)
                .collect(),
        }
    }

    pub fn complement(&self) -> MarkPattern {
        MarkPattern {
            space: self.space.clone(),
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &MarkPattern) -> bool {
        assert!(self.same_space(other), "mark spaces differ");
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Topological closure of the marked set: adds every limit node with a
    /// marked node somewhere in its cycle subtrees. One bottom-up pass
    /// suffices because marking a node never affects its descendants.
    pub fn closure(&self) -> MarkPattern {
        let mut bits = self.bits.clone();
        for id in (0..self.space.len()).rev() {
            if !bits[id] && self.space.tail_nodes(id).any(|t| bits[t]) {
                bits[id] = true;
            }
        }
        MarkPattern {
            space: self.space.clone(),
            bits,
        }
    }

    /// Closure within the subspace presented by `domain`.
    pub fn closure_within(&self, domain: &MarkPattern) -> MarkPattern {
        let mut bits: Vec<bool> = self
            .bits
            .iter()
            .zip(&domain.bits)
            .map(|(&a, &d)| a && d)
            .collect();
        for id in (0..self.space.len()).rev() {
            if domain.bits[id] && !bits[id] && self.space.tail_nodes(id).any(|t| bits[t]) {
                bits[id] = true;
            }
        }
        MarkPattern {
            space: self.space.clone(),
            bits,
        }
    }

    /// Cluster points of the marked set (within the whole space).
    pub fn derived(&self) -> MarkPattern {
        let bits = (0..self.space.len())
            .map(|id| self.space.tail_nodes(id).any(|t| self.bits[t]))
            .collect();
        MarkPattern {
            space: self.space.clone(),
            bits,
        }
    }
}

/// True iff the marked set is closed: no unmarked limit node has a marked
/// node in its cycle subtrees.
pub fn is_closed(m: &MarkPattern) -> bool {
    first_closure_violation(m, None).is_none()
}

/// True iff `m ∩ domain` is closed in the subspace presented by `domain`.
pub fn is_closed_within(m: &MarkPattern, domain: &MarkPattern) -> bool {
    first_closure_violation(m, Some(domain)).is_none()
}

fn first_closure_violation(m: &MarkPattern, domain: Option<&MarkPattern>) -> Option<NodeId> {
    let space = m.space();
    let in_dom = |id: NodeId| domain.map_or(true, |d| d.get(id));
    (0..space.len()).find(|&id| {
        in_dom(id)
            && !m.get(id)
            && space.tail_nodes(id).any(|t| in_dom(t) && m.get(t))
    })
}

/// A mark validated to present a closed set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedMark(MarkPattern);

impl ClosedMark {
    pub fn validate(m: MarkPattern) -> Result<ClosedMark, Error> {
        match first_closure_violation(&m, None) {
            None => Ok(ClosedMark(m)),
            Some(id) => Err(Error::NotClosed {
                addr: m.space().node(id).addr.to_string(),
            }),
        }
    }

    pub fn full(space: &Arc<Space>) -> ClosedMark {
        ClosedMark(MarkPattern::full(space))
    }

    /// The closure of an arbitrary mark is closed by construction.
    pub fn closure_of(m: &MarkPattern) -> ClosedMark {
        ClosedMark(m.closure())
    }

    pub fn empty(space: &Arc<Space>) -> ClosedMark {
        ClosedMark(MarkPattern::empty(space))
    }

    pub fn mark(&self) -> &MarkPattern {
        &self.0
    }

    pub fn into_mark(self) -> MarkPattern {
        self.0
    }

    pub fn space(&self) -> &Arc<Space> {
        self.0.space()
    }

    pub fn is_empty_set(&self) -> bool {
        self.0.is_empty_set()
    }

    /// Intersections of closed sets are closed.
    pub fn and(&self, other: &ClosedMark) -> ClosedMark {
        ClosedMark(self.0.and(&other.0))
    }

    /// Finite unions of closed sets are closed.
    pub fn or(&self, other: &ClosedMark) -> ClosedMark {
        ClosedMark(self.0.or(&other.0))
    }
}

/// The derived set (cluster points) of the whole space: exactly the nodes of
/// height at least one. This set is always closed.
pub fn derived_set(space: &Arc<Space>) -> ClosedMark {
    let bits = space.nodes().iter().map(|m| m.height >= 1).collect();
    ClosedMark(MarkPattern {
        space: space.clone(),
        bits,
    })
}

/// True iff `m` presents an open set (its complement is closed).
pub fn is_open(m: &MarkPattern) -> bool {
    is_closed(&m.complement())
}

/// True iff `m ∩ domain` is open in the subspace presented by `domain`.
pub fn is_open_within(m: &MarkPattern, domain: &MarkPattern) -> bool {
    is_closed_within(&domain.minus(m), domain)
}

/// True iff `inner` has empty interior in the subspace presented by `outer`:
/// every inner point must be a limit of `outer ∖ inner` points.
pub fn is_relatively_nowhere_dense(
    inner: &ClosedMark,
    outer: &ClosedMark,
) -> Result<bool, Error> {
    if !inner.mark().is_subset_of(outer.mark()) {
        return Err(Error::Containment(
            "inner set is not contained in outer set".into(),
        ));
    }
    let space = inner.space();
    let rest = outer.mark().minus(inner.mark());
    Ok(inner
        .mark()
        .iter_marked()
        .all(|id| space.tail_nodes(id).any(|t| rest.get(t))))
}

/// One clopen component of a restricted subspace, with its node translation:
/// `to_parent[new_id]` is the presenting node in the original space.
#[derive(Clone, Debug)]
pub struct Component {
    pub space: Arc<Space>,
    pub to_parent: Vec<NodeId>,
}

/// Result of restricting a space to a closed subset. The subspace splits
/// into finitely many clopen components; a closed subset of a pattern tree
/// need not be presentable by a single tree (two marked prefix roots under
/// an unmarked limit node form a two-point discrete subspace).
#[derive(Clone, Debug)]
pub enum Restriction {
    /// The distinguished empty-subspace value; not an error.
    Empty,
    Components(Vec<Component>),
}

impl Restriction {
    pub fn single(&self) -> Option<&Component> {
        match self {
            Restriction::Components(cs) if cs.len() == 1 => Some(&cs[0]),
            _ => None,
        }
    }

    pub fn rank(&self) -> u32 {
        match self {
            Restriction::Empty => 0,
            Restriction::Components(cs) => cs.iter().map(|c| c.space.rank()).max().unwrap_or(0),
        }
    }
}

/// Presents the subspace carried by a closed mark, pruning unmarked nodes.
/// A marked limit node whose cycle subtrees carry no marks becomes a leaf;
/// prefix entries with empty marks are dropped.
pub fn restrict(space: &Arc<Space>, closed: &ClosedMark) -> Result<Restriction, Error> {
    if !Arc::ptr_eq(space, closed.space()) && space.as_ref() != closed.space().as_ref() {
        return Err(Error::SpaceMismatch);
    }
    if closed.is_empty_set() {
        return Ok(Restriction::Empty);
    }
    let parts = restrict_rec(space, closed.mark(), 0);
    let components = parts
        .into_iter()
        .map(|(desc, ids)| {
            let sub = Space::new(desc)?;
            debug_assert_eq!(sub.len(), ids.len());
            Ok(Component {
                space: sub,
                to_parent: ids,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Restriction::Components(components))
}

fn restrict_rec(
    space: &Arc<Space>,
    bits: &MarkPattern,
    id: NodeId,
) -> Vec<(SpaceDesc, Vec<NodeId>)> {
    let meta = space.node(id);
    let marked = bits.get(id);
    let child_parts = |children: &[NodeId]| -> Vec<(SpaceDesc, Vec<NodeId>)> {
        children
            .iter()
            .flat_map(|&c| restrict_rec(space, bits, c))
            .collect()
    };
    if !marked {
        // Not a subspace point; surviving pieces live in the children.
        let mut out = child_parts(&meta.prefix_children);
        out.extend(child_parts(&meta.cycle_children));
        return out;
    }
    let cycle_parts = child_parts(&meta.cycle_children);
    if cycle_parts.is_empty() {
        // Isolated in the subspace; marked prefix pieces precede it.
        let mut out = child_parts(&meta.prefix_children);
        out.push((SpaceDesc::Leaf, vec![id]));
        return out;
    }
    let prefix_parts = child_parts(&meta.prefix_children);
    let mut ids = vec![id];
    let mut prefix = Vec::with_capacity(prefix_parts.len());
    for (d, i) in prefix_parts {
        prefix.push(d);
        ids.extend(i);
    }
    let mut cycle = Vec::with_capacity(cycle_parts.len());
    for (d, i) in cycle_parts {
        cycle.push(d);
        ids.extend(i);
    }
    vec![(SpaceDesc::Limit { prefix, cycle }, ids)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: usize) -> Arc<Space> {
        Space::new(SpaceDesc::homogeneous(n)).unwrap()
    }

    #[test]
    fn heights_of_towers() {
        let leaf = t(0);
        assert_eq!(cb_height(&leaf), (vec![0], 0));
        let t1 = t(1);
        assert_eq!(cb_height(&t1), (vec![1, 0], 1));
        let t2 = t(2);
        assert_eq!(cb_height(&t2), (vec![2, 1, 0], 2));
    }

    #[test]
    fn height_sees_through_prefixes_inside_cycles() {
        // A cycle slot whose own root has height 1 but which hides a rank-2
        // subtree in its prefix; the outer limit collects the deep points.
        let inner = SpaceDesc::limit(vec![SpaceDesc::homogeneous(2)], vec![SpaceDesc::Leaf]);
        let outer = Space::new(SpaceDesc::limit(vec![], vec![inner])).unwrap();
        assert_eq!(outer.node(0).height, 3);
        assert_eq!(outer.rank(), 3);
        // The inner root itself is only a limit of leaves.
        assert_eq!(outer.node(1).height, 1);
    }

    #[test]
    fn rank_counts_prefix_contributions() {
        let s = Space::new(SpaceDesc::limit(
            vec![SpaceDesc::homogeneous(2)],
            vec![SpaceDesc::Leaf],
        ))
        .unwrap();
        assert_eq!(s.node(0).height, 1);
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn derived_set_marks_limit_nodes() {
        let t1 = t(1);
        let d = derived_set(&t1);
        assert_eq!(d.mark().bits(), &[true, false]);
        let t2 = t(2);
        let d2 = derived_set(&t2);
        assert_eq!(d2.mark().bits(), &[true, true, false]);
        let leaf = t(0);
        assert!(derived_set(&leaf).is_empty_set());
    }

    #[test]
    fn closedness_examples() {
        let t1 = t(1);
        assert!(is_closed(&MarkPattern::singleton(&t1, 0)));
        // Leaves without the root: the root is a cluster point of the leaves.
        let leaves = MarkPattern::new(t1.clone(), vec![false, true]).unwrap();
        assert!(!is_closed(&leaves));
        let t2 = t(2);
        assert!(is_closed(&MarkPattern::full(&t2)));
    }

    #[test]
    fn closure_adds_cluster_points() {
        let t2 = t(2);
        let leaves = MarkPattern::new(t2.clone(), vec![false, false, true]).unwrap();
        let cl = leaves.closure();
        assert_eq!(cl.bits(), &[true, true, true]);
        assert!(is_closed(&cl));
    }

    #[test]
    fn scatteredness_via_iterated_derivation() {
        for n in 0..=4 {
            let s = t(n);
            let mut cur = MarkPattern::full(&s);
            for _ in 0..s.rank() {
                cur = cur.derived();
                assert!(!cur.is_empty_set());
            }
            assert!(cur.derived().is_empty_set());
        }
    }

    #[test]
    fn restrict_derived_set_of_t2_is_t1() {
        let t2 = t(2);
        let r = restrict(&t2, &derived_set(&t2)).unwrap();
        let c = r.single().expect("single component");
        assert_eq!(c.space.desc(), &SpaceDesc::homogeneous(1));
        assert_eq!(c.to_parent, vec![0, 1]);
    }

    #[test]
    fn restrict_singleton_and_identity() {
        let t1 = t(1);
        let r = restrict(&t1, &ClosedMark::validate(MarkPattern::singleton(&t1, 0)).unwrap())
            .unwrap();
        assert_eq!(r.single().unwrap().space.desc(), &SpaceDesc::Leaf);

        let r = restrict(&t1, &ClosedMark::full(&t1)).unwrap();
        assert_eq!(r.single().unwrap().space.desc(), t1.desc());
    }

    #[test]
    fn restrict_empty_mark_is_distinguished() {
        let t1 = t(1);
        assert!(matches!(
            restrict(&t1, &ClosedMark::empty(&t1)).unwrap(),
            Restriction::Empty
        ));
    }

    #[test]
    fn restrict_can_split_into_components() {
        // Two marked prefix roots under an unmarked limit node: the subspace
        // is a two-point discrete space.
        let s = Space::new(SpaceDesc::limit(
            vec![SpaceDesc::homogeneous(1), SpaceDesc::homogeneous(1)],
            vec![SpaceDesc::Leaf],
        ))
        .unwrap();
        // nodes: 0 root, 1 first T1 root, 2 its leaf, 3 second T1 root, 4 its leaf, 5 cycle leaf
        let mut m = MarkPattern::empty(&s);
        m.set(1, true);
        m.set(3, true);
        let c = ClosedMark::validate(m).unwrap();
        match restrict(&s, &c).unwrap() {
            Restriction::Components(cs) => {
                assert_eq!(cs.len(), 2);
                assert!(cs.iter().all(|c| c.space.desc() == &SpaceDesc::Leaf));
                assert_eq!(cs[0].to_parent, vec![1]);
                assert_eq!(cs[1].to_parent, vec![3]);
            }
            Restriction::Empty => panic!("nonempty restriction expected"),
        }
    }

    #[test]
    fn rank_drops_by_one_under_derivation() {
        for n in 1..=4 {
            let s = t(n);
            let r = restrict(&s, &derived_set(&s)).unwrap();
            assert_eq!(r.rank(), s.rank() - 1);
        }
    }

    #[test]
    fn nested_restriction_composes() {
        // Restricting by nested closed marks equals restricting once by the
        // inner mark, with addresses composed through the translations.
        let s = Space::new(SpaceDesc::limit(
            vec![SpaceDesc::homogeneous(1)],
            vec![SpaceDesc::homogeneous(2)],
        ))
        .unwrap();
        let outer = derived_set(&s);
        let inner = ClosedMark::validate(outer.mark().derived()).unwrap();
        assert!(inner.mark().is_subset_of(outer.mark()));

        let once = restrict(&s, &inner).unwrap();
        let first = restrict(&s, &outer).unwrap();
        let comps = match &first {
            Restriction::Components(cs) => cs,
            Restriction::Empty => panic!(),
        };
        // Pull the inner mark through each component and restrict again.
        let mut twice: Vec<Component> = vec![];
        for comp in comps {
            let bits: Vec<bool> = comp.to_parent.iter().map(|&old| inner.mark().get(old)).collect();
            let m = MarkPattern::new(comp.space.clone(), bits).unwrap();
            if m.is_empty_set() {
                continue;
            }
            let cm = ClosedMark::validate(m).unwrap();
            match restrict(&comp.space, &cm).unwrap() {
                Restriction::Components(cs) => {
                    for c in cs {
                        let to_parent =
                            c.to_parent.iter().map(|&mid| comp.to_parent[mid]).collect();
                        twice.push(Component {
                            space: c.space,
                            to_parent,
                        });
                    }
                }
                Restriction::Empty => {}
            }
        }
        let once = match once {
            Restriction::Components(cs) => cs,
            Restriction::Empty => panic!(),
        };
        assert_eq!(once.len(), twice.len());
        for (a, b) in once.iter().zip(&twice) {
            assert_eq!(a.space.desc(), b.space.desc());
            assert_eq!(a.to_parent, b.to_parent);
        }
    }

    #[test]
    fn nowhere_dense_examples() {
        let t2 = t(2);
        let inner = derived_set(&t2);
        let outer = ClosedMark::full(&t2);
        assert!(is_relatively_nowhere_dense(&inner, &outer).unwrap());
        assert!(!is_relatively_nowhere_dense(&outer, &outer).unwrap());
        let empty = ClosedMark::empty(&t2);
        assert!(is_relatively_nowhere_dense(&empty, &outer).unwrap());
        assert!(is_relatively_nowhere_dense(&empty, &empty).unwrap());
        assert!(matches!(
            is_relatively_nowhere_dense(&outer, &inner),
            Err(Error::Containment(_))
        ));
    }

    #[test]
    fn addresses_resolve_and_reject() {
        let s = Space::new(SpaceDesc::limit(
            vec![SpaceDesc::Leaf],
            vec![SpaceDesc::homogeneous(1)],
        ))
        .unwrap();
        for (id, addr) in s.all_addresses().iter().enumerate() {
            assert_eq!(s.resolve(addr).unwrap(), id);
        }
        let bad = NodeAddress(vec![Selector::Prefix(3)]);
        assert!(s.resolve(&bad).is_err());
    }

    #[test]
    fn empty_cycle_is_rejected() {
        let desc = SpaceDesc::Limit {
            prefix: vec![SpaceDesc::Leaf],
            cycle: vec![],
        };
        assert!(Space::new(desc).is_err());
    }
}
