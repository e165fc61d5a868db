//! Checkable certificates for upper bounds on the decomposition norm, and
//! the simple-function representation over differences of closed sets.
//!
//! The decomposition norm of a bounded function is the infimum of
//! `sup_x sum_j |phi_j(x)|` over pointwise-absolutely-summable continuous
//! decompositions `f = sum_j phi_j`. Exact values are never computed; the
//! engine traffics in certified upper bounds (proof terms whose side
//! conditions are mechanically checked) and proven lower bounds (the
//! sup-norm and a quarter of the index quasi-norm).

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::Error;
use crate::func::{is_continuous_within, is_lsc_within, PatternFn};
use crate::oscillation::full_index;
use crate::rat::Rat;
use crate::space::{is_open_within, ClosedMark, MarkPattern, NodeId, Space};

/// A difference of closed sets, `outer ∖ minus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffClosed {
    pub outer: ClosedMark,
    pub minus: ClosedMark,
}

impl DiffClosed {
    pub fn new(outer: ClosedMark, minus: ClosedMark) -> Result<DiffClosed, Error> {
        if !minus.mark().is_subset_of(outer.mark()) {
            return Err(Error::Containment(
                "the subtracted set must lie inside the outer set".into(),
            ));
        }
        Ok(DiffClosed { outer, minus })
    }

    pub fn full(space: &Arc<Space>) -> DiffClosed {
        DiffClosed {
            outer: ClosedMark::full(space),
            minus: ClosedMark::empty(space),
        }
    }

    /// Wraps a set that is relatively closed in `region` into a global
    /// difference of closed sets: with `region = A ∖ B` and `C` relatively
    /// closed there, `C = (cl(C) ∧ A) ∖ (cl(C) ∧ A ∧ B)`.
    pub fn from_relative_closed(c: &MarkPattern, region: &DiffClosed) -> DiffClosed {
        debug_assert!(c.is_subset_of(&region.represented()));
        let cl = ClosedMark::closure_of(c);
        let outer = cl.and(&region.outer);
        let minus = outer.and(&region.minus);
        let d = DiffClosed { outer, minus };
        debug_assert_eq!(&d.represented(), c, "relative closedness violated");
        d
    }

    /// `region ∖ w` for `w` relatively closed in `region`, again a global
    /// difference of closed sets (and relatively open in `region`).
    pub fn without_relative_closed(&self, w: &MarkPattern) -> DiffClosed {
        let cl = ClosedMark::closure_of(w);
        DiffClosed {
            outer: self.outer.clone(),
            minus: self.minus.or(&cl.and(&self.outer)),
        }
    }

    pub fn represented(&self) -> MarkPattern {
        self.outer.mark().minus(self.minus.mark())
    }

    pub fn space(&self) -> &Arc<Space> {
        self.outer.space()
    }
}

/// A finite rational combination of indicators of pairwise disjoint
/// differences of closed sets.
#[derive(Clone, Debug)]
pub struct SimpleDcs {
    space: Arc<Space>,
    terms: Vec<(Rat, DiffClosed)>,
}

impl SimpleDcs {
    pub fn new(space: Arc<Space>, terms: Vec<(Rat, DiffClosed)>) -> Result<SimpleDcs, Error> {
        let marks: Vec<MarkPattern> = terms.iter().map(|(_, d)| d.represented()).collect();
        for (i, a) in marks.iter().enumerate() {
            for b in &marks[i + 1..] {
                if !a.and(b).is_empty_set() {
                    return Err(Error::Containment(
                        "simple-function terms must be pairwise disjoint".into(),
                    ));
                }
            }
        }
        Ok(SimpleDcs { space, terms })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn terms(&self) -> &[(Rat, DiffClosed)] {
        &self.terms
    }

    /// Pointwise evaluation: the coefficient of the (unique) containing set.
    pub fn eval_fn(&self) -> PatternFn {
        let mut values = vec![Rat::zero(); self.space.len()];
        for (c, d) in &self.terms {
            for id in d.represented().iter_marked() {
                values[id] = c.clone();
            }
        }
        PatternFn::new(self.space.clone(), values).expect("shape")
    }
}

/// A checkable proof term yielding an upper bound on the decomposition norm
/// of its target function, relative to a domain.
#[derive(Clone, Debug)]
pub enum Certificate {
    /// For `f >= 0` lower semicontinuous: the norm equals the sup-norm.
    NonnegLsc,
    /// For `f = u - v` with `u, v >= 0` lower semicontinuous: the norm is
    /// at most `sup (u + v)`.
    LscSplit { u: PatternFn, v: PatternFn },
    /// Triangle inequality over a finite decomposition `f = sum parts`.
    Sum { parts: Vec<(PatternFn, Certificate)> },
    /// Extension across a difference of closed sets: if `f` vanishes off
    /// the set and the inner certificate bounds `f` on the subspace, the
    /// ambient norm is at most `factor` times the inner bound — factor 2
    /// for a general difference of closed sets, factor 1 when the set is
    /// open in the domain.
    Extension {
        set: DiffClosed,
        factor: u8,
        inner: Box<Certificate>,
    },
    /// Localization over pairwise disjoint open supports: the bound is the
    /// maximum of the per-part bounds. Supports with touching closures are
    /// rejected (conservative).
    Localization {
        parts: Vec<(MarkPattern, Certificate)>,
    },
    /// For `f` supported and continuous on an open set: the norm equals
    /// the sup-norm.
    ContinuousOnOpen { support: MarkPattern },
}

impl Certificate {
    pub fn label(&self) -> &'static str {
        match self {
            Certificate::NonnegLsc => "nonneg_lsc",
            Certificate::LscSplit { .. } => "lsc_split",
            Certificate::Sum { .. } => "sum",
            Certificate::Extension { .. } => "extension",
            Certificate::Localization { .. } => "localization",
            Certificate::ContinuousOnOpen { .. } => "continuous_on_open",
        }
    }
}

/// Validates every side condition of the certificate against `f` and
/// recomputes the claimed bound exactly. Rejections carry the failing node
/// and condition.
pub fn check_certificate(f: &PatternFn, cert: &Certificate) -> Result<Rat, Error> {
    check_at(f, cert, &MarkPattern::full(f.space()), &mut vec!["root".into()])
}

fn reject(path: &[String], reason: impl Into<String>) -> Error {
    Error::CertificateRejected {
        path: path.join("."),
        reason: reason.into(),
    }
}

fn check_at(
    f: &PatternFn,
    cert: &Certificate,
    domain: &MarkPattern,
    path: &mut Vec<String>,
) -> Result<Rat, Error> {
    match cert {
        Certificate::NonnegLsc => {
            if let Some(id) = domain.iter_marked().find(|&id| f.value(id).is_negative()) {
                return Err(reject(
                    path,
                    format!("function is negative at {}", f.space().node(id).addr),
                ));
            }
            if !is_lsc_within(f, domain) {
                return Err(reject(path, "function is not lower semicontinuous"));
            }
            Ok(f.sup_norm_within(domain))
        }
        Certificate::LscSplit { u, v } => {
            if !u.same_space(f) || !v.same_space(f) {
                return Err(reject(path, "split parts live on a different space"));
            }
            for (name, h) in [("u", u), ("v", v)] {
                if let Some(id) = domain.iter_marked().find(|&id| h.value(id).is_negative()) {
                    return Err(reject(
                        path,
                        format!("{name} is negative at {}", f.space().node(id).addr),
                    ));
                }
                if !is_lsc_within(h, domain) {
                    return Err(reject(path, format!("{name} is not lower semicontinuous")));
                }
            }
            if let Some(id) = domain
                .iter_marked()
                .find(|&id| &(u.value(id) - v.value(id)) != f.value(id))
            {
                return Err(reject(
                    path,
                    format!(
                        "u - v differs from the function at {}",
                        f.space().node(id).addr
                    ),
                ));
            }
            Ok(domain
                .iter_marked()
                .map(|id| u.value(id) + v.value(id))
                .max()
                .unwrap_or_else(Rat::zero))
        }
        Certificate::Sum { parts } => {
            for (i, (p, _)) in parts.iter().enumerate() {
                if !p.same_space(f) {
                    path.push(format!("sum[{i}]"));
                    return Err(reject(path, "part lives on a different space"));
                }
            }
            for id in domain.iter_marked() {
                let mut s = Rat::zero();
                for (p, _) in parts {
                    s = &s + p.value(id);
                }
                if &s != f.value(id) {
                    return Err(reject(
                        path,
                        format!(
                            "parts do not sum to the function at {}",
                            f.space().node(id).addr
                        ),
                    ));
                }
            }
            let mut bound = Rat::zero();
            for (i, (p, c)) in parts.iter().enumerate() {
                path.push(format!("sum[{i}].{}", c.label()));
                let b = check_at(p, c, domain, path)?;
                path.pop();
                bound = &bound + &b;
            }
            Ok(bound)
        }
        Certificate::Extension { set, factor, inner } => {
            if !f.same_space_as_mark(set.outer.mark()) {
                return Err(reject(path, "set lives on a different space"));
            }
            if *factor != 1 && *factor != 2 {
                return Err(reject(path, format!("invalid extension factor {factor}")));
            }
            let w = set.represented().and(domain);
            if *factor == 1 && !is_open_within(&w, domain) {
                return Err(reject(
                    path,
                    "factor 1 requires the set to be open in the domain",
                ));
            }
            if let Some(id) = domain
                .iter_marked()
                .find(|&id| !w.get(id) && !f.value(id).is_zero())
            {
                return Err(reject(
                    path,
                    format!(
                        "function does not vanish off the set at {}",
                        f.space().node(id).addr
                    ),
                ));
            }
            path.push(format!("extension.{}", inner.label()));
            let b = check_at(f, inner, &w, path)?;
            path.pop();
            Ok(&Rat::from_int(*factor as i64) * &b)
        }
        Certificate::Localization { parts } => {
            let supports: Vec<MarkPattern> = parts.iter().map(|(u, _)| u.and(domain)).collect();
            for (i, (u, _)) in parts.iter().enumerate() {
                if !f.same_space_as_mark(u) {
                    path.push(format!("localization[{i}]"));
                    return Err(reject(path, "support lives on a different space"));
                }
                if !is_open_within(&supports[i], domain) {
                    path.push(format!("localization[{i}]"));
                    return Err(reject(path, "support is not open in the domain"));
                }
            }
            let closures: Vec<MarkPattern> =
                supports.iter().map(|u| u.closure_within(domain)).collect();
            for i in 0..closures.len() {
                for j in i + 1..closures.len() {
                    if !closures[i].and(&closures[j]).is_empty_set() {
                        return Err(reject(
                            path,
                            format!("supports {i} and {j} have touching closures"),
                        ));
                    }
                }
            }
            let mut union = MarkPattern::empty(f.space());
            for u in &supports {
                union = union.or(u);
            }
            if let Some(id) = domain
                .iter_marked()
                .find(|&id| !union.get(id) && !f.value(id).is_zero())
            {
                return Err(reject(
                    path,
                    format!(
                        "function does not vanish off the supports at {}",
                        f.space().node(id).addr
                    ),
                ));
            }
            let mut bound = Rat::zero();
            for (i, ((_, c), u)) in parts.iter().zip(&supports).enumerate() {
                path.push(format!("localization[{i}].{}", c.label()));
                let b = check_at(f, c, u, path)?;
                path.pop();
                bound = bound.max(b);
            }
            Ok(bound)
        }
        Certificate::ContinuousOnOpen { support } => {
            if !f.same_space_as_mark(support) {
                return Err(reject(path, "support lives on a different space"));
            }
            let u = support.and(domain);
            if !is_open_within(&u, domain) {
                return Err(reject(path, "support is not open in the domain"));
            }
            if let Some(id) = domain
                .iter_marked()
                .find(|&id| !u.get(id) && !f.value(id).is_zero())
            {
                return Err(reject(
                    path,
                    format!(
                        "function does not vanish off the support at {}",
                        f.space().node(id).addr
                    ),
                ));
            }
            if !is_continuous_within(f, &u) {
                return Err(reject(path, "function is not continuous on the support"));
            }
            Ok(f.sup_norm_within(domain))
        }
    }
}

/// Given a certificate for `f`, a certificate for `-f` with the same bound.
pub fn negate_certificate(f: &PatternFn, cert: &Certificate) -> Certificate {
    match cert {
        Certificate::NonnegLsc => Certificate::LscSplit {
            u: PatternFn::constant(f.space(), Rat::zero()),
            v: f.clone(),
        },
        Certificate::LscSplit { u, v } => Certificate::LscSplit {
            u: v.clone(),
            v: u.clone(),
        },
        Certificate::Sum { parts } => Certificate::Sum {
            parts: parts
                .iter()
                .map(|(p, c)| (p.neg(), negate_certificate(p, c)))
                .collect(),
        },
        Certificate::Extension { set, factor, inner } => Certificate::Extension {
            set: set.clone(),
            factor: *factor,
            inner: Box::new(negate_certificate(f, inner)),
        },
        Certificate::Localization { parts } => Certificate::Localization {
            parts: parts
                .iter()
                .map(|(u, c)| (u.clone(), negate_certificate(f, c)))
                .collect(),
        },
        Certificate::ContinuousOnOpen { support } => Certificate::ContinuousOnOpen {
            support: support.clone(),
        },
    }
}

/// The discontinuity-set chain of a finitely-valued function: `K_0` is the
/// whole space and `K_{j+1}` collects the points of `K_j` where the
/// restriction to `K_j` is discontinuous. The chain reaches the empty set
/// because each step loses the isolated points of its predecessor.
pub fn discontinuity_chain(f: &PatternFn) -> Vec<ClosedMark> {
    let space = f.space();
    let mut chain = vec![ClosedMark::full(space)];
    loop {
        let cur = chain.last().unwrap().mark();
        if cur.is_empty_set() {
            return chain;
        }
        let bits: Vec<bool> = (0..space.len())
            .map(|id| {
                cur.get(id)
                    && space
                        .tail_nodes(id)
                        .any(|t| cur.get(t) && f.value(t) != f.value(id))
            })
            .collect();
        let next = MarkPattern::new(space.clone(), bits).expect("shape");
        chain.push(ClosedMark::validate(next).expect("discontinuity sets are closed"));
    }
}

/// Represents `f` as a simple function over pairwise disjoint differences
/// of closed sets: on each stratum `K_j ∖ K_{j+1}` the restriction to `K_j`
/// is continuous, so its level sets are relatively clopen there and extend
/// to global differences of closed sets via their closures.
pub fn to_simple_dcs(f: &PatternFn) -> SimpleDcs {
    let space = f.space();
    let chain = discontinuity_chain(f);
    let mut terms: Vec<(Rat, DiffClosed)> = Vec::new();
    for j in 0..chain.len() - 1 {
        let kj = chain[j].mark();
        let kj1 = chain[j + 1].mark();
        let mut groups: BTreeMap<Rat, Vec<NodeId>> = BTreeMap::new();
        for id in kj.minus(kj1).iter_marked() {
            groups.entry(f.value(id).clone()).or_default().push(id);
        }
        for (value, ids) in groups {
            if value.is_zero() {
                continue;
            }
            let mut w = MarkPattern::empty(space);
            for id in ids {
                w.set(id, true);
            }
            let outer = ClosedMark::closure_of(&w);
            let minus = outer.and(&chain[j + 1]);
            let d = DiffClosed::new(outer, minus).expect("containment by construction");
            debug_assert_eq!(d.represented(), w);
            terms.push((value, d));
        }
    }
    SimpleDcs::new(space.clone(), terms).expect("strata level sets are disjoint")
}

/// A certificate for a single term `c · χ_W`: a direct semicontinuity
/// certificate when `W` is open, otherwise an extension with factor 2
/// around the constant on the subspace.
pub fn term_certificate(space: &Arc<Space>, coeff: &Rat, set: &DiffClosed) -> Certificate {
    let part = PatternFn::indicator(&set.represented()).scale(coeff);
    let const_cert = if coeff.is_negative() {
        Certificate::LscSplit {
            u: PatternFn::constant(space, Rat::zero()),
            v: part.neg(),
        }
    } else {
        Certificate::NonnegLsc
    };
    if crate::space::is_open(&set.represented()) {
        const_cert
    } else {
        Certificate::Extension {
            set: set.clone(),
            factor: 2,
            inner: Box::new(const_cert),
        }
    }
}

/// The simple representation of `f` together with the summed per-term
/// certificate it induces.
pub fn simple_dcs_certificate(f: &PatternFn) -> (SimpleDcs, Certificate) {
    let simple = to_simple_dcs(f);
    let parts = simple
        .terms()
        .iter()
        .map(|(c, d)| {
            let part = PatternFn::indicator(&d.represented()).scale(c);
            let cert = term_certificate(f.space(), c, d);
            (part, cert)
        })
        .collect();
    (simple, Certificate::Sum { parts })
}

/// An uncertified reported estimate.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Annotation {
    pub description: String,
    pub value: Rat,
    pub certified: bool,
}

/// Certified upper bound and proven lower bound for the decomposition norm.
#[derive(Clone, Debug)]
pub struct DNormBounds {
    pub lower: Rat,
    pub upper: Rat,
    pub certificate: Certificate,
    pub annotations: Vec<Annotation>,
}

/// Assembles candidate certificates (simple representation, semicontinuity
/// splits, continuity) and returns the best validated bound together with
/// the lower bound `max(sup-norm, quasinorm / 4)`.
pub fn bounds(f: &PatternFn) -> DNormBounds {
    let space = f.space();
    let full = MarkPattern::full(space);
    let report = full_index(f);
    let sup = f.sup_norm();
    let lower = sup.clone().max(&report.quasinorm / &Rat::from_int(4));

    let mut candidates: Vec<Certificate> = Vec::new();
    let (_, dcs_cert) = simple_dcs_certificate(f);
    candidates.push(dcs_cert);
    let lsc = is_lsc_within(f, &full);
    let usc = crate::func::is_usc_within(f, &full);
    let nonneg = f.values().iter().all(|v| !v.is_negative());
    if lsc && nonneg {
        candidates.push(Certificate::NonnegLsc);
    }
    if lsc && !nonneg {
        let m = f
            .values()
            .iter()
            .min()
            .cloned()
            .unwrap_or_else(Rat::zero)
            .min(Rat::zero());
        let c = PatternFn::constant(space, -m);
        candidates.push(Certificate::LscSplit {
            u: f.add(&c).expect("same space"),
            v: c,
        });
    }
    if usc {
        let lam = PatternFn::constant(space, sup.clone());
        candidates.push(Certificate::LscSplit {
            u: lam.clone(),
            v: lam.sub(f).expect("same space"),
        });
    }
    if is_continuous_within(f, &full) {
        candidates.push(Certificate::ContinuousOnOpen {
            support: full.clone(),
        });
    }

    let mut best: Option<(Rat, Certificate)> = None;
    for cert in candidates {
        let b = check_certificate(f, &cert).expect("assembled certificates must validate");
        if best.as_ref().map_or(true, |(bb, _)| &b < bb) {
            best = Some((b, cert));
        }
    }
    let (upper, certificate) = best.expect("at least the simple representation applies");
    debug_assert!(lower <= upper, "lower bound exceeded certified upper bound");

    let annotations = vec![
        Annotation {
            description: "sharper index lower estimate: sup_eps eps*i(f,eps) also bounds \
                          the norm from below (reported, not certified here)"
                .into(),
            value: report.quasinorm.clone(),
            certified: false,
        },
        Annotation {
            description: "sharper linear upper estimate (2*i(f)+1)*sup (reported, not \
                          certified here)"
                .into(),
            value: &Rat::from_int(2 * report.index as i64 + 1) * &sup,
            certified: false,
        },
    ];
    DNormBounds {
        lower,
        upper,
        certificate,
        annotations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{derived_set, SpaceDesc};

    fn t(n: usize) -> Arc<Space> {
        Space::new(SpaceDesc::homogeneous(n)).unwrap()
    }

    fn chi_even(space: &Arc<Space>) -> PatternFn {
        let bits = space.nodes().iter().map(|m| m.height % 2 == 0).collect();
        PatternFn::indicator(&MarkPattern::new(space.clone(), bits).unwrap())
    }

    #[test]
    fn open_indicator_certifies_at_one() {
        let t1 = t(1);
        let leaves = MarkPattern::new(t1.clone(), vec![false, true]).unwrap();
        let f = PatternFn::indicator(&leaves);
        let b = check_certificate(&f, &Certificate::NonnegLsc).unwrap();
        assert_eq!(b, Rat::one());
    }

    #[test]
    fn closed_indicator_certifies_at_two() {
        let t1 = t(1);
        let root = MarkPattern::singleton(&t1, 0);
        let f = PatternFn::indicator(&root);
        let cert = Certificate::LscSplit {
            u: PatternFn::constant(&t1, Rat::one()),
            v: PatternFn::indicator(&root.complement()),
        };
        assert_eq!(check_certificate(&f, &cert).unwrap(), Rat::from_int(2));
    }

    #[test]
    fn localization_takes_the_maximum_part_bound() {
        // Two clopen prefix parts carrying bounds 1 and 2.
        let s = Space::new(SpaceDesc::limit(
            vec![SpaceDesc::Leaf, SpaceDesc::homogeneous(1)],
            vec![SpaceDesc::Leaf],
        ))
        .unwrap();
        // nodes: 0 root, 1 prefix leaf, 2 tower root, 3 tower leaf, 4 cycle leaf
        let u1 = MarkPattern::new(s.clone(), vec![false, true, false, false, false]).unwrap();
        let u2 = MarkPattern::new(s.clone(), vec![false, false, true, true, false]).unwrap();
        let mut values = vec![Rat::zero(); s.len()];
        values[1] = Rat::one();
        values[3] = Rat::from_int(2);
        let f = PatternFn::new(s.clone(), values).unwrap();
        let cert = Certificate::Localization {
            parts: vec![
                (u1, Certificate::NonnegLsc),
                (u2, Certificate::NonnegLsc),
            ],
        };
        assert_eq!(check_certificate(&f, &cert).unwrap(), Rat::from_int(2));
    }

    #[test]
    fn rejections_carry_the_failing_condition() {
        let t1 = t(1);
        let root_ind = PatternFn::indicator(&MarkPattern::singleton(&t1, 0));
        let err = check_certificate(&root_ind, &Certificate::NonnegLsc).unwrap_err();
        assert!(err.to_string().contains("lower semicontinuous"), "{err}");

        let cert = Certificate::Sum {
            parts: vec![(PatternFn::constant(&t1, Rat::one()), Certificate::NonnegLsc)],
        };
        let err = check_certificate(&root_ind, &cert).unwrap_err();
        assert!(err.to_string().contains("do not sum"), "{err}");

        let set = DiffClosed::new(
            ClosedMark::validate(MarkPattern::singleton(&t1, 0)).unwrap(),
            ClosedMark::empty(&t1),
        )
        .unwrap();
        let cert = Certificate::Extension {
            set,
            factor: 1,
            inner: Box::new(Certificate::NonnegLsc),
        };
        let err = check_certificate(&root_ind, &cert).unwrap_err();
        assert!(err.to_string().contains("factor 1"), "{err}");
    }

    #[test]
    fn localization_rejects_touching_closures() {
        // Two cycle slots of the same limit node: both supports are open,
        // but their closures meet at the root.
        let s = Space::new(SpaceDesc::limit(
            vec![],
            vec![SpaceDesc::Leaf, SpaceDesc::Leaf],
        ))
        .unwrap();
        let u1 = MarkPattern::new(s.clone(), vec![false, true, false]).unwrap();
        let u2 = MarkPattern::new(s.clone(), vec![false, false, true]).unwrap();
        assert!(crate::space::is_open(&u1) && crate::space::is_open(&u2));
        let f = PatternFn::indicator(&u1.or(&u2));
        let cert = Certificate::Localization {
            parts: vec![
                (u1, Certificate::NonnegLsc),
                (u2, Certificate::NonnegLsc),
            ],
        };
        let err = check_certificate(&f, &cert).unwrap_err();
        assert!(err.to_string().contains("touching closures"), "{err}");
    }

    #[test]
    fn simple_representation_examples() {
        // Even-height indicator on the rank-2 tower.
        let t2 = t(2);
        let e = chi_even(&t2);
        let simple = to_simple_dcs(&e);
        assert_eq!(simple.terms().len(), 2);
        let leaves = MarkPattern::new(t2.clone(), vec![false, false, true]).unwrap();
        let root = MarkPattern::singleton(&t2, 0);
        assert_eq!(simple.terms()[0].1.represented(), leaves);
        assert_eq!(simple.terms()[1].1.represented(), root);
        assert_eq!(simple.eval_fn(), e);

        // Constants give a single full-space term.
        let c = PatternFn::constant(&t2, Rat::new(5, 3));
        let simple = to_simple_dcs(&c);
        assert_eq!(simple.terms().len(), 1);
        assert_eq!(simple.terms()[0].0, Rat::new(5, 3));
        assert_eq!(simple.terms()[0].1.represented(), MarkPattern::full(&t2));

        // Two-valued discontinuous function on the rank-1 tower.
        let t1 = t(1);
        let f = PatternFn::new(t1.clone(), vec![Rat::one(), Rat::new(1, 2)]).unwrap();
        let simple = to_simple_dcs(&f);
        assert_eq!(simple.terms().len(), 2);
        assert_eq!(simple.eval_fn(), f);
    }

    #[test]
    fn simple_representation_term_count_is_bounded() {
        let t2 = t(2);
        let e = chi_even(&t2);
        let values = e.distinct_values_within(&MarkPattern::full(&t2)).len();
        let bound = values * (t2.rank() as usize + 1);
        assert!(to_simple_dcs(&e).terms().len() <= bound);
    }

    #[test]
    fn bounds_examples() {
        let t1 = t(1);
        let chi_root = PatternFn::indicator(&MarkPattern::singleton(&t1, 0));
        let b = bounds(&chi_root);
        assert_eq!(b.lower, Rat::one());
        assert_eq!(b.upper, Rat::from_int(2));

        // Nonnegative lower semicontinuous functions are tight.
        let leaves = MarkPattern::new(t1.clone(), vec![false, true]).unwrap();
        let g = PatternFn::indicator(&leaves).scale(&Rat::new(3, 4));
        let b = bounds(&g);
        assert_eq!(b.lower, Rat::new(3, 4));
        assert_eq!(b.upper, Rat::new(3, 4));

        // Even-height indicator on the rank-2 tower: per-term route gives 3.
        let t2 = t(2);
        let b = bounds(&chi_even(&t2));
        assert!(b.upper <= Rat::from_int(3));
        assert_eq!(b.lower, Rat::one());
    }

    #[test]
    fn accepted_bounds_dominate_the_sup_norm() {
        let t2 = t(2);
        for f in [
            chi_even(&t2),
            PatternFn::indicator(derived_set(&t2).mark()),
            PatternFn::constant(&t2, Rat::new(-2, 3)),
        ] {
            let b = bounds(&f);
            assert!(b.upper >= f.sup_norm());
            assert!(b.lower <= b.upper);
        }
    }

    #[test]
    fn negation_preserves_certified_bounds() {
        let t2 = t(2);
        let f = chi_even(&t2);
        let b = bounds(&f);
        let neg = negate_certificate(&f, &b.certificate);
        assert_eq!(check_certificate(&f.neg(), &neg).unwrap(), b.upper);
    }

    #[test]
    fn every_mark_has_a_simple_indicator_representation() {
        // Indicators of arbitrary pattern marks always decompose: the
        // algebra generated by the closed subsets contains every
        // pattern-uniform subset of these spaces.
        let s = Space::new(SpaceDesc::limit(
            vec![SpaceDesc::homogeneous(1)],
            vec![SpaceDesc::homogeneous(1), SpaceDesc::Leaf],
        ))
        .unwrap();
        let n = s.len();
        for pat in 0..(1usize << n) {
            let bits: Vec<bool> = (0..n).map(|i| (pat >> i) & 1 == 1).collect();
            let m = MarkPattern::new(s.clone(), bits).unwrap();
            let f = PatternFn::indicator(&m);
            let simple = to_simple_dcs(&f);
            assert_eq!(simple.eval_fn(), f, "mark {pat:b}");
        }
    }
}
