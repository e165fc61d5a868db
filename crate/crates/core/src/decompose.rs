//! The constructive approximation pipeline: deterministic interposition,
//! staircase quantization of continuous pieces, the recursive index-lowering
//! decomposition loop, and the semicontinuous chain approximation.
//!
//! Every output carries certificates: the residual of each approximation is
//! certified by the checker in `dnorm`, and the loop additionally certifies
//! the headline bound `(2^(n+1) - 1) * sup|f| + eps` for a function of index
//! at most `n` supported on an open set.

use crate::dnorm::{
    check_certificate, negate_certificate, simple_dcs_certificate, to_simple_dcs, Certificate,
    DiffClosed, SimpleDcs,
};
use crate::error::Error;
use crate::func::{is_continuous_within, is_lsc_within, is_usc_within, PatternFn};
use crate::oscillation::{
    critical_set, derivation, envelope_tables, full_index, full_index_within, Flavor,
};
use crate::rat::Rat;
use crate::space::{is_open, ClosedMark, MarkPattern};

/// A function together with an open support witness and an index bound: the
/// function vanishes off the support and its restriction to the support has
/// oscillation index at most `n`.
#[derive(Clone, Debug)]
pub struct GnWitness {
    f: PatternFn,
    /// The closed complement presenting the open support.
    complement: ClosedMark,
    n: usize,
}

impl GnWitness {
    pub fn new(f: PatternFn, complement: ClosedMark, n: usize) -> Result<GnWitness, Error> {
        if !f.same_space_as_mark(complement.mark()) {
            return Err(Error::SpaceMismatch);
        }
        if let Some(id) = complement.mark().iter_marked().find(|&id| !f.value(id).is_zero()) {
            return Err(Error::Precondition {
                what: "function must vanish off its support".into(),
                addr: f.space().node(id).addr.to_string(),
            });
        }
        let support = complement.mark().complement();
        let idx = full_index_within(&f, &support).index;
        if idx > n {
            return Err(Error::Precondition {
                what: format!("restricted index {idx} exceeds the witness bound {n}"),
                addr: "root".into(),
            });
        }
        Ok(GnWitness { f, complement, n })
    }

    /// The whole space is open, so every function is its own witness at its
    /// oscillation index.
    pub fn for_function(f: &PatternFn) -> GnWitness {
        let complement = ClosedMark::empty(f.space());
        let n = full_index(f).index;
        GnWitness {
            f: f.clone(),
            complement,
            n,
        }
    }

    pub fn f(&self) -> &PatternFn {
        &self.f
    }

    pub fn support(&self) -> MarkPattern {
        self.complement.mark().complement()
    }

    pub fn index_bound(&self) -> usize {
        self.n
    }
}

/// Which pipeline produced an approximation.
#[derive(Clone, Debug, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ApproxPath {
    /// The recursive index-lowering loop.
    IndexLoop { n: usize },
    /// The semicontinuous chain construction at a chosen threshold.
    SemicontinuousChain { eps: Rat, levels: usize },
    /// The chain construction found no usable critical threshold and fell
    /// back to the index loop.
    FallbackIndexLoop { n: usize },
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct TraceEntry {
    pub summary: String,
    pub g_sup: Rat,
}

/// An approximation of a function by a simple function over differences of
/// closed sets, with a certified residual bound and a certified headline
/// bound for the function itself.
#[derive(Clone, Debug)]
pub struct SdApprox {
    pub simple: SimpleDcs,
    pub residual_bound: Rat,
    /// Certificate for `f - eval(simple)`, validated at `residual_bound`.
    pub certificate: Certificate,
    pub trace: Vec<TraceEntry>,
    pub path: ApproxPath,
    /// Certified bound for `f` itself.
    pub headline_bound: Rat,
    pub headline_certificate: Certificate,
}

/// Deterministic interposition on a subspace where the oscillation of `f`
/// is at most `eps`: at each limit node of the subspace the output is set
/// constantly to the node's value across its whole cycle subtrees; prefix
/// subtrees recurse; isolated nodes copy `f`. The output is continuous on
/// the subspace and within `eps` of `f` there, and never exceeds `sup|f|`.
pub fn interpose_on(f: &PatternFn, eps: &Rat, domain: &MarkPattern) -> Result<PatternFn, Error> {
    let space = f.space();
    let tables = envelope_tables(f, domain);
    if let Some(id) = domain.iter_marked().find(|&id| &tables.osc[id] > eps) {
        return Err(Error::Precondition {
            what: format!("oscillation {} exceeds {eps}", tables.osc[id]),
            addr: space.node(id).addr.to_string(),
        });
    }
    let mut values = f.values().to_vec();
    // Stack of (node, fill): a filled subtree is constant.
    let mut stack = vec![(0usize, None::<Rat>)];
    while let Some((id, fill)) = stack.pop() {
        if let Some(c) = fill {
            for t in id..id + space.node(id).size {
                values[t] = c.clone();
            }
            continue;
        }
        let meta = space.node(id);
        let limit_in_domain =
            domain.get(id) && space.tail_nodes(id).any(|t| domain.get(t));
        if limit_in_domain {
            let c = f.value(id).clone();
            for &p in &meta.prefix_children {
                stack.push((p, None));
            }
            for &s in &meta.cycle_children {
                stack.push((s, Some(c.clone())));
            }
        } else {
            for &p in meta.prefix_children.iter().chain(&meta.cycle_children) {
                stack.push((p, None));
            }
        }
    }
    let phi = PatternFn::new(space.clone(), values).expect("shape");
    // The clamp to sup|f| is a no-op for this rule; assert it anyway.
    assert!(
        phi.sup_norm() <= f.sup_norm(),
        "interposition exceeded the sup-norm"
    );
    debug_assert!(is_continuous_within(&phi, domain));
    debug_assert!(domain
        .iter_marked()
        .all(|id| &(phi.value(id) - f.value(id)).abs() <= eps));
    Ok(phi)
}

/// Interposition relative to a validated closed subspace.
pub fn interpose(f: &PatternFn, eps: &Rat, within: &ClosedMark) -> Result<PatternFn, Error> {
    if !f.same_space_as_mark(within.mark()) {
        return Err(Error::SpaceMismatch);
    }
    if within.is_empty_set() {
        return Err(Error::EmptySubspace);
    }
    interpose_on(f, eps, within.mark())
}

/// Output of a staircase quantization.
#[derive(Clone, Debug)]
pub struct Staircase {
    pub phi: SimpleDcs,
    pub residual: PatternFn,
    /// Certificate for the residual (nonnegative lower semicontinuous).
    pub certificate: Certificate,
    pub residual_bound: Rat,
}

struct StairParts {
    terms: Vec<(Rat, DiffClosed)>,
    phi_fn: PatternFn,
    residual: PatternFn,
    bound: Rat,
}

/// Core staircase: quantizes `f` (continuous on the region, vanishing off
/// it within `domain`) into bands of the given width. Each band
/// `b*width <= f < (b+1)*width` is a difference of closed sets obtained
/// from the relatively closed superlevel sets; the residual lies in
/// `[0, width)` and is lower semicontinuous on `domain`.
fn staircase_core(
    f: &PatternFn,
    region: &DiffClosed,
    domain: &MarkPattern,
    width: &Rat,
) -> Result<StairParts, Error> {
    let space = f.space();
    let repr = region.represented();
    let mut band_of = vec![0i64; space.len()];
    let mut band_ids: Vec<i64> = Vec::new();
    for id in repr.iter_marked() {
        let b = f.value(id).floor_div(width);
        band_of[id] = b;
        band_ids.push(b);
    }
    band_ids.sort_unstable();
    band_ids.dedup();

    let superlevel = |b: i64| -> MarkPattern {
        let threshold = &Rat::from_int(b) * width;
        let bits = (0..space.len())
            .map(|id| repr.get(id) && f.value(id) >= &threshold)
            .collect();
        MarkPattern::new(space.clone(), bits).expect("shape")
    };

    let mut terms = Vec::new();
    let mut phi_values = vec![Rat::zero(); space.len()];
    for &b in &band_ids {
        let c_b = superlevel(b);
        let upper_closure = ClosedMark::closure_of(&superlevel(b + 1));
        let dcs_b = DiffClosed::from_relative_closed(&c_b, region);
        let band = DiffClosed::new(
            dcs_b.outer.clone(),
            dcs_b.minus.or(&upper_closure.and(&dcs_b.outer)),
        )
        .expect("containment by construction");
        let expected: Vec<bool> = (0..space.len())
            .map(|id| repr.get(id) && band_of[id] == b)
            .collect();
        if band.represented().bits() != expected.as_slice() {
            return Err(Error::Fault(
                "staircase band does not match its level set".into(),
            ));
        }
        let coeff = &Rat::from_int(b) * width;
        for id in band.represented().iter_marked() {
            phi_values[id] = coeff.clone();
        }
        if b != 0 {
            terms.push((coeff, band));
        }
    }
    let phi_fn = PatternFn::new(space.clone(), phi_values).expect("shape");
    let residual = f.sub(&phi_fn).expect("same space");
    for id in domain.iter_marked() {
        let r = residual.value(id);
        if r.is_negative() || r > width {
            return Err(Error::Fault("staircase residual out of range".into()));
        }
    }
    if !is_lsc_within(&residual, domain) {
        return Err(Error::Fault(
            "staircase residual is not lower semicontinuous".into(),
        ));
    }
    let bound = residual.sup_norm_within(domain);
    Ok(StairParts {
        terms,
        phi_fn,
        residual,
        bound,
    })
}

/// Quantizes a function that is continuous on the open set `support` and
/// vanishes off it, with `sup|f| <= 1`, into `n` bands of width `1/n`. The
/// residual is nonnegative, lower semicontinuous, and at most `1/n`.
pub fn staircase(f: &PatternFn, support: &MarkPattern, n: u64) -> Result<Staircase, Error> {
    if n == 0 {
        return Err(Error::Precondition {
            what: "staircase granularity must be at least 1".into(),
            addr: "root".into(),
        });
    }
    if !f.same_space_as_mark(support) {
        return Err(Error::SpaceMismatch);
    }
    if !is_open(support) {
        return Err(Error::Precondition {
            what: "support must be open".into(),
            addr: "root".into(),
        });
    }
    if f.sup_norm() > Rat::one() {
        return Err(Error::Precondition {
            what: "sup-norm must be at most 1 (rescale first)".into(),
            addr: "root".into(),
        });
    }
    if let Some(id) = support
        .complement()
        .iter_marked()
        .find(|&id| !f.value(id).is_zero())
    {
        return Err(Error::Precondition {
            what: "function must vanish off the support".into(),
            addr: f.space().node(id).addr.to_string(),
        });
    }
    if !is_continuous_within(f, support) {
        return Err(Error::Precondition {
            what: "function must be continuous on the support".into(),
            addr: "root".into(),
        });
    }
    let region = DiffClosed::new(
        ClosedMark::full(f.space()),
        ClosedMark::validate(support.complement()).expect("open support"),
    )
    .expect("containment");
    let domain = MarkPattern::full(f.space());
    let width = &Rat::one() / &Rat::from_int(n as i64);
    let parts = staircase_core(f, &region, &domain, &width)?;
    let bound = parts.bound.clone();
    debug_assert!(bound <= width);
    Ok(Staircase {
        phi: SimpleDcs::new(f.space().clone(), parts.terms)?,
        residual: parts.residual,
        certificate: Certificate::NonnegLsc,
        residual_bound: bound,
    })
}

/// Internal result of the recursive loop, relative to a check domain.
struct RegionDecomp {
    simple_fn: PatternFn,
    residual_parts: Vec<(PatternFn, Certificate)>,
    residual_bound: Rat,
    headline_cert: Certificate,
    headline_bound: Rat,
    trace: Vec<TraceEntry>,
}

fn two_pow(k: usize) -> Rat {
    let mut r = Rat::one();
    let two = Rat::from_int(2);
    for _ in 0..k {
        r = &r * &two;
    }
    r
}

/// `2^(n+1) - 1`.
pub fn lambda(n: usize) -> Rat {
    &two_pow(n + 1) - &Rat::one()
}

/// The per-term certificate bound of the simple representation of `g`,
/// together with its parts; used both to budget the loop tail and to emit
/// its certificate.
fn tail_certificate(g: &PatternFn) -> (Rat, Certificate) {
    let (simple, cert) = simple_dcs_certificate(g);
    let mut bound = Rat::zero();
    for (c, d) in simple.terms() {
        let factor = if is_open(&d.represented()) { 1 } else { 2 };
        bound = &bound + &(&Rat::from_int(factor) * &c.abs());
    }
    (bound, cert)
}

/// Recursive decomposition of `f` (vanishing off `region`, of index at most
/// `n` there) relative to `domain`. All produced certificates are valid when
/// checked at `domain`; the headline bound is at most
/// `lambda(n) * sup|f| + tol` and the residual bound at most `tol`.
fn decompose_region(
    f: &PatternFn,
    domain: &MarkPattern,
    region: &DiffClosed,
    n: usize,
    tol: &Rat,
) -> Result<RegionDecomp, Error> {
    let space = f.space();
    let repr = region.represented();
    let sup = f.sup_norm_within(domain);
    if sup.is_zero() {
        return Ok(RegionDecomp {
            simple_fn: PatternFn::constant(space, Rat::zero()),
            residual_parts: vec![],
            residual_bound: Rat::zero(),
            headline_cert: Certificate::Sum { parts: vec![] },
            headline_bound: Rat::zero(),
            trace: vec![],
        });
    }
    if n == 0 {
        if !is_continuous_within(f, &repr) {
            return Err(Error::Fault(
                "index-zero function is not continuous on its support".into(),
            ));
        }
        let parts = staircase_core(f, region, domain, tol)?;
        let headline_cert = Certificate::ContinuousOnOpen {
            support: repr.clone(),
        };
        return Ok(RegionDecomp {
            simple_fn: parts.phi_fn,
            residual_bound: parts.bound,
            residual_parts: vec![(parts.residual, Certificate::NonnegLsc)],
            headline_cert,
            headline_bound: sup,
            trace: vec![],
        });
    }

    let lam = lambda(n);
    let driver = tol / &Rat::from_int(2);
    let mut g = f.clone();
    let mut g_region = region.clone();
    let mut simple_fn = PatternFn::constant(space, Rat::zero());
    let mut residual_parts: Vec<(PatternFn, Certificate)> = Vec::new();
    let mut residual_bound = Rat::zero();
    let mut headline_parts: Vec<(PatternFn, Certificate)> = Vec::new();
    let mut headline_bound = Rat::zero();
    let mut trace = Vec::new();
    let tail_budget = tol / &Rat::from_int(8);

    for j in 1..=200usize {
        let g_sup = g.sup_norm_within(domain);
        let (tail_bound, tail_cert) = tail_certificate(&g);
        if tail_bound <= tail_budget {
            if !g_sup.is_zero() {
                residual_bound = &residual_bound + &tail_bound;
                residual_parts.push((g.clone(), tail_cert.clone()));
                headline_bound = &headline_bound + &tail_bound;
                headline_parts.push((g, tail_cert));
            }
            let headline_cert = Certificate::Sum {
                parts: headline_parts,
            };
            return Ok(RegionDecomp {
                simple_fn,
                residual_parts,
                residual_bound,
                headline_cert,
                headline_bound,
                trace,
            });
        }

        let eps_j = &driver / &(&lam * &two_pow(j));
        let slice = tol / &(&Rat::from_int(16) * &two_pow(j));
        let g_repr = g_region.represented();
        let tables = envelope_tables(&g, &g_repr);
        let w_bits: Vec<bool> = (0..space.len())
            .map(|id| g_repr.get(id) && tables.osc[id] >= eps_j)
            .collect();
        let w = MarkPattern::new(space.clone(), w_bits).expect("shape");

        let mut h_cert_parts: Vec<(PatternFn, Certificate)> = Vec::new();
        let mut h = PatternFn::constant(space, Rat::zero());
        if !w.is_empty_set() {
            let w_dcs = DiffClosed::from_relative_closed(&w, &g_region);
            let w_index = full_index_within(&g, &w).index;
            if w_index + 1 > n {
                return Err(Error::Fault(format!(
                    "refined set has index {w_index}, expected at most {}",
                    n - 1
                )));
            }
            let g_on_w = g.zero_off(&w);
            let sub = decompose_region(&g_on_w, &w, &w_dcs, n - 1, &slice)?;
            let sub_residual = g_on_w.sub(&sub.simple_fn).expect("same space");
            simple_fn = simple_fn.add(&sub.simple_fn).expect("same space");
            if !sub.residual_parts.is_empty() {
                let wrapped = Certificate::Extension {
                    set: w_dcs.clone(),
                    factor: 2,
                    inner: Box::new(Certificate::Sum {
                        parts: sub.residual_parts,
                    }),
                };
                residual_bound =
                    &residual_bound + &(&Rat::from_int(2) * &sub.residual_bound);
                residual_parts.push((sub_residual, wrapped));
            }
            let h_w_cert = Certificate::Extension {
                set: w_dcs,
                factor: 2,
                inner: Box::new(sub.headline_cert),
            };
            headline_bound = &headline_bound + &(&Rat::from_int(2) * &sub.headline_bound);
            h = h.add(&g_on_w).expect("same space");
            h_cert_parts.push((g_on_w, h_w_cert));
        }

        let open_rest = g_region.without_relative_closed(&w);
        let rest_repr = open_rest.represented();
        let phi = interpose_on(&g, &eps_j, &rest_repr)?.zero_off(&rest_repr);
        if !phi.values().iter().all(|v| v.is_zero()) {
            let stair = staircase_core(&phi, &open_rest, domain, &slice)?;
            simple_fn = simple_fn.add(&stair.phi_fn).expect("same space");
            residual_bound = &residual_bound + &stair.bound;
            residual_parts.push((stair.residual, Certificate::NonnegLsc));
            let phi_cert = Certificate::ContinuousOnOpen {
                support: rest_repr.clone(),
            };
            headline_bound = &headline_bound + &phi.sup_norm_within(domain);
            h = h.add(&phi).expect("same space");
            h_cert_parts.push((phi.clone(), phi_cert));
        }

        if !h_cert_parts.is_empty() {
            let h_cert = if h_cert_parts.len() == 1 {
                h_cert_parts.pop().unwrap().1
            } else {
                Certificate::Sum {
                    parts: h_cert_parts,
                }
            };
            headline_parts.push((h.clone(), h_cert));
        }

        let g_next = g.sub(&h).expect("same space");
        let g_next_sup = g_next.sup_norm_within(domain);
        if g_next_sup > eps_j {
            return Err(Error::Fault(
                "loop remainder exceeded its scheduled bound".into(),
            ));
        }
        if let Some(id) = rest_repr
            .complement()
            .iter_marked()
            .find(|&id| !g_next.value(id).is_zero())
        {
            return Err(Error::Fault(format!(
                "loop remainder does not vanish off its support at {}",
                space.node(id).addr
            )));
        }
        trace.push(TraceEntry {
            summary: format!(
                "step {j}: threshold {eps_j}, refined {} nodes, staircase width {slice}",
                w.count()
            ),
            g_sup: g_next_sup,
        });
        g = g_next;
        g_region = open_rest;
    }
    Err(Error::Fault("decomposition loop failed to converge".into()))
}

/// Runs the index-lowering loop on a witness: the result's simple part
/// approximates the function within `eps` in the decomposition norm
/// (certified), and the headline certificate bounds the function's norm by
/// `(2^(n+1) - 1) * sup|f| + eps`.
pub fn sd_decompose(w: &GnWitness, eps: &Rat) -> Result<SdApprox, Error> {
    if !eps.is_positive() {
        return Err(Error::Precondition {
            what: "tolerance must be positive".into(),
            addr: "root".into(),
        });
    }
    let f = &w.f;
    let domain = MarkPattern::full(f.space());
    let region = DiffClosed::new(ClosedMark::full(f.space()), w.complement.clone())
        .expect("containment");
    let d = decompose_region(f, &domain, &region, w.n, eps)?;
    let headline_cap = &(&lambda(w.n) * &f.sup_norm()) + eps;
    finish_approx(
        f,
        d,
        ApproxPath::IndexLoop { n: w.n },
        Some(eps.clone()),
        Some(headline_cap),
    )
}

fn finish_approx(
    f: &PatternFn,
    d: RegionDecomp,
    path: ApproxPath,
    residual_cap: Option<Rat>,
    headline_cap: Option<Rat>,
) -> Result<SdApprox, Error> {
    let simple = to_simple_dcs(&d.simple_fn);
    let residual_fn = f.sub(&d.simple_fn).expect("same space");
    let certificate = Certificate::Sum {
        parts: d.residual_parts,
    };
    let residual_bound = check_certificate(&residual_fn, &certificate)?;
    if residual_bound != d.residual_bound {
        return Err(Error::Fault(
            "checked residual bound differs from the assembled bound".into(),
        ));
    }
    if let Some(cap) = residual_cap {
        if residual_bound > cap {
            return Err(Error::Fault(format!(
                "residual bound {residual_bound} exceeds the tolerance {cap}"
            )));
        }
    }
    let headline_bound = check_certificate(f, &d.headline_cert)?;
    if let Some(cap) = headline_cap {
        if headline_bound > cap {
            return Err(Error::Fault(format!(
                "headline bound {headline_bound} exceeds {cap}"
            )));
        }
    }
    Ok(SdApprox {
        simple,
        residual_bound,
        certificate,
        trace: d.trace,
        path,
        headline_bound,
        headline_certificate: d.headline_cert,
    })
}

/// Approximates a semicontinuous function through its oscillation-set chain
/// at a critical threshold `d` with `d * i(f, d) <= eta`: interposition on
/// each stratum, per-stratum semicontinuity certificates extended across
/// the differences of closed sets, and the total certified at most
/// `6 d (n + 1)`. Falls back to the index loop when no critical threshold
/// qualifies; the `path` field names the route taken.
pub fn usc_sd_approx(f: &PatternFn, eta: &Rat) -> Result<SdApprox, Error> {
    if !eta.is_positive() {
        return Err(Error::Precondition {
            what: "tolerance must be positive".into(),
            addr: "root".into(),
        });
    }
    let full = MarkPattern::full(f.space());
    let usc = is_usc_within(f, &full);
    let lsc = is_lsc_within(f, &full);
    if !usc && !lsc {
        return Err(Error::Precondition {
            what: "function is not semicontinuous".into(),
            addr: "root".into(),
        });
    }
    if usc {
        let (d, path) = usc_chain(f, eta)?;
        let residual_cap = fallback_cap(&path, eta);
        return finish_approx(f, d, path, residual_cap, None);
    }
    // Lower semicontinuous: approximate the negation and negate back.
    let neg_f = f.neg();
    let (d, path) = usc_chain(&neg_f, eta)?;
    let residual_cap = fallback_cap(&path, eta);
    let negated = RegionDecomp {
        simple_fn: d.simple_fn.neg(),
        residual_parts: d
            .residual_parts
            .iter()
            .map(|(p, c)| (p.neg(), negate_certificate(p, c)))
            .collect(),
        residual_bound: d.residual_bound,
        headline_cert: negate_certificate(&neg_f, &d.headline_cert),
        headline_bound: d.headline_bound,
        trace: d.trace,
    };
    finish_approx(f, negated, path, residual_cap, None)
}

/// The fallback route promises the requested tolerance; the chain route
/// certifies its own exact bound instead.
fn fallback_cap(path: &ApproxPath, eta: &Rat) -> Option<Rat> {
    match path {
        ApproxPath::FallbackIndexLoop { .. } => Some(eta.clone()),
        _ => None,
    }
}

fn usc_chain(f: &PatternFn, eta: &Rat) -> Result<(RegionDecomp, ApproxPath), Error> {
    let space = f.space();
    let criticals = critical_set(f);
    let mut choice: Option<(Rat, usize, Rat)> = None;
    for d in &criticals {
        let i = crate::oscillation::index(f, d);
        let product = d * &Rat::from_int(i as i64);
        if &product <= eta {
            let apriori = &(&Rat::from_int(6) * d) * &Rat::from_int(i as i64 + 1);
            let better = match &choice {
                None => true,
                Some((prev_d, _, best)) => &apriori < best || (&apriori == best && d > prev_d),
            };
            if better {
                choice = Some((d.clone(), i, apriori));
            }
        }
    }
    let (eps, n) = match choice {
        Some((d, i, _)) => (d, i),
        None if criticals.is_empty() => (eta.clone(), 0),
        None => {
            // No critical threshold qualifies at this coarse tolerance.
            let w = GnWitness::for_function(f);
            let n = w.n;
            let domain = MarkPattern::full(space);
            let region = DiffClosed::full(space);
            let d = decompose_region(f, &domain, &region, n, eta)?;
            return Ok((d, ApproxPath::FallbackIndexLoop { n }));
        }
    };

    let trail = derivation(f, &eps, Flavor::Osc);
    debug_assert_eq!(trail.index(), n);
    let strata: Vec<DiffClosed> = (0..=n)
        .map(|j| {
            DiffClosed::new(trail.sets[j].clone(), trail.sets[j + 1].clone())
                .expect("chain is nested")
        })
        .collect();

    let mut g_values = vec![Rat::zero(); space.len()];
    let mut strata_union = MarkPattern::empty(space);
    for stratum in &strata {
        let repr = stratum.represented();
        strata_union = strata_union.or(&repr);
        if repr.is_empty_set() {
            continue;
        }
        let phi = interpose_on(f, &eps, &repr)?;
        for id in repr.iter_marked() {
            g_values[id] = phi.value(id).clone();
        }
    }
    if strata_union != MarkPattern::full(space) {
        return Err(Error::Fault("chain strata do not partition the space".into()));
    }
    let g = PatternFn::new(space.clone(), g_values).expect("shape");
    let residual = f.sub(&g).expect("same space");

    let mut residual_parts: Vec<(PatternFn, Certificate)> = Vec::new();
    let mut residual_bound = Rat::zero();
    let mut trace = Vec::new();
    for (j, stratum) in strata.iter().enumerate() {
        let repr = stratum.represented();
        let part = residual.zero_off(&repr);
        if part.values().iter().all(|v| v.is_zero()) {
            continue;
        }
        let lam = part.sup_norm_within(&repr);
        let inner = Certificate::LscSplit {
            u: PatternFn::constant(space, lam.clone()),
            v: PatternFn::constant(space, lam.clone())
                .sub(&part)
                .expect("same space"),
        };
        let factor = if is_open(&repr) { 1 } else { 2 };
        let cert = Certificate::Extension {
            set: stratum.clone(),
            factor,
            inner: Box::new(inner),
        };
        let checked = check_certificate(&part, &cert)?;
        residual_bound = &residual_bound + &checked;
        residual_parts.push((part, cert));
        trace.push(TraceEntry {
            summary: format!("stratum {j}: deviation {lam}, extension factor {factor}"),
            g_sup: lam,
        });
    }
    let residual_target =
        &(&Rat::from_int(6) * &eps) * &Rat::from_int(n as i64 + 1);
    if residual_bound > residual_target {
        return Err(Error::Fault(format!(
            "chain residual {residual_bound} exceeds six times the threshold per level {residual_target}"
        )));
    }

    // Headline: the simple part term-by-term plus the residual parts.
    let (_, simple_cert) = simple_dcs_certificate(&g);
    let mut all_parts = match simple_cert {
        Certificate::Sum { parts } => parts,
        other => vec![(g.clone(), other)],
    };
    all_parts.extend(residual_parts.iter().cloned());
    let headline_cert = Certificate::Sum { parts: all_parts };
    let headline_bound = check_certificate(f, &headline_cert)?;
    Ok((
        RegionDecomp {
            simple_fn: g,
            residual_parts,
            residual_bound,
            headline_cert,
            headline_bound,
            trace,
        },
        ApproxPath::SemicontinuousChain { eps, levels: n + 1 },
    ))
}

/// Default tolerance for the constructive verdict.
pub fn default_tolerance() -> Rat {
    Rat::new(1, 100)
}

/// The strong-decomposability verdict: on these spaces every function has
/// finite index bounded by the rank, hence a constructive approximation.
#[derive(Clone, Debug)]
pub struct SdVerdict {
    pub verdict: &'static str,
    pub rank: u32,
    pub index: crate::oscillation::IndexReport,
    /// Whether `eps * i(f, eps)` vanishes as `eps` shrinks: in step-function
    /// form the product is linear in `eps` below the smallest critical
    /// threshold, so finiteness of the index settles it.
    pub vanishing_product: bool,
    pub approx: SdApprox,
}

pub fn sd_test(f: &PatternFn) -> Result<SdVerdict, Error> {
    let report = full_index(f);
    let rank = f.space().rank();
    if report.index > rank as usize {
        return Err(Error::Fault(format!(
            "index {} exceeds the space rank {rank}",
            report.index
        )));
    }
    let w = GnWitness::for_function(f);
    let approx = sd_decompose(&w, &default_tolerance())?;
    Ok(SdVerdict {
        verdict: "strong_d",
        rank,
        index: report,
        vanishing_product: true,
        approx,
    })
}
