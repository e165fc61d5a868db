//! Property suites over the corpus. Each suite returns an empty violation
//! list on success; the acceptance tests and the `check` command share
//! these implementations.

use crate::corpus::CorpusEntry;
use crate::decompose::{lambda, sd_decompose, staircase, GnWitness};
use crate::dnorm::{bounds, to_simple_dcs};
use crate::error::Error;
use crate::expand::check_function;
use crate::func::{is_continuous_within, PatternFn};
use crate::oscillation::{
    critical_set, derivation, envelope_tables, full_index, index_step_fn_within, ltheta_sets,
    Flavor, IndexStepFn,
};
use crate::rat::Rat;
use crate::space::{ClosedMark, MarkPattern};
use crate::witness::{prop15_demo, verify_witness};

#[derive(Clone, Debug, serde::Serialize)]
pub struct Violation {
    pub entry: String,
    pub what: String,
}

fn violation(list: &mut Vec<Violation>, entry: &str, what: impl Into<String>) {
    list.push(Violation {
        entry: entry.to_string(),
        what: what.into(),
    });
}

fn sorted(mut v: Vec<Violation>) -> Vec<Violation> {
    v.sort_by(|a, b| (&a.entry, &a.what).cmp(&(&b.entry, &b.what)));
    v
}

/// Rank-by-rank witness verification: on each tower up to rank 6 the parity
/// indicator has index equal to the rank at every grid threshold, its trail
/// is the derived-set chain, the certificate bound is at most rank + 1, and
/// the lower bound is at least rank / 4.
pub fn suite_witness() -> Vec<Violation> {
    let grid = [Rat::new(1, 10), Rat::new(1, 2), Rat::one()];
    let mut out = Vec::new();
    for n in 1..=6 {
        if let Err(e) = verify_witness(n, &grid) {
            violation(&mut out, &format!("witness/{n}"), e.to_string());
        }
    }
    sorted(out)
}

/// The decomposition loop over every corpus function of rank at most 3 and
/// sup-norm at most 1, at tolerance 1/100: the certified headline bound
/// must stay within `(2^(i(f)+1) - 1) * sup|f| + 1/100`, exactly.
pub fn suite_pipeline(entries: &[CorpusEntry]) -> Vec<Violation> {
    let tol = Rat::new(1, 100);
    let mut out = Vec::new();
    let mut used = 0usize;
    for e in entries {
        if e.f.space().rank() > 3 || e.f.sup_norm() > Rat::one() {
            continue;
        }
        used += 1;
        let w = GnWitness::for_function(&e.f);
        let n = w.index_bound();
        match sd_decompose(&w, &tol) {
            Err(err) => violation(&mut out, &e.id, err.to_string()),
            Ok(a) => {
                let cap = &(&lambda(n) * &e.f.sup_norm()) + &tol;
                if a.headline_bound > cap {
                    violation(
                        &mut out,
                        &e.id,
                        format!("headline {} exceeds {cap}", a.headline_bound),
                    );
                }
                if a.residual_bound > tol {
                    violation(
                        &mut out,
                        &e.id,
                        format!("residual {} exceeds {tol}", a.residual_bound),
                    );
                }
            }
        }
    }
    if used < 200 {
        violation(
            &mut out,
            "corpus",
            format!("only {used} eligible functions; the suite needs 200"),
        );
    }
    sorted(out)
}

/// Staircase quantization of at least 50 continuous corpus functions at
/// granularities 1, 2, 4, 8: the residual must be lower semicontinuous with
/// certified bound at most `1/n`.
pub fn suite_staircase(entries: &[CorpusEntry]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut used = 0usize;
    for e in entries {
        let full = MarkPattern::full(e.f.space());
        if !is_continuous_within(&e.f, &full) || e.f.sup_norm() > Rat::one() {
            continue;
        }
        used += 1;
        for n in [1u64, 2, 4, 8] {
            match staircase(&e.f, &full, n) {
                Err(err) => violation(&mut out, &e.id, format!("granularity {n}: {err}")),
                Ok(st) => {
                    let cap = Rat::one() / Rat::from_int(n as i64);
                    if st.residual_bound > cap {
                        violation(
                            &mut out,
                            &e.id,
                            format!("granularity {n}: residual {} exceeds {cap}", st.residual_bound),
                        );
                    }
                }
            }
        }
    }
    if used < 50 {
        violation(
            &mut out,
            "corpus",
            format!("only {used} continuous functions; the suite needs 50"),
        );
    }

    // Interposition contract, corpus-wide: at a threshold dominating the
    // oscillation, the deterministic rule yields a continuous function
    // within that threshold of the input.
    for e in entries {
        let full = MarkPattern::full(e.f.space());
        let eps = envelope_tables(&e.f, &full)
            .osc
            .iter()
            .max()
            .cloned()
            .unwrap_or_else(Rat::zero);
        if !eps.is_positive() {
            continue;
        }
        match crate::decompose::interpose(&e.f, &eps, &ClosedMark::full(e.f.space())) {
            Err(err) => violation(&mut out, &e.id, format!("interposition: {err}")),
            Ok(phi) => {
                if !is_continuous_within(&phi, &full) {
                    violation(&mut out, &e.id, "interposition is not continuous");
                }
                if (0..e.f.space().len())
                    .any(|id| (phi.value(id) - e.f.value(id)).abs() > eps)
                {
                    violation(&mut out, &e.id, "interposition strays past the threshold");
                }
                if phi.sup_norm() > e.f.sup_norm() {
                    violation(&mut out, &e.id, "interposition exceeds the sup-norm");
                }
            }
        }
    }
    sorted(out)
}

fn grid_union(parts: &[Vec<Rat>]) -> Vec<Rat> {
    let mut all: Vec<Rat> = parts.iter().flatten().cloned().collect();
    all.sort();
    all.dedup();
    all.retain(|d| d.is_positive());
    all
}

/// Index combination inequalities for sums, products, maxima, and minima
/// over function pairs, checked exactly on the full critical grids; on a
/// 20-pair subsample the refinement-set containments are checked as mark
/// inclusions.
pub fn suite_algebra(pairs: &[(String, PatternFn, PatternFn)]) -> Vec<Violation> {
    let mut out = Vec::new();
    if pairs.len() < 200 {
        violation(
            &mut out,
            "corpus",
            format!("only {} pairs; the suite needs 200", pairs.len()),
        );
    }
    let two = Rat::from_int(2);
    for (id, f, g) in pairs {
        let full = MarkPattern::full(f.space());
        let step_f = index_step_fn_within(f, &full);
        let step_g = index_step_fn_within(g, &full);
        let scale_crit = |step: &IndexStepFn, c: &Rat| -> Vec<Rat> {
            step.points.iter().map(|(d, _)| c * d).collect()
        };

        let h = f.add(g).expect("same space");
        let step_h = index_step_fn_within(&h, &full);
        let grid = grid_union(&[
            step_h.points.iter().map(|(d, _)| d.clone()).collect(),
            scale_crit(&step_f, &two),
            scale_crit(&step_g, &two),
        ]);
        for eps in &grid {
            let half = eps / &two;
            if step_h.eval(eps) > step_f.eval(&half) + step_g.eval(&half) {
                violation(&mut out, id, format!("sum index at {eps}"));
            }
        }

        let sup_f = f.sup_norm();
        let sup_g = g.sup_norm();
        if sup_f.is_positive() && sup_g.is_positive() {
            let h = f.mul(g).expect("same space");
            let step_h = index_step_fn_within(&h, &full);
            let tg = &two * &sup_g;
            let tf = &two * &sup_f;
            let grid = grid_union(&[
                step_h.points.iter().map(|(d, _)| d.clone()).collect(),
                scale_crit(&step_f, &tg),
                scale_crit(&step_g, &tf),
            ]);
            for eps in &grid {
                if step_h.eval(eps) > step_f.eval(&(eps / &tg)) + step_g.eval(&(eps / &tf)) {
                    violation(&mut out, id, format!("product index at {eps}"));
                }
            }
        }

        for (name, h) in [
            ("max", f.vmax(g).expect("same space")),
            ("min", f.vmin(g).expect("same space")),
        ] {
            let step_h = index_step_fn_within(&h, &full);
            let grid = grid_union(&[
                step_h.points.iter().map(|(d, _)| d.clone()).collect(),
                step_f.points.iter().map(|(d, _)| d.clone()).collect(),
                step_g.points.iter().map(|(d, _)| d.clone()).collect(),
            ]);
            for eps in &grid {
                if step_h.eval(eps) > step_f.eval(eps) + step_g.eval(eps) {
                    violation(&mut out, id, format!("{name} index at {eps}"));
                }
            }
        }
    }

    // Containment subsample: the oscillation sets of a sum refine into the
    // alternating sets, and each alternating set sits inside the matching
    // oscillation sets of the operands at half the threshold.
    for (id, f, g) in pairs.iter().take(20) {
        let h = f.add(g).expect("same space");
        let half = |e: &Rat| e / &two;
        for eps in critical_set(&h) {
            let trail = derivation(&h, &eps, Flavor::Osc);
            let trail_f = derivation(f, &half(&eps), Flavor::Osc);
            let trail_g = derivation(g, &half(&eps), Flavor::Osc);
            let at = |t: &crate::oscillation::DerivationTrail, j: usize| -> MarkPattern {
                t.sets
                    .get(j)
                    .map(|c| c.mark().clone())
                    .unwrap_or_else(|| MarkPattern::empty(f.space()))
            };
            for n in 1..trail.sets.len() - 1 {
                let mut union = MarkPattern::empty(f.space());
                for pat in 0..(1u32 << n) {
                    let theta: Vec<bool> = (0..n).map(|b| (pat >> b) & 1 == 1).collect();
                    let l = match ltheta_sets(f, g, &eps, &theta) {
                        Ok(l) => l,
                        Err(e) => {
                            violation(&mut out, id, e.to_string());
                            continue;
                        }
                    };
                    let zeros = theta.iter().filter(|&&b| !b).count();
                    let ones = n - zeros;
                    let lhs = l.mark();
                    if !lhs.is_subset_of(&at(&trail_f, zeros))
                        || !lhs.is_subset_of(&at(&trail_g, ones))
                    {
                        violation(
                            &mut out,
                            id,
                            format!("alternating set escapes the operand sets at {eps}, n={n}"),
                        );
                    }
                    union = union.or(lhs);
                }
                if !at(&trail, n).is_subset_of(&union) {
                    violation(
                        &mut out,
                        id,
                        format!("sum oscillation set escapes the alternating union at {eps}, n={n}"),
                    );
                }
            }
        }
    }
    sorted(out)
}

/// Pointwise envelope sandwich and the two-sided nesting between the
/// oscillation-set chain and the upper-oscillation chain.
pub fn suite_sandwich(entries: &[CorpusEntry]) -> Vec<Violation> {
    let two = Rat::from_int(2);
    let mut out = Vec::new();
    for e in entries {
        let full = MarkPattern::full(e.f.space());
        let t = envelope_tables(&e.f, &full);
        for id in 0..e.f.space().len() {
            if !(t.oosc[id] <= &two * &t.osc[id] && t.osc[id] <= t.oosc[id]) {
                violation(
                    &mut out,
                    &e.id,
                    format!("sandwich fails at node {id}"),
                );
            }
        }
        for eps in critical_set(&e.f) {
            let os = derivation(&e.f, &eps, Flavor::Osc);
            let k1 = derivation(&e.f, &eps, Flavor::UpperOsc);
            let k2 = derivation(&e.f, &(&eps * &two), Flavor::UpperOsc);
            for j in 0..os.sets.len() {
                let osj = os.sets[j].mark();
                if j < k2.sets.len() && !k2.sets[j].mark().is_subset_of(osj) {
                    violation(&mut out, &e.id, format!("doubled chain escapes at {eps}, step {j}"));
                }
                match k1.sets.get(j) {
                    Some(kj) if osj.is_subset_of(kj.mark()) => {}
                    Some(_) => violation(
                        &mut out,
                        &e.id,
                        format!("oscillation chain escapes at {eps}, step {j}"),
                    ),
                    None if osj.is_empty_set() => {}
                    None => violation(
                        &mut out,
                        &e.id,
                        format!("oscillation chain outlives the upper chain at {eps}, step {j}"),
                    ),
                }
            }
        }
    }
    sorted(out)
}

/// The simple representation re-evaluates pointwise to the function at
/// every pattern node, with validated disjoint terms.
pub fn suite_roundtrip(entries: &[CorpusEntry]) -> Vec<Violation> {
    let mut out = Vec::new();
    for e in entries {
        let simple = to_simple_dcs(&e.f);
        let back = simple.eval_fn();
        for addr in e.f.space().all_addresses() {
            let a = e.f.eval(&addr).expect("valid address");
            let b = back.eval(&addr).expect("valid address");
            if a != b {
                violation(&mut out, &e.id, format!("re-evaluation differs at {addr}"));
            }
        }
        for (coeff, d) in simple.terms() {
            if coeff.is_zero() {
                violation(&mut out, &e.id, "zero coefficient term".to_string());
            }
            if !d.minus.mark().is_subset_of(d.outer.mark()) {
                violation(&mut out, &e.id, "invalid difference term".to_string());
            }
        }
    }
    sorted(out)
}

/// The rank-by-rank demonstration up to rank 6.
pub fn suite_prop15() -> Vec<Violation> {
    let mut out = Vec::new();
    match prop15_demo(6) {
        Err(e) => violation(&mut out, "demo", e.to_string()),
        Ok(r) => {
            if !r.conclusion {
                violation(&mut out, "demo", "conclusion flag not set");
            }
            for row in &r.rows {
                if row.product != Rat::one() {
                    violation(&mut out, &format!("demo/{}", row.n), "product is not 1");
                }
                if row.norm_bound > Rat::from_int(2) {
                    violation(&mut out, &format!("demo/{}", row.n), "norm premise exceeds 2");
                }
            }
        }
    }
    sorted(out)
}

/// Exact agreement between the symbolic engine and the finite expansion at
/// two and three cycle copies, for envelopes, derivations (both flavors),
/// and indices at every critical threshold.
pub fn suite_oracle(entries: &[CorpusEntry]) -> Vec<Violation> {
    let mut out = Vec::new();
    for e in entries {
        let grid = critical_set(&e.f);
        for copies in [2, 3] {
            if let Err(m) = check_function(&e.f, copies, &grid) {
                violation(
                    &mut out,
                    &e.id,
                    format!("{} disagrees at {} copies", m.what, m.copies),
                );
            }
        }
    }
    sorted(out)
}

/// `eps * i(f, eps)` stays within four times every certified norm bound;
/// certified bounds dominate the sup-norm and the proven lower bound.
pub fn suite_index_norm(entries: &[CorpusEntry]) -> Vec<Violation> {
    let four = Rat::from_int(4);
    let mut out = Vec::new();
    for e in entries {
        let b = bounds(&e.f);
        if b.upper < e.f.sup_norm() {
            violation(&mut out, &e.id, "certified bound below the sup-norm");
        }
        if b.lower > b.upper {
            violation(&mut out, &e.id, "lower bound exceeds the certified bound");
        }
        let step = index_step_fn_within(&e.f, &MarkPattern::full(e.f.space()));
        for (d, i) in &step.points {
            let product = d * &Rat::from_int(*i as i64);
            if product > &four * &b.upper {
                violation(
                    &mut out,
                    &e.id,
                    format!("{product} exceeds four times the bound {}", b.upper),
                );
            }
        }
    }
    sorted(out)
}

/// Structural identities: the companion index is the oscillation index plus
/// one; scalar invariance; the absolute value never raises the index; the
/// index never exceeds the rank; and the closed-cover identity for the
/// oscillation under two-part closed covers.
pub fn suite_identities(entries: &[CorpusEntry]) -> Vec<Violation> {
    let mut out = Vec::new();
    let lambdas = [
        Rat::from_int(-2),
        Rat::from_int(-1),
        Rat::new(1, 3),
        Rat::from_int(5),
    ];
    for e in entries {
        let f = &e.f;
        let space = f.space();
        let full = MarkPattern::full(space);
        let report = full_index(f);
        if report.beta != report.index + 1 {
            violation(&mut out, &e.id, "companion index mismatch");
        }

        let c = is_continuous_within(f, &full);
        let both = crate::func::is_usc_within(f, &full) && crate::func::is_lsc_within(f, &full);
        if c != both {
            violation(&mut out, &e.id, "continuity is not the conjunction");
        }
        if c != (report.index == 0) {
            violation(&mut out, &e.id, "zero index does not match continuity");
        }

        // The upper-oscillation chain vanishes exactly one step past the
        // oscillation index.
        let beta_k = critical_set(f)
            .iter()
            .map(|d| derivation(f, d, Flavor::UpperOsc).sets.len() - 1)
            .max()
            .unwrap_or(1);
        if beta_k != report.beta {
            violation(
                &mut out,
                &e.id,
                format!("upper chain vanishes at {beta_k}, expected {}", report.beta),
            );
        }

        for lam in &lambdas {
            let g = f.scale(lam);
            if full_index(&g).index != report.index {
                violation(&mut out, &e.id, format!("scaling by {lam} changed the index"));
            }
            for d in critical_set(f) {
                let scaled = &lam.abs() * &d;
                if crate::oscillation::index(&g, &scaled) != crate::oscillation::index(f, &d) {
                    violation(
                        &mut out,
                        &e.id,
                        format!("scale invariance fails at {d} with {lam}"),
                    );
                }
            }
        }

        let a = f.abs();
        let grid = grid_union(&[critical_set(f), critical_set(&a)]);
        for d in &grid {
            if crate::oscillation::index(&a, d) > crate::oscillation::index(f, d) {
                violation(&mut out, &e.id, format!("absolute value raised the index at {d}"));
            }
        }

        if report.index > space.rank() as usize {
            violation(&mut out, &e.id, "index exceeds the rank");
        }

        // Closed two-part covers: the oscillation is the maximum of the
        // relative oscillations over the parts containing the point.
        for split in 0..3usize {
            let bits: Vec<bool> = (0..space.len())
                .map(|id| match split {
                    0 => id % 2 == 0,
                    1 => id % 3 == 0,
                    _ => id < space.len() / 2 + 1,
                })
                .collect();
            let half = MarkPattern::new(space.clone(), bits).expect("shape");
            let w1 = ClosedMark::closure_of(&half);
            let w2 = ClosedMark::closure_of(&half.complement());
            if w1.mark().or(w2.mark()) != full {
                violation(&mut out, &e.id, "cover does not cover");
                continue;
            }
            let t = envelope_tables(f, &full);
            let t1 = envelope_tables(f, w1.mark());
            let t2 = envelope_tables(f, w2.mark());
            for id in 0..space.len() {
                let mut best: Option<Rat> = None;
                if w1.mark().get(id) {
                    best = Some(t1.osc[id].clone());
                }
                if w2.mark().get(id) {
                    let v = t2.osc[id].clone();
                    best = Some(best.map_or(v.clone(), |b| b.max(v)));
                }
                if best.as_ref() != Some(&t.osc[id]) {
                    violation(
                        &mut out,
                        &e.id,
                        format!("cover identity fails at node {id}, split {split}"),
                    );
                }
            }
        }
    }
    sorted(out)
}

/// Named suites, in acceptance order.
pub type SuiteFn = fn(&[CorpusEntry], &[(String, PatternFn, PatternFn)]) -> Vec<Violation>;

pub const SUITES: &[(&str, SuiteFn)] = &[
    ("witness", |_, _| suite_witness()),
    ("pipeline", |c, _| suite_pipeline(c)),
    ("staircase", |c, _| suite_staircase(c)),
    ("algebra", |_, p| suite_algebra(p)),
    ("sandwich", |c, _| suite_sandwich(c)),
    ("roundtrip", |c, _| suite_roundtrip(c)),
    ("prop15", |_, _| suite_prop15()),
    ("oracle", |c, _| suite_oracle(c)),
    ("index-norm", |c, _| suite_index_norm(c)),
    ("identities", |c, _| suite_identities(c)),
];

pub fn run_suite(
    name: &str,
    entries: &[CorpusEntry],
    pairs: &[(String, PatternFn, PatternFn)],
) -> Result<Vec<Violation>, Error> {
    SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, f)| f(entries, pairs))
        .ok_or_else(|| Error::Usage(format!("unknown suite {name:?}")))
}
