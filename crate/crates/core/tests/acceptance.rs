//! Acceptance suite: one test per criterion, exact arithmetic throughout.
//! Each test prints a pass line and enforces its runtime target where one
//! is stated.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use baire::corpus::{default_spec, generate_corpus, generate_pairs, CorpusEntry};
use baire::func::PatternFn;
use baire::suites;

fn corpus() -> &'static [CorpusEntry] {
    static CORPUS: OnceLock<Vec<CorpusEntry>> = OnceLock::new();
    CORPUS.get_or_init(|| generate_corpus(&default_spec()).expect("corpus generates"))
}

fn pairs() -> &'static [(String, PatternFn, PatternFn)] {
    static PAIRS: OnceLock<Vec<(String, PatternFn, PatternFn)>> = OnceLock::new();
    PAIRS.get_or_init(|| generate_pairs(&default_spec(), 200).expect("pairs generate"))
}

fn finish(criterion: &str, violations: Vec<suites::Violation>, started: Instant, limit: Option<Duration>) {
    let elapsed = started.elapsed();
    let ok = violations.is_empty();
    println!(
        "{criterion}: {} ({elapsed:.2?})",
        if ok { "PASS" } else { "FAIL" }
    );
    if !ok {
        for v in violations.iter().take(10) {
            println!("  {}: {}", v.entry, v.what);
        }
        panic!("{criterion} failed with {} violations", violations.len());
    }
    if let Some(limit) = limit {
        assert!(
            elapsed < limit,
            "{criterion} took {elapsed:.2?}, limit {limit:.2?}"
        );
    }
}

#[test]
fn criterion_01_witness_indices_trails_and_bounds() {
    let t = Instant::now();
    let v = suites::suite_witness();
    finish("criterion 1 (witness suite)", v, t, Some(Duration::from_secs(5)));
}

#[test]
fn criterion_02_decomposition_pipeline_bound() {
    let t = Instant::now();
    let v = suites::suite_pipeline(corpus());
    finish("criterion 2 (decomposition pipeline)", v, t, Some(Duration::from_secs(60)));
}

#[test]
fn criterion_03_staircase_residuals() {
    let t = Instant::now();
    let v = suites::suite_staircase(corpus());
    finish("criterion 3 (staircase residuals)", v, t, Some(Duration::from_secs(10)));
}

#[test]
fn criterion_04_index_combination_inequalities() {
    let t = Instant::now();
    let v = suites::suite_algebra(pairs());
    finish("criterion 4 (combination inequalities)", v, t, None);
}

#[test]
fn criterion_05_envelope_sandwich_and_chain_nesting() {
    let t = Instant::now();
    let v = suites::suite_sandwich(corpus());
    finish("criterion 5 (sandwich suite)", v, t, None);
}

#[test]
fn criterion_06_simple_representation_round_trip() {
    let t = Instant::now();
    let v = suites::suite_roundtrip(corpus());
    finish("criterion 6 (simple representation round trip)", v, t, None);
}

#[test]
fn criterion_07_rank_by_rank_demo() {
    let t = Instant::now();
    let v = suites::suite_prop15();
    finish("criterion 7 (rank-by-rank demo)", v, t, Some(Duration::from_secs(10)));
}

#[test]
fn criterion_08_expansion_oracle_agreement() {
    let t = Instant::now();
    let v = suites::suite_oracle(corpus());
    finish("criterion 8 (expansion oracle agreement)", v, t, None);
}

#[test]
fn criterion_09_index_norm_consistency() {
    let t = Instant::now();
    let v = suites::suite_index_norm(corpus());
    finish("criterion 9 (index-norm consistency)", v, t, None);
}

#[test]
fn criterion_10_structural_identities() {
    let t = Instant::now();
    let v = suites::suite_identities(corpus());
    finish("criterion 10 (structural identities)", v, t, None);
}
