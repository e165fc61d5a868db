//! Command-line surface: verb dispatch, file loading, report emission.
//!
//! Every command produces a `Report` serialized as JSON on standard output
//! with a one-line human summary on standard error. Exit codes: 0 on
//! success, 1 on property or verification failure, 2 on usage and schema
//! errors.

use std::fs;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::corpus::{self, corpus_digest, default_spec, generate_corpus, generate_pairs, CorpusSpec};
use crate::decompose::{sd_decompose, sd_test, usc_sd_approx, GnWitness};
use crate::dnorm::{bounds, check_certificate, to_simple_dcs};
use crate::error::Error;
use crate::expand;
use crate::func::PatternFn;
use crate::json::cert_from_value;
use crate::oscillation::{self, derivation, envelopes, full_index, Flavor};
use crate::rat::Rat;
use crate::space::{cb_height, ClosedMark};
use crate::suites;
use crate::witness::{prop15_demo, verify_witness};

#[derive(Clone, Debug, serde::Serialize)]
pub struct Report {
    pub command: Vec<String>,
    pub inputs_digest: String,
    pub results: Value,
    pub violations: Vec<String>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            0
        } else {
            1
        }
    }
}

struct Args {
    verb: String,
    flags: Vec<(String, String)>,
    positional: Vec<String>,
    /// Everything after `--`.
    rest: Vec<String>,
}

fn parse_args(argv: &[String]) -> Result<Args, Error> {
    if argv.is_empty() {
        return Err(Error::Usage(
            "expected a verb: analyze, index, envelope, decompose, check-cert, simple-dcs, \
             witness, demo-prop15, check, oracle"
                .into(),
        ));
    }
    let verb = argv[0].clone();
    let mut flags = Vec::new();
    let mut positional = Vec::new();
    let mut rest = Vec::new();
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if a == "--" {
            rest.extend(argv[i + 1..].iter().cloned());
            break;
        }
        if let Some(name) = a.strip_prefix("--") {
            let value = argv
                .get(i + 1)
                .ok_or_else(|| Error::Usage(format!("flag --{name} needs a value")))?;
            flags.push((name.to_string(), value.clone()));
            i += 2;
        } else {
            positional.push(a.clone());
            i += 1;
        }
    }
    Ok(Args {
        verb,
        flags,
        positional,
        rest,
    })
}

impl Args {
    fn flag(&self, name: &str) -> Option<&str> {
        self.flags
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    fn rat_flag(&self, name: &str) -> Result<Option<Rat>, Error> {
        self.flag(name)
            .map(|v| Rat::parse(v).map_err(|e| Error::Usage(format!("--{name}: {e}"))))
            .transpose()
    }

    fn usize_flag(&self, name: &str) -> Result<Option<usize>, Error> {
        self.flag(name)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Error::Usage(format!("--{name} must be a natural number")))
            })
            .transpose()
    }

    fn one_file(&self) -> Result<&str, Error> {
        match self.positional.as_slice() {
            [f] => Ok(f),
            _ => Err(Error::Usage("expected exactly one input file".into())),
        }
    }
}

struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new(argv: &[String]) -> Inputs {
        let mut hasher = Sha256::new();
        for a in argv {
            hasher.update(a.as_bytes());
            hasher.update([0]);
        }
        Inputs { hasher }
    }

    fn load(&mut self, path: &str) -> Result<String, Error> {
        let text = fs::read_to_string(path)?;
        self.hasher.update(text.as_bytes());
        Ok(text)
    }

    fn load_fn(&mut self, path: &str) -> Result<PatternFn, Error> {
        let text = self.load(path)?;
        crate::json::parse_pattern_fn(&text)
    }

    fn digest(self) -> String {
        corpus::hex_string(&self.hasher.finalize())
    }
}

fn corpus_from_flag(inputs: &mut Inputs, value: Option<&str>) -> Result<CorpusSpec, Error> {
    match value {
        None | Some("default") => Ok(default_spec()),
        Some(path) => {
            let text = inputs.load(path)?;
            let spec: CorpusSpec = serde_json::from_str(&text).map_err(|e| Error::Schema {
                path: "$".into(),
                msg: e.to_string(),
            })?;
            spec.validate()?;
            Ok(spec)
        }
    }
}

/// Dispatches a command line. The report's violation list is empty exactly
/// when the exit code is 0; usage and schema errors surface as `Err` and
/// exit 2 at the binary boundary.
pub fn run_command(argv: &[String]) -> Result<Report, Error> {
    let args = parse_args(argv)?;
    let mut inputs = Inputs::new(argv);
    let mut violations: Vec<String> = Vec::new();
    let results: Value = match args.verb.as_str() {
        "analyze" => {
            let f = inputs.load_fn(args.one_file()?)?;
            let (heights, rank) = cb_height(f.space());
            let idx = full_index(&f);
            let b = bounds(&f);
            let verdict = sd_test(&f)?;
            json!({
                "rank": rank,
                "heights": heights,
                "index": idx,
                "bounds": b,
                "verdict": verdict,
            })
        }
        "index" => {
            let f = inputs.load_fn(args.one_file()?)?;
            match args.rat_flag("eps")? {
                Some(eps) => {
                    if !eps.is_positive() {
                        return Err(Error::Usage("--eps must be positive".into()));
                    }
                    let trail = derivation(&f, &eps, Flavor::Osc);
                    json!({
                        "eps": eps,
                        "index": trail.index(),
                        "trail": trail,
                    })
                }
                None => json!(full_index(&f)),
            }
        }
        "envelope" => {
            let f = inputs.load_fn(args.one_file()?)?;
            let report = envelopes(&f, &ClosedMark::full(f.space()))?;
            json!(report)
        }
        "decompose" => {
            let f = inputs.load_fn(args.one_file()?)?;
            let eps = args
                .rat_flag("eps")?
                .unwrap_or_else(crate::decompose::default_tolerance);
            if !eps.is_positive() {
                return Err(Error::Usage("--eps must be positive".into()));
            }
            let semi = args.flag("semicontinuous") == Some("true");
            let approx = if semi {
                usc_sd_approx(&f, &eps)?
            } else {
                sd_decompose(&GnWitness::for_function(&f), &eps)?
            };
            json!(approx)
        }
        "check-cert" => {
            let (cert_path, fn_path) = match args.positional.as_slice() {
                [c, f] => (c.clone(), f.clone()),
                _ => {
                    return Err(Error::Usage(
                        "expected a certificate file and a function file".into(),
                    ))
                }
            };
            let cert_text = inputs.load(&cert_path)?;
            let f = inputs.load_fn(&fn_path)?;
            let cert_value: Value =
                serde_json::from_str(&cert_text).map_err(|e| Error::Schema {
                    path: "$".into(),
                    msg: e.to_string(),
                })?;
            let cert = cert_from_value(&cert_value, f.space(), "$")?;
            match check_certificate(&f, &cert) {
                Ok(bound) => json!({ "valid": true, "bound": bound }),
                Err(e) => {
                    violations.push(e.to_string());
                    json!({ "valid": false })
                }
            }
        }
        "simple-dcs" => {
            let f = inputs.load_fn(args.one_file()?)?;
            let simple = to_simple_dcs(&f);
            json!({ "terms": simple, "evaluates_to_input": simple.eval_fn() == f })
        }
        "witness" => {
            let n = args
                .usize_flag("rank")?
                .ok_or_else(|| Error::Usage("witness needs --rank".into()))?;
            let grid = match args.flag("eps-grid") {
                None => vec![Rat::new(1, 10), Rat::new(1, 2), Rat::one()],
                Some(s) => s
                    .split(',')
                    .map(|p| Rat::parse(p).map_err(|e| Error::Usage(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?,
            };
            match verify_witness(n, &grid) {
                Ok(r) => json!(r),
                Err(e) => {
                    violations.push(e.to_string());
                    Value::Null
                }
            }
        }
        "demo-prop15" => {
            let n = args
                .usize_flag("max-rank")?
                .ok_or_else(|| Error::Usage("demo-prop15 needs --max-rank".into()))?;
            match prop15_demo(n) {
                Ok(r) => json!(r),
                Err(e) => {
                    violations.push(e.to_string());
                    Value::Null
                }
            }
        }
        "check" => {
            let name = args
                .positional
                .first()
                .ok_or_else(|| Error::Usage("check needs a suite name".into()))?;
            let spec = corpus_from_flag(&mut inputs, args.flag("corpus"))?;
            let entries = generate_corpus(&spec)?;
            let pairs = generate_pairs(&spec, 200)?;
            let found = suites::run_suite(name, &entries, &pairs)?;
            for v in &found {
                violations.push(format!("{}: {}", v.entry, v.what));
            }
            json!({
                "suite": name,
                "corpus_digest": corpus_digest(&entries),
                "checked": entries.len(),
                "violations": found,
            })
        }
        "oracle" => {
            let copies = args.usize_flag("copies")?.unwrap_or(3);
            if copies < 2 {
                return Err(Error::Usage("--copies must be at least 2".into()));
            }
            run_oracle(&mut inputs, &args.rest, copies, &mut violations)?
        }
        other => {
            return Err(Error::Usage(format!("unknown verb {other:?}")));
        }
    };
    Ok(Report {
        command: argv.to_vec(),
        inputs_digest: inputs.digest(),
        results,
        violations,
    })
}

/// Recomputes an inner command on the finite expansion and diffs exactly.
fn run_oracle(
    inputs: &mut Inputs,
    rest: &[String],
    copies: usize,
    violations: &mut Vec<String>,
) -> Result<Value, Error> {
    let inner = parse_args(rest)?;
    match inner.verb.as_str() {
        "index" => {
            let f = inputs.load_fn(inner.one_file()?)?;
            let eps = inner
                .rat_flag("eps")?
                .ok_or_else(|| Error::Usage("oracle index needs --eps".into()))?;
            if !eps.is_positive() {
                return Err(Error::Usage("--eps must be positive".into()));
            }
            let symbolic = oscillation::index(&f, &eps);
            let ex = expand::expand(f.space(), copies)?;
            let values = ex.lift_values(f.values());
            let oracle = expand::ex_index(&ex, &values, &eps, &vec![true; ex.len()]);
            if symbolic != oracle {
                violations.push(format!(
                    "index disagreement: symbolic {symbolic}, expansion {oracle}"
                ));
            }
            Ok(json!({
                "copies": copies,
                "eps": eps,
                "symbolic": symbolic,
                "expansion": oracle,
            }))
        }
        "envelope" => {
            let f = inputs.load_fn(inner.one_file()?)?;
            match expand::check_function(&f, copies, &[]) {
                Ok(()) => Ok(json!({ "copies": copies, "agrees": true })),
                Err(m) => {
                    violations.push(format!("{} disagrees at {} copies", m.what, m.copies));
                    Ok(json!({ "copies": copies, "agrees": false }))
                }
            }
        }
        other => Err(Error::Usage(format!(
            "oracle supports index and envelope, not {other:?}"
        ))),
    }
}

/// Human one-liner for standard error.
pub fn summary(report: &Report) -> String {
    if report.violations.is_empty() {
        format!("ok: {}", report.command.join(" "))
    } else {
        format!(
            "FAILED ({} violation{}): {}",
            report.violations.len(),
            if report.violations.len() == 1 { "" } else { "s" },
            report.command.join(" ")
        )
    }
}

// Re-exported for integration tests.
pub use crate::json::parse_pattern_fn;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::json::fn_to_value;
    use crate::space::MarkPattern;
    use crate::space::{Space, SpaceDesc};
    use std::io::Write;

    fn write_temp(name: &str, contents: &str) -> String {
        let dir = std::env::temp_dir().join("baire-cli-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn chi_root_t1_json() -> String {
        let t1 = Space::new(SpaceDesc::homogeneous(1)).unwrap();
        let f = PatternFn::indicator(&MarkPattern::singleton(&t1, 0));
        fn_to_value(&f).to_string()
    }

    fn run(args: &[&str]) -> Result<Report, Error> {
        run_command(&args.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    }

    #[test]
    fn witness_verb_reports_rank_two() {
        let r = run(&["witness", "--rank", "2"]).unwrap();
        assert!(r.violations.is_empty());
        assert_eq!(r.exit_code(), 0);
        assert_eq!(r.results["upper_bound"], json!("3/1"));
        assert_eq!(r.results["indices"][0][1], json!(2));
    }

    #[test]
    fn index_verb_on_a_file() {
        let path = write_temp("chi_root.json", &chi_root_t1_json());
        let r = run(&["index", "--eps", "1/2", &path]).unwrap();
        assert_eq!(r.results["index"], json!(1));
        let r = run(&["index", &path]).unwrap();
        assert_eq!(r.results["index"], json!(1));
        assert_eq!(r.results["quasinorm"], json!("1/1"));
    }

    #[test]
    fn oracle_verb_matches_the_symbolic_index() {
        let path = write_temp("chi_root2.json", &chi_root_t1_json());
        let r = run(&["oracle", "--copies", "3", "--", "index", "--eps", "1/2", &path]).unwrap();
        assert!(r.violations.is_empty());
        assert_eq!(r.results["symbolic"], r.results["expansion"]);
    }

    #[test]
    fn check_cert_accepts_and_rejects() {
        let t1 = Space::new(SpaceDesc::homogeneous(1)).unwrap();
        let leaves = MarkPattern::new(t1.clone(), vec![false, true]).unwrap();
        let f = PatternFn::indicator(&leaves);
        let f_path = write_temp("open_ind.json", &fn_to_value(&f).to_string());
        let good = write_temp("good_cert.json", &json!({"kind": "nonneg_lsc"}).to_string());
        let r = run(&["check-cert", &good, &f_path]).unwrap();
        assert_eq!(r.exit_code(), 0);
        assert_eq!(r.results["bound"], json!("1/1"));

        let g = PatternFn::indicator(&MarkPattern::singleton(&t1, 0));
        let g_path = write_temp("closed_ind.json", &fn_to_value(&g).to_string());
        let r = run(&["check-cert", &good, &g_path]).unwrap();
        assert_eq!(r.exit_code(), 1);
        assert!(!r.violations.is_empty());
    }

    #[test]
    fn usage_errors_exit_two() {
        let e = run(&["frobnicate"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = run(&["witness"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = run(&[]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn schema_errors_exit_two() {
        let path = write_temp("bad.json", r#"{"value":"2/4"}"#);
        let e = run(&["index", "--eps", "1/2", &path]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn demo_verb_sets_the_conclusion() {
        let r = run(&["demo-prop15", "--max-rank", "3"]).unwrap();
        assert_eq!(r.results["conclusion"], json!(true));
        assert_eq!(r.results["rows"][2]["product"], json!("1/1"));
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run(&["witness", "--rank", "2"]).unwrap();
        let b = run(&["witness", "--rank", "2"]).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.inputs_digest, b.inputs_digest);
    }
}
