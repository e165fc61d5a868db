//! Wire formats.
//!
//! Spaces, marks, and functions serialize as shape-mirroring trees:
//!
//! - space node: `{"leaf":true}` or `{"prefix":[...],"cycle":[...]}`
//! - mark node: `{"mark":b}` or `{"mark":b,"prefix":[...],"cycle":[...]}`
//! - function node: `{"value":"p/q"}` or `{"value":"p/q","prefix":[...],"cycle":[...]}`
//!
//! Rationals are canonical `"p/q"` strings; non-canonical input is
//! rejected. Certificates are tagged trees. Parsers report schema
//! violations with a JSON path to the offending element.

use std::sync::Arc;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::dnorm::{Certificate, DNormBounds, DiffClosed, SimpleDcs};
use crate::error::Error;
use crate::func::PatternFn;
use crate::oscillation::{DerivationTrail, OscReport};
use crate::rat::Rat;
use crate::space::{ClosedMark, MarkPattern, Space, SpaceDesc};

fn err(path: &str, msg: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        msg: msg.into(),
    }
}

fn as_obj<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, Error> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, Error> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, Error> {
    obj.get(key)
        .ok_or_else(|| err(path, format!("missing key {key:?}")))
}

fn expect_keys(obj: &Map<String, Value>, keys: &[&str], path: &str) -> Result<(), Error> {
    for k in obj.keys() {
        if !keys.contains(&k.as_str()) {
            return Err(err(path, format!("unknown key {k:?}")));
        }
    }
    Ok(())
}

fn rat_from(v: &Value, path: &str) -> Result<Rat, Error> {
    let s = v.as_str().ok_or_else(|| err(path, "expected a rational string"))?;
    Rat::parse(s).map_err(|e| err(path, e.to_string()))
}

// ---------------------------------------------------------------------------
// Spaces

pub fn space_to_value(desc: &SpaceDesc) -> Value {
    match desc {
        SpaceDesc::Leaf => json!({ "leaf": true }),
        SpaceDesc::Limit { prefix, cycle } => json!({
            "prefix": prefix.iter().map(space_to_value).collect::<Vec<_>>(),
            "cycle": cycle.iter().map(space_to_value).collect::<Vec<_>>(),
        }),
    }
}

pub fn space_from_value(v: &Value, path: &str) -> Result<SpaceDesc, Error> {
    let obj = as_obj(v, path)?;
    if obj.contains_key("leaf") {
        expect_keys(obj, &["leaf"], path)?;
        match get(obj, "leaf", path)? {
            Value::Bool(true) => Ok(SpaceDesc::Leaf),
            _ => Err(err(path, "leaf must be true")),
        }
    } else {
        expect_keys(obj, &["prefix", "cycle"], path)?;
        let prefix = as_array(get(obj, "prefix", path)?, &format!("{path}.prefix"))?
            .iter()
            .enumerate()
            .map(|(i, c)| space_from_value(c, &format!("{path}.prefix[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let cycle = as_array(get(obj, "cycle", path)?, &format!("{path}.cycle"))?
            .iter()
            .enumerate()
            .map(|(i, c)| space_from_value(c, &format!("{path}.cycle[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        if cycle.is_empty() {
            return Err(err(path, "cycle must be nonempty"));
        }
        Ok(SpaceDesc::Limit { prefix, cycle })
    }
}

pub fn parse_space(text: &str) -> Result<Arc<Space>, Error> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| err("$", format!("invalid JSON: {e}")))?;
    Space::new(space_from_value(&v, "$")?)
}

// ---------------------------------------------------------------------------
// Decorated trees (marks and functions) share a walker.

fn decorated_to_value<T, F: Fn(&T) -> (String, Value)>(
    desc: &SpaceDesc,
    flat: &[T],
    cursor: &mut usize,
    field: &F,
) -> Value {
    let (key, val) = field(&flat[*cursor]);
    *cursor += 1;
    let mut obj = Map::new();
    obj.insert(key, val);
    if let SpaceDesc::Limit { prefix, cycle } = desc {
        let p: Vec<Value> = prefix
            .iter()
            .map(|c| decorated_to_value(c, flat, cursor, field))
            .collect();
        let cy: Vec<Value> = cycle
            .iter()
            .map(|c| decorated_to_value(c, flat, cursor, field))
            .collect();
        obj.insert("prefix".into(), Value::Array(p));
        obj.insert("cycle".into(), Value::Array(cy));
    }
    Value::Object(obj)
}

fn decorated_from_value<T>(
    v: &Value,
    path: &str,
    key: &str,
    read: &impl Fn(&Value, &str) -> Result<T, Error>,
    desc_out: &mut Vec<SpaceDesc>,
    flat: &mut Vec<T>,
) -> Result<(), Error> {
    let obj = as_obj(v, path)?;
    expect_keys(obj, &[key, "prefix", "cycle"], path)?;
    let field = read(get(obj, key, path)?, &format!("{path}.{key}"))?;
    flat.push(field);
    let has_children = obj.contains_key("prefix") || obj.contains_key("cycle");
    if !has_children {
        desc_out.push(SpaceDesc::Leaf);
        return Ok(());
    }
    let prefix_v = as_array(get(obj, "prefix", path)?, &format!("{path}.prefix"))?;
    let cycle_v = as_array(get(obj, "cycle", path)?, &format!("{path}.cycle"))?;
    if cycle_v.is_empty() {
        return Err(err(path, "cycle must be nonempty"));
    }
    let mut prefix = Vec::with_capacity(prefix_v.len());
    for (i, c) in prefix_v.iter().enumerate() {
        decorated_from_value(c, &format!("{path}.prefix[{i}]"), key, read, desc_out, flat)?;
        prefix.push(desc_out.pop().unwrap());
    }
    let mut cycle = Vec::with_capacity(cycle_v.len());
    for (i, c) in cycle_v.iter().enumerate() {
        decorated_from_value(c, &format!("{path}.cycle[{i}]"), key, read, desc_out, flat)?;
        cycle.push(desc_out.pop().unwrap());
    }
    desc_out.push(SpaceDesc::Limit { prefix, cycle });
    Ok(())
}

// ---------------------------------------------------------------------------
// Marks

pub fn mark_to_value(m: &MarkPattern) -> Value {
    let mut cursor = 0;
    decorated_to_value(m.space().desc(), m.bits(), &mut cursor, &|b: &bool| {
        ("mark".to_string(), Value::Bool(*b))
    })
}

/// Parses a mark tree and binds it to `space`, rejecting shape mismatches.
pub fn mark_from_value(v: &Value, space: &Arc<Space>, path: &str) -> Result<MarkPattern, Error> {
    let mut descs = Vec::new();
    let mut bits = Vec::new();
    decorated_from_value(
        v,
        path,
        "mark",
        &|x, p| x.as_bool().ok_or_else(|| err(p, "expected a boolean")),
        &mut descs,
        &mut bits,
    )?;
    let desc = descs.pop().unwrap();
    if &desc != space.desc() {
        return Err(err(path, "mark shape does not match the space"));
    }
    MarkPattern::new(space.clone(), bits)
}

// ---------------------------------------------------------------------------
// Functions

pub fn fn_to_value(f: &PatternFn) -> Value {
    let mut cursor = 0;
    decorated_to_value(f.space().desc(), f.values(), &mut cursor, &|r: &Rat| {
        ("value".to_string(), Value::String(r.to_string()))
    })
}

/// Parses a self-contained function tree (the shape is embedded).
pub fn fn_from_value(v: &Value, path: &str) -> Result<PatternFn, Error> {
    let mut descs = Vec::new();
    let mut values = Vec::new();
    decorated_from_value(v, path, "value", &rat_from, &mut descs, &mut values)?;
    let space = Space::new(descs.pop().unwrap())?;
    PatternFn::new(space, values)
}

/// Parses a function tree that must live on the given space.
pub fn fn_from_value_on(v: &Value, space: &Arc<Space>, path: &str) -> Result<PatternFn, Error> {
    let f = fn_from_value(v, path)?;
    if f.space().desc() != space.desc() {
        return Err(err(path, "function shape does not match the space"));
    }
    PatternFn::new(space.clone(), f.values().to_vec())
}

pub fn parse_pattern_fn(text: &str) -> Result<PatternFn, Error> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| err("$", format!("invalid JSON: {e}")))?;
    fn_from_value(&v, "$")
}

// ---------------------------------------------------------------------------
// Certificates

pub fn cert_to_value(c: &Certificate) -> Value {
    match c {
        Certificate::NonnegLsc => json!({ "kind": "nonneg_lsc" }),
        Certificate::LscSplit { u, v } => json!({
            "kind": "lsc_split",
            "u": fn_to_value(u),
            "v": fn_to_value(v),
        }),
        Certificate::Sum { parts } => json!({
            "kind": "sum",
            "parts": parts
                .iter()
                .map(|(p, c)| json!({ "part": fn_to_value(p), "cert": cert_to_value(c) }))
                .collect::<Vec<_>>(),
        }),
        Certificate::Extension { set, factor, inner } => json!({
            "kind": "extension",
            "outer": mark_to_value(set.outer.mark()),
            "minus": mark_to_value(set.minus.mark()),
            "factor": factor,
            "inner": cert_to_value(inner),
        }),
        Certificate::Localization { parts } => json!({
            "kind": "localization",
            "parts": parts
                .iter()
                .map(|(u, c)| json!({ "support": mark_to_value(u), "cert": cert_to_value(c) }))
                .collect::<Vec<_>>(),
        }),
        Certificate::ContinuousOnOpen { support } => json!({
            "kind": "continuous_on_open",
            "support": mark_to_value(support),
        }),
    }
}

pub fn cert_from_value(v: &Value, space: &Arc<Space>, path: &str) -> Result<Certificate, Error> {
    let obj = as_obj(v, path)?;
    let kind = get(obj, "kind", path)?
        .as_str()
        .ok_or_else(|| err(path, "kind must be a string"))?;
    match kind {
        "nonneg_lsc" => {
            expect_keys(obj, &["kind"], path)?;
            Ok(Certificate::NonnegLsc)
        }
        "lsc_split" => {
            expect_keys(obj, &["kind", "u", "v"], path)?;
            Ok(Certificate::LscSplit {
                u: fn_from_value_on(get(obj, "u", path)?, space, &format!("{path}.u"))?,
                v: fn_from_value_on(get(obj, "v", path)?, space, &format!("{path}.v"))?,
            })
        }
        "sum" => {
            expect_keys(obj, &["kind", "parts"], path)?;
            let parts_v = as_array(get(obj, "parts", path)?, &format!("{path}.parts"))?;
            let mut parts = Vec::with_capacity(parts_v.len());
            for (i, pv) in parts_v.iter().enumerate() {
                let p_path = format!("{path}.parts[{i}]");
                let pobj = as_obj(pv, &p_path)?;
                expect_keys(pobj, &["part", "cert"], &p_path)?;
                let part =
                    fn_from_value_on(get(pobj, "part", &p_path)?, space, &format!("{p_path}.part"))?;
                let cert =
                    cert_from_value(get(pobj, "cert", &p_path)?, space, &format!("{p_path}.cert"))?;
                parts.push((part, cert));
            }
            Ok(Certificate::Sum { parts })
        }
        "extension" => {
            expect_keys(obj, &["kind", "outer", "minus", "factor", "inner"], path)?;
            let outer = mark_from_value(get(obj, "outer", path)?, space, &format!("{path}.outer"))?;
            let minus = mark_from_value(get(obj, "minus", path)?, space, &format!("{path}.minus"))?;
            let outer = ClosedMark::validate(outer)
                .map_err(|e| err(&format!("{path}.outer"), e.to_string()))?;
            let minus = ClosedMark::validate(minus)
                .map_err(|e| err(&format!("{path}.minus"), e.to_string()))?;
            let set = DiffClosed::new(outer, minus).map_err(|e| err(path, e.to_string()))?;
            let factor = get(obj, "factor", path)?
                .as_u64()
                .ok_or_else(|| err(path, "factor must be 1 or 2"))?;
            if factor != 1 && factor != 2 {
                return Err(err(path, "factor must be 1 or 2"));
            }
            let inner = cert_from_value(get(obj, "inner", path)?, space, &format!("{path}.inner"))?;
            Ok(Certificate::Extension {
                set,
                factor: factor as u8,
                inner: Box::new(inner),
            })
        }
        "localization" => {
            expect_keys(obj, &["kind", "parts"], path)?;
            let parts_v = as_array(get(obj, "parts", path)?, &format!("{path}.parts"))?;
            let mut parts = Vec::with_capacity(parts_v.len());
            for (i, pv) in parts_v.iter().enumerate() {
                let p_path = format!("{path}.parts[{i}]");
                let pobj = as_obj(pv, &p_path)?;
                expect_keys(pobj, &["support", "cert"], &p_path)?;
                let support = mark_from_value(
                    get(pobj, "support", &p_path)?,
                    space,
                    &format!("{p_path}.support"),
                )?;
                let cert =
                    cert_from_value(get(pobj, "cert", &p_path)?, space, &format!("{p_path}.cert"))?;
                parts.push((support, cert));
            }
            Ok(Certificate::Localization { parts })
        }
        "continuous_on_open" => {
            expect_keys(obj, &["kind", "support"], path)?;
            let support =
                mark_from_value(get(obj, "support", path)?, space, &format!("{path}.support"))?;
            Ok(Certificate::ContinuousOnOpen { support })
        }
        other => Err(err(path, format!("unknown certificate kind {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Serialize implementations for report types

impl Serialize for SpaceDesc {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        space_to_value(self).serialize(s)
    }
}

impl Serialize for MarkPattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        mark_to_value(self).serialize(s)
    }
}

impl Serialize for ClosedMark {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        mark_to_value(self.mark()).serialize(s)
    }
}

impl Serialize for PatternFn {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        fn_to_value(self).serialize(s)
    }
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        cert_to_value(self).serialize(s)
    }
}

impl Serialize for DiffClosed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("outer", &self.outer)?;
        m.serialize_entry("minus", &self.minus)?;
        m.end()
    }
}

impl Serialize for SimpleDcs {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            coeff: &'a Rat,
            set: &'a DiffClosed,
        }
        let mut seq = s.serialize_seq(Some(self.terms().len()))?;
        for (coeff, set) in self.terms() {
            seq.serialize_element(&Term { coeff, set })?;
        }
        seq.end()
    }
}

impl Serialize for OscReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(6))?;
        m.serialize_entry("upper", &self.upper)?;
        m.serialize_entry("lower", &self.lower)?;
        m.serialize_entry("uosc", &self.uosc)?;
        m.serialize_entry("osc", &self.osc)?;
        m.serialize_entry("oosc", &self.oosc)?;
        m.serialize_entry("domain", &self.domain)?;
        m.end()
    }
}

impl Serialize for DerivationTrail {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(4))?;
        m.serialize_entry("eps", &self.eps)?;
        m.serialize_entry("flavor", &self.flavor)?;
        m.serialize_entry("sets", &self.sets)?;
        m.serialize_entry("terminal", &self.terminal)?;
        m.end()
    }
}

impl Serialize for DNormBounds {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(4))?;
        m.serialize_entry("lower", &self.lower)?;
        m.serialize_entry("upper", &self.upper)?;
        m.serialize_entry("certificate", &self.certificate)?;
        m.serialize_entry("annotations", &self.annotations)?;
        m.end()
    }
}

impl Serialize for crate::decompose::SdApprox {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(7))?;
        m.serialize_entry("simple", &self.simple)?;
        m.serialize_entry("residual_bound", &self.residual_bound)?;
        m.serialize_entry("certificate", &self.certificate)?;
        m.serialize_entry("trace", &self.trace)?;
        m.serialize_entry("path", &self.path)?;
        m.serialize_entry("headline_bound", &self.headline_bound)?;
        m.serialize_entry("headline_certificate", &self.headline_certificate)?;
        m.end()
    }
}

impl Serialize for crate::decompose::SdVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("verdict", &self.verdict)?;
        m.serialize_entry("rank", &self.rank)?;
        m.serialize_entry("index", &self.index)?;
        m.serialize_entry("vanishing_product", &self.vanishing_product)?;
        m.serialize_entry("approx", &self.approx)?;
        m.end()
    }
}

impl Serialize for crate::witness::WitnessReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(7))?;
        m.serialize_entry("rank", &self.rank)?;
        m.serialize_entry("space", self.space.desc())?;
        m.serialize_entry("chain", &self.chain)?;
        m.serialize_entry("e", &self.e)?;
        m.serialize_entry("indices", &self.indices)?;
        m.serialize_entry("upper_bound", &self.upper_bound)?;
        m.serialize_entry("lower_bound", &self.lower_bound)?;
        m.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MarkPattern;

    fn t2() -> Arc<Space> {
        Space::new(SpaceDesc::homogeneous(2)).unwrap()
    }

    #[test]
    fn space_round_trip() {
        let desc = SpaceDesc::limit(
            vec![SpaceDesc::Leaf],
            vec![SpaceDesc::homogeneous(2), SpaceDesc::Leaf],
        );
        let v = space_to_value(&desc);
        assert_eq!(space_from_value(&v, "$").unwrap(), desc);
        assert_eq!(space_to_value(&SpaceDesc::Leaf), json!({"leaf": true}));
    }

    #[test]
    fn mark_round_trip_and_shape_check() {
        let s = t2();
        let m = MarkPattern::new(s.clone(), vec![true, false, true]).unwrap();
        let v = mark_to_value(&m);
        assert_eq!(mark_from_value(&v, &s, "$").unwrap(), m);

        let other = Space::new(SpaceDesc::homogeneous(1)).unwrap();
        let e = mark_from_value(&v, &other, "$").unwrap_err();
        assert!(e.to_string().contains("shape"));
    }

    #[test]
    fn fn_round_trip() {
        let s = t2();
        let f = PatternFn::new(s, vec![Rat::new(1, 2), Rat::zero(), Rat::from_int(-3)]).unwrap();
        let v = fn_to_value(&f);
        let g = fn_from_value(&v, "$").unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn non_canonical_rationals_are_rejected_with_a_path() {
        let text = r#"{"value":"2/4","prefix":[],"cycle":[{"value":"0/1"}]}"#;
        let e = parse_pattern_fn(text).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("$.value"), "{msg}");
        assert!(msg.contains("reduced"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"value":"0/1","extra":1}"#;
        let e = parse_pattern_fn(text).unwrap_err();
        assert!(e.to_string().contains("unknown key"), "{e}");
    }

    #[test]
    fn empty_cycle_is_rejected_with_a_path() {
        let text = r#"{"value":"0/1","prefix":[{"value":"0/1"}],"cycle":[]}"#;
        let e = parse_pattern_fn(text).unwrap_err();
        assert!(e.to_string().contains("cycle must be nonempty"), "{e}");
    }

    #[test]
    fn certificate_round_trip() {
        let s = t2();
        let f =
            PatternFn::indicator(&MarkPattern::new(s.clone(), vec![true, false, true]).unwrap());
        let b = crate::dnorm::bounds(&f);
        let v = cert_to_value(&b.certificate);
        let parsed = cert_from_value(&v, &s, "$").unwrap();
        let rechecked = crate::dnorm::check_certificate(&f, &parsed).unwrap();
        assert_eq!(rechecked, b.upper);
    }

    #[test]
    fn deep_paths_locate_errors() {
        let text =
            r#"{"prefix":[{"leaf":true}],"cycle":[{"prefix":[],"cycle":[{"leaf":false}]}]}"#;
        let v: Value = serde_json::from_str(text).unwrap();
        let e = space_from_value(&v, "$").unwrap_err();
        assert!(e.to_string().contains("$.cycle[0].cycle[0]"), "{e}");
    }
}
