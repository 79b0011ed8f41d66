//! Text file formats: instances, weights, matchings, fractional points.
//!
//! Everything is line oriented UTF-8.  `#` starts a comment line and blank
//! lines are skipped in all formats.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use srp_core::polytope::FractionalPoint;
use srp_core::{Edge, EdgeWeights, Matching, PreferenceSystem, Rat};

/// Canonical text form of an instance.  Parsing it back gives an equal
/// system, so `parse . emit . parse = parse`.
pub fn emit_instance(ps: &PreferenceSystem) -> String {
    let mut out = String::new();
    for a in ps.agents() {
        out.push_str(&a.to_string());
        out.push(':');
        for &v in ps.neighbors(a) {
            out.push(' ');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Nonnegative rational in `p/q`, integer, or decimal notation.
pub fn parse_rat(tok: &str) -> Result<Rat, String> {
    let bad = || format!("bad rational `{tok}`");
    if let Some((p, q)) = tok.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(format!("zero denominator in `{tok}`"));
        }
        Ok(Rat::new(p, q))
    } else if let Some((i, f)) = tok.split_once('.') {
        let digits = format!("{i}{f}");
        let p: BigInt = digits.parse().map_err(|_| bad())?;
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let q = BigInt::from(10u32).pow(f.len() as u32);
        Ok(Rat::new(p, q))
    } else {
        let p: BigInt = tok.parse().map_err(|_| bad())?;
        Ok(Rat::from_integer(p))
    }
}

/// Strict `p/q` form used in JSON payloads.
pub fn rat_json(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_edge_line(ln: usize, line: &str, want: usize) -> Result<(Edge, Vec<&str>), String> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != want {
        return Err(format!("line {ln}: expected {want} fields, got {}", toks.len()));
    }
    let u: u32 = toks[0]
        .parse()
        .map_err(|_| format!("line {ln}: bad agent id `{}`", toks[0]))?;
    let v: u32 = toks[1]
        .parse()
        .map_err(|_| format!("line {ln}: bad agent id `{}`", toks[1]))?;
    if u == v {
        return Err(format!("line {ln}: self-loop {u} {v}"));
    }
    Ok((Edge::new(u, v), toks))
}

/// Lines `u v w`; every edge must exist, weights must be nonnegative.
/// Edges of the instance without a line default to weight 0, reported as a
/// warning.
pub fn parse_weights(
    ps: &PreferenceSystem,
    text: &str,
) -> Result<(EdgeWeights, Vec<String>), String> {
    let mut pairs: Vec<(Edge, Rat)> = Vec::new();
    for (ln, line) in data_lines(text) {
        let (e, toks) = parse_edge_line(ln, line, 3)?;
        if !ps.contains_edge(e) {
            return Err(format!("line {ln}: edge {e} is not in the instance"));
        }
        let w = parse_rat(toks[2]).map_err(|m| format!("line {ln}: {m}"))?;
        if w.is_negative() {
            return Err(format!("line {ln}: negative weight on {e}"));
        }
        if pairs.iter().any(|(f, _)| *f == e) {
            return Err(format!("line {ln}: edge {e} weighted twice"));
        }
        pairs.push((e, w));
    }
    let keyed: std::collections::BTreeSet<Edge> = pairs.iter().map(|(e, _)| *e).collect();
    let missing: Vec<Edge> = ps
        .edges()
        .into_iter()
        .filter(|e| !keyed.contains(e))
        .collect();
    let mut warnings = Vec::new();
    if !missing.is_empty() {
        warnings.push(format!(
            "{} instance edge(s) have no weight line, defaulting to 0",
            missing.len()
        ));
    }
    let w = EdgeWeights::new(ps, pairs).map_err(|e| e.to_string())?;
    Ok((w, warnings))
}

/// Lines `u v`, pairwise disjoint edges of the instance.
pub fn parse_matching(ps: &PreferenceSystem, text: &str) -> Result<Matching, String> {
    let mut edges = Vec::new();
    for (ln, line) in data_lines(text) {
        let (e, _) = parse_edge_line(ln, line, 2)?;
        if !ps.contains_edge(e) {
            return Err(format!("line {ln}: edge {e} is not in the instance"));
        }
        edges.push(e);
    }
    Matching::new(ps, edges).map_err(|e| e.to_string())
}

/// Lines `u v p/q`; absent coordinates are 0.
pub fn parse_point(ps: &PreferenceSystem, text: &str) -> Result<FractionalPoint, String> {
    let mut coords = Vec::new();
    for (ln, line) in data_lines(text) {
        let (e, toks) = parse_edge_line(ln, line, 3)?;
        if !ps.contains_edge(e) {
            return Err(format!("line {ln}: edge {e} is not in the instance"));
        }
        let v = parse_rat(toks[2]).map_err(|m| format!("line {ln}: {m}"))?;
        if coords.iter().any(|(f, _)| *f == e) {
            return Err(format!("line {ln}: edge {e} given twice"));
        }
        coords.push((e, v));
    }
    Ok(FractionalPoint::new(coords))
}
