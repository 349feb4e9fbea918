//! Text and JSON forms of jets.
//!
//! Text form:
//! ```text
//! # pairs=1 lambda=0 mu=0 free=0 trunc=4
//! 3,0:1
//! 1,1:1/2
//! ```
//! one `exponents:coefficient` line per term in graded order.

use serde::{Deserialize, Serialize};

use super::jet::Jet;
use super::shape::Shape;
use super::JetError;
use crate::scalar::Scalar;

pub fn write_jet<C: Scalar>(jet: &Jet<C>) -> String {
    let sh = jet.shape();
    let mut out = format!(
        "# pairs={} lambda={} mu={} free={} trunc={}\n",
        sh.pairs,
        sh.lambda,
        sh.mu,
        sh.free,
        jet.trunc()
    );
    for (k, c) in jet.iter() {
        let e: Vec<String> = k.exps().iter().map(|x| x.to_string()).collect();
        out.push_str(&e.join(","));
        out.push(':');
        out.push_str(&c.to_text());
        out.push('\n');
    }
    out
}

pub fn parse_jet<C: Scalar>(text: &str) -> Result<Jet<C>, JetError> {
    let mut shape = None;
    let mut trunc = None;
    let mut terms = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        let perr = |msg: &str| JetError::Parse { line: ln + 1, msg: msg.to_string() };
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let mut sh = Shape::symplectic(0);
            let mut seen = false;
            for kv in header.split_whitespace() {
                let Some((key, val)) = kv.split_once('=') else { continue };
                let v: usize = val.parse().map_err(|_| perr("bad header value"))?;
                match key {
                    "pairs" => sh.pairs = v,
                    "lambda" => sh.lambda = v,
                    "mu" => sh.mu = v,
                    "free" => sh.free = v,
                    "trunc" => trunc = Some(v as u32),
                    _ => continue,
                }
                seen = true;
            }
            if seen {
                shape = Some(sh);
            }
            continue;
        }
        let sh = shape.ok_or_else(|| perr("term before header"))?;
        let (e, c) = line.split_once(':').ok_or_else(|| perr("expected `exponents:coefficient`"))?;
        let exps: Vec<u8> = e
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u8>())
            .collect::<Result<_, _>>()
            .map_err(|_| perr("bad exponent"))?;
        if exps.len() != sh.num_vars() {
            return Err(perr("exponent count does not match header"));
        }
        let coeff = C::parse_str(c).map_err(|e| perr(&e.to_string()))?;
        terms.push((exps, coeff));
    }
    let shape = shape.ok_or(JetError::Parse { line: 0, msg: "missing header".into() })?;
    let trunc = match trunc {
        Some(t) => t,
        None => terms.iter().map(|(e, _)| shape.weighted_degree(e)).max().unwrap_or(0),
    };
    Ok(Jet::from_terms(shape, trunc, terms))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exponents: Vec<u8>,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetJson {
    pub shape: Shape,
    pub trunc: u32,
    pub terms: Vec<TermJson>,
}

impl JetJson {
    pub fn from_jet<C: Scalar>(jet: &Jet<C>) -> Self {
        Self {
            shape: jet.shape(),
            trunc: jet.trunc(),
            terms: jet
                .iter()
                .map(|(k, c)| TermJson { exponents: k.exps().to_vec(), coeff: c.to_text() })
                .collect(),
        }
    }

    pub fn to_jet<C: Scalar>(&self) -> Result<Jet<C>, JetError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            if t.exponents.len() != self.shape.num_vars() {
                return Err(JetError::Parse { line: i + 1, msg: "exponent count".into() });
            }
            let c = C::parse_str(&t.coeff)
                .map_err(|e| JetError::Parse { line: i + 1, msg: e.to_string() })?;
            terms.push((t.exponents.clone(), c));
        }
        Ok(Jet::from_terms(self.shape, self.trunc, terms))
    }
}
