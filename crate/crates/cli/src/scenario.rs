//! Scenario files: loading, flag overrides, and conversion into library
//! inputs. Every input error carries a JSON pointer into the scenario.

use std::path::{Path, PathBuf};

use allpay_core::valuations::{MultiUnitValuation, XosValuation};
use serde::{Deserialize, Deserializer, Serialize};
use serde_path_to_error::Segment;
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    SingleItem,
    PrizeVector,
    FirstPrice,
    Simultaneous,
    Psam,
    Bounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ValuationSpec {
    /// Additive clauses over the items.
    Xos(Vec<Vec<f64>>),
    /// `f(0), f(1), ..., f(m)`.
    Multiunit(Vec<f64>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<Mechanism>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valuations: Option<Vec<ValuationSpec>>,
    /// Single-item values, highest first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bids: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Target value of the product of the `G_i`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", deserialize_with = "count")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Output paths are not hashed.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub csv: Option<PathBuf>,
}

/// Accepts integral JSON numbers written either way (`1000000`, `1e6`).
fn count<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
    let x = f64::deserialize(d)?;
    to_count(x).map(Some).map_err(serde::de::Error::custom)
}

fn to_count(x: f64) -> Result<u64, String> {
    if x >= 0.0 && x.fract() == 0.0 && x <= 9.007_199_254_740_992e15 {
        Ok(x as u64)
    } else {
        Err(format!("expected a nonnegative integer, got {x}"))
    }
}

/// Parses counts such as `1e6` or `250000` from the command line.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    s.parse::<f64>().map_err(|e| format!("{s}: {e}")).and_then(to_count)
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

pub fn parse(text: &str) -> Result<Scenario, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = pointer(e.path());
        Failure::Input(format!("scenario {at}: {}", e.inner()))
    })
}

pub fn load(path: &Path) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse(&text)
}

impl Scenario {
    /// Fields set in `other` replace those set here.
    pub fn overlay(mut self, other: Scenario) -> Scenario {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            mechanism, valuations, values, bids, n, k, m, v, q, lambda, lambda_min, lambda_max, steps, target, starts,
            samples, seed, grid_size, workers, tol, out, csv
        );
        self
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serializes");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn xos(&self) -> Result<Vec<XosValuation>, Failure> {
        let specs = required(self.valuations.as_ref(), "/valuations")?;
        specs
            .iter()
            .enumerate()
            .map(|(i, spec)| match spec {
                ValuationSpec::Xos(clauses) => XosValuation::new(clauses.clone()).map_err(|e| at(format!("/valuations/{i}/xos"), e)),
                ValuationSpec::Multiunit(_) => Err(Failure::Input(format!("scenario /valuations/{i}: expected an xos valuation"))),
            })
            .collect()
    }

    pub fn multiunit(&self) -> Result<Vec<MultiUnitValuation>, Failure> {
        let specs = required(self.valuations.as_ref(), "/valuations")?;
        specs
            .iter()
            .enumerate()
            .map(|(i, spec)| match spec {
                ValuationSpec::Multiunit(f) => {
                    MultiUnitValuation::new(f.clone()).map_err(|e| at(format!("/valuations/{i}/multiunit"), e))
                }
                ValuationSpec::Xos(_) => Err(Failure::Input(format!("scenario /valuations/{i}: expected a multiunit valuation"))),
            })
            .collect()
    }
}

pub fn required<T>(x: Option<T>, ptr: &str) -> Result<T, Failure> {
    x.ok_or_else(|| Failure::Input(format!("scenario {ptr}: required by this command")))
}

pub fn at(ptr: impl AsRef<str>, e: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("scenario {}: {e}", ptr.as_ref()))
}
