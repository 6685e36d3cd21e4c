//! Versioned JSON instance files.
//!
//! ```json
//! {"format_version": 1, "kind": "ising", "n": 2, "h": [0.1, -0.2],
//!  "J": [{"i": 0, "j": 1, "value": 0.5}],
//!  "meta": {"h_mean": 0.01, "W": 0.05, "J_s": 1.0, "seed": 7}}
//! {"format_version": 1, "kind": "sat3", "n": 8, "clauses": [[0, 3, 5]],
//!  "meta": {"seed": 7}}
//! ```
//!
//! Floats are written in shortest round-trip form, so a write/read cycle is
//! lossless.

use serde::{Deserialize, Serialize};

use super::ising::{IsingInstance, IsingMeta};
use super::sat::{SatInstance, SatMeta};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Ising(IsingInstance),
    Sat(SatInstance),
}

impl Instance {
    pub fn n(&self) -> usize {
        match self {
            Instance::Ising(i) => i.n(),
            Instance::Sat(s) => s.n(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingEntry {
    i: usize,
    j: usize,
    value: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum Body {
    #[serde(rename = "ising")]
    Ising {
        n: usize,
        h: Vec<f64>,
        #[serde(rename = "J")]
        couplings: Vec<CouplingEntry>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        meta: Option<IsingMeta>,
    },
    #[serde(rename = "sat3")]
    Sat3 {
        n: usize,
        clauses: Vec<[usize; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        meta: Option<SatMeta>,
    },
}

#[derive(Serialize, Deserialize)]
struct Document {
    format_version: u32,
    #[serde(flatten)]
    body: Body,
}

pub fn serialize_instance(inst: &Instance) -> String {
    let body = match inst {
        Instance::Ising(i) => Body::Ising {
            n: i.n(),
            h: i.h().to_vec(),
            couplings: i
                .couplings()
                .map(|(i, j, value)| CouplingEntry { i, j, value })
                .collect(),
            meta: i.meta().copied(),
        },
        Instance::Sat(s) => Body::Sat3 {
            n: s.n(),
            clauses: s.clauses().to_vec(),
            meta: s.meta().copied(),
        },
    };
    let doc = Document {
        format_version: FORMAT_VERSION,
        body,
    };
    serde_json::to_string_pretty(&doc).expect("instance serializes")
}

pub fn deserialize_instance(text: &str) -> Result<Instance> {
    let doc: Document = serde_json::from_str(text)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            doc.format_version
        )));
    }
    match doc.body {
        Body::Ising {
            n,
            h,
            couplings,
            meta,
        } => {
            if h.len() != n {
                return Err(Error::Format(format!(
                    "field `h` has {} entries but n = {n}",
                    h.len()
                )));
            }
            let list: Vec<(usize, usize, f64)> =
                couplings.iter().map(|c| (c.i, c.j, c.value)).collect();
            Ok(Instance::Ising(IsingInstance::new(h, &list, meta)?))
        }
        Body::Sat3 { n, clauses, meta } => Ok(Instance::Sat(SatInstance::new(n, clauses, meta)?)),
    }
}
