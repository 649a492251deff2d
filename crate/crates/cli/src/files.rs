//! JSON instance and allocation files.
//!
//! Values are written as JSON integers when they are whole and fit in an
//! `i64`, and as `"p/q"` strings otherwise; floating-point numbers are
//! rejected so that no persisted artifact is ever rounded.

use std::fmt::Write as _;

use fairdiv::rational::parse_rational;
use fairdiv::{Allocation, Bundle, Instance, Rational};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::generate::GenSpec;

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("valuation of agent {agent} for item {item}: {reason}")]
    Value { agent: usize, item: usize, reason: String },
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Model(#[from] fairdiv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GenSpec>,
    pub n: usize,
    pub m: usize,
    pub valuations: Vec<Vec<Value>>,
}

pub fn rational_to_json(value: &Rational) -> Value {
    if value.denom().is_one() {
        if let Some(v) = value.numer().to_i64() {
            return Value::from(v);
        }
    }
    Value::from(value.to_string())
}

fn rational_from_json(value: &Value) -> Result<Rational, String> {
    match value {
        Value::Number(n) => match n.as_i64() {
            Some(v) => Ok(Rational::from_integer(BigInt::from(v))),
            None if n.is_u64() => Err(format!("{n} is out of range; write it as a string")),
            None => Err(format!("floating-point value {n} is not allowed; write it as \"p/q\"")),
        },
        Value::String(text) => parse_rational(text).map_err(|e| e.to_string()),
        other => Err(format!("expected an integer or a \"p/q\" string, found {other}")),
    }
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance, generator: Option<GenSpec>) -> Self {
        Self {
            generator,
            n: instance.agent_count(),
            m: instance.item_count(),
            valuations: instance
                .valuations()
                .iter()
                .map(|row| row.iter().map(rational_to_json).collect())
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_instance(&self) -> Result<Instance, FileError> {
        if self.valuations.len() != self.n {
            return Err(FileError::Shape(format!(
                "n = {} but valuations has {} rows",
                self.n,
                self.valuations.len()
            )));
        }
        let mut rows = Vec::with_capacity(self.n);
        for (agent, row) in self.valuations.iter().enumerate() {
            if row.len() != self.m {
                return Err(FileError::Shape(format!(
                    "m = {} but row {agent} has {} entries",
                    self.m,
                    row.len()
                )));
            }
            let parsed = row
                .iter()
                .enumerate()
                .map(|(item, v)| rational_from_json(v).map_err(|reason| FileError::Value { agent, item, reason }))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(parsed);
        }
        Ok(Instance::new(rows)?)
    }

    /// Pretty JSON with one valuation row per line.
    pub fn render(&self) -> String {
        let mut out = String::from("{\n");
        if let Some(generator) = &self.generator {
            let header = serde_json::to_string(generator).expect("generator header serializes");
            writeln!(out, "  \"generator\": {header},").unwrap();
        }
        writeln!(out, "  \"n\": {},\n  \"m\": {},\n  \"valuations\": [", self.n, self.m).unwrap();
        render_rows(&mut out, self.valuations.iter().map(|row| serde_json::to_string(row).unwrap()));
        out.push_str("  ]\n}\n");
        out
    }
}

fn render_rows(out: &mut String, rows: impl Iterator<Item = String>) {
    let rows: Vec<String> = rows.collect();
    for (k, row) in rows.iter().enumerate() {
        let sep = if k + 1 < rows.len() { "," } else { "" };
        writeln!(out, "    {row}{sep}").unwrap();
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, FileError> {
    InstanceFile::parse(text)?.to_instance()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationFile {
    pub bundles: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remaining: Option<Vec<usize>>,
}

impl AllocationFile {
    pub fn from_allocation(allocation: &Allocation) -> Self {
        Self {
            bundles: allocation.bundles().iter().map(|b| b.iter().copied().collect()).collect(),
            remaining: Some(allocation.remaining().into_iter().collect()),
        }
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks the file against its companion instance.
    pub fn to_allocation(&self, instance: &Instance) -> Result<Allocation, FileError> {
        if self.bundles.len() != instance.agent_count() {
            return Err(FileError::Shape(format!(
                "allocation has {} bundles but the instance has {} agents",
                self.bundles.len(),
                instance.agent_count()
            )));
        }
        let mut bundles = Vec::with_capacity(self.bundles.len());
        for items in &self.bundles {
            let bundle: Bundle = items.iter().copied().collect();
            if bundle.len() != items.len() {
                return Err(FileError::Shape(format!("bundle {items:?} lists an item twice")));
            }
            bundles.push(bundle);
        }
        let allocation = Allocation::new(instance.item_count(), bundles)?;
        if let Some(remaining) = &self.remaining {
            let listed: Bundle = remaining.iter().copied().collect();
            if listed != allocation.remaining() || listed.len() != remaining.len() {
                return Err(FileError::Shape(format!(
                    "remaining {remaining:?} does not match the unallocated items {:?}",
                    allocation.remaining()
                )));
            }
        }
        Ok(allocation)
    }

    pub fn render(&self) -> String {
        let mut out = String::from("{\n  \"bundles\": [\n");
        render_rows(&mut out, self.bundles.iter().map(|b| serde_json::to_string(b).unwrap()));
        out.push_str("  ]");
        if let Some(remaining) = &self.remaining {
            write!(out, ",\n  \"remaining\": {}", serde_json::to_string(remaining).unwrap()).unwrap();
        }
        out.push_str("\n}\n");
        out
    }
}

pub fn parse_allocation(text: &str, instance: &Instance) -> Result<Allocation, FileError> {
    AllocationFile::parse(text)?.to_allocation(instance)
}
