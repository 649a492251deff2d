//! Seeded random instances.

use fairdiv::rational::parse_rational;
use fairdiv::{Instance, Rational};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GenError {
    #[error("at least one agent and one item are required")]
    Empty,
    #[error("value range [{lo}, {hi}] is empty")]
    EmptyRange { lo: u64, hi: u64 },
    #[error("zero probability {0} is outside [0, 1]")]
    Probability(Rational),
    #[error("zero probability {0} has a denominator wider than 64 bits")]
    ProbabilityPrecision(Rational),
    #[error("{items} items for {agents} agents: the solvers need at least one item per agent")]
    TooFewItems { agents: usize, items: usize },
}

/// Everything needed to regenerate an instance; echoed into the file header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub agents: usize,
    pub items: usize,
    pub lo: u64,
    pub hi: u64,
    #[serde(serialize_with = "write_rational", deserialize_with = "read_rational")]
    pub zero_probability: Rational,
    pub seed: u64,
}

fn write_rational<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&value.to_string())
}

fn read_rational<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
    let text = String::deserialize(deserializer)?;
    parse_rational(&text).map_err(serde::de::Error::custom)
}

impl GenSpec {
    /// Validates the settings; `solver_bound` additionally requires `items ≥ agents`.
    pub fn validate(&self, solver_bound: bool) -> Result<(), GenError> {
        if self.agents == 0 || self.items == 0 {
            return Err(GenError::Empty);
        }
        if self.lo > self.hi {
            return Err(GenError::EmptyRange { lo: self.lo, hi: self.hi });
        }
        let p = &self.zero_probability;
        if *p < Rational::zero() || *p > Rational::one() {
            return Err(GenError::Probability(p.clone()));
        }
        if p.denom().to_u64().is_none() {
            return Err(GenError::ProbabilityPrecision(p.clone()));
        }
        if solver_bound && self.items < self.agents {
            return Err(GenError::TooFewItems {
                agents: self.agents,
                items: self.items,
            });
        }
        Ok(())
    }

    /// Each value is 0 with probability `zero_probability` (drawn exactly as
    /// `u < p·q` for uniform `u ∈ [0, q)`), otherwise uniform in `[lo, hi]`.
    pub fn generate(&self, solver_bound: bool) -> Result<Instance, GenError> {
        self.validate(solver_bound)?;
        let numer = self.zero_probability.numer().to_u64().expect("validated");
        let denom = self.zero_probability.denom().to_u64().expect("validated");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let rows = (0..self.agents)
            .map(|_| {
                (0..self.items)
                    .map(|_| {
                        let zero = rng.gen_range(0..denom) < numer;
                        let value = rng.gen_range(self.lo..=self.hi);
                        Rational::from_integer(BigInt::from(if zero { 0 } else { value }))
                    })
                    .collect()
            })
            .collect();
        Ok(Instance::new(rows).expect("generated values are non-negative"))
    }
}
