use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::rational::{format_rational, is_dyadic_with, Rational};

/// A memoryless source whose probabilities are positive multiples of `2^-b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDistribution {
    symbols: Vec<String>,
    probs: Vec<Rational>,
    bits: u32,
}

impl SourceDistribution {
    pub fn new(symbols: Vec<String>, probs: Vec<Rational>, bits: u32) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidSource("the alphabet is empty".into()));
        }
        if symbols.len() != probs.len() {
            return Err(Error::InvalidSource(format!(
                "{} symbols but {} probabilities",
                symbols.len(),
                probs.len()
            )));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::InvalidSource(format!("symbol `{s}` is repeated")));
            }
        }
        for (s, p) in symbols.iter().zip(&probs) {
            if !p.is_positive() {
                return Err(Error::InvalidSource(format!("p({s}) must be positive")));
            }
            if !is_dyadic_with(p, bits) {
                return Err(Error::InvalidSource(format!(
                    "p({s}) = {} is not a multiple of 2^-{bits}",
                    format_rational(p)
                )));
            }
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidSource(format!(
                "probabilities sum to {}",
                format_rational(&total)
            )));
        }
        Ok(SourceDistribution {
            symbols,
            probs,
            bits,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> &Rational {
        &self.probs[i]
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `p_i · 2^b` as machine integers.
    pub fn scaled_probs(&self) -> Vec<u64> {
        let scale = Rational::from_integer((num_bigint::BigInt::one()) << self.bits as usize);
        self.probs
            .iter()
            .map(|p| {
                let v = (p * &scale).to_integer();
                u64::try_from(v).expect("probability scaled by 2^b fits in u64")
            })
            .collect()
    }

    /// Symbol indices ordered by decreasing probability, ties by index.
    pub fn order_by_probability(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.probs[b].cmp(&self.probs[a]).then(a.cmp(&b)));
        order
    }
}
