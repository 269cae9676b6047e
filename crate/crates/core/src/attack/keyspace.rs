use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the key-space estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeySpaceModel {
    pub p: u32,
    pub q: u32,
    /// Distinct values per matrix entry at the implementation precision.
    pub r: u64,
    /// Seed width in bits.
    pub l: u32,
    /// Coarse precision of an approximate key search.
    pub epsilon: f64,
}

impl KeySpaceModel {
    pub fn validate(&self) -> Result<()> {
        if self.r < 2 {
            return Err(Error::InvalidParams(format!("R = {} must be at least 2", self.r)));
        }
        if self.l < 1 {
            return Err(Error::InvalidParams("L must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 2.0) {
            return Err(Error::InvalidParams(format!("epsilon {} outside (0, 2)", self.epsilon)));
        }
        Ok(())
    }

    /// `ceil(2 / epsilon)`: cells of width `epsilon` covering `[-1, 1]`.
    pub fn n_eps(&self) -> u64 {
        (2.0 / self.epsilon).ceil() as u64
    }

    fn matrix_exponent(&self, structured: bool, dac: bool) -> u32 {
        let row = if structured { self.p } else { self.p + self.q };
        if dac {
            row
        } else {
            self.p * row
        }
    }
}

fn assemble(base: u64, exponent: u32, p: u32, l: u32, dac: bool) -> BigUint {
    let mut n = BigUint::from(base).pow(exponent) << l as usize;
    if dac {
        n *= p;
    }
    n
}

/// Exact key-space size:
///
/// | structured | dac   | size                  |
/// |------------|-------|-----------------------|
/// | no         | no    | `R^(P(P+Q)) 2^L`      |
/// | yes        | no    | `R^(P^2) 2^L`         |
/// | no         | yes   | `P R^(P+Q) 2^L`       |
/// | yes        | yes   | `P R^P 2^L`           |
pub fn keyspace_size(model: &KeySpaceModel, structured: bool, dac: bool) -> Result<BigUint> {
    model.validate()?;
    let exponent = model.matrix_exponent(structured, dac);
    Ok(assemble(model.r, exponent, model.p, model.l, dac))
}

/// Divide-and-conquer search at precision `epsilon`:
/// `P ceil(2/epsilon)^(P+Q) 2^L`, or `P ceil(2/epsilon)^P 2^L` structured.
pub fn approximate_keyspace_size(model: &KeySpaceModel, structured: bool) -> Result<BigUint> {
    model.validate()?;
    let exponent = model.matrix_exponent(structured, true);
    Ok(assemble(model.n_eps(), exponent, model.p, model.l, true))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequiredPlaintexts {
    /// `ceil(sqrt(P - 1/4) + 1/2)`, evaluated as printed.
    pub n_formula: u64,
    /// Smallest `n` with `n(n-1)/2 >= P`.
    pub n_exact: u64,
}

/// Known plaintexts needed for `P` pairwise differentials. The printed
/// closed form undercounts for some `P` (e.g. `P = 2`), so both are given.
pub fn required_plaintexts(p: u64) -> Result<RequiredPlaintexts> {
    if p == 0 {
        return Err(Error::InvalidParams("P must be at least 1".into()));
    }
    let n_formula = ((p as f64 - 0.25).sqrt() + 0.5).ceil() as u64;
    let mut n_exact = 1u64;
    while n_exact * (n_exact - 1) / 2 < p {
        n_exact += 1;
    }
    Ok(RequiredPlaintexts { n_formula, n_exact })
}
