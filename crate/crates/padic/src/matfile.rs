//! Matrix files.
//!
//! A small JSON format carrying a prime and exact rational entries as
//! strings ("num" or "num/den"), so matrices survive round-trips with no
//! precision loss and stay readable in a diff.

use crate::context::{is_prime_u64, PadicContext};
use crate::error::{Error, Result};
use crate::matrix::PadicMatrix;
use crate::oracle::{self, RationalMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub prime: u64,
    pub dim: usize,
    /// Row-major rational entries.
    pub entries: Vec<Vec<String>>,
}

fn parse_entry(s: &str) -> Result<BigRational> {
    let bad = |why: &str| Error::MatrixFile(format!("entry {s:?}: {why}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let num: BigInt = num
        .trim()
        .parse()
        .map_err(|_| bad("numerator is not an integer"))?;
    let den: BigInt = match den {
        Some(d) => d
            .trim()
            .parse()
            .map_err(|_| bad("denominator is not an integer"))?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

fn format_entry(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl MatrixFile {
    pub fn validate(&self) -> Result<()> {
        if !is_prime_u64(self.prime) {
            return Err(Error::NotPrime(self.prime));
        }
        if self.dim == 0 {
            return Err(Error::MatrixFile("dim must be at least 1".to_string()));
        }
        if self.entries.len() != self.dim {
            return Err(Error::MatrixFile(format!(
                "expected {} rows, found {}",
                self.dim,
                self.entries.len()
            )));
        }
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != self.dim {
                return Err(Error::MatrixFile(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    self.dim
                )));
            }
            for e in row {
                parse_entry(e)?;
            }
        }
        Ok(())
    }

    pub fn to_rational(&self) -> Result<RationalMatrix> {
        self.validate()?;
        let mut rows = Vec::with_capacity(self.dim);
        for row in &self.entries {
            rows.push(row.iter().map(|e| parse_entry(e)).collect::<Result<Vec<_>>>()?);
        }
        RationalMatrix::from_rows(rows)
    }

    /// Entries are stored reduced; loading and saving canonicalizes.
    pub fn from_rational(prime: u64, m: &RationalMatrix) -> Result<MatrixFile> {
        if !is_prime_u64(prime) {
            return Err(Error::NotPrime(prime));
        }
        let dim = m.dim();
        let mut entries = Vec::with_capacity(dim);
        for r in 0..dim {
            entries.push((0..dim).map(|c| format_entry(m.get(r, c))).collect());
        }
        Ok(MatrixFile {
            prime,
            dim,
            entries,
        })
    }

    pub fn to_padic(&self, precision: u32) -> Result<(PadicContext, PadicMatrix)> {
        let rm = self.to_rational()?;
        let ctx = PadicContext::new(self.prime, precision)?;
        let m = oracle::to_padic(&rm, &ctx)?;
        Ok((ctx, m))
    }

    pub fn from_json_str(s: &str) -> Result<MatrixFile> {
        let mf: MatrixFile =
            serde_json::from_str(s).map_err(|e| Error::MatrixFile(e.to_string()))?;
        mf.validate()?;
        Ok(mf)
    }

    /// Canonical form: pretty JSON with a trailing newline. Saving the
    /// parse of a canonical file reproduces it byte for byte.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<MatrixFile> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}
