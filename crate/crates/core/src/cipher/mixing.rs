use serde::{Deserialize, Serialize};

use super::state::StateMatrix;
use crate::error::{Error, Result};

/// Largest entry accepted, so every product stays a short shift-add chain.
pub const MAX_ENTRY: u64 = 15;

/// The constant `v x v` matrix `M_v` used by MixColumns and MixRows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixingMatrix {
    rows: Vec<Vec<u64>>,
}

impl MixingMatrix {
    pub fn new(rows: Vec<Vec<u64>>) -> Result<Self> {
        let v = rows.len();
        if v == 0 {
            return Err(Error::InvalidParameter("empty mixing matrix".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != v {
                return Err(Error::InvalidParameter(format!(
                    "mixing row {} has {} entries, expected {v}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(&x) = row.iter().find(|&&x| x > MAX_ENTRY) {
                return Err(Error::InvalidParameter(format!(
                    "mixing entry {x} exceeds {MAX_ENTRY}"
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Row `i` is `first` rotated right by `i`.
    pub fn circulant(first: &[u64]) -> Result<Self> {
        let v = first.len();
        Self::new((0..v).map(|i| (0..v).map(|j| first[(j + v - i) % v]).collect()).collect())
    }

    /// `M_4 = circ(2,3,1,1)`; placeholders for `v = 6, 8`.
    pub fn default_for(v: usize) -> Result<Self> {
        match v {
            4 => Self::circulant(&[2, 3, 1, 1]),
            6 => Self::circulant(&[4, 2, 4, 3, 1, 1]),
            8 => Self::circulant(&[3, 1, 4, 1, 2, 1, 1, 1]),
            _ => Err(Error::InvalidParameter(format!("no default mixing matrix for v = {v}"))),
        }
    }

    pub fn identity(v: usize) -> Self {
        Self { rows: (0..v).map(|i| (0..v).map(|j| (i == j) as u64).collect()).collect() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.rows[i][j]
    }

    /// `M * x` for one length-`v` vector.
    pub fn apply(&self, x: &[u64], q: crate::zq::Modulus) -> Vec<u64> {
        self.rows
            .iter()
            .map(|row| {
                let acc: u128 = row.iter().zip(x).map(|(&m, &xi)| m as u128 * xi as u128).sum();
                (acc % q.value() as u128) as u64
            })
            .collect()
    }
}

fn check_dim(m: &MixingMatrix, x: &StateMatrix) -> Result<()> {
    if m.dim() != x.v() {
        return Err(Error::LengthMismatch { expected: x.v(), got: m.dim() });
    }
    Ok(())
}

/// `Y[:, c] = M * X[:, c]`, i.e. `Y = M X`.
pub fn mix_columns(x: &StateMatrix, m: &MixingMatrix) -> Result<StateMatrix> {
    check_dim(m, x)?;
    let v = x.v();
    let q = x.modulus();
    let mut out = vec![0u64; v * v];
    for c in 0..v {
        let y = m.apply(&x.column(c), q);
        for r in 0..v {
            out[r * v + c] = y[r];
        }
    }
    Ok(x.with_values(out))
}

/// `Y[r, :] = M * X[r, :]`, i.e. `Y = X M^T`.
pub fn mix_rows(x: &StateMatrix, m: &MixingMatrix) -> Result<StateMatrix> {
    check_dim(m, x)?;
    let v = x.v();
    let q = x.modulus();
    let mut out = Vec::with_capacity(v * v);
    for r in 0..v {
        out.extend(m.apply(&x.row(r), q));
    }
    Ok(x.with_values(out))
}

/// `M X M^T`; the streaming order of the result is flipped.
pub fn mrmc(x: &StateMatrix, m: &MixingMatrix) -> Result<StateMatrix> {
    let mut y = mix_rows(&mix_columns(x, m)?, m)?;
    y.set_order(x.order().flipped());
    Ok(y)
}
