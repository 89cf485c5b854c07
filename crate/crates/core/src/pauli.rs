//! Single-site operator primitives and multi-site operator terms.
//!
//! σʸ is included even though the ring Hamiltonian has no σʸ term, because
//! σ± = (σˣ ± iσʸ)/2 appears in the effective models.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Single-site operator primitive in the σᶻ basis (`|↑⟩ = |0⟩`, `|↓⟩ = |1⟩`).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Primitive {
    Identity,
    SigmaX,
    SigmaY,
    SigmaZ,
    /// σ⁺ = (σˣ + iσʸ)/2, raises ↓ to ↑.
    SigmaPlus,
    /// σ⁻ = (σˣ - iσʸ)/2, lowers ↑ to ↓.
    SigmaMinus,
    ProjUp,
    ProjDown,
}

impl Primitive {
    /// 2×2 matrix, row/column order `(↑, ↓)`.
    pub fn matrix(&self) -> DMatrix<C64> {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let rows: [[C64; 2]; 2] = match self {
            Primitive::Identity => [[o, z], [z, o]],
            Primitive::SigmaX => [[z, o], [o, z]],
            Primitive::SigmaY => [[z, -i], [i, z]],
            Primitive::SigmaZ => [[o, z], [z, -o]],
            Primitive::SigmaPlus => [[z, o], [z, z]],
            Primitive::SigmaMinus => [[z, z], [o, z]],
            Primitive::ProjUp => [[o, z], [z, z]],
            Primitive::ProjDown => [[z, z], [z, o]],
        };
        DMatrix::from_fn(2, 2, |r, c| rows[r][c])
    }
}

/// A product of single-site primitives with a complex coefficient.
///
/// At most one primitive may act on each site.
#[derive(Clone, Debug)]
pub struct OperatorTerm {
    pub coefficient: C64,
    pub factors: Vec<(usize, Primitive)>,
}

impl OperatorTerm {
    pub fn new(coefficient: C64, mut factors: Vec<(usize, Primitive)>) -> Result<Self> {
        factors.sort_by_key(|&(site, _)| site);
        for w in factors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Contract(format!(
                    "two primitives on site {}",
                    w[0].0
                )));
            }
        }
        Ok(Self {
            coefficient,
            factors,
        })
    }

    /// Sites touched by this term, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.factors.iter().map(|&(s, _)| s).collect()
    }

    /// Dense matrix over the full `2^n`-dimensional space (test/oracle use;
    /// site 0 is the least-significant bit of the basis index).
    pub fn to_dense(&self, n_sites: usize) -> Result<DMatrix<C64>> {
        let dim = 1usize << n_sites;
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        let mats: Vec<(usize, DMatrix<C64>)> = self
            .factors
            .iter()
            .map(|&(s, p)| {
                if s >= n_sites {
                    Err(Error::Contract(format!("site {s} beyond {n_sites} sites")))
                } else {
                    Ok((s, p.matrix()))
                }
            })
            .collect::<Result<_>>()?;
        for col in 0..dim {
            // apply each factor to the basis ket `col`
            let mut amps: Vec<(usize, C64)> = vec![(col, self.coefficient)];
            for (site, m) in &mats {
                let mut next = Vec::with_capacity(amps.len() * 2);
                for &(ket, amp) in &amps {
                    let b = (ket >> site) & 1;
                    for out_b in 0..2 {
                        let v = m[(out_b, b)];
                        if v != C64::new(0.0, 0.0) {
                            let new_ket = (ket & !(1usize << site)) | (out_b << site);
                            next.push((new_ket, amp * v));
                        }
                    }
                }
                amps = next;
            }
            for (row, amp) in amps {
                out[(row, col)] += amp;
            }
        }
        Ok(out)
    }
}

/// Dense sum of terms (test/oracle use).
pub fn terms_to_dense(n_sites: usize, terms: &[OperatorTerm]) -> Result<DMatrix<C64>> {
    let dim = 1usize << n_sites;
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for t in terms {
        out += t.to_dense(n_sites)?;
    }
    Ok(out)
}
