//! Numerical quasi-degenerate perturbation theory over a sparse operator.
//!
//! The extractor splits `H = H₀ + V` into its diagonal and off-diagonal
//! parts and computes effective couplings between the states of a
//! degenerate sector. Order one is the bare block `PVP`. Order two uses the
//! symmetrized second-order formula
//!
//! ```text
//! H⁽²⁾_ab = (1/2) Σ_{m∉P} V_am V_mb [1/(E_a - E_m) + 1/(E_b - E_m)] ,
//! ```
//!
//! and order `k ≥ 3` composes the resolvent recursively,
//! `H⁽ᵏ⁾ = P V (R V)^{k-1} P` with `R = Q/(E₀ - H₀)`, which is the leading
//! `k`-flip amplitude when the sector is block-off-diagonal (`PVP = 0`).
//! These are the quantities the analytic effective-model coefficients are
//! checked against.

use serde::{Deserialize, Serialize};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamiltonian::build_full;
use crate::lattice::{ModelParams, ResonanceSpec, SpinConfig};
use crate::sparse::SparseHamiltonian;
use crate::C64;

/// Tolerances for the extractor.
#[derive(Copy, Clone, Debug)]
pub struct ExtractOptions {
    /// Sector states must agree in diagonal energy to this tolerance.
    pub sector_tol: f64,
    /// Out-of-sector states closer than this to the sector energy trigger a
    /// degeneracy error.
    pub degeneracy_tol: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            sector_tol: 1e-8,
            degeneracy_tol: 1e-8,
        }
    }
}

/// Effective couplings between the `sector` states of `h` at the given
/// perturbative order. Rows/columns follow the order of `sector`.
pub fn extract_effective_couplings(
    h: &SparseHamiltonian,
    sector: &[usize],
    order: usize,
) -> Result<DMatrix<C64>> {
    extract_effective_couplings_with(h, sector, order, &ExtractOptions::default())
}

pub fn extract_effective_couplings_with(
    h: &SparseHamiltonian,
    sector: &[usize],
    order: usize,
    opts: &ExtractOptions,
) -> Result<DMatrix<C64>> {
    if order == 0 {
        return Err(Error::Contract("perturbative order must be positive".into()));
    }
    if sector.is_empty() {
        return Err(Error::Contract("empty sector".into()));
    }
    let dim = h.dim();
    let diag: Vec<f64> = h.diagonal().iter().map(|v| v.re).collect();
    let mut in_sector = vec![false; dim];
    let mut pos = vec![usize::MAX; dim];
    for (i, &s) in sector.iter().enumerate() {
        if s >= dim {
            return Err(Error::ShapeMismatch(format!(
                "sector index {s} outside dimension {dim}"
            )));
        }
        in_sector[s] = true;
        pos[s] = i;
    }
    let e0 = sector.iter().map(|&s| diag[s]).sum::<f64>() / sector.len() as f64;
    let scale = e0.abs().max(1.0);
    for &s in sector {
        if (diag[s] - e0).abs() > opts.sector_tol * scale {
            return Err(Error::Contract(format!(
                "sector state {s} not degenerate: E = {} vs E0 = {e0}",
                diag[s]
            )));
        }
    }

    let m = sector.len();
    let mut out = DMatrix::<C64>::zeros(m, m);

    // V x, dropping the diagonal part of H
    let apply_v = |x: &[C64], y: &mut Vec<C64>| {
        y.resize(dim, C64::new(0.0, 0.0));
        h.apply(x, y);
        for i in 0..dim {
            y[i] -= C64::new(diag[i], 0.0) * x[i];
        }
    };

    match order {
        1 => {
            for (bi, &b) in sector.iter().enumerate() {
                let mut x = vec![C64::new(0.0, 0.0); dim];
                x[b] = C64::new(1.0, 0.0);
                let mut y = Vec::new();
                apply_v(&x, &mut y);
                for (ai, &a) in sector.iter().enumerate() {
                    out[(ai, bi)] = y[a];
                }
            }
        }
        2 => {
            // symmetrized second order with per-state energies
            for (bi, &b) in sector.iter().enumerate() {
                let mut x = vec![C64::new(0.0, 0.0); dim];
                x[b] = C64::new(1.0, 0.0);
                let mut vb = Vec::new();
                apply_v(&x, &mut vb);
                check_degeneracy(&vb, &in_sector, &diag, e0, opts, h)?;
                for (ai, &a) in sector.iter().enumerate() {
                    let mut xa = vec![C64::new(0.0, 0.0); dim];
                    xa[a] = C64::new(1.0, 0.0);
                    let mut va = Vec::new();
                    apply_v(&xa, &mut va);
                    let mut acc = C64::new(0.0, 0.0);
                    for mth in 0..dim {
                        if in_sector[mth] {
                            continue;
                        }
                        let vam = va[mth].conj();
                        let vmb = vb[mth];
                        if vam == C64::new(0.0, 0.0) || vmb == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let denom_a = diag[a] - diag[mth];
                        let denom_b = diag[b] - diag[mth];
                        acc += vam * vmb * C64::new(0.5 * (1.0 / denom_a + 1.0 / denom_b), 0.0);
                    }
                    out[(ai, bi)] = acc;
                }
            }
        }
        k => {
            // P V (R V)^{k-1} P; requires a block-off-diagonal sector
            for (bi, &b) in sector.iter().enumerate() {
                let mut x = vec![C64::new(0.0, 0.0); dim];
                x[b] = C64::new(1.0, 0.0);
                let mut y = Vec::new();
                for step in 1..k {
                    apply_v(&x, &mut y);
                    check_degeneracy(&y, &in_sector, &diag, e0, opts, h)?;
                    if step == 1 {
                        for (ai, &a) in sector.iter().enumerate() {
                            if ai != bi && y[a].norm() > 1e-12 {
                                return Err(Error::Contract(format!(
                                    "sector is not block-off-diagonal (V[{a},{b}] != 0); \
                                     the recursive order-{k} composition does not apply",
                                )));
                            }
                        }
                    }
                    let scale = e0.abs().max(1.0);
                    for i in 0..dim {
                        // the degeneracy check above guarantees near-zero
                        // denominators carry only numerical dust
                        let resolvable =
                            !in_sector[i] && (diag[i] - e0).abs() >= opts.degeneracy_tol * scale;
                        x[i] = if resolvable {
                            y[i] / C64::new(e0 - diag[i], 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        };
                    }
                }
                apply_v(&x, &mut y);
                for (ai, &a) in sector.iter().enumerate() {
                    out[(ai, bi)] = y[a];
                }
            }
        }
    }
    Ok(out)
}

fn check_degeneracy(
    reached: &[C64],
    in_sector: &[bool],
    diag: &[f64],
    e0: f64,
    opts: &ExtractOptions,
    h: &SparseHamiltonian,
) -> Result<()> {
    let scale = e0.abs().max(1.0);
    let mut colliding = Vec::new();
    for (i, amp) in reached.iter().enumerate() {
        if !in_sector[i] && amp.norm() > 1e-14 && (diag[i] - e0).abs() < opts.degeneracy_tol * scale
        {
            let n = (h.dim() as f64).log2().round() as usize;
            colliding.push(
                SpinConfig::new(n, i as u64)
                    .map(|c| c.bit_string())
                    .unwrap_or_else(|_| format!("index {i}")),
            );
        }
    }
    if colliding.is_empty() {
        Ok(())
    } else {
        Err(Error::Degeneracy {
            configs: colliding,
            energy: e0,
        })
    }
}

/// All basis indices whose diagonal energy matches that of `reference`.
pub fn degenerate_sector(h: &SparseHamiltonian, reference: usize, tol: f64) -> Vec<usize> {
    let diag = h.diagonal();
    let e0 = diag[reference].re;
    let scale = e0.abs().max(1.0);
    (0..h.dim())
        .filter(|&i| (diag[i].re - e0).abs() < tol * scale)
        .collect()
}

/// One rung of an extraction ladder.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderPoint {
    pub h_x: f64,
    /// Extracted creation element divided by `h_xⁿ/Jⁿ⁻¹`.
    pub estimate: f64,
}

/// Result of extracting `c_n` over a ladder of transverse fields.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingExtraction {
    pub n: usize,
    /// Richardson-extrapolated `h_x → 0` value.
    pub value: f64,
    pub ladder: Vec<LadderPoint>,
    /// Spread of the ladder around the extrapolated value.
    pub residual: f64,
}

/// Extract the `n`-bubble creation coefficient `c_n` from the full ring
/// model at exact resonance, over a ladder of `h_x` values.
pub fn extract_creation_coefficient(
    n_bubble: usize,
    n_sites: usize,
    hx_ladder: &[f64],
) -> Result<CouplingExtraction> {
    if n_bubble == 0 {
        return Err(Error::Contract("bubble size must be positive".into()));
    }
    if hx_ladder.is_empty() {
        return Err(Error::Data("empty h_x ladder".into()));
    }
    let res = ResonanceSpec::exact(n_bubble, 1.0)?;
    let mut ladder = Vec::with_capacity(hx_ladder.len());
    for &h_x in hx_ladder {
        let params = ModelParams::new(n_sites, 1.0, h_x, res.h_z_res)?;
        let h = build_full(&params)?;
        let sector = degenerate_sector(&h, 0, 1e-9);
        let eff = extract_effective_couplings(&h, &sector, n_bubble)?;
        let up_pos = sector
            .iter()
            .position(|&s| s == 0)
            .ok_or_else(|| Error::Contract("all-up missing from sector".into()))?;
        let bubble_bits = ((1usize << n_bubble) - 1) << 1;
        let bubble_pos = sector
            .iter()
            .position(|&s| s == bubble_bits)
            .ok_or_else(|| Error::Contract("bubble state missing from sector".into()))?;
        let element = eff[(bubble_pos, up_pos)].re;
        ladder.push(LadderPoint {
            h_x,
            estimate: element / (h_x.powi(n_bubble as i32) / 1f64.powi(n_bubble as i32 - 1)),
        });
    }
    let value = richardson(&ladder);
    let residual = ladder
        .iter()
        .map(|p| (p.estimate - value).abs())
        .fold(0.0, f64::max);
    Ok(CouplingExtraction {
        n: n_bubble,
        value,
        ladder,
        residual,
    })
}

/// Richardson extrapolation to `h_x → 0` assuming an `O(h_x²)` leading
/// correction; with fewer than two rungs the last estimate is returned.
pub fn richardson(ladder: &[LadderPoint]) -> f64 {
    match ladder.len() {
        0 => f64::NAN,
        1 => ladder[0].estimate,
        _ => {
            let a = &ladder[ladder.len() - 2];
            let b = &ladder[ladder.len() - 1];
            let r = (a.h_x / b.h_x).powi(2);
            if (r - 1.0).abs() < 1e-12 {
                return b.estimate;
            }
            (r * b.estimate - a.estimate) / (r - 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one_reproduces_bare_elements() {
        // sector {all-up, one-↓ states} at the n=1 resonance
        let params = ModelParams::new(6, 1.0, 0.02, -2.0).unwrap();
        let h = build_full(&params).unwrap();
        let sector = degenerate_sector(&h, 0, 1e-9);
        // every blockaded configuration is degenerate with all-up here
        assert_eq!(sector.len() as u64, crate::effective::lucas(6));
        let eff = extract_effective_couplings(&h, &sector, 1).unwrap();
        let up_pos = sector.iter().position(|&s| s == 0).unwrap();
        for (pos, &s) in sector.iter().enumerate() {
            if (s as u64).count_ones() == 1 {
                assert!((eff[(pos, up_pos)].re + params.h_x).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn extracts_c2_exactly() {
        let out = extract_creation_coefficient(2, 6, &[1e-2, 5e-3, 2.5e-3]).unwrap();
        assert!(
            (out.value + 1.0).abs() < 1e-6,
            "c2 = {} (residual {:.2e})",
            out.value,
            out.residual
        );
    }

    #[test]
    fn extracts_c3_exactly() {
        let out = extract_creation_coefficient(3, 8, &[1e-2, 5e-3]).unwrap();
        assert!(
            (out.value + 81.0 / 64.0).abs() < 1e-3,
            "c3 = {} vs -81/64",
            out.value
        );
    }

    #[test]
    fn incomplete_sector_triggers_degeneracy_error() {
        // at the n=1 resonance the single-↓ states are degenerate with
        // all-up; leaving them out of the sector makes them colliding
        // out-of-sector intermediates at second order
        let params = ModelParams::new(6, 1.0, 1e-2, -2.0).unwrap();
        let h = build_full(&params).unwrap();
        let full = degenerate_sector(&h, 0, 1e-9);
        assert!(full.len() > 1);
        let partial = vec![0usize];
        let err = extract_effective_couplings(&h, &partial, 2).unwrap_err();
        match err {
            Error::Degeneracy { configs, .. } => assert!(!configs.is_empty()),
            other => panic!("expected degeneracy error, got {other}"),
        }
    }

    #[test]
    fn partial_sector_collides_at_higher_order() {
        // with only one 2-bubble in the sector, the other 2-bubble
        // placements appear as degenerate intermediates after two flips
        let params = ModelParams::new(6, 1.0, 1e-2, -1.0).unwrap();
        let h = build_full(&params).unwrap();
        let partial = vec![0usize, 0b000110];
        let err = extract_effective_couplings(&h, &partial, 3).unwrap_err();
        assert!(matches!(err, Error::Degeneracy { .. }), "got {err}");
    }

    #[test]
    fn richardson_handles_flat_ladders() {
        let flat = vec![
            LadderPoint { h_x: 0.01, estimate: -1.0 },
            LadderPoint { h_x: 0.005, estimate: -1.0 },
        ];
        assert_eq!(richardson(&flat), -1.0);
        let sloped = vec![
            LadderPoint { h_x: 0.02, estimate: 1.0 + 4e-4 },
            LadderPoint { h_x: 0.01, estimate: 1.0 + 1e-4 },
        ];
        assert!((richardson(&sloped) - 1.0).abs() < 1e-12);
    }
}
