//! Resonance effective Hamiltonians and the blockaded (PXP) subspace.
//!
//! Near the `n`-bubble resonance `h_z = -2J/n` the slow dynamics of the
//! polarized sector are governed by an effective Hamiltonian obtained by a
//! Schrieffer-Wolff rotation of the ring model. At `n = 1` the first- and
//! second-order result is
//!
//! ```text
//! H⁽¹²⁾ = -h_x Σ P↑σˣP↑ - δ Σ σᶻ
//!         + (h_x²/4J) [ Σ P↑(σ⁺σ⁻ + σ⁻σ⁺)P↑ + 2 Σ P↓ - (3/2) Σ P↓_{j-1}P↓_{j+1} ] ,
//! ```
//!
//! whose first term restricted to the no-adjacent-↓ subspace is the PXP
//! model. For `n ≥ 2` the bubble creation term appears only at order `n`,
//!
//! ```text
//! c_n (h_xⁿ/Jⁿ⁻¹) Σ_j P↑_j (Π_k σ⁻_{j+k}) P↑_{j+n+1} + h.c. ,
//! ```
//!
//! with `c_2 = -1`, `c_3 = -81/64`, while orders one and two contribute a
//! detuning term, four projector-dressed σᶻ diagonal terms, an ↑-flanked
//! hopping term, and a ↓-flanked exchange term that lets adjacent bubbles
//! trade ↓-spins. All index arithmetic is cyclic, so creation windows that
//! straddle the `N → 1` seam are included.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::lattice::{check_ring_size, ModelParams, SpinConfig};
use crate::sparse::SparseHamiltonian;
use crate::C64;

/// Analytic coupling scales of the effective model at resonance `n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EffectiveCoupling {
    /// Resonance index.
    pub n: usize,
    /// Dimensionless creation coefficient `c_n`.
    pub c_n: f64,
    /// Creation rate scale `|c_n| h_xⁿ / Jⁿ⁻¹`.
    pub creation_scale: f64,
    /// 1-bubble hop scale (`h_x²/4J` at `n = 1`, `h_x²n²/(4J(n-1))` above).
    pub hop_scale: f64,
    /// Inter-bubble exchange scale `h_x²n²/(4J(n+1))`.
    pub exchange_scale: f64,
    /// Provenance of `c_n`: fixed analytic value or numerically extracted.
    pub provenance: CouplingProvenance,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingProvenance {
    Analytic,
    Extracted,
}

impl EffectiveCoupling {
    /// Known analytic coefficients: `c_2 = -1`, `c_3 = -81/64`. Higher `n`
    /// has no analytic value; use the numerical extractor instead.
    pub fn analytic(n: usize, params: &ModelParams) -> Option<Self> {
        let c_n = match n {
            2 => -1.0,
            3 => -81.0 / 64.0,
            _ => return None,
        };
        Some(Self::with_cn(n, c_n, params, CouplingProvenance::Analytic))
    }

    /// Assemble the scales for an arbitrary (e.g. extracted) `c_n`.
    pub fn with_cn(
        n: usize,
        c_n: f64,
        params: &ModelParams,
        provenance: CouplingProvenance,
    ) -> Self {
        let (j, h_x) = (params.j, params.h_x);
        let hop_scale = if n == 1 {
            h_x * h_x / (4.0 * j)
        } else {
            h_x * h_x * (n * n) as f64 / (4.0 * j * (n - 1) as f64)
        };
        Self {
            n,
            c_n,
            creation_scale: c_n.abs() * h_x.powi(n as i32) / j.powi(n as i32 - 1),
            hop_scale,
            exchange_scale: h_x * h_x * (n * n) as f64 / (4.0 * j * (n + 1) as f64),
            provenance,
        }
    }
}

fn triplets_for<F>(dim: usize, per_row: F) -> Vec<(u32, u32, C64)>
where
    F: Fn(usize, &mut Vec<(u32, u32, C64)>) + Sync + Send,
{
    let rows = exec::map_indexed(dim, |row| {
        let mut out = Vec::new();
        per_row(row, &mut out);
        out
    });
    let mut flat = Vec::with_capacity(rows.iter().map(Vec::len).sum());
    for r in rows {
        flat.extend(r);
    }
    flat
}

/// First- plus second-order effective Hamiltonian at the `n = 1` resonance.
pub fn build_eff_n1(params: &ModelParams, delta: f64) -> Result<SparseHamiltonian> {
    check_ring_size(params.n_sites, crate::N_MAX_KRYLOV)?;
    let n = params.n_sites;
    let dim = 1usize << n;
    let h_x = params.h_x;
    let w2 = h_x * h_x / (4.0 * params.j);
    let triplets = triplets_for(dim, |col, out| {
        let ket = SpinConfig::new(n, col as u64).expect("enumerated config");
        let mut diag = -delta * (n as f64 - 2.0 * ket.down_count() as f64);
        diag += 2.0 * w2 * ket.down_count() as f64;
        for j in 0..n {
            let up = |s: usize| !ket.is_down(s);
            // creation/annihilation: P↑ σˣ P↑
            if up(j + n - 1) && up(j + 1) {
                let row = col ^ (1usize << j);
                out.push((row as u32, col as u32, C64::new(-h_x, 0.0)));
            }
            // hopping: P↑ (σ⁺σ⁻ + σ⁻σ⁺) P↑
            if up(j + n - 1) && up(j + 2) && (ket.is_down(j) != ket.is_down(j + 1)) {
                let row = col ^ (1usize << j) ^ (1usize << ((j + 1) % n));
                out.push((row as u32, col as u32, C64::new(w2, 0.0)));
            }
            // next-nearest ↓ pair penalty
            if ket.is_down(j + n - 1) && ket.is_down(j + 1) {
                diag -= 1.5 * w2;
            }
        }
        out.push((col as u32, col as u32, C64::new(diag, 0.0)));
    });
    SparseHamiltonian::from_triplets(dim, triplets)
}

/// First-order part of the `n = 1` model only (creation plus detuning);
/// this is the piece whose blockaded restriction is the PXP model.
pub fn build_eff_n1_leading(params: &ModelParams, delta: f64) -> Result<SparseHamiltonian> {
    check_ring_size(params.n_sites, crate::N_MAX_KRYLOV)?;
    let n = params.n_sites;
    let dim = 1usize << n;
    let h_x = params.h_x;
    let triplets = triplets_for(dim, |col, out| {
        let ket = SpinConfig::new(n, col as u64).expect("enumerated config");
        out.push((
            col as u32,
            col as u32,
            C64::new(-delta * (n as f64 - 2.0 * ket.down_count() as f64), 0.0),
        ));
        for j in 0..n {
            if !ket.is_down(j + n - 1) && !ket.is_down(j + 1) {
                let row = col ^ (1usize << j);
                out.push((row as u32, col as u32, C64::new(-h_x, 0.0)));
            }
        }
    });
    SparseHamiltonian::from_triplets(dim, triplets)
}

/// Effective Hamiltonian at an `n ≥ 2` resonance: order-`n` bubble creation
/// plus the order-one/order-two diagonal, hopping, and exchange terms.
///
/// `n = 1` is rejected: the `n/(n-1)` diagonal weight and the ↑-flanked
/// hopping weight diverge there, and the `n = 1` physics is carried by
/// [`build_eff_n1`].
pub fn build_eff_n(
    params: &ModelParams,
    n_bubble: usize,
    delta: f64,
    c_n: f64,
) -> Result<SparseHamiltonian> {
    if n_bubble < 2 {
        return Err(Error::Contract(
            "build_eff_n requires n >= 2; the n = 1 model is build_eff_n1".into(),
        ));
    }
    check_ring_size(params.n_sites, crate::N_MAX_KRYLOV)?;
    let n = params.n_sites;
    if n_bubble + 2 > n {
        return Err(Error::Layout(format!(
            "an {n_bubble}-bubble plus ↑ delimiters does not fit on {n} sites"
        )));
    }
    let dim = 1usize << n;
    let h_x = params.h_x;
    let j_c = params.j;
    let nb = n_bubble as f64;
    let creation = c_n * h_x.powi(n_bubble as i32) / j_c.powi(n_bubble as i32 - 1);
    let diag_scale = h_x * h_x * nb / (4.0 * j_c);
    let hop = h_x * h_x * nb * nb / (4.0 * j_c * (nb - 1.0));
    let exchange = h_x * h_x * nb * nb / (4.0 * j_c * (nb + 1.0));
    let triplets = triplets_for(dim, |col, out| {
        let ket = SpinConfig::new(n, col as u64).expect("enumerated config");
        let down = |s: usize| ket.is_down(s);
        let up = |s: usize| !ket.is_down(s);
        let mut diag = -delta * (n as f64 - 2.0 * ket.down_count() as f64);
        for j in 0..n {
            // projector-dressed σᶻ diagonal terms
            let z = if down(j) { -1.0 } else { 1.0 };
            let weight = match (down(j + n - 1), down(j + 1)) {
                (true, true) => 1.0 / (nb + 1.0),
                (true, false) | (false, true) => 1.0,
                (false, false) => -1.0 / (nb - 1.0),
            };
            diag += diag_scale * weight * z;
            // creation of an n-bubble on sites j+1 ..= j+n, flanked by ↑
            if up(j) && up(j + n_bubble + 1) && (1..=n_bubble).all(|k| up(j + k)) {
                let mut row = col;
                for k in 1..=n_bubble {
                    row ^= 1usize << ((j + k) % n);
                }
                out.push((row as u32, col as u32, C64::new(creation, 0.0)));
                out.push((col as u32, row as u32, C64::new(creation, 0.0)));
            }
            // ↑-flanked hopping of a lone ↓
            if up(j + n - 1) && up(j + 2) && down(j) != down(j + 1) {
                let row = col ^ (1usize << j) ^ (1usize << ((j + 1) % n));
                out.push((row as u32, col as u32, C64::new(hop, 0.0)));
            }
            // ↓-flanked exchange between adjacent bubbles
            if down(j + n - 1) && down(j + 2) && down(j) != down(j + 1) {
                let row = col ^ (1usize << j) ^ (1usize << ((j + 1) % n));
                out.push((row as u32, col as u32, C64::new(-exchange, 0.0)));
            }
        }
        out.push((col as u32, col as u32, C64::new(diag, 0.0)));
    });
    SparseHamiltonian::from_triplets(dim, triplets)
}

/// Basis of a constrained subspace, e.g. the blockaded space at `n = 1`.
#[derive(Clone, Debug)]
pub struct ConstrainedSubspace {
    /// Human-readable constraint identifier.
    pub constraint: String,
    /// Full-space basis indices satisfying the constraint, ascending.
    pub indices: Vec<usize>,
    /// The configurations themselves, in the same order.
    pub configs: Vec<SpinConfig>,
}

impl ConstrainedSubspace {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Position of a full-space index within the subspace, if present.
    pub fn position(&self, index: usize) -> Option<usize> {
        self.indices.binary_search(&index).ok()
    }
}

/// The `n = 1` blockaded subspace: no two adjacent ↓ spins on the ring.
///
/// Its dimension is the Lucas number `L_N`.
pub fn blockade_subspace(n_sites: usize) -> Result<ConstrainedSubspace> {
    check_ring_size(n_sites, crate::N_MAX_KRYLOV)?;
    let dim = 1usize << n_sites;
    let mask = (1u64 << n_sites) - 1;
    let mut indices = Vec::new();
    let mut configs = Vec::new();
    for i in 0..dim {
        let bits = i as u64;
        let rot = ((bits << 1) | (bits >> (n_sites - 1))) & mask;
        if bits & rot == 0 {
            indices.push(i);
            configs.push(SpinConfig::new(n_sites, bits)?);
        }
    }
    Ok(ConstrainedSubspace {
        constraint: "no two adjacent ↓".into(),
        indices,
        configs,
    })
}

/// Lucas numbers `L_k` (`L_1 = 1`, `L_2 = 3`), the blockaded dimension on a
/// ring of `k` sites.
pub fn lucas(k: usize) -> u64 {
    match k {
        0 => 2,
        1 => 1,
        _ => {
            let (mut a, mut b) = (2u64, 1u64);
            for _ in 2..=k {
                let next = a + b;
                a = b;
                b = next;
            }
            b
        }
    }
}

/// Restrict an `n = 1` effective Hamiltonian to the blockaded subspace.
///
/// With the identification ↑ ↔ atomic ground state, the restriction of the
/// first-order term is exactly `-h_x` times the PXP flip structure, and the
/// restricted detuning term is a chemical potential for ↓ excitations up to
/// a constant.
pub fn to_pxp(
    h_eff_n1: &SparseHamiltonian,
    n_sites: usize,
) -> Result<(SparseHamiltonian, ConstrainedSubspace)> {
    let subspace = blockade_subspace(n_sites)?;
    if h_eff_n1.dim() != 1usize << n_sites {
        return Err(Error::ShapeMismatch(format!(
            "operator dimension {} does not match 2^{}",
            h_eff_n1.dim(),
            n_sites
        )));
    }
    let restricted = h_eff_n1.restrict(&subspace.indices)?;
    Ok((restricted, subspace))
}

/// Direct construction of the PXP flip matrix over a blockaded basis
/// (independent of any effective-model build; used as the reference).
pub fn pxp_reference(
    subspace: &ConstrainedSubspace,
    h_x: f64,
    n_sites: usize,
) -> SparseHamiltonian {
    let mut triplets = Vec::new();
    for (p, config) in subspace.configs.iter().enumerate() {
        for j in 0..n_sites {
            if !config.is_down(j + n_sites - 1) && !config.is_down(j + 1) {
                let flipped = config.flipped(j);
                if let Some(q) = subspace.position(flipped.index()) {
                    triplets.push((q as u32, p as u32, C64::new(-h_x, 0.0)));
                }
            }
        }
    }
    SparseHamiltonian::from_triplets(subspace.dim(), triplets).expect("valid pxp triplets")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SpinConfig;

    fn params(n: usize, h_x: f64) -> ModelParams {
        ModelParams::new(n, 1.0, h_x, -2.0).unwrap()
    }

    #[test]
    fn creation_element_first_order() {
        let p = params(8, 0.03);
        let h = build_eff_n1(&p, 0.0).unwrap();
        let up = SpinConfig::all_up(8).unwrap().index();
        let one = SpinConfig::from_bit_string("10000000").unwrap().index();
        assert!((h.entry(one, up).re + p.h_x).abs() < 1e-15);
    }

    #[test]
    fn hop_element_value() {
        let p = params(8, 0.05);
        let h = build_eff_n1(&p, 0.0).unwrap();
        let from = SpinConfig::from_bit_string("01000000").unwrap().index();
        let to = SpinConfig::from_bit_string("00100000").unwrap().index();
        let expect = p.h_x * p.h_x / (4.0 * p.j);
        assert!((h.entry(to, from).re - expect).abs() < 1e-15);
    }

    #[test]
    fn one_down_diagonal() {
        let n = 8;
        let delta = 0.013;
        let p = params(n, 0.05);
        let h = build_eff_n1(&p, delta).unwrap();
        let one = SpinConfig::from_bit_string("00010000").unwrap().index();
        let expect = -delta * (n as f64 - 2.0) + p.h_x * p.h_x / (2.0 * p.j);
        assert!((h.entry(one, one).re - expect).abs() < 1e-15);
    }

    #[test]
    fn all_eff_hamiltonians_hermitian() {
        let p = params(7, 0.11);
        assert!(build_eff_n1(&p, 0.02).unwrap().is_hermitian());
        assert!(build_eff_n(&p, 2, 0.02, -1.0).unwrap().is_hermitian());
        assert!(build_eff_n(&p, 3, -0.01, -81.0 / 64.0).unwrap().is_hermitian());
    }

    #[test]
    fn n2_creation_element() {
        let p = params(8, 0.07);
        let h = build_eff_n(&p, 2, 0.0, -1.0).unwrap();
        let up = SpinConfig::all_up(8).unwrap().index();
        let bubble = SpinConfig::from_bit_string("01100000").unwrap().index();
        let expect = -p.h_x * p.h_x / p.j;
        assert!((h.entry(bubble, up).re - expect).abs() < 1e-15);
        assert!((h.entry(up, bubble).re - expect).abs() < 1e-15);
    }

    #[test]
    fn n3_creation_element() {
        let p = params(9, 0.06);
        let h = build_eff_n(&p, 3, 0.0, -81.0 / 64.0).unwrap();
        let up = SpinConfig::all_up(9).unwrap().index();
        let bubble = SpinConfig::from_bit_string("011100000").unwrap().index();
        let expect = -(81.0 / 64.0) * p.h_x.powi(3) / p.j.powi(2);
        assert!((h.entry(bubble, up).re - expect).abs() < 1e-15);
    }

    #[test]
    fn creation_window_wraps_the_seam() {
        let p = params(8, 0.07);
        let h = build_eff_n(&p, 2, 0.0, -1.0).unwrap();
        let up = SpinConfig::all_up(8).unwrap().index();
        // bubble on sites 7 and 0
        let wrapped = SpinConfig::from_bit_string("10000001").unwrap().index();
        assert!((h.entry(wrapped, up).re + p.h_x * p.h_x).abs() < 1e-15);
    }

    #[test]
    fn exchange_element_pattern() {
        // ↓↓↑↓ -> ↓↑↓↓ carries -h_x² n²/(4J(n+1))
        let p = params(8, 0.09);
        let nb = 2usize;
        let h = build_eff_n(&p, nb, 0.0, -1.0).unwrap();
        let from = SpinConfig::from_bit_string("11010000").unwrap().index();
        let to = SpinConfig::from_bit_string("10110000").unwrap().index();
        let expect = -p.h_x * p.h_x * (nb * nb) as f64 / (4.0 * p.j * (nb + 1) as f64);
        assert!((h.entry(to, from).re - expect).abs() < 1e-15);
    }

    #[test]
    fn eff_n_rejects_n1() {
        assert!(build_eff_n(&params(6, 0.1), 1, 0.0, -1.0).is_err());
    }

    #[test]
    fn blockade_preserved_exactly() {
        // no column of the n=1 model maps a blockaded state out of the
        // blockaded set
        let p = params(8, 0.2);
        let h = build_eff_n1(&p, 0.05).unwrap();
        let sub = blockade_subspace(8).unwrap();
        let blocked: std::collections::HashSet<usize> = sub.indices.iter().copied().collect();
        for (r, c, _) in h.entries() {
            if blocked.contains(&c) {
                assert!(blocked.contains(&r), "leak {c} -> {r}");
            }
        }
    }

    #[test]
    fn lucas_dimensions() {
        let expect = [
            (3, 4),
            (4, 7),
            (5, 11),
            (6, 18),
            (7, 29),
            (8, 47),
            (9, 76),
            (10, 123),
            (11, 199),
            (12, 322),
            (13, 521),
            (14, 843),
        ];
        for (n, l) in expect {
            assert_eq!(lucas(n), l);
            assert_eq!(blockade_subspace(n).unwrap().dim() as u64, l, "N={n}");
        }
    }

    #[test]
    fn pxp_restriction_matches_reference() {
        for n in [4usize, 8, 10] {
            let p = params(n, 0.17);
            let leading = build_eff_n1_leading(&p, 0.0).unwrap();
            let (restricted, sub) = to_pxp(&leading, n).unwrap();
            let reference = pxp_reference(&sub, p.h_x, n);
            assert_eq!(restricted.nnz(), reference.nnz());
            for (r, c, v) in restricted.entries() {
                assert!((v - reference.entry(r, c)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn pxp_spectrum_symmetric_n12() {
        let p = params(12, 0.31);
        let leading = build_eff_n1_leading(&p, 0.0).unwrap();
        let (restricted, _) = to_pxp(&leading, 12).unwrap();
        let eig = restricted.to_dense().symmetric_eigen();
        let mut evals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        evals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = evals.len();
        for i in 0..m / 2 {
            assert!(
                (evals[i] + evals[m - 1 - i]).abs() < 1e-10,
                "pair {i}: {} vs {}",
                evals[i],
                evals[m - 1 - i]
            );
        }
    }

    #[test]
    fn restricted_detuning_is_chemical_potential() {
        // -δ Σ σᶻ restricted = -δN·I + 2δ·diag(#↓)
        let n = 8;
        let delta = 0.23;
        let p = ModelParams::new(n, 1.0, 0.0, -2.0).unwrap();
        let h = build_eff_n1_leading(&p, delta).unwrap();
        let (restricted, sub) = to_pxp(&h, n).unwrap();
        for (pos, config) in sub.configs.iter().enumerate() {
            let want = -delta * n as f64 + 2.0 * delta * config.down_count() as f64;
            assert!((restricted.entry(pos, pos).re - want).abs() < 1e-13);
        }
    }

    #[test]
    fn reachability_closure_matches_process_rules() {
        // matrix reachability from all-up under the n=2 model equals the
        // closure of {create/annihilate 2-bubble, hop lone ↓, exchange ↓}
        use std::collections::{HashSet, VecDeque};
        let n = 8;
        let nb = 2usize;
        let p = params(n, 0.1);
        let h = build_eff_n(&p, nb, 0.01, -1.0).unwrap();

        let mut adjacency: std::collections::HashMap<usize, Vec<usize>> = Default::default();
        for (r, c, _) in h.entries() {
            if r != c {
                adjacency.entry(c).or_default().push(r);
            }
        }
        let bfs = |start: usize, next: &dyn Fn(usize) -> Vec<usize>| -> HashSet<usize> {
            let mut seen = HashSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(s) = queue.pop_front() {
                for t in next(s) {
                    if seen.insert(t) {
                        queue.push_back(t);
                    }
                }
            }
            seen
        };
        let matrix_closure = bfs(0, &|s| adjacency.get(&s).cloned().unwrap_or_default());

        let rule_next = |s: usize| -> Vec<usize> {
            let config = SpinConfig::new(n, s as u64).unwrap();
            let up = |k: usize| !config.is_down(k);
            let down = |k: usize| config.is_down(k);
            let mut out = Vec::new();
            for j in 0..n {
                // create or annihilate an ↑-flanked n-run
                if up(j) && up(j + nb + 1) {
                    let body_up = (1..=nb).all(|k| up(j + k));
                    let body_down = (1..=nb).all(|k| down(j + k));
                    if body_up || body_down {
                        let mut t = s;
                        for k in 1..=nb {
                            t ^= 1usize << ((j + k) % n);
                        }
                        out.push(t);
                    }
                }
                // hop a lone ↓ between ↑ flanks
                if up(j + n - 1) && up(j + 2) && down(j) != down(j + 1) {
                    out.push(s ^ (1usize << j) ^ (1usize << ((j + 1) % n)));
                }
                // exchange a ↓ between adjacent bubbles
                if down(j + n - 1) && down(j + 2) && down(j) != down(j + 1) {
                    out.push(s ^ (1usize << j) ^ (1usize << ((j + 1) % n)));
                }
            }
            out
        };
        let rule_closure = bfs(0, &rule_next);
        assert_eq!(matrix_closure, rule_closure);
    }

    #[test]
    fn coupling_scales() {
        let p = ModelParams::new(6, 1.0, 0.1, -1.0).unwrap();
        let c = EffectiveCoupling::analytic(2, &p).unwrap();
        assert_eq!(c.c_n, -1.0);
        assert!((c.creation_scale - 0.01).abs() < 1e-15);
        assert!((c.hop_scale - 0.01).abs() < 1e-15);
        assert!((c.exchange_scale - 0.01 / 3.0).abs() < 1e-15);
        let c3 = EffectiveCoupling::analytic(3, &p).unwrap();
        assert_eq!(c3.c_n, -81.0 / 64.0);
        assert!(EffectiveCoupling::analytic(4, &p).is_none());
    }
}
