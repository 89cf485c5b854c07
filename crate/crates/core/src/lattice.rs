//! Spin configurations on a ring: bit-level basis machinery, sector labels,
//! and bubble-pattern queries used by every other module.
//!
//! A configuration is a cyclic pattern of `N` spins with bit `0` ↔ ↑ and
//! bit `1` ↔ ↓. Site indices are always taken modulo `N`, identifying site
//! `N+1` with site `1`. The canonical basis order is the integer value of
//! the bit pattern (site 1 stored in the least-significant bit), ascending,
//! so matrix snapshots are byte-reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;

/// Minimal ring size. An `N = 2` ring double-counts its single bond, so it
/// is rejected outright rather than handled by convention.
pub const N_MIN: usize = 3;

/// A classical spin configuration on a ring of `n_sites` spins.
///
/// Bit `j` of `bits` holds the state of site `j` (0-based): `0` for ↑,
/// `1` for ↓.
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    n_sites: usize,
    bits: u64,
}

impl SpinConfig {
    pub fn new(n_sites: usize, bits: u64) -> Result<Self> {
        check_ring_size(n_sites, crate::N_MAX_KRYLOV)?;
        Self::new_unchecked(n_sites, bits)
    }

    /// Skips the ring-size minimum; measurement outcomes of toy vectors
    /// built outside the ring machinery still need a bit-pattern carrier.
    pub(crate) fn new_unchecked(n_sites: usize, bits: u64) -> Result<Self> {
        if n_sites == 0 || n_sites > 64 {
            return Err(Error::SizeOutOfRange {
                n: n_sites,
                min: 1,
                max: 64,
            });
        }
        if n_sites < 64 && bits >> n_sites != 0 {
            return Err(Error::Contract(format!(
                "bit pattern {bits:#b} has support beyond {n_sites} sites"
            )));
        }
        Ok(Self { n_sites, bits })
    }

    pub fn all_up(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, 0)
    }

    pub fn all_down(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, (1u64 << n_sites) - 1)
    }

    /// Parse from a `'0'`/`'1'` string, site 1 first.
    pub fn from_bit_string(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        let mut n = 0usize;
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << j,
                _ => return Err(Error::Contract(format!("invalid bit character {c:?}"))),
            }
            n = j + 1;
        }
        Self::new(n, bits)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Raw bit pattern; also the canonical basis index.
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Canonical basis index of this configuration.
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    /// True when site `j` (taken modulo `N`) is ↓.
    pub fn is_down(&self, j: usize) -> bool {
        self.bits >> (j % self.n_sites) & 1 == 1
    }

    /// σᶻ eigenvalue (&pm;1) at site `j`.
    pub fn z(&self, j: usize) -> i64 {
        if self.is_down(j) {
            -1
        } else {
            1
        }
    }

    pub fn down_count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn flipped(&self, j: usize) -> Self {
        Self {
            n_sites: self.n_sites,
            bits: self.bits ^ (1 << (j % self.n_sites)),
        }
    }

    /// Cyclic rotation moving site `j` to site `j + k`.
    pub fn rotated(&self, k: usize) -> Self {
        let n = self.n_sites;
        let k = k % n;
        let mask = mask(n);
        let bits = ((self.bits << k) | (self.bits >> (n - k).min(63))) & mask;
        Self { n_sites: n, bits }
    }

    /// Global spin flip (↑ ↔ ↓ on every site).
    pub fn flipped_all(&self) -> Self {
        Self {
            n_sites: self.n_sites,
            bits: !self.bits & mask(self.n_sites),
        }
    }

    /// Serialize as a `'0'`/`'1'` string, site 1 first.
    pub fn bit_string(&self) -> String {
        (0..self.n_sites)
            .map(|j| if self.is_down(j) { '1' } else { '0' })
            .collect()
    }
}

impl serde::Serialize for SpinConfig {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.bit_string())
    }
}

impl<'de> serde::Deserialize<'de> for SpinConfig {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        SpinConfig::from_bit_string(&s).map_err(serde::de::Error::custom)
    }
}

impl std::fmt::Debug for SpinConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SpinConfig({})", self.bit_string())
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn check_ring_size(n: usize, max: usize) -> Result<()> {
    if n < N_MIN || n > max {
        return Err(Error::SizeOutOfRange {
            n,
            min: N_MIN,
            max,
        });
    }
    Ok(())
}

/// Model couplings for the ring Hamiltonian, in units of `J` with `ħ = 1`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Ring size.
    pub n_sites: usize,
    /// Ferromagnetic coupling, `J > 0`.
    pub j: f64,
    /// Transverse field.
    pub h_x: f64,
    /// Longitudinal field.
    pub h_z: f64,
}

impl ModelParams {
    pub fn new(n_sites: usize, j: f64, h_x: f64, h_z: f64) -> Result<Self> {
        check_ring_size(n_sites, crate::N_MAX_KRYLOV)?;
        if !(j > 0.0) {
            return Err(Error::Contract(format!("J must be positive, got {j}")));
        }
        Ok(Self { n_sites, j, h_x, h_z })
    }

    pub fn with_fields(&self, h_x: f64, h_z: f64) -> Self {
        Self { h_x, h_z, ..*self }
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }
}

/// The resonance condition `h_z = -2J/n` and the detuning away from it.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSpec {
    /// Bubble size selected by the resonance.
    pub n: usize,
    /// Resonant longitudinal field, `-2J/n`.
    pub h_z_res: f64,
    /// Detuning `δ = h_z + 2J/n`.
    pub delta: f64,
}

impl ResonanceSpec {
    /// Exact resonance for bubble size `n`.
    pub fn exact(n: usize, j: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Contract("resonance index n must be positive".into()));
        }
        Ok(Self {
            n,
            h_z_res: -2.0 * j / n as f64,
            delta: 0.0,
        })
    }

    /// Resonance data for an arbitrary field `h_z` relative to the
    /// `n`-bubble condition.
    pub fn from_field(n: usize, j: f64, h_z: f64) -> Result<Self> {
        let exact = Self::exact(n, j)?;
        Ok(Self {
            delta: h_z - exact.h_z_res,
            ..exact
        })
    }

    /// Longitudinal field corresponding to this spec.
    pub fn h_z(&self) -> f64 {
        self.h_z_res + self.delta
    }
}

/// All `2^N` configurations in canonical (bit-pattern ascending) order.
pub fn enumerate_basis(n_sites: usize) -> Result<Vec<SpinConfig>> {
    check_ring_size(n_sites, crate::N_MAX_KRYLOV)?;
    Ok(exec::map_indexed(1usize << n_sites, |i| SpinConfig {
        n_sites,
        bits: i as u64,
    }))
}

/// Magnetization `M = (N_↑ - N_↓)/N ∈ [-1, 1]`.
pub fn magnetization_of(config: &SpinConfig) -> f64 {
    let n = config.n_sites as f64;
    let down = config.down_count() as f64;
    (n - 2.0 * down) / n
}

/// Diagonal (classical) energy `-J Σ_j z_j z_{j+1} - h_z Σ_j z_j` with
/// cyclic bonds and `z_j = ±1`.
pub fn classical_energy(config: &SpinConfig, params: &ModelParams) -> f64 {
    classical_energy_bits(config.bits, config.n_sites, params.j, params.h_z)
}

/// Bit-level form of [`classical_energy`] used in matrix-build hot loops.
pub(crate) fn classical_energy_bits(bits: u64, n_sites: usize, j: f64, h_z: f64) -> f64 {
    let m = mask(n_sites);
    // z_j z_{j+1} = -1 exactly where the cyclically shifted pattern differs.
    let shifted = ((bits << 1) | (bits >> (n_sites - 1))) & m;
    let misaligned = (bits ^ shifted).count_ones() as f64;
    let aligned = n_sites as f64 - misaligned;
    let down = bits.count_ones() as f64;
    let up = n_sites as f64 - down;
    -j * (aligned - misaligned) - h_z * (up - down)
}

/// A maximal run of ↓ spins, bounded by ↑ on both cyclic sides.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct BubbleRun {
    /// Site index of the first ↓ spin of the run (0-based).
    pub start: usize,
    /// Number of ↓ spins in the run.
    pub len: usize,
}

/// Result of decomposing a configuration into maximal ↓ runs.
///
/// The all-down configuration has no ↑ delimiter; it is reported as a
/// single run of length `N` with `wrapping` set, because the λₙ projector
/// definition requires ↑ delimiters and treats that case separately (all
/// λₙ vanish there).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BubbleDecomposition {
    pub runs: Vec<BubbleRun>,
    pub wrapping: bool,
}

impl BubbleDecomposition {
    pub fn total_down(&self) -> usize {
        self.runs.iter().map(|r| r.len).sum()
    }
}

/// Decompose a configuration into maximal ↓ runs (bubbles).
pub fn bubble_decomposition(config: &SpinConfig) -> BubbleDecomposition {
    let n = config.n_sites;
    if config.down_count() == n {
        return BubbleDecomposition {
            runs: vec![BubbleRun { start: 0, len: n }],
            wrapping: true,
        };
    }
    let mut runs = Vec::new();
    let mut j = 0;
    while j < n {
        if config.is_down(j) && !config.is_down(j + n - 1) {
            // run start: site j is ↓ and its left cyclic neighbor is ↑
            let mut len = 0;
            while config.is_down(j + len) {
                len += 1;
            }
            runs.push(BubbleRun { start: j, len });
        }
        j += 1;
    }
    runs.sort_by_key(|r| r.start);
    BubbleDecomposition {
        runs,
        wrapping: false,
    }
}
