//! Exact time evolution of dense state vectors.
//!
//! Two backends: an adaptive Lanczos (Krylov) propagator working through
//! matrix-vector products only, which is the performance path for sparse
//! operators, and a dense-eigenbasis propagator for small rings that serves
//! as the trust anchor. Driven evolution steps a [`DriveSchedule`] with
//! midpoint-sampled fields (second order in the step size).

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::DrivenIsingOp;
use crate::lattice::{ModelParams, SpinConfig};
use crate::observables;
use crate::schedule::DriveSchedule;
use crate::sparse::SparseHamiltonian;
use crate::C64;

/// A normalized amplitude vector over the `2^N` ring basis.
#[derive(Clone, Debug)]
pub struct DenseState {
    n_sites: usize,
    amp: Vec<C64>,
}

impl DenseState {
    pub fn new(n_sites: usize, amp: Vec<C64>) -> Result<Self> {
        if amp.len() != 1usize << n_sites {
            return Err(Error::ShapeMismatch(format!(
                "amplitude vector of length {} for {n_sites} sites",
                amp.len()
            )));
        }
        Ok(Self { n_sites, amp })
    }

    /// The basis vector of a classical configuration.
    pub fn from_config(config: &SpinConfig) -> Self {
        let mut amp = vec![C64::new(0.0, 0.0); 1usize << config.n_sites()];
        amp[config.index()] = C64::new(1.0, 0.0);
        Self {
            n_sites: config.n_sites(),
            amp,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amp(&self) -> &[C64] {
        &self.amp
    }

    pub fn amp_mut(&mut self) -> &mut [C64] {
        &mut self.amp
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &DenseState) -> C64 {
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Distance `‖ψ - φ‖₂`.
    pub fn distance(&self, other: &DenseState) -> f64 {
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Image under the global spin flip (every site ↑ ↔ ↓).
    pub fn global_flip(&self) -> Self {
        let mask = self.amp.len() - 1;
        let amp = (0..self.amp.len()).map(|i| self.amp[i ^ mask]).collect();
        Self {
            n_sites: self.n_sites,
            amp,
        }
    }
}

/// `⟨ψ|H|ψ⟩` for a Hermitian operator.
pub fn energy_expectation(h: &SparseHamiltonian, state: &DenseState) -> f64 {
    let mut y = vec![C64::new(0.0, 0.0); state.dim()];
    h.apply(state.amp(), &mut y);
    state
        .amp()
        .iter()
        .zip(&y)
        .map(|(a, b)| (a.conj() * b).re)
        .sum()
}

/// Matrix-free Hermitian operator interface for the Krylov propagator.
pub trait LinearOp: Sync {
    fn dim(&self) -> usize;
    fn apply_to(&self, x: &[C64], y: &mut [C64]);
    /// Upper bound on the spectral radius, used to size substeps.
    fn spectral_bound(&self) -> f64;
}

impl LinearOp for SparseHamiltonian {
    fn dim(&self) -> usize {
        SparseHamiltonian::dim(self)
    }

    fn apply_to(&self, x: &[C64], y: &mut [C64]) {
        self.apply(x, y);
    }

    fn spectral_bound(&self) -> f64 {
        self.norm_bound()
    }
}

struct FixedField<'a> {
    op: &'a DrivenIsingOp,
    h_x: f64,
    h_z: f64,
}

impl LinearOp for FixedField<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply_to(&self, x: &[C64], y: &mut [C64]) {
        self.op.apply(self.h_x, self.h_z, x, y);
    }

    fn spectral_bound(&self) -> f64 {
        self.op.norm_bound(self.h_x, self.h_z)
    }
}

/// Controls for the Lanczos stepper.
#[derive(Copy, Clone, Debug)]
pub struct KrylovOptions {
    /// Per-substep truncation target (a posteriori estimate).
    pub tol: f64,
    /// Largest Krylov dimension before the step is split.
    pub m_max: usize,
    /// Target `‖H‖·dt` per substep.
    pub step_budget: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            m_max: 48,
            step_budget: 8.0,
        }
    }
}

/// `e^{-iHt} v` by adaptive Lanczos iteration.
pub fn krylov_expv(op: &impl LinearOp, v: &[C64], t: f64, opts: &KrylovOptions) -> Vec<C64> {
    let bound = op.spectral_bound();
    let n_sub = if bound * t.abs() > opts.step_budget {
        (bound * t.abs() / opts.step_budget).ceil() as usize
    } else {
        1
    };
    let dt = t / n_sub as f64;
    let mut x = v.to_vec();
    for _ in 0..n_sub {
        x = lanczos_step(op, &x, dt, opts, 0);
    }
    x
}

fn lanczos_step(op: &impl LinearOp, v: &[C64], t: f64, opts: &KrylovOptions, depth: usize) -> Vec<C64> {
    let dim = op.dim();
    let beta0 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if beta0 == 0.0 || t == 0.0 {
        return v.to_vec();
    }
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(opts.m_max + 1);
    basis.push(v.iter().map(|a| a / beta0).collect());
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); dim];
    let mut happy = false;

    loop {
        let j = alphas.len();
        op.apply_to(&basis[j], &mut w);
        let alpha: f64 = basis[j]
            .iter()
            .zip(&w)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        alphas.push(alpha);
        for (i, b) in basis.iter().enumerate() {
            let coeff = if i == j {
                C64::new(alpha, 0.0)
            } else if i + 1 == j {
                C64::new(betas[j - 1], 0.0)
            } else {
                continue;
            };
            for (wk, bk) in w.iter_mut().zip(b) {
                *wk -= coeff * bk;
            }
        }
        // one full re-orthogonalization pass keeps the basis clean
        for b in &basis {
            let overlap: C64 = b.iter().zip(&w).map(|(a, c)| a.conj() * c).sum();
            if overlap.norm() > 0.0 {
                for (wk, bk) in w.iter_mut().zip(b) {
                    *wk -= overlap * bk;
                }
            }
        }
        let beta = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if beta < 1e-14 * op.spectral_bound().max(1.0) {
            happy = true;
            break;
        }
        let m = alphas.len();
        if m >= 4 && (m % 2 == 0 || m == opts.m_max) {
            let (_, err) = small_exp(&alphas, &betas, t, beta);
            if err < opts.tol {
                break;
            }
        }
        if m == opts.m_max {
            // not converged: split the step
            if depth > 30 {
                break;
            }
            let half = lanczos_step(op, v, t / 2.0, opts, depth + 1);
            return lanczos_step(op, &half, t / 2.0, opts, depth + 1);
        }
        betas.push(beta);
        basis.push(w.iter().map(|a| a / beta).collect());
    }

    let (u, _) = small_exp(&alphas, &betas, t, if happy { 0.0 } else { f64::NAN });
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (k, b) in basis.iter().enumerate().take(u.len()) {
        let c = u[k] * beta0;
        for (o, bk) in out.iter_mut().zip(b) {
            *o += c * bk;
        }
    }
    out
}

/// `e^{-iTt} e₁` for the real symmetric tridiagonal `T`, plus the standard
/// truncation estimate `β_m |u_m|`.
fn small_exp(alphas: &[f64], betas: &[f64], t: f64, beta_next: f64) -> (Vec<C64>, f64) {
    let m = alphas.len();
    let mut tm = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        tm[(i, i)] = alphas[i];
        if i + 1 < m {
            tm[(i, i + 1)] = betas[i];
            tm[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(tm);
    let q = &eig.eigenvectors;
    let mut u = vec![C64::new(0.0, 0.0); m];
    for k in 0..m {
        let phase = C64::new(0.0, -eig.eigenvalues[k] * t).exp();
        let qk0 = q[(0, k)];
        for i in 0..m {
            u[i] += C64::new(q[(i, k)] * qk0, 0.0) * phase;
        }
    }
    let err = if beta_next.is_nan() || m == 0 {
        0.0
    } else {
        (beta_next * t.abs()).min(1.0) * u[m - 1].norm()
    };
    (u, err)
}

/// Propagate under a static Hamiltonian: `|ψ(t)⟩ = e^{-iHt} |ψ(0)⟩`.
///
/// Norm is preserved to better than `1e-10`; for Hermitian static `H` the
/// energy expectation is preserved to the same level.
pub fn propagate(state: &DenseState, h: &SparseHamiltonian, t: f64) -> Result<DenseState> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian("propagate requires Hermitian H".into()));
    }
    if h.dim() != state.dim() {
        return Err(Error::ShapeMismatch(format!(
            "state dimension {} vs operator dimension {}",
            state.dim(),
            h.dim()
        )));
    }
    let amp = krylov_expv(h, state.amp(), t, &KrylovOptions::default());
    DenseState::new(state.n_sites(), amp)
}

/// Dense-eigenbasis propagator; the oracle for the Krylov path and the
/// source of instantaneous eigenstates.
pub struct EigenPropagation {
    pub energies: Vec<f64>,
    /// Columns are eigenvectors, sorted ascending in energy.
    pub vectors: DMatrix<C64>,
    n_sites: usize,
}

impl EigenPropagation {
    pub fn new(h: &SparseHamiltonian, n_sites: usize) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian("eigen propagation requires Hermitian H".into()));
        }
        if n_sites > crate::N_MAX_DENSE {
            return Err(Error::SizeOutOfRange {
                n: n_sites,
                min: crate::lattice::N_MIN,
                max: crate::N_MAX_DENSE,
            });
        }
        let eig = h.to_dense().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = DMatrix::<C64>::zeros(h.dim(), h.dim());
        for (i, &k) in order.iter().enumerate() {
            vectors.set_column(i, &eig.eigenvectors.column(k));
        }
        Ok(Self {
            energies,
            vectors,
            n_sites,
        })
    }

    pub fn ground_state(&self) -> DenseState {
        let col = self.vectors.column(0);
        DenseState {
            n_sites: self.n_sites,
            amp: col.iter().copied().collect(),
        }
    }

    pub fn propagate(&self, state: &DenseState, t: f64) -> DenseState {
        let psi = DVector::from_column_slice(state.amp());
        let mut coeffs = self.vectors.adjoint() * psi;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= C64::new(0.0, -self.energies[k] * t).exp();
        }
        let out = &self.vectors * coeffs;
        DenseState {
            n_sites: state.n_sites(),
            amp: out.iter().copied().collect(),
        }
    }
}

/// Options for driven evolution.
#[derive(Copy, Clone, Debug)]
pub struct DrivenOptions {
    /// Escalate a too-coarse step to an error instead of proceeding.
    pub strict: bool,
    pub krylov: KrylovOptions,
}

impl Default for DrivenOptions {
    fn default() -> Self {
        Self {
            strict: false,
            krylov: KrylovOptions::default(),
        }
    }
}

/// Outcome of a driven run.
pub struct DrivenResult {
    pub state: DenseState,
    /// Set when the step did not resolve the fastest schedule feature and
    /// strict mode was off.
    pub resolution_warning: Option<String>,
}

/// Step a schedule with midpoint-sampled fields, invoking `on_sample` at
/// `t = 0`, every `record_every`, and at the final time.
pub fn propagate_driven(
    state: &DenseState,
    schedule: &DriveSchedule,
    op: &DrivenIsingOp,
    dt: f64,
    record_every: f64,
    opts: &DrivenOptions,
    mut on_sample: impl FnMut(f64, &DenseState),
) -> Result<DrivenResult> {
    if op.dim() != state.dim() {
        return Err(Error::ShapeMismatch(format!(
            "state dimension {} vs operator dimension {}",
            state.dim(),
            op.dim()
        )));
    }
    if dt <= 0.0 {
        return Err(Error::Contract("dt must be positive".into()));
    }
    let feature = schedule.min_feature();
    let mut warning = None;
    if dt > feature / 10.0 {
        if opts.strict {
            return Err(Error::Resolution { dt, feature });
        }
        warning = Some(format!(
            "dt = {dt} does not resolve the fastest schedule feature {feature}"
        ));
    }
    let total = schedule.total_duration();
    let mut current = state.clone();
    let mut t = 0.0;
    let mut next_record = 0.0;
    on_sample(0.0, &current);
    next_record += record_every;
    while t < total - 1e-12 {
        let step = dt.min(total - t);
        let (h_x, h_z) = schedule.sample(t + step / 2.0);
        let fixed = FixedField { op, h_x, h_z };
        let amp = krylov_expv(&fixed, current.amp(), step, &opts.krylov);
        current = DenseState::new(current.n_sites(), amp)?;
        t += step;
        if record_every > 0.0 && t + 1e-9 >= next_record {
            on_sample(t, &current);
            next_record += record_every;
        }
    }
    if record_every <= 0.0 || (t - (next_record - record_every)).abs() > 1e-9 {
        on_sample(t, &current);
    }
    Ok(DrivenResult {
        state: current,
        resolution_warning: warning,
    })
}

/// Trajectory output of the two-bubble exchange scenario.
pub struct TwoBubbleTrajectory {
    pub times: Vec<f64>,
    /// Interface density `⟨P↓_{j-1} P↑_j P↓_{j+1}⟩`, one row per time.
    pub interface: Vec<Vec<f64>>,
    /// Total ↓ count per recorded time.
    pub down_count: Vec<f64>,
    pub magnetization: Vec<f64>,
    pub final_state: DenseState,
}

/// Quench two adjacent bubbles (sizes `n1`, `n2`, separated by one ↑) under
/// the static ring Hamiltonian and record the interface-density profile.
///
/// `n1 = 0` degenerates to a single-bubble quench and is allowed.
pub fn quench_two_bubble_scenario(
    params: &ModelParams,
    n1: usize,
    n2: usize,
    total_time: f64,
    record_every: f64,
) -> Result<TwoBubbleTrajectory> {
    let n = params.n_sites;
    if n1 + n2 + 3 > n {
        return Err(Error::Layout(format!(
            "bubbles of {n1} and {n2} spins plus three ↑ delimiters exceed {n} sites"
        )));
    }
    let mut bits = 0u64;
    for j in 0..n1 {
        bits |= 1 << j;
    }
    for j in 0..n2 {
        bits |= 1 << (n1 + 1 + j);
    }
    let config = SpinConfig::new(n, bits)?;
    let initial = DenseState::from_config(&config);
    let h = crate::hamiltonian::build_full(params)?;

    let mut times = Vec::new();
    let mut interface = Vec::new();
    let mut down_count = Vec::new();
    let mut magnetization = Vec::new();

    let record = |t: f64,
                  state: &DenseState,
                  times: &mut Vec<f64>,
                  interface: &mut Vec<Vec<f64>>,
                  down: &mut Vec<f64>,
                  mag: &mut Vec<f64>| {
        times.push(t);
        interface.push(observables::interface_density(state));
        down.push(observables::mean_down_count(state));
        mag.push(observables::magnetization(state));
    };

    record(
        0.0,
        &initial,
        &mut times,
        &mut interface,
        &mut down_count,
        &mut magnetization,
    );
    let steps = (total_time / record_every).round() as usize;
    let mut current = initial;
    // long static evolution: larger Krylov steps amortize the basis build
    let opts = KrylovOptions {
        tol: 3e-11,
        step_budget: 24.0,
        m_max: 96,
    };
    for k in 1..=steps {
        let amp = krylov_expv(&h, current.amp(), record_every, &opts);
        current = DenseState::new(current.n_sites(), amp)?;
        record(
            k as f64 * record_every,
            &current,
            &mut times,
            &mut interface,
            &mut down_count,
            &mut magnetization,
        );
    }
    Ok(TwoBubbleTrajectory {
        times,
        interface,
        down_count,
        magnetization,
        final_state: current,
    })
}
