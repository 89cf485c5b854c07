//! Bloch-Redfield master-equation evolution for small rings.
//!
//! Each spin couples to its own bath through σᶻ with an Ohmic noise power
//! spectrum. In the system eigenbasis the density matrix obeys
//!
//! ```text
//! dρ_ab/dt = -i ω_ab ρ_ab + Σ_{cd}^{sec} R_abcd ρ_cd ,
//! ```
//!
//! with the relaxation tensor
//!
//! ```text
//! R_abcd = -(1/2) Σ_α { δ_bd Σ_n A_an A_nc S(ω_cn) - A_ac A_db S(ω_ca)
//!                      + δ_ac Σ_n A_dn A_nb S(ω_dn) - A_ac A_db S(ω_db) } ,
//! ```
//!
//! where `A^α` is σᶻ of spin α in the eigenbasis and `ω_ab = E_a - E_b`
//! (`ħ = 1`). The secular flag drops entries whose Bohr frequencies differ,
//! `|ω_ab - ω_cd|` above a configurable threshold.
//!
//! Spectrum forms: the literal `η ω θ(ω) exp(+ω/ω_c)` grows with frequency
//! and is almost certainly a sign slip for an exponential cutoff, so the
//! default is `exp(-ω/ω_c)`; a flag runs the literal form, and a thermal
//! variant adds detailed balance `S(-ω) = e^{-ω/T} S(ω)`. The form used is
//! recorded in run metadata.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::observables::{self, DensityMatrixView};
use crate::sparse::SparseHamiltonian;
use crate::C64;

/// Largest spin count for the dense eigenproblem behind the tensor.
pub const N_MAX_REDFIELD: usize = 6;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum SpectrumForm {
    /// `η ω θ(ω) exp(+ω/ω_c)` exactly as stated.
    PaperLiteral,
    /// `η ω θ(ω) exp(-ω/ω_c)` (default).
    CutoffCorrected,
    /// Ohmic with detailed balance at the given temperature.
    Thermal { temperature: f64 },
}

/// Bath coupling strength and spectrum.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// Dimensionless system-bath coupling, `0 ≤ η < 1`.
    pub eta: f64,
    /// Cutoff frequency, above every relevant system gap.
    pub omega_c: f64,
    pub form: SpectrumForm,
}

impl BathSpec {
    pub fn new(eta: f64, omega_c: f64, form: SpectrumForm) -> Result<Self> {
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::Contract(format!("eta must be in [0, 1), got {eta}")));
        }
        if omega_c <= 0.0 {
            return Err(Error::Contract("omega_c must be positive".into()));
        }
        if let SpectrumForm::Thermal { temperature } = form {
            if temperature <= 0.0 {
                return Err(Error::Contract("temperature must be positive".into()));
            }
        }
        Ok(Self {
            eta,
            omega_c,
            form,
        })
    }

    /// Noise power spectrum `S(ω)`.
    pub fn spectrum(&self, omega: f64) -> f64 {
        match self.form {
            SpectrumForm::PaperLiteral => {
                if omega > 0.0 {
                    self.eta * omega * (omega / self.omega_c).exp()
                } else {
                    0.0
                }
            }
            SpectrumForm::CutoffCorrected => {
                if omega > 0.0 {
                    self.eta * omega * (-omega / self.omega_c).exp()
                } else {
                    0.0
                }
            }
            SpectrumForm::Thermal { temperature } => {
                if omega == 0.0 {
                    self.eta * temperature
                } else {
                    let cutoff = (-omega.abs() / self.omega_c).exp();
                    // exp_m1 keeps detailed balance exact for tiny Bohr
                    // frequencies between (near-)degenerate levels
                    self.eta * omega * cutoff / (-(-omega / temperature).exp_m1())
                }
            }
        }
    }
}

/// Assembled Redfield generator over the system eigenbasis.
///
/// Entries are stored sparsely (the secular cut removes most of the 4-index
/// array, and the dense array would not fit at six spins); `entry(a,b,c,d)`
/// recovers individual tensor elements.
pub struct RedfieldTensor {
    pub dim: usize,
    pub n_sites: usize,
    /// Eigenenergies ascending.
    pub energies: Vec<f64>,
    /// Eigenbasis columns in the z basis.
    pub basis: DMatrix<C64>,
    /// `(a·dim + b, c·dim + d, value)`, sorted.
    entries: Vec<(u32, u32, C64)>,
    pub secular: bool,
    /// Groups of pairs whose Bohr frequencies collide within the secular
    /// threshold without being identical; non-empty means the cut was
    /// ambiguous and this grouping was used.
    pub degenerate_groups: Vec<Vec<(usize, usize)>>,
    pub bath: BathSpec,
}

/// Secular threshold below which Bohr frequencies count as equal.
pub const SECULAR_THRESHOLD: f64 = 1e-9;

/// Assemble the Redfield tensor for per-site σᶻ bath coupling.
pub fn build_redfield(
    h: &SparseHamiltonian,
    n_sites: usize,
    bath: &BathSpec,
    secular: bool,
) -> Result<RedfieldTensor> {
    if n_sites == 0 || n_sites > N_MAX_REDFIELD {
        return Err(Error::SizeOutOfRange {
            n: n_sites,
            min: 1,
            max: N_MAX_REDFIELD,
        });
    }
    let dim = 1usize << n_sites;
    if h.dim() != dim {
        return Err(Error::ShapeMismatch(format!(
            "operator dimension {} vs 2^{n_sites}",
            h.dim()
        )));
    }
    if !h.is_hermitian() {
        return Err(Error::NotHermitian("Redfield needs a Hermitian system".into()));
    }
    let eig = h.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].partial_cmp(&eig.eigenvalues[y]).unwrap());
    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut basis = DMatrix::<C64>::zeros(dim, dim);
    for (i, &k) in order.iter().enumerate() {
        basis.set_column(i, &eig.eigenvectors.column(k));
    }

    // σᶻ of each site rotated into the eigenbasis
    let coupling: Vec<DMatrix<C64>> = (0..n_sites)
        .map(|alpha| {
            let mut m = DMatrix::<C64>::zeros(dim, dim);
            for a in 0..dim {
                for b in 0..dim {
                    let mut acc = C64::new(0.0, 0.0);
                    for i in 0..dim {
                        let z = if i >> alpha & 1 == 1 { -1.0 } else { 1.0 };
                        acc += basis[(i, a)].conj() * basis[(i, b)] * C64::new(z, 0.0);
                    }
                    m[(a, b)] = acc;
                }
            }
            m
        })
        .collect();

    // Λ1[x,y] = Σ_n A_xn A_ny S(ω_y - ω_n);  Λ2[x,y] = Σ_n A_xn A_ny S(ω_x - ω_n)
    let mut lambda1 = vec![DMatrix::<C64>::zeros(dim, dim); n_sites];
    let mut lambda2 = vec![DMatrix::<C64>::zeros(dim, dim); n_sites];
    for alpha in 0..n_sites {
        let a_m = &coupling[alpha];
        for x in 0..dim {
            for y in 0..dim {
                let mut acc1 = C64::new(0.0, 0.0);
                let mut acc2 = C64::new(0.0, 0.0);
                for n in 0..dim {
                    let prod = a_m[(x, n)] * a_m[(n, y)];
                    acc1 += prod * C64::new(bath.spectrum(energies[y] - energies[n]), 0.0);
                    acc2 += prod * C64::new(bath.spectrum(energies[x] - energies[n]), 0.0);
                }
                lambda1[alpha][(x, y)] = acc1;
                lambda2[alpha][(x, y)] = acc2;
            }
        }
    }

    let max_gap = energies[dim - 1] - energies[0];
    if bath.omega_c <= max_gap {
        return Err(Error::Contract(format!(
            "cutoff frequency {} must exceed the largest system gap {max_gap:.3}",
            bath.omega_c
        )));
    }
    let scale = energies
        .iter()
        .fold(0.0f64, |m, &e| m.max(e.abs()))
        .max(1.0);
    let threshold = SECULAR_THRESHOLD * scale;
    let rows = exec::map_indexed(dim * dim, |ab| {
        let (a, b) = (ab / dim, ab % dim);
        let w_ab = energies[a] - energies[b];
        let mut row: Vec<(u32, u32, C64)> = Vec::new();
        for c in 0..dim {
            for d in 0..dim {
                if secular {
                    let w_cd = energies[c] - energies[d];
                    if (w_ab - w_cd).abs() > threshold {
                        continue;
                    }
                }
                let mut acc = C64::new(0.0, 0.0);
                for alpha in 0..n_sites {
                    let a_m = &coupling[alpha];
                    if b == d {
                        acc += lambda1[alpha][(a, c)];
                    }
                    if a == c {
                        acc += lambda2[alpha][(d, b)];
                    }
                    let cross = a_m[(a, c)] * a_m[(d, b)];
                    if cross != C64::new(0.0, 0.0) {
                        let s = bath.spectrum(energies[c] - energies[a])
                            + bath.spectrum(energies[d] - energies[b]);
                        acc -= cross * C64::new(s, 0.0);
                    }
                }
                let value = acc * C64::new(-0.5, 0.0);
                if value.norm() > 1e-16 * scale {
                    row.push((ab as u32, (c * dim + d) as u32, value));
                }
            }
        }
        row
    });
    let mut entries = Vec::new();
    for r in rows {
        entries.extend(r);
    }
    entries.sort_by_key(|&(r, c, _)| (r, c));

    let degenerate_groups = if secular {
        frequency_collisions(&energies, threshold)
    } else {
        Vec::new()
    };

    Ok(RedfieldTensor {
        dim,
        n_sites,
        energies,
        basis,
        entries,
        secular,
        degenerate_groups,
        bath: *bath,
    })
}

/// Groups of index pairs whose Bohr frequencies collide within the secular
/// threshold while not being bitwise identical.
fn frequency_collisions(energies: &[f64], threshold: f64) -> Vec<Vec<(usize, usize)>> {
    let dim = energies.len();
    let mut pairs: Vec<(f64, (usize, usize))> = Vec::new();
    for a in 0..dim {
        for b in 0..dim {
            if a != b {
                pairs.push((energies[a] - energies[b], (a, b)));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=pairs.len() {
        if i == pairs.len() || pairs[i].0 - pairs[i - 1].0 > threshold {
            if i - start > 1 {
                groups.push(pairs[start..i].iter().map(|p| p.1).collect());
            }
            start = i;
        }
    }
    groups
}

impl RedfieldTensor {
    /// Individual tensor element `R_abcd`.
    pub fn entry(&self, a: usize, b: usize, c: usize, d: usize) -> C64 {
        let row = (a * self.dim + b) as u32;
        let col = (c * self.dim + d) as u32;
        match self
            .entries
            .binary_search_by_key(&(row, col), |&(r, c, _)| (r, c))
        {
            Ok(k) => self.entries[k].2,
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// `dρ/dt` acting on a flattened eigenbasis density matrix.
    pub fn apply_generator(&self, rho: &[C64], out: &mut [C64]) {
        let dim = self.dim;
        for ab in 0..dim * dim {
            let (a, b) = (ab / dim, ab % dim);
            let w = self.energies[a] - self.energies[b];
            out[ab] = C64::new(0.0, -w) * rho[ab];
        }
        for &(ab, cd, v) in &self.entries {
            out[ab as usize] += v * rho[cd as usize];
        }
    }

    /// Dense Liouvillian over flattened eigenbasis indices.
    pub fn liouvillian(&self) -> DMatrix<C64> {
        let d2 = self.dim * self.dim;
        let mut l = DMatrix::<C64>::zeros(d2, d2);
        for ab in 0..d2 {
            let (a, b) = (ab / self.dim, ab % self.dim);
            l[(ab, ab)] = C64::new(0.0, -(self.energies[a] - self.energies[b]));
        }
        for &(ab, cd, v) in &self.entries {
            l[(ab as usize, cd as usize)] += v;
        }
        l
    }

    pub fn to_eigenbasis(&self, rho_z: &DMatrix<C64>) -> DMatrix<C64> {
        self.basis.adjoint() * rho_z * &self.basis
    }

    pub fn to_z_basis(&self, rho_eig: &DMatrix<C64>) -> DMatrix<C64> {
        &self.basis * rho_eig * self.basis.adjoint()
    }
}

/// Integrator selection for [`evolve_master`].
#[derive(Copy, Clone, Debug)]
pub enum MasterIntegrator {
    /// Embedded Dormand-Prince 4/5 with adaptive steps.
    Adaptive { rtol: f64, atol: f64 },
    /// Fixed-step classical RK4 for byte-reproducibility runs.
    FixedRk4 { dt: f64 },
}

impl Default for MasterIntegrator {
    fn default() -> Self {
        MasterIntegrator::Adaptive {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

/// One recorded row of a master-equation trajectory.
#[derive(Clone, Debug)]
pub struct MasterRecord {
    pub time: f64,
    pub m: f64,
    pub lambda: Vec<f64>,
    pub q_b: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl MasterRecord {
    pub fn csv_header(n_max: usize) -> String {
        let lambdas: Vec<String> = (1..=n_max).map(|n| format!("lambda{n}")).collect();
        format!("time,m,{},q_b,trace,min_eig", lambdas.join(","))
    }

    pub fn csv_row(&self) -> String {
        let lambdas: Vec<String> = self.lambda.iter().map(|v| format!("{v:.12e}")).collect();
        format!(
            "{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e}",
            self.time,
            self.m,
            lambdas.join(","),
            self.q_b,
            self.trace,
            self.min_eigenvalue
        )
    }
}

/// Master-equation trajectory, with states kept in the z basis.
pub struct MasterTrajectory {
    pub times: Vec<f64>,
    pub records: Vec<MasterRecord>,
    pub final_rho_z: DMatrix<C64>,
}

/// Evolve a z-basis density matrix under the Redfield generator.
pub fn evolve_master(
    rho0_z: &DMatrix<C64>,
    tensor: &RedfieldTensor,
    total_time: f64,
    record_every: f64,
    integrator: MasterIntegrator,
) -> Result<MasterTrajectory> {
    validate_density(rho0_z)?;
    if rho0_z.nrows() != tensor.dim {
        return Err(Error::ShapeMismatch(format!(
            "density dimension {} vs tensor dimension {}",
            rho0_z.nrows(),
            tensor.dim
        )));
    }
    let dim = tensor.dim;
    let rho_eig = tensor.to_eigenbasis(rho0_z);
    let mut y: Vec<C64> = rho_eig.iter().copied().collect();
    // nalgebra stores column-major; (a,b) at index b*dim + a, so reindex to
    // row-major ab = a*dim + b for the generator
    let mut state = vec![C64::new(0.0, 0.0); dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            state[a * dim + b] = y[b * dim + a];
        }
    }
    y = state;

    let trace0: f64 = (0..dim).map(|a| y[a * dim + a].re).sum();
    let n_records = if record_every > 0.0 {
        (total_time / record_every).round() as usize
    } else {
        1
    };
    let step_target = if record_every > 0.0 {
        record_every
    } else {
        total_time
    };

    let mut times = Vec::with_capacity(n_records + 1);
    let mut records = Vec::with_capacity(n_records + 1);
    let mut record = |t: f64, y: &[C64]| {
        let mut rho_eig = DMatrix::<C64>::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..dim {
                rho_eig[(a, b)] = y[a * dim + b];
            }
        }
        let rho_z = tensor.to_z_basis(&rho_eig);
        let view = DensityMatrixView {
            rho: &rho_z,
            n_sites: tensor.n_sites,
        };
        let trace: f64 = (0..dim).map(|i| rho_z[(i, i)].re).sum();
        let min_eig = hermitian_min_eig(&rho_z);
        times.push(t);
        records.push(MasterRecord {
            time: t,
            m: observables::magnetization(&view),
            lambda: observables::lambda_profile(&view, observables::DEFAULT_N_MAX.min(
                if tensor.n_sites >= 3 { tensor.n_sites - 2 } else { 1 },
            )),
            q_b: observables::blockade_density(&view),
            trace,
            min_eigenvalue: min_eig,
        });
        rho_z
    };

    let mut rho_z_final = record(0.0, &y);
    let mut t = 0.0;
    let n_spans = if total_time > 0.0 { n_records.max(1) } else { 0 };
    for k in 1..=n_spans {
        let t_target = (k as f64 * step_target).min(total_time);
        integrate_span(tensor, &mut y, t, t_target, &integrator)?;
        t = t_target;
        let trace_now: f64 = (0..dim).map(|a| y[a * dim + a].re).sum();
        if (trace_now - trace0).abs() > 1e-6 {
            return Err(Error::Integrator(format!(
                "trace drifted by {:.3e} at t = {t}",
                trace_now - trace0
            )));
        }
        rho_z_final = record(t, &y);
        if t >= total_time {
            break;
        }
    }
    Ok(MasterTrajectory {
        times,
        records,
        final_rho_z: rho_z_final,
    })
}

fn validate_density(rho: &DMatrix<C64>) -> Result<()> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::ShapeMismatch("density matrix must be square".into()));
    }
    let herm_err = (rho - rho.adjoint()).norm();
    if herm_err > 1e-10 * rho.nrows() as f64 {
        return Err(Error::Contract(format!(
            "density matrix not Hermitian (deviation {herm_err:.3e})"
        )));
    }
    let trace: f64 = (0..rho.nrows()).map(|i| rho[(i, i)].re).sum();
    if (trace - 1.0).abs() > 1e-8 {
        return Err(Error::Contract(format!("density trace {trace} != 1")));
    }
    let min_eig = hermitian_min_eig(rho);
    if min_eig < -1e-10 {
        return Err(Error::Contract(format!(
            "density matrix not positive semidefinite (min eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(())
}

fn hermitian_min_eig(m: &DMatrix<C64>) -> f64 {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    eig.eigenvalues.iter().fold(f64::INFINITY, |lo, &e| lo.min(e))
}

fn integrate_span(
    tensor: &RedfieldTensor,
    y: &mut Vec<C64>,
    t0: f64,
    t1: f64,
    integrator: &MasterIntegrator,
) -> Result<()> {
    if t1 <= t0 {
        return Ok(());
    }
    match *integrator {
        MasterIntegrator::FixedRk4 { dt } => {
            let span = t1 - t0;
            let steps = (span / dt).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            let dim2 = y.len();
            let mut k1 = vec![C64::new(0.0, 0.0); dim2];
            let mut k2 = k1.clone();
            let mut k3 = k1.clone();
            let mut k4 = k1.clone();
            let mut tmp = k1.clone();
            for _ in 0..steps {
                tensor.apply_generator(y, &mut k1);
                for i in 0..dim2 {
                    tmp[i] = y[i] + k1[i] * C64::new(0.5 * h, 0.0);
                }
                tensor.apply_generator(&tmp, &mut k2);
                for i in 0..dim2 {
                    tmp[i] = y[i] + k2[i] * C64::new(0.5 * h, 0.0);
                }
                tensor.apply_generator(&tmp, &mut k3);
                for i in 0..dim2 {
                    tmp[i] = y[i] + k3[i] * C64::new(h, 0.0);
                }
                tensor.apply_generator(&tmp, &mut k4);
                for i in 0..dim2 {
                    y[i] += (k1[i] + (k2[i] + k3[i]) * C64::new(2.0, 0.0) + k4[i])
                        * C64::new(h / 6.0, 0.0);
                }
            }
            Ok(())
        }
        MasterIntegrator::Adaptive { rtol, atol } => {
            dormand_prince(tensor, y, t0, t1, rtol, atol)
        }
    }
}

fn dormand_prince(
    tensor: &RedfieldTensor,
    y: &mut Vec<C64>,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
) -> Result<()> {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let n = y.len();
    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut t = t0;
    let mut h = (t1 - t0).min(0.1);
    let mut rejected = 0usize;
    while t < t1 - 1e-14 {
        h = h.min(t1 - t);
        tensor.apply_generator(y, &mut k[0]);
        for stage in 0..6 {
            for i in 0..n {
                let mut acc = y[i];
                for (s, a) in A[stage].iter().enumerate().take(stage + 1) {
                    if *a != 0.0 {
                        acc += k[s][i] * C64::new(a * h, 0.0);
                    }
                }
                tmp[i] = acc;
            }
            let (head, tail) = k.split_at_mut(stage + 1);
            let _ = head;
            tensor.apply_generator(&tmp, &mut tail[0]);
        }
        // 5th-order solution is the last stage input (FSAL layout)
        let y5 = tmp.clone();
        let mut err = 0.0f64;
        for i in 0..n {
            let mut acc4 = y[i];
            for s in 0..7 {
                if B4[s] != 0.0 {
                    acc4 += k[s][i] * C64::new(B4[s] * h, 0.0);
                }
            }
            let scale = atol + rtol * y5[i].norm().max(y[i].norm());
            let e = (y5[i] - acc4).norm() / scale;
            err = err.max(e);
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&y5);
            let grow = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            h *= grow;
        } else {
            rejected += 1;
            if rejected > 10_000 {
                return Err(Error::Integrator(
                    "step control failed to converge".into(),
                ));
            }
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
        if h < 1e-12 {
            return Err(Error::Integrator("step size underflow".into()));
        }
    }
    Ok(())
}

/// Steady state of the generator via its null space, returned in the z
/// basis with unit trace.
pub fn steady_state(tensor: &RedfieldTensor) -> Result<DMatrix<C64>> {
    let l = tensor.liouvillian();
    let svd = l.svd(true, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Integrator("SVD failed".into()))?;
    // smallest singular value's right-singular vector spans the kernel
    let mut min_idx = 0;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < svd.singular_values[min_idx] {
            min_idx = i;
        }
    }
    let dim = tensor.dim;
    let mut rho_eig = DMatrix::<C64>::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            rho_eig[(a, b)] = v_t[(min_idx, a * dim + b)].conj();
        }
    }
    // hermitize and normalize
    let rho_eig = (&rho_eig + &rho_eig.adjoint()) * C64::new(0.5, 0.0);
    let trace: C64 = (0..dim).map(|i| rho_eig[(i, i)]).sum();
    if trace.norm() < 1e-12 {
        return Err(Error::Integrator(
            "null vector has zero trace; steady state not unique".into(),
        ));
    }
    let rho_eig = rho_eig / trace;
    Ok(tensor.to_z_basis(&rho_eig))
}

/// Gibbs state `e^{-H/T}/Z` in the z basis.
pub fn gibbs_state(tensor: &RedfieldTensor, temperature: f64) -> DMatrix<C64> {
    let dim = tensor.dim;
    let e0 = tensor.energies[0];
    let mut rho_eig = DMatrix::<C64>::zeros(dim, dim);
    let mut z = 0.0;
    for (a, &e) in tensor.energies.iter().enumerate() {
        let w = (-(e - e0) / temperature).exp();
        rho_eig[(a, a)] = C64::new(w, 0.0);
        z += w;
    }
    rho_eig /= C64::new(z, 0.0);
    tensor.to_z_basis(&rho_eig)
}

/// Trace distance `(1/2) ‖ρ - σ‖₁`.
pub fn trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let diff = (a - b) * C64::new(1.0, 0.0);
    let herm = (&diff + &diff.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    0.5 * eig.eigenvalues.iter().map(|e| e.abs()).sum::<f64>()
}

/// Projector onto a pure state.
pub fn projector(state: &[C64]) -> DMatrix<C64> {
    let dim = state.len();
    DMatrix::from_fn(dim, dim, |r, c| state[r] * state[c].conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_full;
    use crate::lattice::ModelParams;

    fn two_level(h_x: f64) -> SparseHamiltonian {
        SparseHamiltonian::from_triplets(
            2,
            vec![
                (0, 1, C64::new(-h_x, 0.0)),
                (1, 0, C64::new(-h_x, 0.0)),
            ],
        )
        .unwrap()
    }

    fn bath(eta: f64) -> BathSpec {
        BathSpec::new(eta, 100.0, SpectrumForm::CutoffCorrected).unwrap()
    }

    #[test]
    fn spectrum_forms() {
        let b_lit = BathSpec::new(0.1, 10.0, SpectrumForm::PaperLiteral).unwrap();
        let b_cut = BathSpec::new(0.1, 10.0, SpectrumForm::CutoffCorrected).unwrap();
        assert!(b_lit.spectrum(1.0) > b_cut.spectrum(1.0));
        assert_eq!(b_lit.spectrum(-1.0), 0.0);
        assert_eq!(b_cut.spectrum(-1.0), 0.0);
        let b_th = BathSpec::new(0.1, 50.0, SpectrumForm::Thermal { temperature: 0.5 }).unwrap();
        for w in [0.3, 1.0, 2.5] {
            let ratio = b_th.spectrum(-w) / b_th.spectrum(w);
            assert!(
                (ratio - (-w / 0.5f64).exp()).abs() < 1e-12,
                "detailed balance at {w}"
            );
        }
        assert!(BathSpec::new(1.5, 1.0, SpectrumForm::CutoffCorrected).is_err());
    }

    #[test]
    fn two_level_frozen_tensor() {
        // by-hand evaluation of the tensor for H = -h_x σˣ with A = σᶻ:
        // downward rate S(2h_x), no upward rate at zero temperature,
        // coherence decay S(2h_x)/2
        let h_x = 0.3;
        let b = bath(0.15);
        let tensor = build_redfield(&two_level(h_x), 1, &b, true).unwrap();
        let gamma = b.spectrum(2.0 * h_x);
        assert!((tensor.entry(0, 0, 1, 1).re - gamma).abs() < 1e-12);
        assert!((tensor.entry(1, 1, 1, 1).re + gamma).abs() < 1e-12);
        assert!(tensor.entry(1, 1, 0, 0).norm() < 1e-14, "no upward rate");
        assert!((tensor.entry(0, 1, 0, 1).re + gamma / 2.0).abs() < 1e-12);
        // non-secular cross term dropped under the secular cut
        assert_eq!(tensor.entry(0, 1, 1, 0).norm(), 0.0);
        let full = build_redfield(&two_level(h_x), 1, &b, false).unwrap();
        assert!(full.entry(0, 1, 1, 0).norm() > 0.0);
    }

    #[test]
    fn eta_zero_reduces_to_unitary() {
        let params = ModelParams::new(3, 1.0, 0.2, -0.4).unwrap();
        let h = build_full(&params).unwrap();
        let tensor = build_redfield(&h, 3, &bath(0.0), true).unwrap();
        assert_eq!(tensor.nnz(), 0);
        // pure state stays pure and follows the Schrödinger flow
        let psi = crate::evolve::DenseState::from_config(
            &crate::lattice::SpinConfig::all_up(3).unwrap(),
        );
        let rho0 = projector(psi.amp());
        let traj = evolve_master(&rho0, &tensor, 2.0, 0.0, MasterIntegrator::default()).unwrap();
        let direct = crate::evolve::propagate(&psi, &h, 2.0).unwrap();
        let rho_expect = projector(direct.amp());
        assert!(
            trace_distance(&traj.final_rho_z, &rho_expect) < 1e-8,
            "distance {:.3e}",
            trace_distance(&traj.final_rho_z, &rho_expect)
        );
    }

    #[test]
    fn zero_time_returns_input() {
        let h = two_level(0.5);
        let tensor = build_redfield(&h, 1, &bath(0.1), true).unwrap();
        let rho0 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.3, 0.0),
            C64::new(0.7, 0.0),
        ]));
        let traj = evolve_master(&rho0, &tensor, 0.0, 0.0, MasterIntegrator::default()).unwrap();
        assert!(trace_distance(&traj.final_rho_z, &rho0) < 1e-14);
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity() {
        use rand::{Rng, SeedableRng};
        let params = ModelParams::new(3, 1.0, 0.15, -0.8).unwrap();
        let h = build_full(&params).unwrap();
        let tensor = build_redfield(&h, 3, &bath(0.12), true).unwrap();
        let dim = tensor.dim;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        // random Hermitian ρ in the eigenbasis
        let mut rho = vec![C64::new(0.0, 0.0); dim * dim];
        for a in 0..dim {
            for b in 0..=a {
                let v = C64::new(rng.gen::<f64>() - 0.5, if a == b { 0.0 } else { rng.gen::<f64>() - 0.5 });
                rho[a * dim + b] = v;
                rho[b * dim + a] = v.conj();
            }
        }
        let mut drho = vec![C64::new(0.0, 0.0); dim * dim];
        tensor.apply_generator(&rho, &mut drho);
        let trace: C64 = (0..dim).map(|a| drho[a * dim + a]).sum();
        assert!(trace.norm() < 1e-12, "trace derivative {trace}");
        for a in 0..dim {
            for b in 0..dim {
                let diff = drho[a * dim + b] - drho[b * dim + a].conj();
                assert!(diff.norm() < 1e-11, "hermiticity at ({a},{b}): {diff}");
            }
        }
    }

    #[test]
    fn generator_is_linear() {
        use rand::{Rng, SeedableRng};
        let h = two_level(0.4);
        let tensor = build_redfield(&h, 1, &bath(0.1), true).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let mut mk = || {
            let v: Vec<C64> = (0..4)
                .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            v
        };
        let r1 = mk();
        let r2 = mk();
        let (alpha, beta) = (C64::new(0.6, 0.1), C64::new(-0.3, 0.2));
        let combo: Vec<C64> = r1
            .iter()
            .zip(&r2)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        let mut d1 = vec![C64::new(0.0, 0.0); 4];
        let mut d2 = d1.clone();
        let mut dc = d1.clone();
        tensor.apply_generator(&r1, &mut d1);
        tensor.apply_generator(&r2, &mut d2);
        tensor.apply_generator(&combo, &mut dc);
        for i in 0..4 {
            let want = alpha * d1[i] + beta * d2[i];
            assert!((dc[i] - want).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_temperature_steady_state_is_ground_state() {
        // single spin: relaxes to the ground state of H = -h_x σˣ
        let h_x = 0.4;
        let b = bath(0.2);
        let tensor = build_redfield(&two_level(h_x), 1, &b, true).unwrap();
        let ss = steady_state(&tensor).unwrap();
        let gs = tensor.basis.column(0).into_owned();
        let gs_proj = projector(gs.as_slice());
        assert!(
            trace_distance(&ss, &gs_proj) < 1e-10,
            "distance {:.3e}",
            trace_distance(&ss, &gs_proj)
        );
        // trajectory converges there too
        let rho0 = DMatrix::from_fn(2, 2, |r, c| {
            if r == 0 && c == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let gap = 2.0 * h_x;
        let total = 50.0 / (b.eta * gap * gap);
        let traj =
            evolve_master(&rho0, &tensor, total, 0.0, MasterIntegrator::default()).unwrap();
        assert!(trace_distance(&traj.final_rho_z, &gs_proj) < 1e-3);
    }

    #[test]
    fn thermal_steady_state_is_gibbs() {
        let params = ModelParams::new(3, 1.0, 0.3, -0.7).unwrap();
        let h = build_full(&params).unwrap();
        let temperature = 0.8;
        let b = BathSpec::new(0.1, 200.0, SpectrumForm::Thermal { temperature }).unwrap();
        let tensor = build_redfield(&h, 3, &b, true).unwrap();
        let ss = steady_state(&tensor).unwrap();
        let gibbs = gibbs_state(&tensor, temperature);
        assert!(
            trace_distance(&ss, &gibbs) < 1e-6,
            "distance {:.3e}",
            trace_distance(&ss, &gibbs)
        );
    }

    #[test]
    fn degenerate_gaps_reported() {
        // without a transverse field the 3-spin spectrum is highly
        // degenerate and the secular grouping is ambiguous
        let params = ModelParams::new(3, 1.0, 0.0, -0.5).unwrap();
        let h = build_full(&params).unwrap();
        let tensor = build_redfield(&h, 3, &bath(0.1), true).unwrap();
        assert!(!tensor.degenerate_groups.is_empty());
    }

    #[test]
    fn fixed_step_matches_adaptive() {
        let h = two_level(0.35);
        let tensor = build_redfield(&h, 1, &bath(0.15), true).unwrap();
        let rho0 = DMatrix::from_fn(2, 2, |r, c| {
            if r == 0 && c == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let a = evolve_master(&rho0, &tensor, 5.0, 0.0, MasterIntegrator::default()).unwrap();
        let f = evolve_master(
            &rho0,
            &tensor,
            5.0,
            0.0,
            MasterIntegrator::FixedRk4 { dt: 0.001 },
        )
        .unwrap();
        assert!(trace_distance(&a.final_rho_z, &f.final_rho_z) < 1e-8);
    }
}
