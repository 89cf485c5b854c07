//! Experiment dispatch: config in, artifact directory out.
//!
//! Artifacts are written into a temporary sibling directory and renamed
//! into place once complete, so an interrupted run leaves no partial
//! output under the final name. Reruns with the same config and seed
//! rebuild byte-identical CSVs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ising_ring::analysis::{self, best_exponent, scaling_collapse, CollapseReport};
use ising_ring::evolve::{
    energy_expectation, propagate_driven, DenseState, DrivenOptions, EigenPropagation,
};
use ising_ring::hamiltonian::{build_full, DrivenIsingOp};
use ising_ring::lattice::SpinConfig;
use ising_ring::mps::{tebd4_evolve, MpsConfig, MpsRecord, MpsState};
use ising_ring::observables::{self, ObservableRecord, ShotSet};
use ising_ring::redfield::{
    build_redfield, evolve_master, projector, BathSpec, MasterIntegrator, MasterRecord,
    SpectrumForm,
};
use ising_ring::schedule::DriveSchedule;
use serde::Serialize;

use crate::config::{
    config_hash, Backend, Experiment, RunConfig, SampleConfig, SpectrumConfig,
};

/// Failures classified by exit code: 2 for configuration problems, 3 for
/// numerical failures at run time.
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) => m,
        }
    }
}

fn classify(err: ising_ring::Error) -> CliError {
    use ising_ring::Error::*;
    match err {
        Integrator(_) | Truncation { .. } => CliError::Numeric(err.to_string()),
        _ => CliError::Config(err.to_string()),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    config_hash: String,
    version: &'a str,
    seed: u64,
    experiment: &'a str,
}

pub struct RunOutcome {
    pub dir: PathBuf,
    pub warnings: Vec<String>,
}

/// Default output root: `$ISING_RING_OUT` or `./runs`.
pub fn output_root() -> PathBuf {
    std::env::var_os("ISING_RING_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("malformed config {}: {e}", path.display())))
}

pub fn run(config: &RunConfig, strict_flag: bool) -> Result<RunOutcome, CliError> {
    let hash = config_hash(config);
    let final_dir = match &config.output_dir {
        Some(dir) => PathBuf::from(dir),
        None => output_root().join(format!("{}-{hash:016x}", config.experiment.kind())),
    };
    if final_dir.exists() {
        return Err(CliError::Config(format!(
            "output directory {} already exists",
            final_dir.display()
        )));
    }
    if let Some(parent) = final_dir.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::Config(e.to_string()))?;
        }
    }
    let tmp_dir = final_dir.with_extension(format!("tmp-{}", std::process::id()));
    if tmp_dir.exists() {
        fs::remove_dir_all(&tmp_dir).map_err(|e| CliError::Config(e.to_string()))?;
    }
    fs::create_dir_all(&tmp_dir).map_err(|e| CliError::Config(e.to_string()))?;

    let result = dispatch(config, strict_flag, &tmp_dir);
    match result {
        Ok(warnings) => {
            let manifest = Manifest {
                config_hash: format!("{hash:016x}"),
                version: env!("CARGO_PKG_VERSION"),
                seed: config.seed,
                experiment: config.experiment.kind(),
            };
            write_text(
                &tmp_dir.join("manifest.json"),
                &format!(
                    "{}\n",
                    serde_json::to_string_pretty(&manifest).expect("manifest serializes")
                ),
            )?;
            fs::rename(&tmp_dir, &final_dir).map_err(|e| CliError::Config(e.to_string()))?;
            Ok(RunOutcome {
                dir: final_dir,
                warnings,
            })
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&tmp_dir);
            Err(e)
        }
    }
}

fn dispatch(config: &RunConfig, strict_flag: bool, dir: &Path) -> Result<Vec<String>, CliError> {
    match &config.experiment {
        Experiment::Evolve(c) => run_evolve(config, c, strict_flag, dir),
        Experiment::Scan(c) => run_scan(config, c, dir),
        Experiment::Collapse(c) => run_collapse(c, dir),
        Experiment::Redfield(c) => run_redfield(c, dir),
        Experiment::Tebd(c) => run_tebd(c, strict_flag, dir),
        Experiment::TwoBubble(c) => run_two_bubble(c, dir),
        Experiment::Sample(c) => run_sample(config, c, dir),
    }
}

fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn initial_state(
    n_sites: usize,
    initial: &Option<String>,
) -> Result<SpinConfig, ising_ring::Error> {
    match initial {
        None => SpinConfig::all_up(n_sites),
        Some(bits) => {
            let config = SpinConfig::from_bit_string(bits)?;
            if config.n_sites() != n_sites {
                return Err(ising_ring::Error::ShapeMismatch(format!(
                    "initial state has {} sites, model has {n_sites}",
                    config.n_sites()
                )));
            }
            Ok(config)
        }
    }
}

fn run_evolve(
    _run: &RunConfig,
    c: &crate::config::EvolveConfig,
    strict_flag: bool,
    dir: &Path,
) -> Result<Vec<String>, CliError> {
    let params = c.model.params().map_err(classify)?;
    let schedule = c.schedule.build(&c.model).map_err(classify)?;
    let n_max = observables::DEFAULT_N_MAX
        .min(params.n_sites.saturating_sub(2))
        .max(1);
    let initial = DenseState::from_config(&SpinConfig::all_up(params.n_sites).map_err(classify)?);
    let mut rows = Vec::new();
    let mut measure = |t: f64, state: &DenseState| {
        let (h_x, h_z) = schedule.sample(t);
        let h_t = build_full(&params.with_fields(h_x, h_z)).expect("sized params");
        let energy = energy_expectation(&h_t, state);
        rows.push(ObservableRecord::measure(state, t, energy, state.norm(), n_max));
    };
    let mut warnings = Vec::new();
    match c.backend {
        Backend::ExactDense => {
            // eigenbasis stepping; only piecewise-constant drives qualify
            let constant = schedule.segments.iter().all(|s| {
                matches!(s.h_x, ising_ring::schedule::Profile::Constant { .. })
                    && matches!(s.h_z, ising_ring::schedule::Profile::Constant { .. })
            });
            if !constant {
                return Err(CliError::Config(
                    "the exact-dense backend only propagates piecewise-constant schedules; \
                     use exact-krylov for driven profiles"
                        .into(),
                ));
            }
            let mut state = initial;
            let mut t = 0.0;
            measure(0.0, &state);
            for seg in &schedule.segments {
                let (h_x, h_z) = (seg.h_x.value(0.0, seg.duration), seg.h_z.value(0.0, seg.duration));
                let h = build_full(&params.with_fields(h_x, h_z)).map_err(classify)?;
                let eig = EigenPropagation::new(&h, params.n_sites).map_err(classify)?;
                let steps = (seg.duration / c.record_every).round().max(1.0) as usize;
                let dt = seg.duration / steps as f64;
                for _ in 0..steps {
                    state = eig.propagate(&state, dt);
                    t += dt;
                    measure(t, &state);
                }
            }
        }
        Backend::ExactKrylov => {
            let op = DrivenIsingOp::new(&params).map_err(classify)?;
            let opts = DrivenOptions {
                strict: c.strict || strict_flag,
                ..Default::default()
            };
            let outcome = propagate_driven(
                &initial,
                &schedule,
                &op,
                c.dt,
                c.record_every,
                &opts,
                |t, state| measure(t, state),
            )
            .map_err(classify)?;
            warnings.extend(outcome.resolution_warning);
        }
    }
    let mut csv = String::new();
    csv.push_str(&ObservableRecord::csv_header(n_max));
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    write_text(&dir.join("trajectory.csv"), &csv)?;
    Ok(warnings)
}

fn run_scan(
    run: &RunConfig,
    c: &crate::config::ScanConfig,
    dir: &Path,
) -> Result<Vec<String>, CliError> {
    let params = c.model.params().map_err(classify)?;
    if c.h_z_steps < 2 {
        return Err(CliError::Config("scan needs at least two grid points".into()));
    }
    let grid: Vec<f64> = (0..c.h_z_steps)
        .map(|k| c.h_z_start + (c.h_z_stop - c.h_z_start) * k as f64 / (c.h_z_steps - 1) as f64)
        .collect();
    let h_x = c.model.h_x;
    let (k_scale, floor, h_init, pause) =
        (c.crossing_scale, c.crossing_floor, c.h_z_initial, c.pause);
    let template = move |h_z: f64| {
        DriveSchedule::new(vec![
            ising_ring::schedule::Segment {
                duration: (k_scale * h_z * h_z).max(floor),
                h_x: ising_ring::schedule::Profile::Constant { value: h_x },
                h_z: ising_ring::schedule::Profile::Linear {
                    from: h_init,
                    to: h_z,
                },
                label: Some("flip".into()),
            },
            ising_ring::schedule::Segment {
                duration: pause,
                h_x: ising_ring::schedule::Profile::Constant { value: h_x },
                h_z: ising_ring::schedule::Profile::Constant { value: h_z },
                label: Some("pause".into()),
            },
        ])
        .expect("valid scan schedule")
    };
    let result = analysis::resonance_scan(
        &grid,
        &params,
        template,
        c.dt,
        c.record_every,
        analysis::ScanMeta {
            n_sites: params.n_sites,
            h_x,
            backend: "exact-krylov".into(),
            seed: run.seed,
            schedule_hash: config_hash(run),
        },
    )
    .map_err(classify)?;
    write_text(
        &dir.join("scan.json"),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&result).expect("scan serializes")
        ),
    )?;
    // heatmap: one row per grid point, M over time
    let mut csv = String::from("h_z");
    for t in &result.heatmap_times {
        csv.push_str(&format!(",{t:.12e}"));
    }
    csv.push('\n');
    for (h_z, row) in result.grid.iter().zip(&result.heatmap_m) {
        csv.push_str(&format!("{h_z:.12e}"));
        for m in row {
            csv.push_str(&format!(",{m:.12e}"));
        }
        csv.push('\n');
    }
    write_text(&dir.join("heatmap.csv"), &csv)?;
    Ok(Vec::new())
}

#[derive(Serialize)]
struct CollapseArtifact {
    reports: Vec<CollapseReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    best: Option<(f64, f64)>,
}

fn run_collapse(c: &crate::config::CollapseConfig, dir: &Path) -> Result<Vec<String>, CliError> {
    let params = c.model.params().map_err(classify)?;
    if c.h_x_values.len() < 3 {
        return Err(CliError::Config("collapse needs at least three h_x values".into()));
    }
    let curves: Vec<(f64, Vec<(f64, f64)>)> = c
        .h_x_values
        .iter()
        .map(|&h_x| -> Result<_, CliError> {
            let p = params.with_fields(h_x, params.h_z);
            let h = build_full(&p).map_err(classify)?;
            let mut psi =
                DenseState::from_config(&SpinConfig::all_up(p.n_sites).map_err(classify)?);
            let dt = c.x_max / (h_x * h_x) / c.samples as f64;
            let mut series = vec![(0.0, observables::magnetization(&psi))];
            for k in 1..=c.samples {
                psi = ising_ring::evolve::propagate(&psi, &h, dt).map_err(classify)?;
                series.push((k as f64 * dt, observables::magnetization(&psi)));
            }
            Ok((h_x, series))
        })
        .collect::<Result<_, _>>()?;
    let reports: Vec<CollapseReport> = c
        .exponents
        .iter()
        .map(|&p| scaling_collapse(&curves, p).map_err(classify))
        .collect::<Result<_, _>>()?;
    let best = match c.search {
        Some((lo, hi, steps)) => Some(best_exponent(&curves, lo, hi, steps).map_err(classify)?),
        None => None,
    };
    write_text(
        &dir.join("collapse.json"),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&CollapseArtifact { reports, best })
                .expect("collapse serializes")
        ),
    )?;
    Ok(Vec::new())
}

fn run_redfield(c: &crate::config::RedfieldConfig, dir: &Path) -> Result<Vec<String>, CliError> {
    let params = c.model.params().map_err(classify)?;
    let form = match c.spectrum {
        SpectrumConfig::PaperLiteral => SpectrumForm::PaperLiteral,
        SpectrumConfig::CutoffCorrected => SpectrumForm::CutoffCorrected,
        SpectrumConfig::Thermal { temperature } => SpectrumForm::Thermal { temperature },
    };
    let bath = BathSpec::new(c.eta, c.omega_c, form).map_err(classify)?;
    let h = build_full(&params).map_err(classify)?;
    let tensor = build_redfield(&h, params.n_sites, &bath, c.secular).map_err(classify)?;
    let rho0 = projector(
        DenseState::from_config(&SpinConfig::all_up(params.n_sites).map_err(classify)?).amp(),
    );
    let traj = evolve_master(
        &rho0,
        &tensor,
        c.total_time,
        c.record_every,
        MasterIntegrator::default(),
    )
    .map_err(classify)?;
    let n_max = observables::DEFAULT_N_MAX
        .min(params.n_sites.saturating_sub(2))
        .max(1);
    let mut csv = String::new();
    csv.push_str(&MasterRecord::csv_header(n_max));
    csv.push('\n');
    for r in &traj.records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    write_text(&dir.join("trajectory.csv"), &csv)?;
    let mut warnings = Vec::new();
    if !tensor.degenerate_groups.is_empty() {
        warnings.push(format!(
            "secular grouping is ambiguous: {} degenerate Bohr-frequency groups",
            tensor.degenerate_groups.len()
        ));
    }
    Ok(warnings)
}

fn run_tebd(
    c: &crate::config::TebdConfig,
    strict_flag: bool,
    dir: &Path,
) -> Result<Vec<String>, CliError> {
    let params = c.model.params().map_err(classify)?;
    let mut cfg = MpsConfig::new(c.chi, c.dt, c.cutoff)
        .map_err(classify)?
        .with_discard(c.boundary_discard);
    if c.strict || strict_flag {
        cfg = cfg.strict();
    }
    let initial = initial_state(params.n_sites, &c.initial).map_err(classify)?;
    let traj = tebd4_evolve(
        MpsState::product_state(&initial),
        &params,
        c.total_time,
        &cfg,
        c.record_every,
    )
    .map_err(classify)?;
    let n_max = observables::DEFAULT_N_MAX
        .min(params.n_sites.saturating_sub(2))
        .max(1);
    let mut csv = String::new();
    csv.push_str(&MpsRecord::csv_header(n_max));
    csv.push('\n');
    for r in &traj.records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    write_text(&dir.join("trajectory.csv"), &csv)?;
    Ok(Vec::new())
}

fn run_two_bubble(
    c: &crate::config::TwoBubbleConfig,
    dir: &Path,
) -> Result<Vec<String>, CliError> {
    let params = c.model.params().map_err(classify)?;
    let traj = ising_ring::evolve::quench_two_bubble_scenario(
        &params,
        c.n1,
        c.n2,
        c.total_time,
        c.record_every,
    )
    .map_err(classify)?;
    let mut csv = String::from("time");
    for j in 0..params.n_sites {
        csv.push_str(&format!(",site{}", j + 1));
    }
    csv.push('\n');
    for (t, profile) in traj.times.iter().zip(&traj.interface) {
        csv.push_str(&format!("{t:.12e}"));
        for v in profile {
            csv.push_str(&format!(",{v:.12e}"));
        }
        csv.push('\n');
    }
    write_text(&dir.join("interface.csv"), &csv)?;
    let mut summary = String::from("time,m,down_count\n");
    for ((t, m), d) in traj
        .times
        .iter()
        .zip(&traj.magnetization)
        .zip(&traj.down_count)
    {
        summary.push_str(&format!("{t:.12e},{m:.12e},{d:.12e}\n"));
    }
    write_text(&dir.join("summary.csv"), &summary)?;
    Ok(Vec::new())
}

fn run_sample(
    run: &RunConfig,
    c: &SampleConfig,
    dir: &Path,
) -> Result<Vec<String>, CliError> {
    let params = c.model.params().map_err(classify)?;
    let initial = initial_state(params.n_sites, &c.initial).map_err(classify)?;
    let mut state = DenseState::from_config(&initial);
    let mut warnings = Vec::new();
    if let Some(schedule_cfg) = &c.schedule {
        let schedule = schedule_cfg.build(&c.model).map_err(classify)?;
        let op = DrivenIsingOp::new(&params).map_err(classify)?;
        let outcome = propagate_driven(
            &state,
            &schedule,
            &op,
            c.dt,
            0.0,
            &DrivenOptions::default(),
            |_, _| {},
        )
        .map_err(classify)?;
        state = outcome.state;
        warnings.extend(outcome.resolution_warning);
    }
    let shots: ShotSet =
        observables::sample_shots(&state, c.count, run.seed, config_hash(run))
            .map_err(classify)?;
    let mut bin = Vec::new();
    shots.write_binary(&mut bin).map_err(classify)?;
    fs::File::create(dir.join("shots.bin"))
        .and_then(|mut f| f.write_all(&bin))
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut text = Vec::new();
    shots.write_text(&mut text).map_err(classify)?;
    write_text(
        &dir.join("shots.txt"),
        std::str::from_utf8(&text).expect("ascii bit strings"),
    )?;
    Ok(warnings)
}

/// Render every recognized artifact in a directory to SVG; errors when
/// nothing is recognized.
pub fn plot(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut produced = Vec::new();
    let trajectory = dir.join("trajectory.csv");
    if trajectory.exists() {
        let text = fs::read_to_string(&trajectory).map_err(|e| CliError::Config(e.to_string()))?;
        let svg = plot_trajectory(&text)?;
        let out = dir.join("trajectory.svg");
        write_text(&out, &svg)?;
        produced.push(out);
    }
    let scan = dir.join("scan.json");
    if scan.exists() {
        let text = fs::read_to_string(&scan).map_err(|e| CliError::Config(e.to_string()))?;
        let result: analysis::ScanResult =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("scan.json: {e}")))?;
        let svg = plot_scan(&result);
        let out = dir.join("scan.svg");
        write_text(&out, &svg)?;
        produced.push(out);
    }
    let collapse = dir.join("collapse.json");
    if collapse.exists() {
        let text = fs::read_to_string(&collapse).map_err(|e| CliError::Config(e.to_string()))?;
        let artifact: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("collapse.json: {e}")))?;
        let svg = plot_collapse(&artifact)?;
        let out = dir.join("collapse.svg");
        write_text(&out, &svg)?;
        produced.push(out);
    }
    let heat = dir.join("heatmap.csv");
    if heat.exists() {
        let text = fs::read_to_string(&heat).map_err(|e| CliError::Config(e.to_string()))?;
        let svg = plot_matrix(&text, "magnetization heat profile", "t", "h_z")?;
        let out = dir.join("heatmap.svg");
        write_text(&out, &svg)?;
        produced.push(out);
    }
    let interface = dir.join("interface.csv");
    if interface.exists() {
        let text = fs::read_to_string(&interface).map_err(|e| CliError::Config(e.to_string()))?;
        let svg = plot_interface(&text)?;
        let out = dir.join("interface.svg");
        write_text(&out, &svg)?;
        produced.push(out);
    }
    if produced.is_empty() {
        return Err(CliError::Config(format!(
            "no recognized artifacts in {}",
            dir.display()
        )));
    }
    Ok(produced)
}

fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config("empty CSV".into()))?;
    let names: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|v| v.parse::<f64>()).collect();
        let row = row.map_err(|e| CliError::Config(format!("bad CSV value: {e}")))?;
        if row.len() != names.len() {
            return Err(CliError::Config("ragged CSV".into()));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Config("CSV has no data rows".into()));
    }
    Ok((names, rows))
}

fn plot_trajectory(text: &str) -> Result<String, CliError> {
    let (names, rows) = parse_csv(text)?;
    let m_col = names
        .iter()
        .position(|n| n == "m")
        .ok_or_else(|| CliError::Config("trajectory.csv lacks an m column".into()))?;
    let series = vec![crate::plot::Series {
        label: "M".into(),
        points: rows.iter().map(|r| (r[0], r[m_col])).collect(),
    }];
    Ok(crate::plot::line_plot(
        "magnetization trajectory",
        "t",
        "M",
        &series,
        &[],
    ))
}

fn plot_scan(result: &analysis::ScanResult) -> String {
    let n_lambda = result
        .points
        .first()
        .map(|p| p.lambda.len())
        .unwrap_or(0);
    let mut series = Vec::new();
    for n in 1..=n_lambda {
        series.push(crate::plot::Series {
            label: format!("lambda{n}"),
            points: result
                .points
                .iter()
                .map(|p| (p.h_z, p.lambda[n - 1]))
                .collect(),
        });
    }
    // resonance markers at -2J/n
    let markers: Vec<(f64, String)> = (1..=n_lambda)
        .map(|n| (-2.0 / n as f64, format!("n={n}")))
        .collect();
    crate::plot::line_plot(
        "bubble densities against the longitudinal field",
        "h_z",
        "lambda_n",
        &series,
        &markers,
    )
}

fn plot_collapse(artifact: &serde_json::Value) -> Result<String, CliError> {
    let reports = artifact
        .get("reports")
        .and_then(|r| r.as_array())
        .ok_or_else(|| CliError::Config("collapse.json lacks reports".into()))?;
    let report = reports
        .iter()
        .min_by(|a, b| {
            let ra = a.get("residual").and_then(|v| v.as_f64()).unwrap_or(f64::MAX);
            let rb = b.get("residual").and_then(|v| v.as_f64()).unwrap_or(f64::MAX);
            ra.partial_cmp(&rb).unwrap()
        })
        .ok_or_else(|| CliError::Config("collapse.json has no reports".into()))?;
    let exponent = report
        .get("exponent")
        .and_then(|v| v.as_f64())
        .unwrap_or(f64::NAN);
    let mut series = Vec::new();
    for curve in report
        .get("rescaled")
        .and_then(|v| v.as_array())
        .ok_or_else(|| CliError::Config("collapse report lacks curves".into()))?
    {
        let param = curve.get("param").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
        let pts: Vec<(f64, f64)> = curve
            .get("series")
            .and_then(|v| v.as_array())
            .map(|arr| {
                arr.iter()
                    .filter_map(|p| {
                        let pair = p.as_array()?;
                        Some((pair[0].as_f64()?, pair[1].as_f64()?))
                    })
                    .collect()
            })
            .unwrap_or_default();
        series.push(crate::plot::Series {
            label: format!("param {param:.4}"),
            points: pts,
        });
    }
    Ok(crate::plot::line_plot(
        &format!("scaling collapse at p = {exponent:.2}"),
        "param^p · t",
        "value",
        &series,
        &[],
    ))
}

fn plot_matrix(text: &str, title: &str, x_label: &str, y_label: &str) -> Result<String, CliError> {
    let (names, rows) = parse_csv(text)?;
    let xs: Vec<f64> = names[1..]
        .iter()
        .map(|s| s.trim_start_matches(|c: char| !c.is_ascii_digit() && c != '-' && c != '.')
            .parse::<f64>()
            .unwrap_or(0.0))
        .collect();
    let ys: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let values: Vec<Vec<f64>> = rows.iter().map(|r| r[1..].to_vec()).collect();
    Ok(crate::plot::heatmap(title, x_label, y_label, &xs, &ys, &values))
}

fn plot_interface(text: &str) -> Result<String, CliError> {
    let (names, rows) = parse_csv(text)?;
    let sites: Vec<f64> = (1..names.len()).map(|j| j as f64).collect();
    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let values: Vec<Vec<f64>> = rows.iter().map(|r| r[1..].to_vec()).collect();
    Ok(crate::plot::heatmap(
        "bubble interface density",
        "site",
        "t",
        &sites,
        &times,
        &values,
    ))
}
