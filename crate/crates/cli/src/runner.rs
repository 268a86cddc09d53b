//! Experiment execution: drives the solvers, assembles the expansion, and
//! emits the CSV artifacts for every mode.

use crate::config::{ExperimentSpec, IcSpec, Mode, RunSolver};
use crate::io;
use fastslow::analysis::{
    error_norms, fit_exponential_rate, fit_loglog_slope, locate_steepest_gradient, ode_oracle,
    AnalysisError, ErrorReport, FitResult,
};
use fastslow::asymptotics::{
    assemble_main_term, boundary_layer_triple, psi_field, reduced_initial_data, regular_triple,
    solve_reduced, AsymptoticsError,
};
use fastslow::grid::GridError;
use fastslow::model::{derive_constants, validate, ModelError, ValidatedParams};
use fastslow::profiles::{sample_initial_triple, ProfileError, ProfileSpec};
use fastslow::solver::{solve_full, Boundary, SolverConfig, SolverError};
use fastslow::{FieldTriple, Grid1D};
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug)]
pub enum RunError {
    Model(ModelError),
    Grid(GridError),
    Profile(ProfileError),
    /// The reduced system's two characteristic speeds coincide; the
    /// asymptotic experiments assume they are distinct.
    DegenerateSpeeds { v: f64, k3: f64 },
    Solver(SolverError),
    Asymptotics(AsymptoticsError),
    Analysis(AnalysisError),
    Io(std::io::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Model(e) => write!(f, "invalid model: {e}"),
            RunError::Grid(e) => write!(f, "invalid grid: {e}"),
            RunError::Profile(e) => write!(f, "invalid initial data: {e}"),
            RunError::DegenerateSpeeds { v, k3 } => write!(
                f,
                "reduced speeds coincide (V = {v}, k3 = {k3}); the expansion \
                 experiments need distinct characteristics"
            ),
            RunError::Solver(e) => write!(f, "solver failure: {e}"),
            RunError::Asymptotics(e) => write!(f, "expansion failure: {e}"),
            RunError::Analysis(e) => write!(f, "analysis failure: {e}"),
            RunError::Io(e) => write!(f, "write failure: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    /// 1 for validation problems (bad config values), 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Model(_)
            | RunError::Grid(_)
            | RunError::Profile(_)
            | RunError::DegenerateSpeeds { .. } => 1,
            RunError::Solver(SolverError::BadCfl(_))
            | RunError::Solver(SolverError::BadOutputTimes(_))
            | RunError::Solver(SolverError::ShapeMismatch { .. }) => 1,
            _ => 2,
        }
    }
}

impl From<ModelError> for RunError {
    fn from(e: ModelError) -> Self {
        RunError::Model(e)
    }
}
impl From<GridError> for RunError {
    fn from(e: GridError) -> Self {
        RunError::Grid(e)
    }
}
impl From<ProfileError> for RunError {
    fn from(e: ProfileError) -> Self {
        RunError::Profile(e)
    }
}
impl From<SolverError> for RunError {
    fn from(e: SolverError) -> Self {
        RunError::Solver(e)
    }
}
impl From<AsymptoticsError> for RunError {
    fn from(e: AsymptoticsError) -> Self {
        RunError::Asymptotics(e)
    }
}
impl From<AnalysisError> for RunError {
    fn from(e: AnalysisError) -> Self {
        RunError::Analysis(e)
    }
}
impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

/// Everything a run wrote, plus its manifest.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

impl RunArtifacts {
    /// Every listed file exists and is non-empty.
    pub fn verify(&self) -> std::io::Result<()> {
        for path in self.files.iter().chain(std::iter::once(&self.manifest)) {
            let meta = std::fs::metadata(path)?;
            if meta.len() == 0 {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("{} is empty", path.display()),
                ));
            }
        }
        Ok(())
    }
}

fn solver_config(run: &RunSolver) -> Result<SolverConfig, SolverError> {
    SolverConfig::new(run.cfl, run.output_times.clone(), run.boundary)
}

fn reject_degenerate_speeds(vp: &ValidatedParams) -> Result<(), RunError> {
    let dc = derive_constants(vp);
    let scale = 1.0f64.max(dc.v.abs()).max(vp.k3.abs());
    if (dc.v - vp.k3).abs() < 1e-8 * scale {
        return Err(RunError::DegenerateSpeeds { v: dc.v, k3: vp.k3 });
    }
    Ok(())
}

fn sample_ic(
    ic: &IcSpec,
    grid: &Grid1D,
    epsilon: f64,
) -> Result<FieldTriple, ProfileError> {
    sample_initial_triple(&ic.u, &ic.v, &ic.w, grid, epsilon)
}

/// Main term of the expansion at each requested output time: the reduced
/// solution expanded through the slaving relation plus the decaying layer
/// corrector.
fn expansion_at_times(
    vp: &ValidatedParams,
    grid: &Grid1D,
    ic: &FieldTriple,
    cfg: &SolverConfig,
) -> Result<Vec<FieldTriple>, RunError> {
    let rp0 = reduced_initial_data(ic, vp);
    let reduced = solve_reduced(vp, grid, &rp0, cfg)?;
    let psi = psi_field(ic, vp);
    let mut out = Vec::with_capacity(reduced.len());
    for rp in &reduced {
        let reg = regular_triple(rp, vp);
        let lay = boundary_layer_triple(&psi, vp, rp.t);
        out.push(assemble_main_term(&reg, &lay)?);
    }
    Ok(out)
}

fn error_rows(report: &ErrorReport) -> Vec<(String, String, f64)> {
    vec![
        ("sup_err".into(), "u".into(), report.u.sup),
        ("sup_err".into(), "v".into(), report.v.sup),
        ("sup_err".into(), "w".into(), report.w.sup),
        ("sup_err".into(), "all".into(), report.sup_norm),
        ("l1_err".into(), "u".into(), report.u.l1),
        ("l1_err".into(), "v".into(), report.v.l1),
        ("l1_err".into(), "w".into(), report.w.l1),
        ("l1_err".into(), "all".into(), report.l1_norm),
    ]
}

/// Result of the initial-layer decay measurement.
#[derive(Debug, Clone, Copy)]
pub struct LayerDecay {
    pub fit: FitResult,
    pub probe_cell: usize,
    /// The predicted decay rate `a + b`.
    pub target: f64,
}

/// Fit the decay rate of `|u_full - ubar|` at the cell of maximal `|psi|`
/// over a window in stretched time. Returns `None` when the measurement is
/// not meaningful: no layer (`psi ~ 0`), the window runs past the horizon,
/// or the sampled magnitudes are not positive.
pub fn measure_layer_decay(
    vp: &ValidatedParams,
    grid: &Grid1D,
    ic: &FieldTriple,
    tau_window: (f64, f64),
    cfl: f64,
    boundary: Boundary,
) -> Result<Option<LayerDecay>, RunError> {
    let psi = psi_field(ic, vp);
    let ic_scale = fastslow::fields::max_abs(&ic.u)
        .max(fastslow::fields::max_abs(&ic.v))
        .max(fastslow::fields::max_abs(&ic.w));
    let psi_peak = fastslow::fields::max_abs(&psi.psi);
    if psi_peak <= 1e-14 * ic_scale.max(1e-300) {
        return Ok(None);
    }
    let probe = (0..grid.n_cells())
        .max_by(|&i, &j| {
            psi.psi[i]
                .abs()
                .partial_cmp(&psi.psi[j].abs())
                .unwrap()
        })
        .expect("grid has cells");

    let n_points = 8;
    let (lo, hi) = tau_window;
    let taus: Vec<f64> = (0..n_points)
        .map(|k| lo + (hi - lo) * k as f64 / (n_points - 1) as f64)
        .collect();
    let times: Vec<f64> = taus.iter().map(|tau| tau * vp.eps2()).collect();
    if *times.last().unwrap() > vp.t_end {
        return Ok(None);
    }

    let cfg = SolverConfig::new(cfl, times, boundary)?;
    let full = solve_full(vp, grid, ic, &cfg)?;
    let rp0 = reduced_initial_data(ic, vp);
    let reduced = solve_reduced(vp, grid, &rp0, &cfg)?;

    let mut series = Vec::with_capacity(n_points);
    for (k, &tau) in taus.iter().enumerate() {
        let diff = (full.snapshots[k].u[probe] - reduced[k].ubar[probe]).abs();
        if diff > 0.0 {
            series.push((tau, diff));
        }
    }
    if series.len() < 2 {
        return Ok(None);
    }
    let fit = fit_exponential_rate(&series)?;
    Ok(Some(LayerDecay {
        fit,
        probe_cell: probe,
        target: vp.a + vp.b,
    }))
}

fn first_step_location(ic: &IcSpec) -> Option<f64> {
    for spec in [&ic.u, &ic.v, &ic.w] {
        if let ProfileSpec::Step { jump_location, .. } = spec {
            return Some(*jump_location);
        }
    }
    None
}

struct CompareOutcome {
    files: Vec<PathBuf>,
    /// Sup error of the u component at the final output time.
    final_sup_u: f64,
}

fn run_compare_into(
    dir: &Path,
    vp: &ValidatedParams,
    grid: &Grid1D,
    ic_spec: &IcSpec,
    run: &RunSolver,
    tau_window: (f64, f64),
) -> Result<CompareOutcome, RunError> {
    reject_degenerate_speeds(vp)?;
    let ic = sample_ic(ic_spec, grid, vp.epsilon)?;
    let cfg = solver_config(run)?;

    let full = solve_full(vp, grid, &ic, &cfg)?;
    let mains = expansion_at_times(vp, grid, &ic, &cfg)?;

    let mut files = Vec::new();
    let mut final_report = None;
    for (i, (snap, main)) in full.snapshots.iter().zip(mains.iter()).enumerate() {
        files.push(io::write_fields_csv(
            &dir.join(format!("fields_full_{i:04}.csv")),
            grid,
            snap,
        )?);
        files.push(io::write_fields_csv(
            &dir.join(format!("fields_main_{i:04}.csv")),
            grid,
            main,
        )?);
        let report = error_norms(snap, main, grid)?;
        files.push(io::write_report_csv(
            &dir.join(format!("errors_{i:04}.csv")),
            &error_rows(&report),
        )?);
        final_report = Some(report);
    }

    let mut rows = Vec::new();
    let final_report = final_report.expect("at least one output time");
    rows.extend(error_rows(&final_report));

    if let Some(decay) =
        measure_layer_decay(vp, grid, &ic, tau_window, run.cfl, run.boundary)?
    {
        rows.push(("decay_rate".into(), "u".into(), decay.fit.value));
        rows.push(("decay_target".into(), "u".into(), decay.target));
        rows.push(("r_squared".into(), "u".into(), decay.fit.r_squared));
    }

    if let Some(jump) = first_step_location(ic_spec) {
        let last = full.snapshots.last().expect("at least one snapshot");
        let x_star = locate_steepest_gradient(&last.u, grid)?;
        let dc = derive_constants(vp);
        rows.push(("layer_x".into(), "u".into(), x_star));
        rows.push((
            "layer_x_predicted".into(),
            "u".into(),
            jump + dc.v * last.t,
        ));
    }

    files.push(io::write_report_csv(&dir.join("report.csv"), &rows)?);
    let final_sup_u = final_report.u.sup;
    Ok(CompareOutcome { files, final_sup_u })
}

fn oracle_rel_err(state: &FieldTriple, oracle: (f64, f64, f64)) -> [f64; 4] {
    let scale = oracle
        .0
        .abs()
        .max(oracle.1.abs())
        .max(oracle.2.abs())
        .max(1e-300);
    let sup = |xs: &[f64], reference: f64| {
        xs.iter()
            .fold(0.0f64, |acc, &x| acc.max((x - reference).abs()))
    };
    let u = sup(&state.u, oracle.0) / scale;
    let v = sup(&state.v, oracle.1) / scale;
    let w = sup(&state.w, oracle.2) / scale;
    [u, v, w, u.max(v).max(w)]
}

/// Outcome of the space-homogeneous oracle comparison.
#[derive(Debug, Clone, Copy)]
pub struct OracleOutcome {
    pub rel_err: [f64; 4],
    pub dt_final: f64,
    pub halvings: u32,
}

/// Run the full solver on uniform data under periodic boundaries and compare
/// against the exact matrix-exponential solution at the last output time,
/// halving the time step until the difference converges or drops below
/// `1e-7`.
pub fn run_oracle_comparison(
    vp: &ValidatedParams,
    grid: &Grid1D,
    uniform_ic: [f64; 3],
    run: &RunSolver,
) -> Result<OracleOutcome, RunError> {
    let t_cmp = *run
        .output_times
        .last()
        .ok_or_else(|| SolverError::BadOutputTimes("no output times".into()))?;
    let mut ic = FieldTriple::zeros(grid.n_cells(), 0.0);
    ic.u.fill(uniform_ic[0]);
    ic.v.fill(uniform_ic[1]);
    ic.w.fill(uniform_ic[2]);
    let exact = ode_oracle(vp, (uniform_ic[0], uniform_ic[1], uniform_ic[2]), t_cmp);

    let mut best: Option<OracleOutcome> = None;
    let mut prev_all: Option<f64> = None;
    for k in 0..=20u32 {
        let cfl = run.cfl / 2f64.powi(k as i32);
        let cfg = SolverConfig::new(cfl, vec![t_cmp], Boundary::Periodic)?;
        let trace = solve_full(vp, grid, &ic, &cfg)?;
        let rel = oracle_rel_err(&trace.snapshots[0], exact);
        let outcome = OracleOutcome {
            rel_err: rel,
            dt_final: trace.dt,
            halvings: k,
        };
        let all = rel[3];
        let improved = best.is_none_or(|b| all < b.rel_err[3]);
        if improved {
            best = Some(outcome);
        }
        if all <= 1e-7 {
            break;
        }
        // stop once halving no longer helps (roundoff floor)
        if let Some(prev) = prev_all {
            if all > 0.5 * prev && all < 1e-10 {
                break;
            }
            if all > prev {
                break;
            }
        }
        prev_all = Some(all);
    }
    Ok(best.expect("at least one iteration ran"))
}

/// Execute one experiment and write its artifacts under
/// `spec.output_dir`. Deterministic: identical specs produce byte-identical
/// CSV files.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunArtifacts, RunError> {
    let started = Instant::now();
    let vp = validate(spec.params)?;
    let grid = Grid1D::new(spec.grid.x_min, spec.grid.x_max, spec.grid.n_cells)?;
    let dc = derive_constants(&vp);
    let dir = PathBuf::from(&spec.output_dir);
    std::fs::create_dir_all(&dir)?;

    let mut files = Vec::new();
    let mut notes: Vec<(String, String)> = vec![
        ("mode".into(), spec.mode.as_str().into()),
        ("V".into(), io::fmt_f64(dc.v)),
        ("C".into(), io::fmt_f64(dc.cw)),
        ("c".into(), io::fmt_f64(dc.cu)),
        ("D".into(), io::fmt_f64(dc.d)),
        ("dx".into(), io::fmt_f64(grid.dx())),
    ];

    match spec.mode {
        Mode::Solve => {
            let ic_spec = spec.ic.as_ref().expect("parser guarantees ic for solve");
            let ic = sample_ic(ic_spec, &grid, vp.epsilon)?;
            let cfg = solver_config(&spec.solver)?;
            let trace = solve_full(&vp, &grid, &ic, &cfg)?;
            for (i, snap) in trace.snapshots.iter().enumerate() {
                files.push(io::write_fields_csv(
                    &dir.join(format!("fields_full_{i:04}.csv")),
                    &grid,
                    snap,
                )?);
            }
            notes.push(("dt".into(), io::fmt_f64(trace.dt)));
            notes.push(("steps".into(), trace.steps.to_string()));
        }
        Mode::Expand => {
            reject_degenerate_speeds(&vp)?;
            let ic_spec = spec.ic.as_ref().expect("parser guarantees ic for expand");
            let ic = sample_ic(ic_spec, &grid, vp.epsilon)?;
            let cfg = solver_config(&spec.solver)?;
            let mains = expansion_at_times(&vp, &grid, &ic, &cfg)?;
            for (i, main) in mains.iter().enumerate() {
                files.push(io::write_fields_csv(
                    &dir.join(format!("fields_main_{i:04}.csv")),
                    &grid,
                    main,
                )?);
            }
        }
        Mode::Compare => {
            let ic_spec = spec.ic.as_ref().expect("parser guarantees ic for compare");
            let outcome = run_compare_into(
                &dir,
                &vp,
                &grid,
                ic_spec,
                &spec.solver,
                spec.tau_window,
            )?;
            files.extend(outcome.files);
        }
        Mode::Sweep => {
            let ic_spec = spec.ic.as_ref().expect("parser guarantees ic for sweep");
            let epsilons = spec
                .sweep_epsilons
                .as_ref()
                .expect("parser guarantees sweep_epsilons");
            let mut points = Vec::with_capacity(epsilons.len());
            for (i, &eps) in epsilons.iter().enumerate() {
                let mut params = spec.params;
                params.epsilon = eps;
                let vp_i = validate(params)?;
                let sub_dir = dir.join(format!("eps_{i:02}"));
                std::fs::create_dir_all(&sub_dir)?;
                let outcome = run_compare_into(
                    &sub_dir,
                    &vp_i,
                    &grid,
                    ic_spec,
                    &spec.solver,
                    spec.tau_window,
                )?;
                files.extend(outcome.files);
                points.push((eps, outcome.final_sup_u));
            }
            let fit = fit_loglog_slope(&points)?;
            let rows = vec![
                ("slope".into(), "u".into(), fit.value),
                ("r_squared".into(), "u".into(), fit.r_squared),
            ];
            files.push(io::write_report_csv(&dir.join("summary.csv"), &rows)?);
        }
        Mode::Oracle => {
            let uniform = spec.oracle_ic.expect("parser guarantees oracle values");
            let outcome = run_oracle_comparison(&vp, &grid, uniform, &spec.solver)?;
            let rows = vec![
                ("rel_err".into(), "u".into(), outcome.rel_err[0]),
                ("rel_err".into(), "v".into(), outcome.rel_err[1]),
                ("rel_err".into(), "w".into(), outcome.rel_err[2]),
                ("rel_err".into(), "all".into(), outcome.rel_err[3]),
            ];
            files.push(io::write_report_csv(&dir.join("report.csv"), &rows)?);
            notes.push(("dt".into(), io::fmt_f64(outcome.dt_final)));
            notes.push(("dt_halvings".into(), outcome.halvings.to_string()));
            notes.push(("boundary".into(), "periodic (forced for oracle)".into()));
        }
    }

    notes.push((
        "wall_time_s".into(),
        format!("{:.3}", started.elapsed().as_secs_f64()),
    ));
    let echo = crate::config::emit_config(spec);
    let manifest = io::write_manifest(&dir.join("manifest.txt"), &echo, &notes)?;

    let artifacts = RunArtifacts { files, manifest };
    artifacts.verify()?;
    Ok(artifacts)
}
