//! Acceptance suite: every verification criterion as one test, each printing
//! a single `criterion N (...): PASS/FAIL` line with the measured numbers.
//!
//! Run with `cargo test -p fastslow-cli --test acceptance -- --nocapture`.

use fastslow::analysis::{
    conservation_residual, error_norms, fit_loglog_slope, locate_steepest_gradient,
};
use fastslow::asymptotics::{
    assemble_main_term, boundary_layer_triple, check_second_order_form, psi_field,
    reduced_initial_data, regular_triple, solve_reduced, RegularPart,
};
use fastslow::fields::max_abs;
use fastslow::model::{derive_constants, validate, ModelParams, ValidatedParams};
use fastslow::profiles::{sample_initial_triple, ProfileSpec};
use fastslow::solver::{solve_full, Boundary, SolverConfig};
use fastslow::{FieldTriple, Grid1D};
use fastslow_cli::config::parse_config;
use fastslow_cli::runner::{measure_layer_decay, run_experiment, run_oracle_comparison};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

fn gaussian(amplitude: f64, center: f64, width: f64) -> ProfileSpec {
    ProfileSpec::Gaussian {
        amplitude,
        center,
        width,
    }
}

fn step(jump_location: f64, left: f64, right: f64) -> ProfileSpec {
    ProfileSpec::Step {
        jump_location,
        left,
        right,
    }
}

fn standard_params(epsilon: f64) -> ModelParams {
    ModelParams {
        k1: 1.0,
        k2: 2.0,
        k3: 0.5,
        a: 1.0,
        b: 2.0,
        c1: 0.5,
        c2: 0.5,
        a3: 0.5,
        b3: 0.5,
        c3: 0.25,
        epsilon,
        t_end: 1.0,
    }
}

fn standard_ic_specs() -> [ProfileSpec; 3] {
    [
        gaussian(1.0, 0.0, 1.0),
        gaussian(0.8, 0.0, 1.2),
        gaussian(0.6, 0.0, 0.9),
    ]
}

fn sample_standard_ic(grid: &Grid1D, epsilon: f64) -> FieldTriple {
    let [u, v, w] = standard_ic_specs();
    sample_initial_triple(&u, &v, &w, grid, epsilon).unwrap()
}

/// Pairwise average of a doubled grid back onto the coarse one.
fn restrict(fine: &[f64]) -> Vec<f64> {
    fine.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Full solve and assembled main term on one grid level; returns the final
/// u field of the full solver and the sup error of u against the main term.
fn order_study_level(vp: &ValidatedParams, n: usize) -> (Vec<f64>, f64) {
    let grid = Grid1D::new(-12.0, 12.0, n).unwrap();
    let ic = sample_standard_ic(&grid, vp.epsilon);
    let cfg = SolverConfig::new(0.9, vec![1.0], Boundary::Outflow).unwrap();
    let full = solve_full(vp, &grid, &ic, &cfg).unwrap();

    let rp0 = reduced_initial_data(&ic, vp);
    let reduced = solve_reduced(vp, &grid, &rp0, &cfg).unwrap();
    let reg = regular_triple(&reduced[0], vp);
    let lay = boundary_layer_triple(&psi_field(&ic, vp), vp, 1.0);
    let main = assemble_main_term(&reg, &lay).unwrap();
    let err = error_norms(&full.snapshots[0], &main, &grid).unwrap();

    let full_u = full.snapshots.into_iter().next().unwrap().u;
    (full_u, err.u.sup)
}

// Criterion 1: fitted log-log slope of the sup-norm u error of the main term
// against epsilon, with a Richardson guard (solver self-error below 10% of
// the measured error, refining the grid until satisfied).
#[test]
fn criterion_1_order_of_main_term() {
    let mut points = Vec::new();
    for &eps in &[0.2, 0.1, 0.05] {
        let vp = validate(standard_params(eps)).unwrap();
        let mut n = 4096usize;
        let mut prev_u: Option<Vec<f64>> = None;
        let (ae, accepted_n, guard) = loop {
            let (full_u, ae) = order_study_level(&vp, n);
            if let Some(prev) = &prev_u {
                let restricted = restrict(&full_u);
                let self_err = prev
                    .iter()
                    .zip(restricted.iter())
                    .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
                if self_err < 0.1 * ae || n >= 262_144 {
                    break (ae, n, self_err / ae);
                }
            }
            prev_u = Some(full_u);
            n *= 2;
        };
        println!(
            "  eps = {eps}: sup_err_u = {ae:.6e} at n = {accepted_n} (self-error ratio {guard:.3})"
        );
        points.push((eps, ae));
    }
    let fit = fit_loglog_slope(&points).unwrap();
    let ok = (0.8..=1.4).contains(&fit.value);
    println!(
        "criterion 1 (order of the main term): {} — fitted slope {:.4} (band [0.8, 1.4], r2 = {:.6})",
        verdict(ok),
        fit.value,
        fit.r_squared
    );
    assert!(
        ok,
        "fitted slope {:.4} outside [0.8, 1.4]; measured points {points:?}",
        fit.value
    );
}

// Criterion 2: the decay rate of |u_full - ubar| at the cell of maximal
// |psi|, fitted over tau in [0.5, 4], within 15% of a + b = 3.
#[test]
fn criterion_2_initial_layer_decay() {
    let vp = validate(standard_params(0.1)).unwrap();
    // wide profiles keep the probe cell's drift terms small; v0 = w0 = 0
    // puts the whole initial state into the layer amplitude psi = u0 / 3
    let grid = Grid1D::new(-18.0, 18.0, 16384).unwrap();
    let ic = sample_initial_triple(
        &gaussian(1.0, 0.0, 3.0),
        &gaussian(0.0, 0.0, 3.0),
        &gaussian(0.0, 0.0, 3.0),
        &grid,
        vp.epsilon,
    )
    .unwrap();
    let decay = measure_layer_decay(&vp, &grid, &ic, (0.5, 4.0), 0.9, Boundary::Outflow)
        .unwrap()
        .expect("layer present");
    let target = vp.a + vp.b;
    let ok = (decay.fit.value - target).abs() <= 0.15 * target;
    println!(
        "criterion 2 (initial-layer decay): {} — rate {:.4} vs target {target} (within 15%? r2 = {:.4})",
        verdict(ok),
        decay.fit.value,
        decay.fit.r_squared
    );
    assert!(ok, "rate {:.4} not within 15% of {target}", decay.fit.value);
}

fn t0_consistency_sup_rel(ic: &FieldTriple, vp: &ValidatedParams) -> f64 {
    let reg = regular_triple(&reduced_initial_data(ic, vp), vp);
    let lay = boundary_layer_triple(&psi_field(ic, vp), vp, 0.0);
    let main = assemble_main_term(&reg, &lay).unwrap();
    let mut worst = 0.0f64;
    for (got, want) in [(&main.u, &ic.u), (&main.v, &ic.v), (&main.w, &ic.w)] {
        let scale = max_abs(want);
        let sup = got
            .iter()
            .zip(want.iter())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        worst = worst.max(if scale > 0.0 { sup / scale } else { sup });
    }
    worst
}

// Criterion 3: the assembled main term at t = 0 equals the sampled initial
// data to 1e-12 relative sup error, for all three profile families.
#[test]
fn criterion_3_exact_t0_consistency() {
    let vp = validate(standard_params(0.1)).unwrap();
    let spike = |amplitude: f64| ProfileSpec::Spike {
        base: Box::new(gaussian(amplitude, 0.0, 1.0)),
    };

    let grid = Grid1D::new(-12.0, 12.0, 2048).unwrap();
    let gauss_ic = sample_standard_ic(&grid, vp.epsilon);
    let gauss_rel = t0_consistency_sup_rel(&gauss_ic, &vp);

    let grid_s = Grid1D::new(-2.0, 2.0, 1024).unwrap();
    let step_ic = sample_initial_triple(
        &step(0.0, 0.0, 1.0),
        &step(0.0, 0.0, 0.5),
        &step(0.0, 0.0, -0.3),
        &grid_s,
        vp.epsilon,
    )
    .unwrap();
    let step_rel = t0_consistency_sup_rel(&step_ic, &vp);

    let grid_k = Grid1D::new(-2.0, 2.0, 4096).unwrap();
    let spike_ic = sample_initial_triple(
        &spike(1.0),
        &spike(0.5),
        &spike(-0.25),
        &grid_k,
        vp.epsilon,
    )
    .unwrap();
    let spike_rel = t0_consistency_sup_rel(&spike_ic, &vp);

    let worst = gauss_rel.max(step_rel).max(spike_rel);
    let ok = worst <= 1e-12;
    println!(
        "criterion 3 (exact t=0 consistency): {} — sup relative errors: gaussian {gauss_rel:.3e}, step {step_rel:.3e}, spike {spike_rel:.3e}",
        verdict(ok)
    );
    assert!(ok, "worst t=0 relative error {worst:.3e} exceeds 1e-12");
}

// Criterion 4: with step data in all three components, the steepest gradient
// of the u component at t = 0.5 sits on the effective characteristic
// x = V t = 1.0, not on the fast characteristics x = k1 t or x = k2 t.
#[test]
fn criterion_4_pseudo_characteristic_location() {
    let params = ModelParams {
        k1: 1.0,
        k2: 4.0,
        k3: -1.0,
        epsilon: 0.01,
        ..standard_params(0.01)
    };
    let vp = validate(params).unwrap();
    let dc = derive_constants(&vp);
    assert_eq!(dc.v, 2.0);

    let dx = 1.0 / 4096.0;
    let n = ((3.0f64 - (-2.0)) / dx).round() as usize; // [-2, 3] at dx = 1/4096
    let grid = Grid1D::new(-2.0, 3.0, n).unwrap();
    assert!((grid.dx() - dx).abs() < 1e-15);

    let ic = sample_initial_triple(
        &step(0.0, 0.0, 1.0),
        &step(0.0, 0.0, 1.0),
        &step(0.0, 0.0, 1.0),
        &grid,
        vp.epsilon,
    )
    .unwrap();
    let t = 0.5;
    let cfg = SolverConfig::new(0.9, vec![t], Boundary::Outflow).unwrap();
    let trace = solve_full(&vp, &grid, &ic, &cfg).unwrap();
    let x_star = locate_steepest_gradient(&trace.snapshots[0].u, &grid).unwrap();

    let predicted = dc.v * t; // 1.0
    let tol = (4.0 * grid.dx()).max(2.0 * vp.epsilon);
    let d_pseudo = (x_star - predicted).abs();
    let d_k1 = (x_star - vp.k1 * t).abs();
    let d_k2 = (x_star - vp.k2 * t).abs();
    let ok = d_pseudo <= tol && d_k1 >= 5.0 * d_pseudo && d_k2 >= 5.0 * d_pseudo;
    println!(
        "criterion 4 (pseudo-characteristic location): {} — x* = {x_star:.5}, |x*-1.0| = {d_pseudo:.4} (tol {tol:.4}), |x*-0.5| = {d_k1:.3}, |x*-2.0| = {d_k2:.3}",
        verdict(ok)
    );
    assert!(ok, "steepest gradient at {x_star}, expected near {predicted}");
}

// Criterion 5: on uniform data with periodic boundaries the full solver
// matches the exact matrix-exponential solution to 1e-6 after halving the
// time step until converged.
#[test]
fn criterion_5_ode_limit_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let params = ModelParams {
        k1: 1.0,
        k2: -0.5,
        k3: 0.3,
        a: 1.0,
        b: 2.0,
        c1: rng.gen_range(-1.0..1.0),
        c2: rng.gen_range(-1.0..1.0),
        a3: rng.gen_range(-1.0..1.0),
        b3: rng.gen_range(-1.0..1.0),
        c3: rng.gen_range(-1.0..1.0),
        epsilon: 0.1,
        t_end: 1.0,
    };
    let vp = validate(params).unwrap();
    let grid = Grid1D::new(-1.0, 1.0, 16).unwrap();
    let run = fastslow_cli::config::RunSolver {
        cfl: 0.9,
        boundary: Boundary::Periodic,
        output_times: vec![1.0],
    };
    let outcome = run_oracle_comparison(&vp, &grid, [1.0, 0.0, 0.5], &run).unwrap();
    let ok = outcome.rel_err[3] <= 1e-6;
    println!(
        "criterion 5 (ODE-limit oracle): {} — rel_err = {:.3e} after {} dt halvings (dt = {:.3e}; couplings c1={:.3}, c2={:.3}, a3={:.3}, b3={:.3}, c3={:.3})",
        verdict(ok),
        outcome.rel_err[3],
        outcome.halvings,
        outcome.dt_final,
        params.c1,
        params.c2,
        params.a3,
        params.b3,
        params.c3
    );
    assert!(ok, "oracle rel_err {:.3e} above 1e-6", outcome.rel_err[3]);
}

// Criterion 6: with the coupling into ubar off, the reduced solver is pure
// advection at speed V; its L1 error against the exact shift converges with
// order at least 0.8 under two dx halvings.
#[test]
fn criterion_6_reduced_advection_order() {
    let params = ModelParams {
        c1: 0.0,
        c2: 0.0,
        ..standard_params(0.1)
    };
    let vp = validate(params).unwrap();
    let dc = derive_constants(&vp);
    assert_eq!(dc.cw, 0.0);

    let t = 1.0;
    let mut points = Vec::new();
    for &n in &[512usize, 1024, 2048] {
        let grid = Grid1D::new(-10.0, 10.0, n).unwrap();
        let rp0 = RegularPart {
            ubar: (0..n).map(|j| (-(grid.center(j)).powi(2)).exp()).collect(),
            wbar: vec![0.0; n],
            t: 0.0,
        };
        let cfg = SolverConfig::new(0.9, vec![t], Boundary::Outflow).unwrap();
        let out = solve_reduced(&vp, &grid, &rp0, &cfg).unwrap();
        let l1: f64 = (0..n)
            .map(|j| {
                let exact = (-(grid.center(j) - dc.v * t).powi(2)).exp();
                (out[0].ubar[j] - exact).abs() * grid.dx()
            })
            .sum();
        points.push((grid.dx(), l1));
    }
    let fit = fit_loglog_slope(&points).unwrap();
    let ok = fit.value >= 0.8;
    println!(
        "criterion 6 (reduced advection order): {} — L1 order {:.3} over dx halvings (errors {:?})",
        verdict(ok),
        fit.value,
        points.iter().map(|p| p.1).collect::<Vec<_>>()
    );
    assert!(ok, "L1 convergence order {:.3} below 0.8", fit.value);
}

// Criterion 7: the discrete slow-balance residual shrinks by at least 1.7x
// per simultaneous halving of dx, dt, and the snapshot spacing.
#[test]
fn criterion_7_conservation_residual_refinement() {
    let mut residuals = Vec::new();
    for level in 0..3u32 {
        let n = 1024usize << level;
        let vp = validate(standard_params(0.1)).unwrap();
        let grid = Grid1D::new(-12.0, 12.0, n).unwrap();
        let ic = sample_standard_ic(&grid, vp.epsilon);
        let m = 4usize << level;
        let times: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
        // strictly increasing times starting above 0; include t=0 snapshot
        let cfg = SolverConfig::new(0.9, times, Boundary::Outflow).unwrap();
        let trace = solve_full(&vp, &grid, &ic, &cfg).unwrap();
        residuals.push(conservation_residual(&trace, &vp, &grid).unwrap());
    }
    let r01 = residuals[0] / residuals[1];
    let r12 = residuals[1] / residuals[2];
    let ok = r01 >= 1.7 && r12 >= 1.7;
    println!(
        "criterion 7 (conservation residual): {} — residuals {:.3e} / {:.3e} / {:.3e}, ratios {:.2}, {:.2} (need >= 1.7)",
        verdict(ok),
        residuals[0],
        residuals[1],
        residuals[2],
        r01,
        r12
    );
    assert!(ok, "ratios {r01:.2}, {r12:.2} below 1.7");
}

// Criterion 8: the central-difference residual of the factored second-order
// form, evaluated on reduced-solver snapshots, decreases monotonically
// across three simultaneous (dx, snapshot-spacing) refinements.
#[test]
fn criterion_8_second_order_form_consistency() {
    let vp = validate(standard_params(0.1)).unwrap();
    let mut residuals = Vec::new();
    for level in 0..3u32 {
        let n = 1024usize << level;
        let grid = Grid1D::new(-12.0, 12.0, n).unwrap();
        let ic = sample_standard_ic(&grid, vp.epsilon);
        let rp0 = reduced_initial_data(&ic, &vp);
        let dt = 0.1 / (1 << level) as f64;
        let times = vec![0.5 - dt, 0.5, 0.5 + dt];
        let cfg = SolverConfig::new(0.9, times, Boundary::Outflow).unwrap();
        let snaps = solve_reduced(&vp, &grid, &rp0, &cfg).unwrap();
        residuals.push(check_second_order_form(&snaps, &vp, &grid).unwrap());
    }
    let ok = residuals[0] > residuals[1] && residuals[1] > residuals[2];
    println!(
        "criterion 8 (second-order form consistency): {} — residuals {:.4e} > {:.4e} > {:.4e}?",
        verdict(ok),
        residuals[0],
        residuals[1],
        residuals[2]
    );
    assert!(ok, "residuals not monotone: {residuals:?}");
}

fn collect_csvs(dir: &Path, into: &mut BTreeMap<String, Vec<u8>>, base: &Path) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect_csvs(&path, into, base);
        } else if path.extension().is_some_and(|e| e == "csv") {
            let rel = path.strip_prefix(base).unwrap().display().to_string();
            into.insert(rel, fs::read(&path).unwrap());
        }
    }
}

// Criterion 9: every mode produces byte-identical CSV outputs across runs.
#[test]
fn criterion_9_determinism_of_all_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let model_block = "\
k1 = 1.0
k2 = 2.0
k3 = 0.5
a = 1.0
b = 2.0
c1 = 0.5
c2 = 0.5
a3 = 0.5
b3 = 0.5
c3 = 0.25
epsilon = 0.1
T = 1.0
";
    let gaussian_ic_block = "\
u_kind = gaussian
u_amplitude = 1.0
u_center = 0.0
u_width = 1.0
v_kind = gaussian
v_amplitude = 0.8
v_center = 0.0
v_width = 1.2
w_kind = gaussian
w_amplitude = 0.6
w_center = 0.0
w_width = 0.9
";
    // the solve config uses a grid large enough to exercise the
    // data-parallel kernel path
    let configs: Vec<(&str, String)> = vec![
        (
            "solve",
            format!(
                "mode = solve\n{model_block}x_min = -12.0\nx_max = 12.0\nn_cells = 16384\noutput_times = 0.3,0.7\n{gaussian_ic_block}"
            ),
        ),
        (
            "expand",
            format!(
                "mode = expand\n{model_block}x_min = -12.0\nx_max = 12.0\nn_cells = 256\noutput_times = 0.3,0.7\n{gaussian_ic_block}"
            ),
        ),
        (
            "compare",
            format!(
                "mode = compare\n{model_block}x_min = -12.0\nx_max = 12.0\nn_cells = 256\noutput_times = 0.5\n{gaussian_ic_block}"
            ),
        ),
        (
            "sweep",
            format!(
                "mode = sweep\n{model_block}x_min = -12.0\nx_max = 12.0\nn_cells = 256\noutput_times = 0.5\nsweep_epsilons = 0.2,0.1\n{gaussian_ic_block}"
            ),
        ),
        (
            "oracle",
            format!(
                "mode = oracle\n{model_block}x_min = -1.0\nx_max = 1.0\nn_cells = 16\nboundary = periodic\noracle_u0 = 1.0\noracle_v0 = 0.0\noracle_w0 = 0.5\n"
            ),
        ),
    ];

    let mut all_ok = true;
    let mut details = Vec::new();
    for (mode, text) in &configs {
        let mut runs = Vec::new();
        for run_idx in 0..2 {
            let out = tmp.path().join(format!("{mode}_{run_idx}"));
            let full_text = format!("{text}output_dir = {}\n", out.display());
            let spec = parse_config(&full_text).unwrap();
            run_experiment(&spec).unwrap();
            let mut csvs = BTreeMap::new();
            collect_csvs(&out, &mut csvs, &out);
            runs.push(csvs);
        }
        let same = runs[0] == runs[1];
        all_ok &= same;
        details.push(format!(
            "{mode}: {} files {}",
            runs[0].len(),
            if same { "identical" } else { "DIFFER" }
        ));
    }
    println!(
        "criterion 9 (determinism of all modes): {} — {}",
        verdict(all_ok),
        details.join("; ")
    );
    assert!(all_ok, "{details:?}");
}
