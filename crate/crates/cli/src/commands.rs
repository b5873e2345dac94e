use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use steerkit::feasibility::{
    pvm_child, pvm_directions, response_matrix, separation_demo, pentad_child, pentad_parent, pentad_reference_radius,
};
use steerkit::quadrature::{lebedev_orders, load_lebedev};
use steerkit::sim_three::XyCoefficients;
use steerkit::steering::{check_sample, route_tolerance, sample_seed};
use steerkit::tolerance::{NEGATIVE_ENTRY, STRUCTURAL};
use steerkit::{
    brute_force_14, build_system, pvm_radius, read_povm_file, sample_extremal_povm, simulate_four, simulate_three,
    Backend, ExtremalPovm, LpOutcome, Pairing, Povm, PovmFile, Route, Simulation, Vec3,
};

use crate::config::{
    BackendKind, FarkasArgs, LhsCheckArgs, RadiusArgs, SeparationArgs, Simulate3Args, Simulate4Args, Source,
    StressArgs,
};
use crate::report::{Failure, Input, Outcome, PlotRow, Status};

/// Column sums of four-outcome tables carry a few more rounding steps.
const NORMALIZATION_FOUR: f64 = 1e-10;
const RADIUS_WINDOW: f64 = 0.002;

fn random_inputs(outcomes: usize, n: usize, seed: u64) -> anyhow::Result<Vec<Input>> {
    (0..n)
        .map(|i| {
            let s = sample_seed(seed, i);
            let povm = sample_extremal_povm(outcomes, s)?;
            Ok(Input {
                index: i,
                seed: Some(s),
                povm: PovmFile::from_extremal(&povm, 1.0),
            })
        })
        .collect()
}

fn file_input(path: &std::path::Path) -> anyhow::Result<Vec<Input>> {
    let povm = read_povm_file(path).with_context(|| format!("reading POVM {}", path.display()))?;
    Ok(vec![Input {
        index: 0,
        seed: None,
        povm,
    }])
}

fn resolve_source(source: &Source, outcomes: usize, replay: Option<Vec<Input>>) -> anyhow::Result<Vec<Input>> {
    if let Some(inputs) = replay {
        return Ok(inputs);
    }
    match (&source.povm, source.random) {
        (Some(path), _) => file_input(path),
        (None, Some(n)) => random_inputs(outcomes, n, source.seed),
        (None, None) => bail!("give --povm FILE or --random N"),
    }
}

fn extremal(input: &Input, allowed: &[usize]) -> anyhow::Result<ExtremalPovm> {
    let povm = input.povm.extremal()?;
    anyhow::ensure!(
        allowed.contains(&povm.len()),
        "input {} has {} outcomes, expected {:?}",
        input.index,
        povm.len(),
        allowed
    );
    Ok(povm)
}

fn status_of(failures: &[Failure]) -> Status {
    if failures.is_empty() {
        Status::Pass
    } else {
        Status::Fail
    }
}

#[derive(Serialize)]
struct RegionRecord {
    label: String,
    t: f64,
    b: Vec3,
}

#[derive(Serialize)]
struct ParentRecord {
    regions: Vec<RegionRecord>,
}

#[derive(Serialize)]
struct XyRecord {
    #[serde(rename = "X")]
    x: f64,
    #[serde(rename = "Y")]
    y: f64,
}

impl From<&XyCoefficients> for XyRecord {
    fn from(xy: &XyCoefficients) -> Self {
        XyRecord { x: xy.x, y: xy.y }
    }
}

#[derive(Serialize)]
struct SplitRecord {
    m5hat: Vec3,
    mu5: f64,
    kappa: [f64; 2],
}

#[derive(Serialize)]
struct ConvergencePoint {
    grid: String,
    nodes: usize,
    residual: f64,
}

#[derive(Serialize)]
struct SimulationRecord {
    index: usize,
    seed: Option<u64>,
    povm: PovmFile,
    route: Route,
    outcomes: Vec<String>,
    parent: ParentRecord,
    table: Vec<Vec<f64>>,
    residual: f64,
    xy: Option<XyRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    split: Option<SplitRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairing: Option<Pairing>,
    backend: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    residual_convergence: Vec<ConvergencePoint>,
}

fn record(input: &Input, sim: &Simulation, backend: &str) -> SimulationRecord {
    let regions = sim
        .parent
        .entries()
        .iter()
        .map(|(&l, e)| RegionRecord {
            label: sim.parent.label_name(l),
            t: e.t,
            b: e.b,
        })
        .collect();
    SimulationRecord {
        index: input.index,
        seed: input.seed,
        povm: input.povm.clone(),
        route: sim.route,
        outcomes: sim.table.outcomes().to_vec(),
        parent: ParentRecord { regions },
        table: sim.table.rows().to_vec(),
        residual: sim.residual,
        xy: sim.xy.as_ref().map(XyRecord::from),
        split: sim.split.as_ref().map(|s| SplitRecord {
            m5hat: s.m5hat,
            mu5: s.mu5,
            kappa: [s.kappa_plus, s.kappa_minus],
        }),
        pairing: sim.split.as_ref().map(|s| s.pairing),
        backend: backend.to_string(),
        residual_convergence: Vec::new(),
    }
}

/// Checks shared by both simulate commands; returns the first violation.
fn table_violation(sim: &Simulation, tol: f64, normalization: f64) -> Option<String> {
    if sim.residual > tol {
        return Some(format!("residual {:.3e} exceeds {tol:.1e}", sim.residual));
    }
    if sim.table.min_entry() < -NEGATIVE_ENTRY {
        return Some(format!("negative response entry {:.3e}", sim.table.min_entry()));
    }
    let norm = sim.table.normalization_violation();
    if norm > normalization {
        return Some(format!("column sums off by {norm:.3e}"));
    }
    let completeness = sim.parent.completeness_violation();
    if completeness > STRUCTURAL {
        return Some(format!("parent completeness off by {completeness:.3e}"));
    }
    None
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

pub fn simulate3(args: &Simulate3Args, replay: Option<Vec<Input>>) -> anyhow::Result<Outcome> {
    let inputs = resolve_source(&args.source, 3, replay)?;
    let povms = inputs
        .iter()
        .map(|i| extremal(i, &[2, 3]))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let runs: Vec<Result<Simulation, String>> = povms
        .par_iter()
        .map(|p| simulate_three(p).map_err(|e| e.to_string()))
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (input, run) in inputs.iter().zip(&runs) {
        let violation = match run {
            Ok(sim) => {
                records.push(record(input, sim, "analytic"));
                let xy_gap = sim.xy.map_or(0.0, |xy| (xy.x + xy.y - xy.qs[0]).abs());
                table_violation(sim, args.tol, STRUCTURAL)
                    .or_else(|| (xy_gap > STRUCTURAL).then(|| format!("X + Y - q1 = {xy_gap:.3e}")))
            }
            Err(e) => Some(e.clone()),
        };
        if let Some(reason) = violation {
            failures.push(Failure {
                input: Some(input.clone()),
                reason,
            });
        }
    }
    let sims = runs.iter().filter_map(|r| r.as_ref().ok());
    let summary = json!({
        "samples": inputs.len(),
        "failures": failures.len(),
        "max_residual": max_of(sims.clone().map(|s| s.residual)),
        "max_normalization_violation": max_of(sims.clone().map(|s| s.table.normalization_violation())),
        "min_entry": sims.map(|s| s.table.min_entry()).fold(0.0, f64::min),
        "tolerance": args.tol,
    });
    Ok(Outcome {
        status: status_of(&failures),
        grid: None,
        summary,
        results: serde_json::to_value(records)?,
        failures,
        plot: Vec::new(),
    })
}

fn convergence(povm: &ExtremalPovm, pairing: Pairing) -> anyhow::Result<Vec<ConvergencePoint>> {
    lebedev_orders()
        .into_iter()
        .map(|order| {
            let grid = load_lebedev(order)?;
            let nodes = grid.len();
            let residual = simulate_four(povm, &Backend::Quadrature(grid), pairing)?.residual;
            Ok(ConvergencePoint {
                grid: format!("lebedev:{order}"),
                nodes,
                residual,
            })
        })
        .collect()
}

pub fn simulate4(args: &Simulate4Args, replay: Option<Vec<Input>>) -> anyhow::Result<Outcome> {
    let inputs = resolve_source(&args.source, 4, replay)?;
    let backend = args.backend.resolve(&args.grid)?;
    let povms = inputs
        .iter()
        .map(|i| extremal(i, &[4]))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let runs: Vec<Result<(Simulation, Vec<ConvergencePoint>), String>> = povms
        .par_iter()
        .map(|p| {
            let sim = simulate_four(p, &backend, args.pairing).map_err(|e| e.to_string())?;
            let ladder = match args.backend {
                BackendKind::Quadrature => convergence(p, args.pairing).map_err(|e| e.to_string())?,
                BackendKind::Exact => Vec::new(),
            };
            Ok((sim, ladder))
        })
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut plot = Vec::new();
    let mut max_tol: f64 = 0.0;
    for (input, run) in inputs.iter().zip(runs) {
        let violation = match run {
            Ok((sim, ladder)) => {
                let tol = args.tol.unwrap_or_else(|| route_tolerance(sim.route, &backend));
                max_tol = max_tol.max(tol);
                let violation = table_violation(&sim, tol, NORMALIZATION_FOUR);
                for p in &ladder {
                    plot.push(PlotRow::new("residual", input.index, p.nodes as f64, p.residual));
                }
                let mut rec = record(input, &sim, &backend.name());
                rec.residual_convergence = ladder;
                records.push((rec, sim.residual));
                violation
            }
            Err(e) => Some(e),
        };
        if let Some(reason) = violation {
            failures.push(Failure {
                input: Some(input.clone()),
                reason,
            });
        }
    }
    let summary = json!({
        "samples": inputs.len(),
        "failures": failures.len(),
        "backend": backend.name(),
        "pairing": args.pairing,
        "max_residual": max_of(records.iter().map(|r| r.1)),
        "tolerance": max_tol,
    });
    let records: Vec<SimulationRecord> = records.into_iter().map(|r| r.0).collect();
    Ok(Outcome {
        status: status_of(&failures),
        grid: grid_summary(&backend),
        summary,
        results: serde_json::to_value(records)?,
        failures,
        plot,
    })
}

fn grid_summary(backend: &Backend) -> Option<steerkit::GridSummary> {
    match backend {
        Backend::Quadrature(g) => Some(g.summary()),
        Backend::ExactPolygon => None,
    }
}

pub fn lhs_check(args: &LhsCheckArgs, replay: Option<Vec<Input>>) -> anyhow::Result<Outcome> {
    anyhow::ensure!(
        (0.0..=0.5).contains(&args.r),
        "--r must lie in [0, 1/2], got {}",
        args.r
    );
    let inputs = match (replay, &args.povm) {
        (Some(inputs), _) => inputs,
        (None, Some(path)) => file_input(path)?,
        (None, None) => random_inputs(args.outcomes as usize, args.n, args.seed)?,
    };
    let backend = args.backend.resolve(&args.grid)?;
    let povms = inputs
        .iter()
        .map(|i| extremal(i, &[2, 3, 4]))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let results: Vec<_> = inputs
        .par_iter()
        .zip(&povms)
        .map(|(input, p)| check_sample(input.index, input.seed.unwrap_or(0), p, args.r, &backend))
        .collect::<steerkit::Result<_>>()?;

    let failures: Vec<Failure> = results
        .iter()
        .zip(&inputs)
        .filter(|(s, _)| !s.passed)
        .map(|(s, input)| Failure {
            input: Some(input.clone()),
            reason: format!(
                "LHS residual {:.3e} (tolerance {:.1e}), marginal violation {:.3e}",
                s.lhs_residual, s.tolerance, s.marginal_violation
            ),
        })
        .collect();
    let plot = results
        .iter()
        .map(|s| PlotRow::new("lhs_residual", s.index, args.r, s.lhs_residual))
        .collect();
    let summary = json!({
        "r": args.r,
        "samples": results.len(),
        "failures": failures.len(),
        "backend": backend.name(),
        "max_lhs_residual": max_of(results.iter().map(|s| s.lhs_residual)),
        "max_marginal_violation": max_of(results.iter().map(|s| s.marginal_violation)),
    });
    let results: Vec<_> = results
        .into_iter()
        .map(|s| {
            json!({
                "index": s.index,
                "seed": s.seed,
                "outcomes": s.outcomes,
                "route": s.route,
                "simulation_residual": s.simulation_residual,
                "lhs_residual": s.lhs_residual,
                "marginal_violation": s.marginal_violation,
                "tolerance": s.tolerance,
                "passed": s.passed,
            })
        })
        .collect();
    Ok(Outcome {
        status: status_of(&failures),
        grid: grid_summary(&backend),
        summary,
        results: serde_json::Value::Array(results),
        failures,
        plot,
    })
}

fn read_povm(path: &std::path::Path) -> anyhow::Result<Povm> {
    let file = read_povm_file(path).with_context(|| format!("reading POVM {}", path.display()))?;
    Ok(file.povm()?)
}

/// Fraction of `directions` whose PVM at visibility `r` the parent simulates.
fn feasible_fraction(parent: &Povm, directions: &[Vec3], r: f64) -> anyhow::Result<f64> {
    let feasible = directions
        .par_iter()
        .map(|m| Ok(solve(parent, &pvm_child(m, r))?.is_feasible()))
        .collect::<steerkit::Result<Vec<bool>>>()?;
    Ok(feasible.iter().filter(|&&f| f).count() as f64 / directions.len() as f64)
}

fn solve(parent: &Povm, child: &Povm) -> steerkit::Result<LpOutcome> {
    Ok(steerkit::solve_feasible(&build_system(&parent.effects, &child.effects)?))
}

fn scan_grid(points: usize) -> Vec<f64> {
    let n = points.max(2) - 1;
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

pub fn radius(args: &RadiusArgs, want_scan: bool) -> anyhow::Result<Outcome> {
    let parent = read_povm(&args.parent)?;
    let directions = pvm_directions(args.n, args.n / 4, args.seed);
    let report = pvm_radius(&parent, &directions)?;
    let mut plot = Vec::new();
    if want_scan {
        for r in scan_grid(args.scan_points) {
            plot.push(PlotRow::new("feasible_fraction", "parent", r, feasible_fraction(&parent, &directions, r)?));
        }
    }
    Ok(Outcome {
        status: Status::Pass,
        grid: None,
        summary: json!({ "r_star": report.r_star, "directions": report.directions }),
        results: serde_json::to_value(&report)?,
        failures: Vec::new(),
        plot,
    })
}

pub fn farkas(args: &FarkasArgs) -> anyhow::Result<Outcome> {
    let parent = read_povm(&args.parent)?;
    let mut child_file =
        read_povm_file(&args.child).with_context(|| format!("reading POVM {}", args.child.display()))?;
    if args.r.is_some() {
        child_file.r = args.r;
    }
    let child = child_file.povm()?;
    let sys = build_system(&parent.effects, &child.effects)?;
    let outcome = steerkit::solve_feasible(&sys);
    let (status, verdict) = match &outcome {
        LpOutcome::Feasible { .. } => (Status::Pass, "feasible"),
        LpOutcome::Infeasible { .. } => (Status::Pass, "infeasible"),
        LpOutcome::Indeterminate { .. } => (Status::Indeterminate, "indeterminate"),
    };
    let response = match &outcome {
        LpOutcome::Feasible { x, .. } => Some(response_matrix(x, &sys)),
        _ => None,
    };
    Ok(Outcome {
        status,
        grid: None,
        summary: json!({ "verdict": verdict, "r": child_file.radius(), "rows": sys.rows(), "cols": sys.cols() }),
        results: json!({ "outcome": outcome, "response": response }),
        failures: Vec::new(),
        plot: Vec::new(),
    })
}

pub fn separation(args: &SeparationArgs, want_scan: bool) -> anyhow::Result<Outcome> {
    let report = separation_demo(args.n, args.seed)?;
    let radius_ok = (report.pvm.r_star - pentad_reference_radius()).abs() <= RADIUS_WINDOW;
    let mut failures = Vec::new();
    if !report.passed() {
        failures.push(Failure {
            input: None,
            reason: "certificate, LP verdict or PVM feasibility at the threshold disagrees".into(),
        });
    }
    if !radius_ok {
        failures.push(Failure {
            input: None,
            reason: format!(
                "PVM radius {:.6} is not within {RADIUS_WINDOW} of {:.4}",
                report.pvm.r_star,
                pentad_reference_radius()
            ),
        });
    }
    let mut plot = Vec::new();
    if want_scan {
        let parent = pentad_parent();
        let directions = pvm_directions(args.n, args.n / 4, args.seed);
        let grid = scan_grid(args.scan_points);
        for &r in &grid {
            plot.push(PlotRow::new("feasible_fraction", "pvm", r, feasible_fraction(&parent, &directions, r)?));
        }
        for &r in &grid {
            let feasible = solve(&parent, &pentad_child(r))?.is_feasible();
            plot.push(PlotRow::new("child_feasible", "three-outcome", r, f64::from(u8::from(feasible))));
        }
    }
    Ok(Outcome {
        status: status_of(&failures),
        grid: None,
        summary: json!({
            "pvm_radius": report.pvm.r_star,
            "reference_radius": report.reference_radius,
            "certificate_threshold": report.certificate_threshold,
            "gap": report.gap,
        }),
        results: serde_json::to_value(&report)?,
        failures,
        plot,
    })
}

pub fn stress(args: &StressArgs, replay: Option<Vec<Input>>) -> anyhow::Result<Outcome> {
    let inputs = match replay {
        Some(inputs) => inputs,
        None => random_inputs(4, args.n, args.seed)?,
    };
    let backend = args.backend.resolve(&args.grid)?;
    let povms = inputs
        .iter()
        .map(|i| extremal(i, &[4]))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let reports = povms
        .par_iter()
        .map(|p| brute_force_14(p, &backend))
        .collect::<steerkit::Result<Vec<_>>>()?;

    let mut failures = Vec::new();
    let mut indeterminate = 0;
    for (input, rep) in inputs.iter().zip(&reports) {
        if rep.outcome.is_feasible() {
            continue;
        }
        if !rep.outcome.is_infeasible() {
            indeterminate += 1;
        }
        failures.push(Failure {
            input: Some(input.clone()),
            reason: format!(
                "{} regions, smallest weight {:.3e}: {}",
                rep.regions,
                rep.min_region_weight,
                serde_json::to_string(&rep.outcome)?
            ),
        });
    }
    let status = if failures.is_empty() {
        Status::Pass
    } else if indeterminate == failures.len() {
        Status::Indeterminate
    } else {
        Status::Fail
    };
    let results: Vec<_> = inputs
        .iter()
        .zip(&reports)
        .map(|(input, rep)| {
            json!({
                "index": input.index,
                "seed": input.seed,
                "regions": rep.regions,
                "min_region_weight": rep.min_region_weight,
                "outcome": rep.outcome,
            })
        })
        .collect();
    Ok(Outcome {
        status,
        grid: grid_summary(&backend),
        summary: json!({
            "samples": inputs.len(),
            "feasible": reports.iter().filter(|r| r.outcome.is_feasible()).count(),
            "infeasible": reports.iter().filter(|r| r.outcome.is_infeasible()).count(),
            "indeterminate": indeterminate,
            "backend": backend.name(),
        }),
        results: serde_json::Value::Array(results),
        failures,
        plot: Vec::new(),
    })
}
