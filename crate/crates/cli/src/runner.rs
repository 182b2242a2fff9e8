//! Scenario runner: dispatches the subcommand pipelines, assembles the run
//! report, and writes CSV/JSON artifacts through a single output serializer.

use std::path::{Path, PathBuf};
use std::time::Instant;

use spherebranch_core::config::ProblemSpec;
use spherebranch_core::continuation::{
    classify_component, detect_bifurcation_points, find_trivial_solutions, trace_branch, Branch,
    SolutionPoint, Termination, TraceSettings,
};
use spherebranch_core::degree::{
    conjecture_check, degree_on_interval_with, ConjectureRecord, DegreeReport,
    OrientationConvention,
};
use spherebranch_core::eigenpairs::{
    fit_conic, trace_components, ComponentKind, EigenpairComponent, MapWindow,
};
use spherebranch_core::operator::PerturbedProblem;
use spherebranch_core::spectrum::{certify, kernel_basis, pencil_eigenvalues};

use crate::logging;
use crate::output::{fmt_f64, to_json, OutputDir};
use crate::report::{
    fnv1a_hex, CertificateRecord, ComponentRecord, EigenvalueRecord, MapReport, RunReport, Timings,
    TraceReport, VerdictRecord,
};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const DEFAULT_SPECTRUM_WINDOW: (f64, f64) = (-1.0, 10.5);
const DEFAULT_DEGREE_INTERVAL: (f64, f64) = (-0.5, 0.5);
const SWEEP_WINDOW: (f64, f64) = (-1.0, 8.2);
const MAP_GRID: usize = 128;

/// One subcommand request with its parameters.
#[derive(Clone, Debug)]
pub enum Command {
    Certify {
        window: (f64, f64),
    },
    Spectrum {
        window: (f64, f64),
    },
    Degree {
        alpha: f64,
        beta: f64,
        lambda_hat: Option<f64>,
        epsilon: Option<f64>,
    },
    Trace {
        anchor_lambda: f64,
        anchor_index: usize,
        direction: i32,
        bound: f64,
        step: Option<f64>,
    },
    Map {
        window: MapWindow,
        grid: usize,
    },
    Example {
        name: String,
        n: usize,
    },
}

/// Validated scenario: problem spec, subcommand parameters, output directory,
/// and the seed recorded for randomized suites.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub problem: Option<ProblemSpec>,
    pub command: Command,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    pub threads: usize,
}

pub fn run_spec(config: &ScenarioConfig) -> Result<(RunReport, Timings), CliError> {
    if let Command::Example { name, n } = &config.command {
        return run_example(
            name,
            *n,
            config.out_dir.as_deref(),
            config.seed,
            config.threads,
        );
    }

    let spec = config
        .problem
        .as_ref()
        .ok_or_else(|| CliError::Input("--spec <file> is required".to_string()))?;
    let problem = spec.build().map_err(input_err)?;
    let mut report = RunReport::new(VERSION, hash_spec(spec)?, config.seed);
    let mut timings = Timings::default();
    let mut out = open_out(config.out_dir.as_deref())?;

    let start = Instant::now();
    match &config.command {
        Command::Certify { window } => {
            let (spectrum, certificates) = spectrum_pipeline(&problem, *window)?;
            report.spectrum = Some(spectrum);
            report.certificates = Some(certificates);
            timed(&mut timings, "certify", start);
        }
        Command::Spectrum { window } => {
            let (spectrum, _) = spectrum_pipeline(&problem, *window)?;
            report.spectrum = Some(spectrum);
            timed(&mut timings, "spectrum", start);
        }
        Command::Degree {
            alpha,
            beta,
            lambda_hat,
            epsilon,
        } => {
            let conv = OrientationConvention::default();
            let degree = degree_on_interval_with(
                problem.pencil(),
                *alpha,
                *beta,
                conv,
                *lambda_hat,
                *epsilon,
            )
            .map_err(compute_err)?;
            report.degree = Some(degree);
            timed(&mut timings, "degree", start);
        }
        Command::Trace {
            anchor_lambda,
            anchor_index,
            direction,
            bound,
            step,
        } => {
            let trace = trace_subcommand(
                &problem,
                *anchor_lambda,
                *anchor_index,
                *direction,
                *bound,
                *step,
                out.as_mut(),
            )?;
            report.trace = Some(trace);
            timed(&mut timings, "trace", start);
        }
        Command::Map { window, grid } => {
            let components = map_pipeline(&problem, window, *grid)?;
            report.map = Some(write_map_artifacts(
                window,
                *grid,
                components,
                out.as_mut(),
            )?);
            timed(&mut timings, "map", start);
        }
        Command::Example { .. } => unreachable!(),
    }

    finalize(&report, &timings, out.as_mut())?;
    Ok((report, timings))
}

/// Full pipeline run for one of the named example problems.
pub fn run_example(
    name: &str,
    n: usize,
    out_dir: Option<&Path>,
    seed: u64,
    threads: usize,
) -> Result<(RunReport, Timings), CliError> {
    let k = match name {
        "k1" => 1,
        "k2" => 2,
        "k3" => 3,
        other => {
            return Err(CliError::Input(format!(
                "unknown example {other:?}; expected one of k1, k2, k3"
            )));
        }
    };
    if n < 8 {
        return Err(CliError::Input(format!(
            "example runs need a truncation of at least 8, got {n}"
        )));
    }
    let spec = ProblemSpec::example(k, n);
    let problem = spec.build().map_err(input_err)?;
    let mut report = RunReport::new(VERSION, hash_spec(&spec)?, seed);
    report.example = Some(name.to_string());
    let mut timings = Timings::default();
    let mut out = open_out(out_dir)?;

    let map_window = example_map_window(k);

    type SpectrumPart = (Vec<EigenvalueRecord>, Vec<CertificateRecord>);
    type DegreePart = (DegreeReport, Vec<ConjectureRecord>);
    type MapPart = Vec<EigenpairComponent>;
    type TracePart = (Vec<Vec<f64>>, Vec<VerdictRecord>, Vec<(String, Branch)>);

    let spectrum_job = || -> Result<(SpectrumPart, u128), CliError> {
        let t = Instant::now();
        let part = spectrum_pipeline(&problem, DEFAULT_SPECTRUM_WINDOW)?;
        Ok((part, t.elapsed().as_millis()))
    };
    let degree_job = || -> Result<(DegreePart, u128), CliError> {
        let t = Instant::now();
        let conv = OrientationConvention::default();
        let degree = degree_on_interval_with(
            problem.pencil(),
            DEFAULT_DEGREE_INTERVAL.0,
            DEFAULT_DEGREE_INTERVAL.1,
            conv,
            None,
            None,
        )
        .map_err(compute_err)?;
        let sweep = conjecture_sweep(&problem)?;
        Ok(((degree, sweep), t.elapsed().as_millis()))
    };
    let map_job = || -> Result<(MapPart, u128), CliError> {
        let t = Instant::now();
        let part = map_pipeline(&problem, &map_window, MAP_GRID)?;
        Ok((part, t.elapsed().as_millis()))
    };
    let trace_job = || -> Result<(TracePart, u128), CliError> {
        let t = Instant::now();
        let part = trace_pipeline(&problem)?;
        Ok((part, t.elapsed().as_millis()))
    };

    let (spectrum_res, degree_res, map_res, trace_res) = if threads > 1 {
        logging::info("running example pipelines on worker threads");
        std::thread::scope(|scope| {
            let h1 = scope.spawn(spectrum_job);
            let h2 = scope.spawn(degree_job);
            let h3 = scope.spawn(map_job);
            let h4 = scope.spawn(trace_job);
            (
                h1.join().expect("spectrum pipeline panicked"),
                h2.join().expect("degree pipeline panicked"),
                h3.join().expect("map pipeline panicked"),
                h4.join().expect("trace pipeline panicked"),
            )
        })
    } else {
        (spectrum_job(), degree_job(), map_job(), trace_job())
    };

    let ((spectrum, certificates), ms) = spectrum_res?;
    timings.pipelines.push(("spectrum".to_string(), ms));
    report.spectrum = Some(spectrum);
    report.certificates = Some(certificates);

    let ((degree, sweep), ms) = degree_res?;
    timings.pipelines.push(("degree".to_string(), ms));
    report.degree = Some(degree);
    report.conjecture = Some(sweep);

    let (components, ms) = map_res?;
    timings.pipelines.push(("map".to_string(), ms));
    report.map = Some(write_map_artifacts(
        &map_window,
        MAP_GRID,
        components,
        out.as_mut(),
    )?);

    let ((bifurcation_points, verdicts, branches), ms) = trace_res?;
    timings.pipelines.push(("trace".to_string(), ms));
    if let Some(dir) = out.as_mut() {
        for (label, branch) in &branches {
            write_branch_csv(dir, &format!("trace_{label}.csv"), branch)?;
        }
    }
    report.trace = Some(TraceReport {
        bifurcation_points,
        verdicts,
    });

    finalize(&report, &timings, out.as_mut())?;
    Ok((report, timings))
}

fn example_map_window(k: usize) -> MapWindow {
    match k {
        3 => MapWindow {
            s: (-1.0, 1.0),
            lambda: (-1.0, 8.0),
        },
        2 => MapWindow {
            s: (-0.3, 0.3),
            lambda: (-0.5, 0.5),
        },
        _ => MapWindow {
            s: (-1.0, 1.0),
            lambda: (-0.5, 4.5),
        },
    }
}

fn spectrum_pipeline(
    problem: &PerturbedProblem,
    window: (f64, f64),
) -> Result<(Vec<EigenvalueRecord>, Vec<CertificateRecord>), CliError> {
    let infos = pencil_eigenvalues(problem.pencil(), window).map_err(compute_err)?;
    let mut records = Vec::new();
    let mut certificates = Vec::new();
    for info in &infos {
        records.push(EigenvalueRecord::from(info));
        let cert = certify(problem.pencil(), info.lambda).map_err(compute_err)?;
        certificates.push(CertificateRecord::from(&cert));
    }
    Ok((records, certificates))
}

/// Intervals with endpoints at eigenvalue midpoints, one eigenvalue each.
fn conjecture_sweep(problem: &PerturbedProblem) -> Result<Vec<ConjectureRecord>, CliError> {
    let conv = OrientationConvention::default();
    let infos = pencil_eigenvalues(problem.pencil(), SWEEP_WINDOW).map_err(compute_err)?;
    let lambdas: Vec<f64> = infos.iter().map(|i| i.lambda).collect();
    if lambdas.is_empty() {
        return Ok(Vec::new());
    }
    let mut boundaries = vec![lambdas[0] - 0.5];
    for pair in lambdas.windows(2) {
        boundaries.push(0.5 * (pair[0] + pair[1]));
    }
    boundaries.push(lambdas.last().unwrap() + 0.5);
    let mut records = Vec::new();
    for window in boundaries.windows(2) {
        let record =
            conjecture_check(problem.pencil(), window[0], window[1], conv).map_err(compute_err)?;
        logging::debug(format!(
            "conjecture on ({:.3}, {:.3}): agree={}",
            record.alpha, record.beta, record.agree
        ));
        records.push(record);
    }
    Ok(records)
}

fn map_pipeline(
    problem: &PerturbedProblem,
    window: &MapWindow,
    grid: usize,
) -> Result<Vec<EigenpairComponent>, CliError> {
    let mut components = trace_components(problem, window, grid).map_err(compute_err)?;
    for component in &mut components {
        if component.kind == ComponentKind::ClosedCurve {
            component.conic_fit = Some(fit_conic(component).map_err(compute_err)?);
        }
    }
    Ok(components)
}

type TracePipelineOut = (Vec<Vec<f64>>, Vec<VerdictRecord>, Vec<(String, Branch)>);

/// Example trace pipeline: bifurcation points on the lambda* = 0 eigensphere,
/// classification from its canonical anchors, and one line anchor at the
/// smallest eigenvalue >= 5 to exhibit the unbounded components.
fn trace_pipeline(problem: &PerturbedProblem) -> Result<TracePipelineOut, CliError> {
    let settings = TraceSettings::default();
    let pencil = problem.pencil();
    let kernel = kernel_basis(pencil, 0.0);
    if kernel.ncols() == 0 {
        return Err(CliError::Compute(
            "lambda* = 0 is not an eigenvalue of this problem".to_string(),
        ));
    }

    let mut bif_points: Vec<Vec<f64>> = Vec::new();
    let mut anchors: Vec<SolutionPoint> = Vec::new();
    if kernel.ncols() > 1 {
        let reps = detect_bifurcation_points(problem, 0.0, &settings).map_err(compute_err)?;
        for rep in &reps {
            anchors.push(SolutionPoint::trivial(problem, 0.0, rep.clone()));
        }
        if anchors.is_empty() {
            // no emanating branches: classify from a grid anchor
            anchors.push(SolutionPoint::trivial(
                problem,
                0.0,
                kernel.column(0).into(),
            ));
        }
        bif_points = reps
            .iter()
            .map(|v| v.iter().cloned().collect::<Vec<f64>>())
            .collect();
    } else {
        anchors.push(SolutionPoint::trivial(
            problem,
            0.0,
            kernel.column(0).into(),
        ));
    }

    // One unbounded-line exhibit when lambda = 5 is in the spectrum.
    let line_kernel = kernel_basis(pencil, 5.0);
    if line_kernel.ncols() == 1 {
        anchors.push(SolutionPoint::trivial(
            problem,
            5.0,
            line_kernel.column(0).into(),
        ));
    }

    let mut verdicts = Vec::new();
    let mut branches = Vec::new();
    for (index, anchor) in anchors.iter().enumerate() {
        let verdict =
            classify_component(problem, anchor, settings.bound, &settings).map_err(compute_err)?;
        verdicts.push(VerdictRecord::from_verdict(anchor, index, &verdict));
        for direction in [1, -1] {
            let branch =
                trace_branch(problem, anchor, direction, &settings).map_err(compute_err)?;
            let dir_label = if direction > 0 { "fwd" } else { "bwd" };
            branches.push((format!("anchor{index}_{dir_label}"), branch));
        }
    }
    Ok((bif_points, verdicts, branches))
}

fn trace_subcommand(
    problem: &PerturbedProblem,
    anchor_lambda: f64,
    anchor_index: usize,
    direction: i32,
    bound: f64,
    step: Option<f64>,
    out: Option<&mut OutputDir>,
) -> Result<TraceReport, CliError> {
    let mut settings = TraceSettings {
        bound,
        ..TraceSettings::default()
    };
    if let Some(h) = step {
        if !(h > 0.0) {
            return Err(CliError::Input("--step must be positive".to_string()));
        }
        settings.initial_step = h;
    }
    let window = (anchor_lambda - 0.25, anchor_lambda + 0.25);
    let anchors: Vec<SolutionPoint> = find_trivial_solutions(problem, window, &settings)
        .map_err(compute_err)?
        .into_iter()
        .filter(|a| (a.lambda - anchor_lambda).abs() <= 1e-6)
        .collect();
    if anchors.is_empty() {
        return Err(CliError::Compute(format!(
            "no trivial solutions found at lambda = {anchor_lambda}"
        )));
    }
    let anchor = anchors.get(anchor_index).ok_or_else(|| {
        CliError::Input(format!(
            "--anchor-index {anchor_index} out of range: {} anchors at lambda = {anchor_lambda}",
            anchors.len()
        ))
    })?;
    let branch = trace_branch(problem, anchor, direction, &settings).map_err(compute_err)?;
    if let Some(dir) = out {
        write_branch_csv(dir, "trace_branch.csv", &branch)?;
    }
    let verdict = VerdictRecord {
        anchor_lambda,
        anchor_index,
        verdict: termination_name(&branch.termination).to_string(),
        lambda_second: match &branch.termination {
            Termination::TrivialReturn { lambda_second, .. } => Some(*lambda_second),
            _ => None,
        },
        x_second: match &branch.termination {
            Termination::TrivialReturn { x_second, .. } => Some(x_second.iter().cloned().collect()),
            _ => None,
        },
        diagnostics: match &branch.termination {
            Termination::StepFailure { diagnostics } => Some(diagnostics.clone()),
            _ => None,
        },
    };
    Ok(TraceReport {
        bifurcation_points: Vec::new(),
        verdicts: vec![verdict],
    })
}

fn termination_name(t: &Termination) -> &'static str {
    match t {
        Termination::Unbounded { .. } => "Unbounded",
        Termination::TrivialReturn { .. } => "TrivialReturn",
        Termination::ClosedLoop => "ClosedLoop",
        Termination::StepFailure { .. } => "StepFailure",
    }
}

fn write_map_artifacts(
    window: &MapWindow,
    grid: usize,
    components: Vec<EigenpairComponent>,
    out: Option<&mut OutputDir>,
) -> Result<MapReport, CliError> {
    let mut records = Vec::new();
    match out {
        Some(dir) => {
            for (i, component) in components.iter().enumerate() {
                let name = format!("map_component_{i}.csv");
                let rows: Vec<Vec<f64>> = component
                    .samples
                    .iter()
                    .map(|(s, l)| vec![*s, *l])
                    .collect();
                dir.write_csv(&name, &["s", "lambda"], &rows)?;
                records.push(ComponentRecord::from_component(component, Some(name)));
            }
        }
        None => {
            for component in &components {
                records.push(ComponentRecord::from_component(component, None));
            }
        }
    }
    Ok(MapReport {
        window: (window.s, window.lambda),
        grid,
        components: records,
    })
}

/// Branch CSV schema: step, s, lambda, x_1..x_n, residual.
fn write_branch_csv(dir: &mut OutputDir, name: &str, branch: &Branch) -> Result<(), CliError> {
    let n = branch.anchor.x.len();
    let mut header: Vec<String> = vec!["step".to_string(), "s".to_string(), "lambda".to_string()];
    for i in 1..=n {
        header.push(format!("x_{i}"));
    }
    header.push("residual".to_string());
    let mut text = header.join(",");
    text.push('\n');
    for (step, point) in branch.points.iter().enumerate() {
        let mut cells = Vec::with_capacity(n + 3);
        cells.push(step.to_string());
        cells.push(fmt_f64(point.s));
        cells.push(fmt_f64(point.lambda));
        for v in point.x.iter() {
            cells.push(fmt_f64(*v));
        }
        cells.push(fmt_f64(point.residual));
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    dir.write_text(name, &text)
}

fn open_out(out_dir: Option<&Path>) -> Result<Option<OutputDir>, CliError> {
    match out_dir {
        Some(path) => Ok(Some(OutputDir::create(path)?)),
        None => Ok(None),
    }
}

fn finalize(
    report: &RunReport,
    timings: &Timings,
    out: Option<&mut OutputDir>,
) -> Result<(), CliError> {
    if let Some(dir) = out {
        dir.write_json("report.json", report)?;
        dir.write_json("timings.json", timings)?;
        logging::info(format!(
            "wrote {} artifact files",
            dir.written_files().len()
        ));
    }
    Ok(())
}

fn hash_spec(spec: &ProblemSpec) -> Result<String, CliError> {
    let canonical = serde_json::to_string(spec)
        .map_err(|e| CliError::Compute(format!("spec serialization failed: {e}")))?;
    Ok(fnv1a_hex(canonical.as_bytes()))
}

pub fn report_to_stdout(report: &RunReport) -> Result<(), CliError> {
    print!("{}", to_json(report)?);
    Ok(())
}

fn timed(timings: &mut Timings, label: &str, start: Instant) {
    timings
        .pipelines
        .push((label.to_string(), start.elapsed().as_millis()));
}

fn input_err(e: spherebranch_core::Error) -> CliError {
    CliError::Input(e.to_string())
}

fn compute_err(e: spherebranch_core::Error) -> CliError {
    CliError::Compute(e.to_string())
}
