//! Task execution and the run report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use emfield::analysis::{light_front_time, radial_term_amplitudes, sample_with};
use emfield::evaluators::{evaluate_refined, relative_difference};
use emfield::{
    build_rule, feature_arrival_times, light_front_check, local_velocity, sample_waveforms, zone_scaling_fit,
    ComponentSelector, FieldError, FrontCheck, PhysicalConstants, QuadratureRule, Ray, RefinementLadder,
    Representation, ScalingWindow, SourceModel, TermKind, WaveformSeries,
};
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig, Task};
use crate::output::{float, velocity_csv, waveform_csv, write_file};
use crate::RunError;

pub const REPORT_FILE: &str = "report.json";
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` lets the pool pick.
    pub threads: Option<usize>,
    /// Overrides `output.directory`.
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontCheckEntry {
    pub representation: String,
    pub max_precursor: f64,
    pub global_peak: f64,
    pub samples_ahead: usize,
    pub pass: bool,
}

impl FrontCheckEntry {
    fn new(representation: Representation, fc: FrontCheck) -> Self {
        Self {
            representation: representation.name().to_string(),
            max_precursor: fc.max_precursor,
            global_peak: fc.global_peak,
            samples_ahead: fc.samples_ahead,
            pass: fc.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontCheckSummary {
    pub pass: bool,
    pub representations: Vec<FrontCheckEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakEntry {
    pub representation: String,
    pub peak_magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub max: f64,
    pub mean: f64,
    pub worst_r: f64,
    pub worst_t: f64,
    /// Largest combined quadrature error estimate relative to the field.
    pub max_relative_err_estimate: f64,
    /// Cells whose residual exceeds ten times the relative error estimate.
    pub cells_above_estimate: usize,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocitySummary {
    pub representation: String,
    pub feature: String,
    pub radii: Vec<f64>,
    pub arrival_times: Vec<f64>,
    pub min_velocity: f64,
    pub negative_segments: Vec<[f64; 2]>,
    pub arrivals_behind_front: bool,
    pub front_check: FrontCheckEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingEntry {
    pub term: String,
    pub window: String,
    pub exponent: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: Option<Task>,
    pub status: Option<TaskStatus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub peaks: Vec<PeakEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_summary: Option<ResidualSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub front_check: Option<FrontCheckSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity: Option<VelocitySummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub scaling: Vec<ScalingEntry>,
}

/// Everything a run reports. Wall-clock timings are kept in [`Timings`] so
/// that this stays reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub warnings: Vec<String>,
    pub tasks: Vec<TaskReport>,
    /// Every file written by the run, relative to the output directory.
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn has_errors(&self) -> bool {
        self.tasks.iter().any(|t| t.status == Some(TaskStatus::Error))
    }

    pub fn task(&self, task: Task) -> Option<&TaskReport> {
        self.tasks.iter().find(|t| t.task == Some(task))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTiming {
    pub task: Task,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub threads: usize,
    pub total_seconds: f64,
    pub tasks: Vec<TaskTiming>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub timings: Timings,
    pub output_dir: PathBuf,
}

/// Shared state for one run; waveform series are computed at most once per
/// representation.
struct Context<'a> {
    config: &'a RunConfig,
    src: SourceModel,
    consts: PhysicalConstants,
    ray: Ray,
    radii: Vec<f64>,
    times: Vec<f64>,
    rule: QuadratureRule,
    dir: &'a Path,
    series: [Option<WaveformSeries>; 2],
}

fn slot(rep: Representation) -> usize {
    match rep {
        Representation::Jefimenko => 1,
        _ => 0,
    }
}

impl Context<'_> {
    fn series(&mut self, rep: Representation) -> Result<&WaveformSeries, FieldError> {
        let i = slot(rep);
        if self.series[i].is_none() {
            let s = sample_waveforms(
                &self.src,
                rep,
                &self.ray,
                &self.radii,
                &self.times,
                &self.rule,
                &self.consts,
                self.config.selector(),
            )?;
            self.series[i] = Some(s);
        }
        Ok(self.series[i].as_ref().expect("series just computed"))
    }

    fn write(&self, name: &str, contents: &str, report: &mut TaskReport) -> Result<(), RunError> {
        write_file(&self.dir.join(name), contents)?;
        report.artifacts.push(name.to_string());
        Ok(())
    }
}

#[derive(Debug)]
enum TaskFailure {
    Field(FieldError),
    Run(RunError),
}

impl From<FieldError> for TaskFailure {
    fn from(e: FieldError) -> Self {
        TaskFailure::Field(e)
    }
}

impl From<RunError> for TaskFailure {
    fn from(e: RunError) -> Self {
        TaskFailure::Run(e)
    }
}

const BOTH: [Representation; 2] = [Representation::Budko, Representation::Jefimenko];

fn decompose(ctx: &mut Context, report: &mut TaskReport) -> Result<(), TaskFailure> {
    let wants_csv = ctx.config.wants(Format::Csv);
    for rep in BOTH {
        let series = ctx.series(rep)?;
        let peak = series.samples().iter().map(|s| s.total().norm()).fold(0.0, f64::max);
        let csv = wants_csv.then(|| waveform_csv(series));
        report.peaks.push(PeakEntry {
            representation: rep.name().to_string(),
            peak_magnitude: peak,
        });
        if let Some(csv) = csv {
            ctx.write(&format!("waveforms_{}.csv", rep.name()), &csv, report)?;
        }
    }
    Ok(())
}

fn compare(ctx: &mut Context, report: &mut TaskReport) -> Result<(), TaskFailure> {
    let q = &ctx.config.quadrature;
    let ladder = RefinementLadder::new(ctx.src.domain(), q.base_order, q.max_order, q.tol)?;
    let sampled: Vec<WaveformSeries> = BOTH
        .iter()
        .map(|&rep| {
            for &r in &ctx.radii {
                emfield::ObservationPoint::new(ctx.ray.at(r), 0.0)
                    .ensure_exterior(&ctx.src, emfield::evaluators::EXTERIOR_MARGIN)?;
            }
            sample_with(&ctx.ray, &ctx.radii, &ctx.times, ComponentSelector::Magnitude, |obs| {
                evaluate_refined(rep, &ctx.src, obs, &ladder, &ctx.consts)
            })
        })
        .collect::<Result<_, _>>()?;
    let (a, b) = (&sampled[0], &sampled[1]);

    let mut csv = String::from("r,t,residual,err_budko,err_jefimenko\n");
    let mut s = ResidualSummary {
        max: 0.0,
        mean: 0.0,
        worst_r: f64::NAN,
        worst_t: f64::NAN,
        max_relative_err_estimate: 0.0,
        cells_above_estimate: 0,
        cells: 0,
    };
    for (i, &r) in ctx.radii.iter().enumerate() {
        for (j, &t) in ctx.times.iter().enumerate() {
            let (fa, fb) = (a.sample(i, j), b.sample(i, j));
            let res = relative_difference(&fa.total(), &fb.total());
            let (ea, eb) = (fa.err_estimate().unwrap_or(0.0), fb.err_estimate().unwrap_or(0.0));
            let scale = fa.total().norm().max(fb.total().norm());
            let rel_err = if ea + eb == 0.0 { 0.0 } else { (ea + eb) / scale.max(emfield::evaluators::RESIDUAL_FLOOR) };
            if res > 10.0 * rel_err {
                s.cells_above_estimate += 1;
            }
            if res > s.max || s.cells == 0 {
                s.max = res;
                s.worst_r = r;
                s.worst_t = t;
            }
            s.max_relative_err_estimate = s.max_relative_err_estimate.max(rel_err);
            s.mean += res;
            s.cells += 1;
            csv.push_str(&format!("{},{},{},{},{}\n", float(r), float(t), float(res), float(ea), float(eb)));
        }
    }
    s.mean /= s.cells.max(1) as f64;
    report.residual_summary = Some(s);
    if ctx.config.wants(Format::Csv) {
        ctx.write("residuals.csv", &csv, report)?;
    }
    Ok(())
}

fn frontcheck(ctx: &mut Context, report: &mut TaskReport) -> Result<(), TaskFailure> {
    let mut entries = Vec::new();
    for rep in BOTH {
        let series = ctx.series(rep)?.clone().with_selector(ComponentSelector::Magnitude);
        entries.push(FrontCheckEntry::new(rep, light_front_check(&series, &ctx.src, &ctx.consts)));
    }
    report.front_check = Some(FrontCheckSummary {
        pass: entries.iter().all(|e| e.pass),
        representations: entries,
    });
    Ok(())
}

fn velocity(ctx: &mut Context, report: &mut TaskReport) -> Result<(), TaskFailure> {
    let a = ctx.config.analysis;
    let rep: Representation = a.representation.into();
    let feature = a.feature.into();
    let series = ctx.series(rep)?.clone();
    let arrivals = feature_arrival_times(&series, feature, (a.window[0], a.window[1]))?;
    let profile = local_velocity(&ctx.radii, &arrivals, feature)?;
    let behind = ctx
        .radii
        .iter()
        .zip(&arrivals)
        .all(|(r, t)| *t >= light_front_time(&ctx.src, &ctx.ray.at(*r), &ctx.consts));
    let fc = light_front_check(&series.with_selector(ComponentSelector::Magnitude), &ctx.src, &ctx.consts);
    report.velocity = Some(VelocitySummary {
        representation: rep.name().to_string(),
        feature: feature.name().to_string(),
        radii: ctx.radii.clone(),
        arrival_times: arrivals,
        min_velocity: profile.min_velocity(),
        negative_segments: profile.negative_segments().into_iter().map(|(lo, hi)| [lo, hi]).collect(),
        arrivals_behind_front: behind,
        front_check: FrontCheckEntry::new(rep, fc),
    });
    if ctx.config.wants(Format::Csv) {
        ctx.write("velocity.csv", &velocity_csv(&profile), report)?;
    }
    Ok(())
}

fn scaling(ctx: &mut Context, report: &mut TaskReport) -> Result<(), TaskFailure> {
    let radiation = ctx.config.radiation_window();
    let plan = [
        (TermKind::Near, ScalingWindow::Static, "static", -3.0, 0.15),
        (TermKind::Intermediate, radiation, "retarded_phase", -2.0, 0.15),
        (TermKind::Far, radiation, "retarded_phase", -1.0, 0.05),
    ];
    let mut columns = Vec::new();
    for (term, window, window_name, expected, tolerance) in plan {
        let amps = radial_term_amplitudes(
            &ctx.src,
            Representation::Budko,
            term,
            &ctx.ray,
            &ctx.radii,
            window,
            &ctx.rule,
            &ctx.consts,
        )?;
        let exponent = zone_scaling_fit(&ctx.radii, &amps)?;
        report.scaling.push(ScalingEntry {
            term: term.name().to_string(),
            window: window_name.to_string(),
            exponent,
            expected,
            tolerance,
            within_tolerance: (exponent - expected).abs() <= tolerance,
        });
        columns.push(amps);
    }
    if ctx.config.wants(Format::Csv) {
        let mut csv = String::from("r,near,intermediate,far\n");
        for (i, r) in ctx.radii.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                float(*r),
                float(columns[0][i]),
                float(columns[1][i]),
                float(columns[2][i])
            ));
        }
        ctx.write("scaling.csv", &csv, report)?;
    }
    Ok(())
}

/// Runs every configured task in order inside a dedicated worker pool and
/// writes the artifacts. A failing task is recorded and the run continues;
/// only setup and report I/O failures abort.
pub fn run_tasks(config: &RunConfig, options: &RunOptions) -> Result<RunOutcome, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.unwrap_or(0))
        .build()
        .map_err(|e| RunError::ThreadPool(e.to_string()))?;
    let dir = options
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.directory));
    std::fs::create_dir_all(&dir).map_err(|source| RunError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let threads = pool.current_num_threads();
    pool.install(|| run_in_pool(config, &dir, threads))
}

fn run_in_pool(config: &RunConfig, dir: &Path, threads: usize) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let src = config.source_model()?;
    let mut ctx = Context {
        config,
        rule: build_rule(src.domain(), config.quadrature.base_order).map_err(|e| RunError::Setup(e.to_string()))?,
        src,
        consts: config.physical_constants()?,
        ray: config.ray()?,
        radii: config.observation.radii.values(),
        times: config.observation.times.values(),
        dir,
        series: [None, None],
    };

    let mut tasks = Vec::new();
    let mut timings = Vec::new();
    for &task in &config.tasks {
        let t0 = Instant::now();
        let mut report = TaskReport {
            task: Some(task),
            ..TaskReport::default()
        };
        let result = match task {
            Task::Decompose => decompose(&mut ctx, &mut report),
            Task::Compare => compare(&mut ctx, &mut report),
            Task::Frontcheck => frontcheck(&mut ctx, &mut report),
            Task::Velocity => velocity(&mut ctx, &mut report),
            Task::Scaling => scaling(&mut ctx, &mut report),
        };
        match result {
            Ok(()) => report.status = Some(TaskStatus::Ok),
            Err(TaskFailure::Field(e)) => {
                report.status = Some(TaskStatus::Error);
                report.error = Some(format!("task {task}: {e}"));
            }
            Err(TaskFailure::Run(e)) => return Err(e),
        }
        timings.push(TaskTiming {
            task,
            seconds: t0.elapsed().as_secs_f64(),
        });
        tasks.push(report);
    }

    let mut artifacts: Vec<String> = tasks.iter().flat_map(|t| t.artifacts.iter().cloned()).collect();
    let write_json = config.wants(Format::Json);
    if write_json {
        artifacts.push(TIMINGS_FILE.to_string());
    }
    let report = RunReport {
        config: config.clone(),
        warnings: config.warnings(),
        tasks,
        artifacts,
    };
    let timings = Timings {
        threads,
        total_seconds: start.elapsed().as_secs_f64(),
        tasks: timings,
    };
    if write_json {
        write_file(&dir.join(REPORT_FILE), &(serde_json::to_string_pretty(&report)? + "\n"))?;
        write_file(&dir.join(TIMINGS_FILE), &(serde_json::to_string_pretty(&timings)? + "\n"))?;
    }
    Ok(RunOutcome {
        report,
        timings,
        output_dir: dir.to_path_buf(),
    })
}
