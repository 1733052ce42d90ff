//! `lzcqed sweep`.

use std::path::PathBuf;
use std::time::Instant;

use clap::ValueEnum;
use lzcqed::params::default_window;
use lzcqed::phase_space::{integrate, uniform_grid, IntegrateOptions};
use lzcqed::Params;
use rayon::prelude::*;

use crate::output::{
    config_line, csv_error, csv_with_header, load_config, oracle_run, prepare_dir, run_id, Analytic, RunDiagnostics,
    RunManifest, VERSION,
};
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(name = "T", alias = "temperature")]
    Temperature,
    #[value(name = "gamma")]
    Gamma,
    #[value(name = "v")]
    Velocity,
    #[value(name = "g")]
    Coupling,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Temperature => "T",
            Axis::Gamma => "gamma",
            Axis::Velocity => "v",
            Axis::Coupling => "g",
        }
    }

    /// `base` with this axis set to `value`. A window left at its default
    /// follows `g` and `v`.
    pub fn apply(self, base: &Params, value: f64) -> Params {
        let mut p = *base;
        let default = default_window(base.g, base.v) == (base.t_start, base.t_end);
        match self {
            Axis::Temperature => p.temperature = value,
            Axis::Gamma => p.gamma = value,
            Axis::Velocity => p.v = value,
            Axis::Coupling => p.g = value,
        }
        if default {
            p = p.with_default_window();
        }
        p
    }
}

pub const SWEEP_COLUMNS: [&str; 6] = [
    "value",
    "numeric",
    "pud_finite_T",
    "pud_zero_T_dissipative",
    "lz_generalized",
    "status",
];
pub const ORACLE_COLUMNS: [&str; 2] = ["oracle_numeric", "oracle_sup_dp_up"];

pub struct Request {
    pub config: PathBuf,
    pub out: PathBuf,
    pub oracle: bool,
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub threads: Option<usize>,
}

struct Point {
    value: f64,
    analytic: Analytic,
    diag: RunDiagnostics,
}

fn run_point(base: &Params, axis: Axis, value: f64, oracle: bool) -> Point {
    let p = axis.apply(base, value);
    let label = format!("{}={value}", axis.name());
    let analytic = Analytic::at(&p);
    let diag = match integrate(&p, &IntegrateOptions::default()) {
        Ok(r) => {
            let mut d = RunDiagnostics::from_sweep(label.clone(), &r);
            if oracle {
                match oracle_run(&p, &r) {
                    Ok(o) => d.oracle = o.map(|x| x.0),
                    Err(e) => d = RunDiagnostics::failed(label, e.message),
                }
            }
            d
        }
        Err(e) => RunDiagnostics::failed(label, e.to_string()),
    };
    Point { value, analytic, diag }
}

pub fn execute(req: &Request) -> Result<(), Failure> {
    if req.points < 2 {
        return Err(Failure::config(format!("--points must be >= 2, got {}", req.points)));
    }
    if !(req.from.is_finite() && req.to.is_finite()) {
        return Err(Failure::config("--from and --to must be finite"));
    }
    let base = load_config(&req.config)?;
    prepare_dir(&req.out)?;
    let grid = uniform_grid(req.from, req.to, req.points);

    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = req.threads {
        if k == 0 {
            return Err(Failure::config("--threads must be >= 1"));
        }
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| Failure::solver(e.to_string()))?;
    let points: Vec<Point> =
        pool.install(|| grid.par_iter().map(|&x| run_point(&base, req.axis, x, req.oracle)).collect());

    let snapshot = config_line(&base);
    let id = run_id(&format!("{snapshot}; axis = {} {} {} {}", req.axis.name(), req.from, req.to, req.points));
    let mut columns: Vec<&str> = SWEEP_COLUMNS.to_vec();
    if req.oracle {
        columns.extend(ORACLE_COLUMNS);
    }
    let header = vec![
        format!("lzcqed {VERSION} run_id={id}"),
        "manifest: sweep_manifest.json (row k <-> runs[k])".to_string(),
        format!("config: {snapshot}"),
        format!("axis: {} from {} to {} points {}", req.axis.name(), req.from, req.to, req.points),
        format!("columns: {}", columns.join(", ")),
    ];
    let mut w = csv_with_header(&req.out.join("sweep.csv"), &header)?;
    w.write_record(&columns).map_err(csv_error)?;
    let mut failed = 0;
    for pt in &points {
        let numeric = pt.diag.p_flip_final.map_or(String::new(), |x| x.to_string());
        let status = match &pt.diag.error {
            None => "ok".to_string(),
            Some(e) => {
                failed += 1;
                format!("failed: {e}")
            }
        };
        let mut row = vec![
            pt.value.to_string(),
            numeric,
            pt.analytic.pud_finite_t.to_string(),
            pt.analytic.pud_zero_t_dissipative.to_string(),
            pt.analytic.lz_generalized.to_string(),
            status,
        ];
        if req.oracle {
            match &pt.diag.oracle {
                Some(o) => row.extend([o.p_flip_final.to_string(), o.sup_p_up_deviation.to_string()]),
                None => row.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Failure::solver(e.to_string()))?;

    RunManifest {
        tool: "lzcqed",
        version: VERSION,
        command: "sweep",
        run_id: id,
        config: snapshot,
        axis: Some(req.axis.name().to_string()),
        p_flip_final: None,
        analytic: None,
        wall_time_s: start.elapsed().as_secs_f64(),
        runs: points.into_iter().map(|p| p.diag).collect(),
    }
    .write(&req.out.join("sweep_manifest.json"))?;

    if failed > 0 {
        return Err(Failure {
            code: 3,
            message: format!("{failed} of {} sweep points failed", req.points),
        });
    }
    Ok(())
}
