//! `lzcqed run`.

use std::path::Path;
use std::time::Instant;

use lzcqed::phase_space::{integrate, IntegrateOptions, Spin};

use crate::output::{
    config_line, csv_error, csv_with_header, load_config, oracle_run, prepare_dir, run_id, Analytic, RunDiagnostics,
    RunManifest, VERSION,
};
use crate::Failure;

pub const TIMESERIES_COLUMNS: [&str; 7] = ["t", "p_up", "p_down", "p_up_n0", "p_up_n1", "trace_residual", "herm_residual"];
pub const ORACLE_COLUMNS: [&str; 2] = ["oracle_p_up", "oracle_p_down"];

pub fn execute(config: &Path, out: &Path, oracle: bool) -> Result<(), Failure> {
    let p = load_config(config)?;
    prepare_dir(out)?;
    let start = Instant::now();
    let opts = IntegrateOptions {
        fock_probes: vec![(Spin::Up, 0), (Spin::Up, 1)],
        ..IntegrateOptions::default()
    };
    let r = integrate(&p, &opts).map_err(|e| Failure::solver(e.to_string()))?;

    let mut diag = RunDiagnostics::from_sweep("single".into(), &r);
    let mut oracle_series = None;
    if oracle {
        match oracle_run(&p, &r)? {
            Some((d, up, down)) => {
                diag.oracle = Some(d);
                oracle_series = Some((up, down));
            }
            None => eprintln!("note: oracle skipped, n_trunc = {} is too large", p.n_trunc),
        }
    }

    let snapshot = config_line(&p);
    let id = run_id(&snapshot);
    let mut columns: Vec<&str> = TIMESERIES_COLUMNS.to_vec();
    if oracle_series.is_some() {
        columns.extend(ORACLE_COLUMNS);
    }
    let header = vec![
        format!("lzcqed {VERSION} run_id={id}"),
        "manifest: summary.json".to_string(),
        format!("config: {snapshot}"),
        format!("columns: {}", columns.join(", ")),
    ];
    let mut w = csv_with_header(&out.join("timeseries.csv"), &header)?;
    w.write_record(&columns).map_err(csv_error)?;
    let n0 = r.fock(Spin::Up, 0).expect("probe n=0");
    let n1 = r.fock(Spin::Up, 1).expect("probe n=1");
    for k in 0..r.times.len() {
        let mut row = vec![
            r.times[k],
            r.p_up[k],
            r.p_down[k],
            n0[k],
            n1[k],
            r.trace_series[k],
            r.hermiticity_series[k],
        ];
        if let Some((up, down)) = &oracle_series {
            row.extend([up[k], down[k]]);
        }
        w.write_record(row.iter().map(|x| x.to_string())).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Failure::solver(e.to_string()))?;

    RunManifest {
        tool: "lzcqed",
        version: VERSION,
        command: "run",
        run_id: id,
        config: snapshot,
        axis: None,
        p_flip_final: Some(r.p_flip_final),
        analytic: Some(Analytic::at(&p)),
        wall_time_s: start.elapsed().as_secs_f64(),
        runs: vec![diag],
    }
    .write(&out.join("summary.json"))?;
    println!("P_flip = {}", r.p_flip_final);
    Ok(())
}
