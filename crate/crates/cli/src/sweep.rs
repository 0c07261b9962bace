//! Parameter sweeps: the product grid of one or two axes, every requested
//! method at every point, written as one long-format CSV.
//!
//! Points run concurrently under a bounded worker pool, but rows are
//! collected into their predetermined slots and written serially, so the
//! output is byte-identical however many workers ran. A failed point keeps
//! its row with the error message in the last column; the sweep continues.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::json;

use fermicav_core::observables::ObservableRecord;

use crate::config::RunConfig;
use crate::output::{ensure_dir, write_json};
use crate::runner::{self, Method};

struct Task {
    point: Vec<f64>,
    method: Method,
}

pub struct SweepReport {
    pub csv_path: PathBuf,
    pub rows: usize,
    pub failures: usize,
}

pub fn run(cfg: &RunConfig, dir: &Path, workers: usize) -> Result<SweepReport> {
    let Some(sweep) = &cfg.sweep else {
        bail!("config has no [sweep] table");
    };
    sweep.validate()?;
    ensure_dir(dir)?;

    let methods: Vec<Method> = sweep
        .methods
        .iter()
        .map(|m| Method::parse(m).expect("validated"))
        .collect();
    let tasks: Vec<Task> = sweep
        .points()
        .into_iter()
        .flat_map(|point| {
            methods.iter().map(move |&method| Task {
                point: point.clone(),
                method,
            })
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building sweep worker pool")?;
    let results: Vec<std::result::Result<ObservableRecord, String>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|task| {
                let params = sweep.apply(&cfg.system, &task.point);
                runner::run_point(task.method, &params, cfg)
                    .map_err(|e| runner::error_chain(&e))
            })
            .collect()
    });

    let csv_path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&csv_path)
        .with_context(|| format!("writing {}", csv_path.display()))?;
    let mut header: Vec<String> = sweep.axes.iter().map(|a| a.name.clone()).collect();
    header.extend(
        [
            "method", "j", "j_source", "j_drain", "j_band1", "j_band2", "j0", "delta_j",
            "nbar", "iterations", "residual", "error",
        ]
        .map(str::to_string),
    );
    w.write_record(&header)?;

    let fmt = |x: f64| format!("{x:.12e}");
    let mut failures = 0usize;
    for (task, result) in tasks.iter().zip(&results) {
        let mut row: Vec<String> = task.point.iter().map(|&v| fmt(v)).collect();
        row.push(task.method.name().to_string());
        match result {
            Ok(r) => {
                row.extend([
                    fmt(r.j),
                    fmt(r.j_source),
                    fmt(r.j_drain),
                    fmt(r.j_band[0]),
                    fmt(r.j_band[1]),
                    fmt(r.j0),
                    fmt(r.delta_j),
                    fmt(r.nbar),
                    r.iterations.to_string(),
                    fmt(r.residual),
                    String::new(),
                ]);
            }
            Err(msg) => {
                failures += 1;
                row.extend(std::iter::repeat_n(String::new(), 10));
                row.push(msg.clone());
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;

    let summary = json!({
        "axes": sweep.axes.iter().map(|a| &a.name).collect::<Vec<_>>(),
        "methods": sweep.methods,
        "grid_points": tasks.len() / methods.len(),
        "rows": tasks.len(),
        "failures": failures,
    });
    write_json(&dir.join("sweep_summary.json"), &summary)?;

    Ok(SweepReport {
        csv_path,
        rows: tasks.len(),
        failures,
    })
}
