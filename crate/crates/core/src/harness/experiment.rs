//! Running one configuration or a sweep of them.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flux::SemiDiscreteOperator;
use crate::grid::{max_wave_speed, SpatialGrid, TemporalGrid};
use crate::harness::config::ExperimentConfig;
use crate::harness::table::ConvergenceTable;
use crate::mgrit::{mgrit_solve, ConvergenceRecord};
use crate::serial::{run_serial, SerialRun};
use crate::stepper::{make_level_stepper, make_stepper, Propagator};

#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    pub n_steps: usize,
    pub dt: f64,
    /// Largest wave speed of the serial reference times `dt / dx`.
    pub cfl: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub name: String,
    pub record: ConvergenceRecord,
    pub serial: SerialRun,
    pub levels: Vec<LevelReport>,
    pub max_iters: usize,
}

impl ExperimentResult {
    /// Error per table row: the initial iterate, then one row per cycle.
    pub fn error_column(&self) -> Vec<Option<f64>> {
        self.record.error_series(self.max_iters)
    }
}

/// Serial reference plus MGRIT for one validated configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate().map_err(|(key, m)| Error::config(format!("{key}: {m}")))?;
    let model = cfg.model();
    let grid = SpatialGrid::new(cfg.length, cfg.n_x)?;
    let temporal = TemporalGrid::new(cfg.horizon, cfg.n_t)?;
    let initial = cfg.ic.discretise(&model, &grid)?;
    let levels = cfg.levels();
    let m = cfg.mgrit.m;

    let ops: Vec<Arc<SemiDiscreteOperator>> = levels
        .iter()
        .map(|l| SemiDiscreteOperator::new(model, grid, l.flux).map(Arc::new))
        .collect::<Result<_>>()?;
    let fine = levels[0].stepper;
    let fine_stepper = make_stepper(fine, ops[0].clone(), temporal.dt())?;
    let mut propagators: Vec<Arc<dyn Propagator>> = vec![Arc::new(fine_stepper.clone())];
    for l in 1..levels.len() {
        let s = make_level_stepper(levels[l].stepper, ops[l].clone(), fine, ops[0].clone(), temporal.dt(), l, m)?;
        propagators.push(Arc::new(s));
    }

    let serial = run_serial(&fine_stepper, &model, grid.dx(), temporal, initial.clone())?;
    let speed = serial
        .trajectory
        .states()
        .iter()
        .map(|s| max_wave_speed(s, &model))
        .try_fold(0.0f64, |acc, s| s.map(|s| acc.max(s)))?;
    let reports = (0..levels.len())
        .map(|l| {
            let dt = temporal.dt() * m.pow(l as u32) as f64;
            LevelReport { n_steps: cfg.n_t / m.pow(l as u32), dt, cfl: speed * dt / grid.dx() }
        })
        .collect();

    let (_, record) = mgrit_solve(cfg.mgrit, propagators, &initial, temporal, Some(serial.trajectory.states()))?;
    Ok(ExperimentResult {
        name: cfg.column_name(),
        record,
        serial,
        levels: reports,
        max_iters: cfg.mgrit.max_iters,
    })
}

/// Outcome of every sweep column; a failing column never aborts the others.
#[derive(Debug)]
pub struct SweepResult {
    pub columns: Vec<(String, Result<ExperimentResult>)>,
    pub max_iters: usize,
}

impl SweepResult {
    pub fn table(&self) -> ConvergenceTable {
        let mut table = ConvergenceTable::new();
        for (name, outcome) in &self.columns {
            let values = match outcome {
                Ok(r) => r.error_column(),
                Err(_) => vec![None; self.max_iters + 1],
            };
            table.push_column(name.clone(), values);
        }
        table
    }
}

/// Runs every column of `cfg` (just one without sweep keys). Columns run
/// concurrently on the global thread pool.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let columns = cfg.columns().map_err(|(key, m)| Error::config(format!("{key}: {m}")))?;
    let max_iters = columns.iter().map(|(_, c)| c.mgrit.max_iters).max().unwrap_or(0);
    let columns = columns
        .into_par_iter()
        .map(|(name, c)| {
            let outcome = run_experiment(&c).map(|mut r| {
                r.name = name.clone();
                r
            });
            (name, outcome)
        })
        .collect();
    Ok(SweepResult { columns, max_iters })
}
