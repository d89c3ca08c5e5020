//! Sequential reference solver and the built-in initial conditions.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::flux::{FluxConfig, SemiDiscreteOperator};
use crate::grid::{max_wave_speed, SpaceTimeTrajectory, SpatialGrid, StateField, TemporalGrid};
use crate::models::{ConservationModel, Vector};
use crate::stepper::{make_stepper, Propagator, StepperSpec};

/// Named initial conditions on a periodic domain of length `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialCondition {
    /// `sin(2πx/L)`: a shock that stays at `L/2`.
    SinStationary,
    /// `(1 + sin(2πx/L)) / 2`: a shock that travels.
    SinMoving,
    /// `(4/3) sin(2πx/L)`
    Burgers43,
    /// `[1 + sin(2πx/L)/2, 0] / 11`
    SwScaled,
    /// `[1, 0, 1 + sin(2πx/L)/2]`
    EulerEnergySin,
}

impl InitialCondition {
    /// Whether this condition is defined for `model`.
    pub fn fits(&self, model: &ConservationModel) -> bool {
        match self {
            InitialCondition::SinStationary | InitialCondition::SinMoving | InitialCondition::Burgers43 => {
                matches!(model, ConservationModel::Burgers)
            }
            InitialCondition::SwScaled => matches!(model, ConservationModel::ShallowWater { .. }),
            InitialCondition::EulerEnergySin => matches!(model, ConservationModel::Euler { .. }),
        }
    }

    pub fn evaluate(&self, x: f64, length: f64) -> Vector {
        let s = (2.0 * PI * x / length).sin();
        match self {
            InitialCondition::SinStationary => [s, 0.0, 0.0],
            InitialCondition::SinMoving => [0.5 * (1.0 + s), 0.0, 0.0],
            InitialCondition::Burgers43 => [4.0 / 3.0 * s, 0.0, 0.0],
            InitialCondition::SwScaled => [(1.0 + 0.5 * s) / 11.0, 0.0, 0.0],
            InitialCondition::EulerEnergySin => [1.0, 0.0, 1.0 + 0.5 * s],
        }
    }

    pub fn discretise(&self, model: &ConservationModel, grid: &SpatialGrid) -> Result<StateField> {
        if !self.fits(model) {
            return Err(Error::config(format!(
                "initial condition `{self}` does not apply to {}",
                model.name()
            )));
        }
        let d = model.n_components();
        discretise_ic(|x| self.evaluate(x, grid.length())[..d].to_vec(), d, grid)
    }
}

impl FromStr for InitialCondition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sin-stationary" => InitialCondition::SinStationary,
            "sin-moving" => InitialCondition::SinMoving,
            "burgers-43" => InitialCondition::Burgers43,
            "sw-scaled" => InitialCondition::SwScaled,
            "euler-energy-sin" => InitialCondition::EulerEnergySin,
            other => return Err(format!("unknown initial condition `{other}`")),
        })
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitialCondition::SinStationary => "sin-stationary",
            InitialCondition::SinMoving => "sin-moving",
            InitialCondition::Burgers43 => "burgers-43",
            InitialCondition::SwScaled => "sw-scaled",
            InitialCondition::EulerEnergySin => "euler-energy-sin",
        })
    }
}

/// Cell values sampled at the cell midpoints.
pub fn discretise_ic(
    ic: impl Fn(f64) -> Vec<f64>,
    n_components: usize,
    grid: &SpatialGrid,
) -> Result<StateField> {
    let mut values = Vec::with_capacity(n_components * grid.n_cells());
    for i in 0..grid.n_cells() {
        let v = ic(grid.centre(i));
        if v.len() != n_components {
            return Err(Error::Dimension(format!(
                "initial condition returned {} components, expected {n_components}",
                v.len()
            )));
        }
        values.extend(v);
    }
    StateField::from_values(n_components, values)
}

#[derive(Debug, Clone)]
pub struct SerialRun {
    pub trajectory: SpaceTimeTrajectory,
    pub wall_time: f64,
    pub max_cfl_observed: f64,
}

/// Steps `initial` through every node of `temporal` with a finest-level stepper.
/// Fails with a divergence error if a state becomes non-finite or inadmissible.
pub fn solve_serial(
    model: ConservationModel,
    grid: SpatialGrid,
    temporal: TemporalGrid,
    flux_config: FluxConfig,
    stepper_spec: StepperSpec,
    initial: StateField,
) -> Result<SerialRun> {
    let op = Arc::new(SemiDiscreteOperator::new(model, grid, flux_config)?);
    let stepper = make_stepper(stepper_spec, op, temporal.dt())?;
    run_serial(&stepper, &model, grid.dx(), temporal, initial)
}

/// Serial stepping with an already-built propagator.
pub fn run_serial(
    stepper: &dyn Propagator,
    model: &ConservationModel,
    dx: f64,
    temporal: TemporalGrid,
    initial: StateField,
) -> Result<SerialRun> {
    let start = Instant::now();
    let ratio = temporal.dt() / dx;
    let mut cfl = max_wave_speed(&initial, model)? * ratio;
    let mut states = Vec::with_capacity(temporal.n_nodes());
    states.push(initial);
    for n in 0..temporal.n_steps() {
        let next = stepper.step(&states[n]).and_then(|v| {
            let speed = max_wave_speed(&v, model)?;
            Ok((v, speed))
        });
        let (next, speed) = next.map_err(|e| match e {
            Error::Divergence { .. } | Error::PhysicalState { .. } => Error::Divergence {
                context: Some(format!("serial step {} ({e})", n + 1)),
            },
            other => other,
        })?;
        cfl = cfl.max(speed * ratio);
        states.push(next);
    }
    Ok(SerialRun {
        trajectory: SpaceTimeTrajectory::new(temporal, states)?,
        wall_time: start.elapsed().as_secs_f64(),
        max_cfl_observed: cfl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxKind;
    use crate::stepper::StepperKind;
    use crate::weno::WenoConfig;

    fn roe(k: usize) -> FluxConfig {
        FluxConfig { kind: FluxKind::Roe, weno: WenoConfig { k, ..WenoConfig::default() } }
    }

    #[test]
    fn midpoint_sampling() {
        let grid = SpatialGrid::new(1.0, 4).unwrap();
        let model = ConservationModel::Burgers;
        let u = InitialCondition::SinStationary.discretise(&model, &grid).unwrap();
        let h = 0.5f64.sqrt();
        for (got, want) in u.values().iter().zip([h, h, -h, -h]) {
            assert!((got - want).abs() < 1e-15);
        }
        let c = discretise_ic(|_| vec![2.0, 3.0], 2, &grid).unwrap();
        assert!(c.values().chunks(2).all(|v| v == [2.0, 3.0]));
    }

    #[test]
    fn moving_is_shifted_stationary() {
        let grid = SpatialGrid::new(2.0, 32).unwrap();
        let model = ConservationModel::Burgers;
        let s = InitialCondition::SinStationary.discretise(&model, &grid).unwrap();
        let m = InitialCondition::SinMoving.discretise(&model, &grid).unwrap();
        for (a, b) in s.values().iter().zip(m.values()) {
            assert_eq!(*b, 0.5 * (1.0 + a));
        }
    }

    #[test]
    fn initial_conditions_check_the_model() {
        let grid = SpatialGrid::new(1.0, 8).unwrap();
        assert!(InitialCondition::SwScaled.discretise(&ConservationModel::Burgers, &grid).is_err());
        let e = InitialCondition::EulerEnergySin.discretise(&ConservationModel::euler(), &grid).unwrap();
        assert_eq!(e.n_components(), 3);
        assert_eq!("burgers-43".parse::<InitialCondition>().unwrap(), InitialCondition::Burgers43);
    }

    #[test]
    fn zero_initial_condition_stays_zero() {
        let grid = SpatialGrid::new(1.0, 16).unwrap();
        let run = solve_serial(
            ConservationModel::Burgers,
            grid,
            TemporalGrid::new(0.1, 10).unwrap(),
            roe(2),
            StepperSpec::new(StepperKind::Ssprk3),
            StateField::zeros(1, 16),
        )
        .unwrap();
        assert!(run.trajectory.states().iter().all(|s| s.values().iter().all(|v| *v == 0.0)));
        assert_eq!(run.max_cfl_observed, 0.0);
    }

    #[test]
    fn mass_is_conserved_over_a_run() {
        let grid = SpatialGrid::new(1.0, 64).unwrap();
        let model = ConservationModel::Burgers;
        let u0 = InitialCondition::SinMoving.discretise(&model, &grid).unwrap();
        let run = solve_serial(model, grid, TemporalGrid::new(0.3, 120).unwrap(), roe(2), StepperSpec::new(StepperKind::Ssprk3), u0).unwrap();
        let mass0 = run.trajectory.state(0).component_sums()[0] * grid.dx();
        for s in run.trajectory.states() {
            assert!((s.component_sums()[0] * grid.dx() - mass0).abs() < 1e-12);
        }
    }

    fn max_jump(u: &StateField) -> (usize, f64) {
        let v = u.values();
        let n = v.len();
        (0..n)
            .map(|i| (i, (v[(i + 1) % n] - v[i]).abs()))
            .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best })
    }

    #[test]
    fn stationary_shock_forms_at_mid_domain() {
        let n = 128;
        let grid = SpatialGrid::new(1.0, n).unwrap();
        let model = ConservationModel::Burgers;
        let u0 = InitialCondition::SinStationary.discretise(&model, &grid).unwrap();
        let t_break = 1.0 / (2.0 * PI);
        let steps = 100;
        let run = solve_serial(
            model,
            grid,
            TemporalGrid::new(1.2 * t_break, steps).unwrap(),
            roe(2),
            StepperSpec::new(StepperKind::Ssprk3),
            u0,
        )
        .unwrap();
        assert!(run.max_cfl_observed < 1.0);
        let (_, j0) = max_jump(run.trajectory.state(0));
        let (i, j1) = max_jump(run.trajectory.state(steps));
        assert!(j1 >= 10.0 * j0, "jump grew from {j0} to {j1}");
        // the interface between cells i and i+1 sits at (i+1) dx
        let cells_from_centre = (i as isize + 1 - n as isize / 2).abs();
        assert!(cells_from_centre <= 3, "shock at interface {}", i + 1);
    }

    #[test]
    fn blow_up_reports_divergence() {
        let grid = SpatialGrid::new(1.0, 32).unwrap();
        let model = ConservationModel::Burgers;
        let u0 = InitialCondition::SinStationary.discretise(&model, &grid).unwrap();
        // CFL far beyond stability
        let err = solve_serial(model, grid, TemporalGrid::new(50.0, 100).unwrap(), roe(1), StepperSpec::new(StepperKind::Fe), u0)
            .unwrap_err();
        assert!(err.is_divergence(), "{err}");
    }
}
