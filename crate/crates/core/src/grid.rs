//! Uniform periodic space grid, uniform time grids, and state containers.

use crate::error::{Error, Result};
use crate::models::ConservationModel;

/// Non-negative `i mod n`, used for periodic neighbour lookup.
#[inline]
pub fn wrap_index(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    length: f64,
    n_cells: usize,
    dx: f64,
}

impl SpatialGrid {
    pub fn new(length: f64, n_cells: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::config(format!("domain length must be positive, got {length}")));
        }
        if n_cells == 0 {
            return Err(Error::config("grid needs at least one cell"));
        }
        Ok(Self {
            length,
            n_cells,
            dx: length / n_cells as f64,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Left edge of cell `i`; interface `N_x - 1/2` coincides with `-1/2`.
    pub fn interface(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn centre(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }
}

/// `n_steps` intervals of width `dt = horizon / n_steps`, i.e. `n_steps + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalGrid {
    horizon: f64,
    n_steps: usize,
    dt: f64,
}

impl TemporalGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::config(format!("time horizon must be positive, got {horizon}")));
        }
        if n_steps == 0 {
            return Err(Error::config("time grid needs at least one interval"));
        }
        Ok(Self {
            horizon,
            n_steps,
            dt: horizon / n_steps as f64,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self, node: usize) -> f64 {
        node as f64 * self.dt
    }

    /// The grid obtained by merging every `factor` intervals.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.n_steps % factor != 0 {
            return Err(Error::config(format!(
                "{} intervals are not divisible by coarsening factor {factor}",
                self.n_steps
            )));
        }
        TemporalGrid::new(self.horizon, self.n_steps / factor)
    }
}

/// Cell averages of the conserved variables at one time instant.
///
/// Storage is cell-major: the `D` components of cell `i` are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    n_components: usize,
    values: Vec<f64>,
}

impl StateField {
    pub fn zeros(n_components: usize, n_cells: usize) -> Self {
        Self {
            n_components,
            values: vec![0.0; n_components * n_cells],
        }
    }

    pub fn from_values(n_components: usize, values: Vec<f64>) -> Result<Self> {
        if n_components == 0 || values.len() % n_components != 0 {
            return Err(Error::Dimension(format!(
                "{} values cannot be split into cells of {n_components} components",
                values.len()
            )));
        }
        Ok(Self {
            n_components,
            values,
        })
    }

    /// Scalar field with one component per cell.
    pub fn scalar(values: Vec<f64>) -> Self {
        Self {
            n_components: 1,
            values,
        }
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_cells(&self) -> usize {
        self.values.len() / self.n_components
    }

    #[inline]
    pub fn cell(&self, i: usize) -> &[f64] {
        let d = self.n_components;
        &self.values[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn cell_mut(&mut self, i: usize) -> &mut [f64] {
        let d = self.n_components;
        &mut self.values[i * d..(i + 1) * d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn component(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(c).step_by(self.n_components).copied()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_shape(&self, other: &StateField) -> bool {
        self.n_components == other.n_components && self.values.len() == other.values.len()
    }

    /// Componentwise sum over cells (total mass up to a factor `dx`).
    pub fn component_sums(&self) -> Vec<f64> {
        (0..self.n_components).map(|c| self.component(c).sum()).collect()
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &StateField) {
        debug_assert!(self.same_shape(other));
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    /// Returns `a * self + b * other`.
    pub fn lincomb(&self, a: f64, other: &StateField, b: f64) -> StateField {
        debug_assert!(self.same_shape(other));
        StateField {
            n_components: self.n_components,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn dist_sq(&self, other: &StateField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// States at every node of one temporal grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeTrajectory {
    grid: TemporalGrid,
    states: Vec<StateField>,
}

impl SpaceTimeTrajectory {
    pub fn new(grid: TemporalGrid, states: Vec<StateField>) -> Result<Self> {
        if states.len() != grid.n_nodes() {
            return Err(Error::Dimension(format!(
                "{} states for a grid of {} nodes",
                states.len(),
                grid.n_nodes()
            )));
        }
        if let Some(first) = states.first() {
            if states.iter().any(|s| !s.same_shape(first)) {
                return Err(Error::Dimension("states differ in shape".into()));
            }
        }
        Ok(Self { grid, states })
    }

    pub fn grid(&self) -> &TemporalGrid {
        &self.grid
    }

    pub fn states(&self) -> &[StateField] {
        &self.states
    }

    pub fn state(&self, node: usize) -> &StateField {
        &self.states[node]
    }

    pub fn into_states(self) -> Vec<StateField> {
        self.states
    }

    pub fn norm(&self) -> f64 {
        self.states.iter().map(StateField::norm_sq).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.states.iter().all(StateField::is_finite)
    }
}

/// `‖u − ref‖₂ / ‖ref‖₂` over all components, cells and nodes.
pub fn rel_l2_spacetime_error(u: &SpaceTimeTrajectory, reference: &SpaceTimeTrajectory) -> Result<f64> {
    rel_l2_error_states(u.states(), reference.states())
}

pub(crate) fn rel_l2_error_states(u: &[StateField], reference: &[StateField]) -> Result<f64> {
    if u.len() != reference.len() || u.iter().zip(reference).any(|(a, b)| !a.same_shape(b)) {
        return Err(Error::Dimension("trajectories differ in shape".into()));
    }
    let diff: f64 = u.iter().zip(reference).map(|(a, b)| a.dist_sq(b)).sum();
    let norm: f64 = reference.iter().map(StateField::norm_sq).sum();
    if norm == 0.0 {
        return Err(Error::DegenerateReference);
    }
    Ok((diff / norm).sqrt())
}

/// Largest `|λ_k| dt / dx` over every node and cell of the trajectory.
pub fn max_cfl(
    traj: &SpaceTimeTrajectory,
    model: &ConservationModel,
    dt: f64,
    dx: f64,
) -> Result<f64> {
    let mut speed: f64 = 0.0;
    for state in traj.states() {
        speed = speed.max(max_wave_speed(state, model)?);
    }
    Ok(speed * dt / dx)
}

/// Largest characteristic speed over the cells of one field.
pub fn max_wave_speed(state: &StateField, model: &ConservationModel) -> Result<f64> {
    let mut speed: f64 = 0.0;
    for i in 0..state.n_cells() {
        let u = state.cell(i);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                context: Some(format!("cell {i}")),
            });
        }
        speed = speed.max(model.spectral_radius(u).map_err(|e| e.at_cell(i))?);
    }
    Ok(speed)
}
