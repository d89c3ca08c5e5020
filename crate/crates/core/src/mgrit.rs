//! Nonlinear multigrid reduction in time with full approximation storage.
//!
//! Level `l` holds `N_t / m^l` intervals. A cycle relaxes, restricts with the
//! FAS right-hand side, recurses and interpolates by injection followed by
//! F-relaxation; the coarsest level is solved by forward substitution.
//!
//! The F-cycle at level `l < L−1` is: relax, restrict, F-cycle on `l+1`,
//! interpolate, then (for `l > 0`) one V-cycle rooted at `l`. With two levels
//! it coincides with the V-cycle.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};
use crate::grid::{rel_l2_error_states, SpaceTimeTrajectory, StateField, TemporalGrid};
use crate::stepper::Propagator;

pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleType {
    V,
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relaxation {
    F,
    Fcf,
}

/// How the coarse iterate is seeded during restriction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RestrictionGuess {
    Injection,
    /// Take the last fine step of each chunk and inject the result.
    LastStep,
}

macro_rules! named_enum {
    ($t:ty, $what:literal, $($name:literal => $v:expr),+ $(,)?) => {
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok($v),)+
                    other => Err(format!(concat!("unknown ", $what, " `{}`"), other)),
                }
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $v { return f.write_str($name); })+
                unreachable!()
            }
        }
    };
}

named_enum!(CycleType, "cycle", "v" => CycleType::V, "f" => CycleType::F);
named_enum!(Relaxation, "relaxation", "f" => Relaxation::F, "fcf" => Relaxation::Fcf);
named_enum!(
    RestrictionGuess,
    "restriction guess",
    "injection" => RestrictionGuess::Injection,
    "last-step" => RestrictionGuess::LastStep,
);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgritConfig {
    pub n_levels: usize,
    pub m: usize,
    pub cycle: CycleType,
    pub relaxation: Relaxation,
    pub restriction_guess: RestrictionGuess,
    pub max_iters: usize,
    /// Relative error above which an iterate counts as diverged.
    pub divergence_threshold: f64,
    /// Worker threads for chunk-parallel sweeps.
    pub parallelism: usize,
}

impl Default for MgritConfig {
    fn default() -> Self {
        Self {
            n_levels: 2,
            m: 2,
            cycle: CycleType::V,
            relaxation: Relaxation::F,
            restriction_guess: RestrictionGuess::LastStep,
            max_iters: 10,
            divergence_threshold: DEFAULT_DIVERGENCE_THRESHOLD,
            parallelism: 1,
        }
    }
}

impl MgritConfig {
    /// Checks level count, coarsening factor and divisibility of `n_steps`.
    pub fn validate(&self, n_steps: usize) -> Result<()> {
        if self.n_levels == 0 {
            return Err(Error::config("n_levels must be at least 1"));
        }
        if self.m < 2 {
            return Err(Error::config(format!("coarsening factor m must be >= 2, got {}", self.m)));
        }
        if self.parallelism == 0 {
            return Err(Error::config("parallelism must be at least 1"));
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(Error::config("divergence_threshold must be positive"));
        }
        let factor = (self.m as u64)
            .checked_pow(self.n_levels as u32 - 1)
            .ok_or_else(|| Error::config("m^(n_levels-1) overflows"))?;
        if n_steps == 0 || n_steps as u64 % factor != 0 {
            return Err(Error::config(format!(
                "N_t = {n_steps} is not divisible by m^(n_levels-1) = {factor}"
            )));
        }
        Ok(())
    }
}

/// Convergence history of one solve. Entry `j` of `errors`/`residuals`
/// belongs to iteration `j + 1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceRecord {
    pub initial_error: Option<f64>,
    pub initial_residual: f64,
    pub errors: Vec<Option<f64>>,
    pub residuals: Vec<f64>,
    /// Iteration (1-based) at which the solve was abandoned.
    pub diverged_at: Option<usize>,
    pub wall_time: f64,
}

impl ConvergenceRecord {
    pub fn completed(&self) -> usize {
        self.residuals.len()
    }

    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    /// Errors indexed by iteration, starting with the initial iterate;
    /// `None` after divergence.
    pub fn error_series(&self, max_iters: usize) -> Vec<Option<f64>> {
        let mut out = Vec::with_capacity(max_iters + 1);
        out.push(self.initial_error);
        out.extend(self.errors.iter().copied());
        out.resize(max_iters + 1, None);
        out
    }
}

struct Level {
    n_steps: usize,
    phi: Arc<dyn Propagator>,
    u: Vec<StateField>,
    /// `None` stands for a zero right-hand side.
    g: Vec<Option<StateField>>,
}

/// `Φ(u) + g`, flagging non-finite output as divergence.
fn advance(phi: &dyn Propagator, u: &StateField, g: Option<&StateField>) -> Result<StateField> {
    let mut v = phi.step(u)?;
    if let Some(g) = g {
        v.axpy(1.0, g);
    }
    if !v.is_finite() {
        return Err(Error::Divergence { context: Some("non-finite state".into()) });
    }
    Ok(v)
}

/// The level hierarchy with its iterates and FAS right-hand sides.
pub struct Hierarchy {
    config: MgritConfig,
    levels: Vec<Level>,
    pool: Option<Arc<ThreadPool>>,
}

impl Hierarchy {
    /// `propagators[l]` must advance by `dt · m^l` where `dt = horizon / n_steps`.
    /// Every iterate starts as `initial` replicated to all nodes.
    pub fn new(
        config: MgritConfig,
        propagators: Vec<Arc<dyn Propagator>>,
        initial: &StateField,
        n_steps: usize,
    ) -> Result<Self> {
        config.validate(n_steps)?;
        if propagators.len() != config.n_levels {
            return Err(Error::config(format!(
                "{} propagators for {} levels",
                propagators.len(),
                config.n_levels
            )));
        }
        let dt0 = propagators[0].dt();
        let mut levels = Vec::with_capacity(config.n_levels);
        let mut n = n_steps;
        for (l, phi) in propagators.into_iter().enumerate() {
            let want = dt0 * config.m.pow(l as u32) as f64;
            if (phi.dt() - want).abs() > 1e-9 * want {
                return Err(Error::config(format!(
                    "level {l} propagator advances {} but the level step is {want}",
                    phi.dt()
                )));
            }
            let mut g = vec![None; n + 1];
            g[0] = Some(initial.clone());
            levels.push(Level { n_steps: n, phi, u: vec![initial.clone(); n + 1], g });
            n /= config.m;
        }
        let pool = if config.parallelism > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(config.parallelism)
                .build()
                .map_err(|e| Error::config(format!("thread pool: {e}")))?;
            Some(Arc::new(pool))
        } else {
            None
        };
        Ok(Self { config, levels, pool })
    }

    pub fn config(&self) -> &MgritConfig {
        &self.config
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn n_steps(&self, level: usize) -> usize {
        self.levels[level].n_steps
    }

    pub fn iterate(&self, level: usize) -> &[StateField] {
        &self.levels[level].u
    }

    pub fn rhs(&self, level: usize, node: usize) -> Option<&StateField> {
        self.levels[level].g[node].as_ref()
    }

    /// Replaces the finest iterate; node 0 keeps the initial condition.
    pub fn set_iterate(&mut self, states: Vec<StateField>) -> Result<()> {
        let level = &mut self.levels[0];
        if states.len() != level.u.len() || !states.iter().all(|s| s.same_shape(&level.u[0])) {
            return Err(Error::Dimension("iterate does not match the finest level".into()));
        }
        let u0 = level.u[0].clone();
        level.u = states;
        level.u[0] = u0;
        Ok(())
    }

    fn run<R: Send>(&mut self, f: impl FnOnce(&mut Self) -> R + Send) -> R {
        match self.pool.clone() {
            Some(pool) => pool.install(|| f(self)),
            None => f(self),
        }
    }

    fn f_relax_inner(&mut self, l: usize) -> Result<()> {
        let m = self.config.m;
        let Level { phi, u, g, .. } = &mut self.levels[l];
        let phi = phi.as_ref();
        let g = &*g;
        u.par_chunks_mut(m).enumerate().try_for_each(|(c, chunk)| {
            for j in 1..chunk.len() {
                chunk[j] = advance(phi, &chunk[j - 1], g[c * m + j].as_ref())?;
            }
            Ok(())
        })
    }

    fn c_relax_inner(&mut self, l: usize) -> Result<()> {
        let m = self.config.m;
        let Level { phi, u, g, n_steps } = &mut self.levels[l];
        let phi = phi.as_ref();
        let updated: Vec<StateField> = (1..=*n_steps / m)
            .into_par_iter()
            .map(|c| advance(phi, &u[c * m - 1], g[c * m].as_ref()))
            .collect::<Result<_>>()?;
        for (c, v) in updated.into_iter().enumerate() {
            u[(c + 1) * m] = v;
        }
        Ok(())
    }

    fn relax_inner(&mut self, l: usize) -> Result<()> {
        match self.config.relaxation {
            Relaxation::F => self.f_relax_inner(l),
            Relaxation::Fcf => {
                self.f_relax_inner(l)?;
                self.c_relax_inner(l)?;
                self.f_relax_inner(l)
            }
        }
    }

    fn restrict_inner(&mut self, l: usize) -> Result<()> {
        let m = self.config.m;
        let guess = self.config.restriction_guess;
        let (fine_part, coarse_part) = self.levels.split_at_mut(l + 1);
        let fine = &fine_part[l];
        let coarse = &mut coarse_part[0];
        let (phi_f, phi_c) = (fine.phi.as_ref(), coarse.phi.as_ref());
        let pairs: Vec<(StateField, StateField)> = (1..=coarse.n_steps)
            .into_par_iter()
            .map(|i| {
                let g_fine = fine.g[m * i].as_ref();
                let last = advance(phi_f, &fine.u[m * i - 1], g_fine)?;
                let mut g = last.clone();
                g.axpy(-1.0, &phi_c.step(&fine.u[m * (i - 1)])?);
                if !g.is_finite() {
                    return Err(Error::Divergence { context: Some("restricted rhs".into()) });
                }
                let u = match guess {
                    RestrictionGuess::Injection => fine.u[m * i].clone(),
                    RestrictionGuess::LastStep => last,
                };
                Ok((g, u))
            })
            .collect::<Result<_>>()?;
        coarse.u[0] = fine.u[0].clone();
        coarse.g[0] = Some(fine.u[0].clone());
        for (i, (g, u)) in pairs.into_iter().enumerate() {
            coarse.g[i + 1] = Some(g);
            coarse.u[i + 1] = u;
        }
        Ok(())
    }

    fn coarse_solve_inner(&mut self, l: usize) -> Result<()> {
        let Level { phi, u, g, n_steps } = &mut self.levels[l];
        for i in 1..=*n_steps {
            u[i] = advance(phi.as_ref(), &u[i - 1], g[i].as_ref())?;
        }
        Ok(())
    }

    /// Injects level `l + 1` into the coarse nodes of level `l`, then F-relaxes.
    fn interpolate_inner(&mut self, l: usize) -> Result<()> {
        let m = self.config.m;
        let (fine_part, coarse_part) = self.levels.split_at_mut(l + 1);
        let fine = &mut fine_part[l];
        for (i, v) in coarse_part[0].u.iter().enumerate().skip(1) {
            fine.u[m * i] = v.clone();
        }
        self.f_relax_inner(l)
    }

    fn v_cycle_inner(&mut self, l: usize) -> Result<()> {
        if l + 1 == self.levels.len() {
            return self.coarse_solve_inner(l);
        }
        self.relax_inner(l)?;
        self.restrict_inner(l)?;
        self.v_cycle_inner(l + 1)?;
        self.interpolate_inner(l)
    }

    fn f_cycle_inner(&mut self, l: usize) -> Result<()> {
        if l + 1 == self.levels.len() {
            return self.coarse_solve_inner(l);
        }
        self.relax_inner(l)?;
        self.restrict_inner(l)?;
        self.f_cycle_inner(l + 1)?;
        self.interpolate_inner(l)?;
        if l > 0 {
            self.v_cycle_inner(l)?;
        }
        Ok(())
    }

    pub fn f_relax(&mut self, level: usize) -> Result<()> {
        self.run(|h| h.f_relax_inner(level))
    }

    pub fn c_relax(&mut self, level: usize) -> Result<()> {
        self.run(|h| h.c_relax_inner(level))
    }

    pub fn fcf_relax(&mut self, level: usize) -> Result<()> {
        self.run(|h| {
            h.f_relax_inner(level)?;
            h.c_relax_inner(level)?;
            h.f_relax_inner(level)
        })
    }

    /// Populates the right-hand side and iterate of `level + 1` from `level`.
    pub fn restrict_fas(&mut self, level: usize) -> Result<()> {
        self.check_pair(level)?;
        self.run(|h| h.restrict_inner(level))
    }

    pub fn coarse_solve(&mut self, level: usize) -> Result<()> {
        self.coarse_solve_inner(level)
    }

    /// Updates `level` from `level + 1`.
    pub fn interpolate(&mut self, level: usize) -> Result<()> {
        self.check_pair(level)?;
        self.run(|h| h.interpolate_inner(level))
    }

    pub fn v_cycle(&mut self, level: usize) -> Result<()> {
        self.run(|h| h.v_cycle_inner(level))
    }

    pub fn f_cycle(&mut self) -> Result<()> {
        self.run(|h| h.f_cycle_inner(0))
    }

    /// One iteration of the configured cycle.
    pub fn cycle(&mut self) -> Result<()> {
        match self.config.cycle {
            CycleType::V => self.v_cycle(0),
            CycleType::F => self.f_cycle(),
        }
    }

    fn check_pair(&self, level: usize) -> Result<()> {
        if level + 1 >= self.levels.len() {
            return Err(Error::config(format!("level {level} has no coarser level")));
        }
        Ok(())
    }

    /// `sqrt(Σ_{i≥1} ‖g^i + Φ(u^{i−1}) − u^i‖²)` on the finest level.
    pub fn residual_norm(&mut self) -> Result<f64> {
        self.run(|h| {
            let Level { phi, u, g, n_steps } = &h.levels[0];
            let parts: Vec<f64> = (1..=*n_steps)
                .into_par_iter()
                .map(|i| Ok(advance(phi.as_ref(), &u[i - 1], g[i].as_ref())?.dist_sq(&u[i])))
                .collect::<Result<_>>()?;
            Ok(parts.iter().sum::<f64>().sqrt())
        })
    }
}

/// Runs `config.max_iters` cycles from the replicated initial condition,
/// recording the relative space-time error against `reference` (when given)
/// and the residual norm after each cycle. Divergence ends the run early and
/// is reported through the record.
pub fn mgrit_solve(
    config: MgritConfig,
    propagators: Vec<Arc<dyn Propagator>>,
    initial: &StateField,
    grid: TemporalGrid,
    reference: Option<&[StateField]>,
) -> Result<(SpaceTimeTrajectory, ConvergenceRecord)> {
    let start = Instant::now();
    let n_steps = grid.n_steps();
    if let Some(r) = reference {
        if r.len() != n_steps + 1 {
            return Err(Error::Dimension(format!(
                "reference has {} nodes, expected {}",
                r.len(),
                n_steps + 1
            )));
        }
    }
    let mut h = Hierarchy::new(config, propagators, initial, n_steps)?;
    let mut record = ConvergenceRecord::default();
    let error_of = |h: &Hierarchy| -> Result<Option<f64>> {
        reference.map(|r| rel_l2_error_states(h.iterate(0), r)).transpose()
    };
    record.initial_error = error_of(&h)?;
    record.initial_residual = h.residual_norm().unwrap_or(f64::NAN);

    for it in 1..=config.max_iters {
        let outcome = h.cycle().and_then(|_| {
            let err = error_of(&h)?;
            if let Some(e) = err {
                if !(e <= config.divergence_threshold) {
                    return Err(Error::Divergence {
                        context: Some(format!("relative error {e:e}")),
                    });
                }
            }
            Ok((err, h.residual_norm()?))
        });
        match outcome {
            Ok((err, res)) => {
                record.errors.push(err);
                record.residuals.push(res);
            }
            Err(e) if e.is_divergence() => {
                record.diverged_at = Some(it);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    record.wall_time = start.elapsed().as_secs_f64();
    let states = h.levels.swap_remove(0).u;
    Ok((SpaceTimeTrajectory::new(grid, states)?, record))
}
