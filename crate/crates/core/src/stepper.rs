//! Explicit one-step integrators and the matched Lax-Friedrichs coarse steppers.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flux::{RhsOperator, SemiDiscreteOperator};
use crate::grid::StateField;
use crate::models::ConservationModel;

/// A single-step propagator `u^{n+1} = Φ(u^n)` with a fixed step size.
pub trait Propagator: Send + Sync {
    fn step(&self, u: &StateField) -> Result<StateField>;

    /// Time advanced by one application.
    fn dt(&self) -> f64;
}

pub fn step_fe(op: &dyn RhsOperator, u: &StateField, dt: f64) -> Result<StateField> {
    let mut out = u.clone();
    out.axpy(dt, &op.rhs(u)?);
    Ok(out)
}

pub fn step_ssprk2(op: &dyn RhsOperator, u: &StateField, dt: f64) -> Result<StateField> {
    let u1 = step_fe(op, u, dt)?;
    let mut out = u.lincomb(0.5, &u1, 0.5);
    out.axpy(0.5 * dt, &op.rhs(&u1)?);
    Ok(out)
}

pub fn step_ssprk3(op: &dyn RhsOperator, u: &StateField, dt: f64) -> Result<StateField> {
    let u1 = step_fe(op, u, dt)?;
    let mut u2 = u.lincomb(0.75, &u1, 0.25);
    u2.axpy(0.25 * dt, &op.rhs(&u1)?);
    let mut out = u.lincomb(1.0 / 3.0, &u2, 2.0 / 3.0);
    out.axpy(2.0 / 3.0 * dt, &op.rhs(&u2)?);
    Ok(out)
}

fn require_scalar(u: &StateField) -> Result<()> {
    if u.n_components() != 1 {
        return Err(Error::config(format!(
            "matched Lax-Friedrichs steppers are Burgers-only, got {} components",
            u.n_components()
        )));
    }
    Ok(())
}

/// `(E v)_i = (v_{i+1} + v_{i−1}) / 2`, periodic.
fn average(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| 0.5 * (v[(i + 1) % n] + v[(i + n - 1) % n]))
        .collect()
}

/// `(D f(v))_i = (f_{i+1} − f_{i−1}) / (2Δx)` with the Burgers flux.
fn central_flux_difference(v: &[f64], dx: f64) -> Vec<f64> {
    let n = v.len();
    let f = |x: f64| 0.5 * x * x;
    (0..n)
        .map(|i| (f(v[(i + 1) % n]) - f(v[(i + n - 1) % n])) / (2.0 * dx))
        .collect()
}

/// Lax-Friedrichs / forward Euler for Burgers: `E u − Δt D f(u)`.
pub fn matched_lf_fine(u: &StateField, dt: f64, dx: f64) -> Result<StateField> {
    require_scalar(u)?;
    let v = u.values();
    let e = average(v);
    let df = central_flux_difference(v, dx);
    Ok(StateField::scalar(
        e.iter().zip(&df).map(|(a, b)| a - dt * b).collect(),
    ))
}

/// Coarse stepper emulating `m` applications of [`matched_lf_fine`].
///
/// Order 0: `E^m u − m Δt D f(u)`.
/// Order 1: `E^m u − Δt Σ_{j=1..m} E^{j−1} D f(E^{m−j} u)`.
pub fn matched_lf_coarse(
    u: &StateField,
    dt_fine: f64,
    dx: f64,
    m: usize,
    order: usize,
) -> Result<StateField> {
    require_scalar(u)?;
    if m == 0 {
        return Err(Error::config("matched stepper needs m >= 1"));
    }
    let mut powers = Vec::with_capacity(m + 1);
    powers.push(u.values().to_vec());
    for j in 0..m {
        powers.push(average(&powers[j]));
    }
    let acc = match order {
        0 => central_flux_difference(&powers[0], dx)
            .into_iter()
            .map(|x| m as f64 * x)
            .collect(),
        1 => {
            // Horner form: the term in E^{j-1} uses E^{m-j} u.
            let mut acc = central_flux_difference(&powers[0], dx);
            for p in &powers[1..m] {
                let df = central_flux_difference(p, dx);
                acc = average(&acc);
                for (a, d) in acc.iter_mut().zip(df) {
                    *a += d;
                }
            }
            acc
        }
        _ => return Err(Error::config(format!("matching order {order} is not 0 or 1"))),
    };
    Ok(StateField::scalar(
        powers[m].iter().zip(&acc).map(|(a, b)| a - dt_fine * b).collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepperKind {
    Fe,
    Ssprk2,
    Ssprk3,
    /// The built-in Burgers Lax-Friedrichs / forward Euler fine scheme.
    LfFine,
    MatchedLf0,
    MatchedLf1,
    /// The finest level's scheme with the coarse step.
    Rediscretize,
    /// The finest level's stepper applied `m^l` times; an exact coarse propagator.
    Composed,
}

impl StepperKind {
    /// Nominal temporal order.
    pub fn order(self) -> usize {
        match self {
            StepperKind::Fe | StepperKind::LfFine | StepperKind::MatchedLf0 | StepperKind::MatchedLf1 => 1,
            StepperKind::Ssprk2 => 2,
            StepperKind::Ssprk3 => 3,
            StepperKind::Rediscretize | StepperKind::Composed => 0,
        }
    }

    pub fn is_matched(self) -> bool {
        matches!(self, StepperKind::MatchedLf0 | StepperKind::MatchedLf1)
    }

    /// Kinds that only make sense relative to the finest level.
    pub fn is_derived(self) -> bool {
        matches!(self, StepperKind::Rediscretize | StepperKind::Composed)
    }

    pub fn from_order(d: usize) -> Result<Self> {
        match d {
            1 => Ok(StepperKind::Fe),
            2 => Ok(StepperKind::Ssprk2),
            3 => Ok(StepperKind::Ssprk3),
            _ => Err(Error::config(format!("no SSP stepper of order {d}"))),
        }
    }
}

impl FromStr for StepperKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "fe" => StepperKind::Fe,
            "ssprk2" => StepperKind::Ssprk2,
            "ssprk3" => StepperKind::Ssprk3,
            "lf-fine" => StepperKind::LfFine,
            "matched-lf0" => StepperKind::MatchedLf0,
            "matched-lf1" => StepperKind::MatchedLf1,
            "rediscretize" => StepperKind::Rediscretize,
            "composed" => StepperKind::Composed,
            other => return Err(format!("unknown stepper `{other}`")),
        })
    }
}

impl fmt::Display for StepperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepperKind::Fe => "fe",
            StepperKind::Ssprk2 => "ssprk2",
            StepperKind::Ssprk3 => "ssprk3",
            StepperKind::LfFine => "lf-fine",
            StepperKind::MatchedLf0 => "matched-lf0",
            StepperKind::MatchedLf1 => "matched-lf1",
            StepperKind::Rediscretize => "rediscretize",
            StepperKind::Composed => "composed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepperSpec {
    pub kind: StepperKind,
    /// Number of fine steps one application emulates (matched kinds only).
    pub m_effective: usize,
}

impl StepperSpec {
    pub fn new(kind: StepperKind) -> Self {
        Self { kind, m_effective: 1 }
    }

    pub fn matched(kind: StepperKind, m_effective: usize) -> Self {
        Self { kind, m_effective }
    }

    pub fn order(&self) -> usize {
        self.kind.order()
    }
}

#[derive(Clone)]
enum Kernel {
    Fe(Arc<SemiDiscreteOperator>),
    Ssprk2(Arc<SemiDiscreteOperator>),
    Ssprk3(Arc<SemiDiscreteOperator>),
    Matched { dx: f64, order: Option<usize>, m: usize },
    Composed { inner: Box<TimeStepper>, count: usize },
}

/// A concrete propagator: a stepper kind bound to an operator and step size.
#[derive(Clone)]
pub struct TimeStepper {
    spec: StepperSpec,
    kernel: Kernel,
    /// Step size handed to the kernel (the fine step for matched kinds).
    dt: f64,
}

impl fmt::Debug for TimeStepper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeStepper")
            .field("spec", &self.spec)
            .field("dt", &self.dt)
            .field("advance", &Propagator::dt(self))
            .finish()
    }
}

impl TimeStepper {
    pub fn spec(&self) -> &StepperSpec {
        &self.spec
    }
}

fn require_burgers(model: &ConservationModel, kind: StepperKind) -> Result<()> {
    if !matches!(model, ConservationModel::Burgers) {
        return Err(Error::config(format!(
            "stepper `{kind}` is only defined for Burgers, not {}",
            model.name()
        )));
    }
    Ok(())
}

/// Binds a concrete stepper kind to an operator. For matched kinds `dt` is the
/// fine step; one application advances `m_effective · dt`.
pub fn make_stepper(spec: StepperSpec, op: Arc<SemiDiscreteOperator>, dt: f64) -> Result<TimeStepper> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config(format!("time step must be positive, got {dt}")));
    }
    let kernel = match spec.kind {
        StepperKind::Fe => Kernel::Fe(op),
        StepperKind::Ssprk2 => Kernel::Ssprk2(op),
        StepperKind::Ssprk3 => Kernel::Ssprk3(op),
        StepperKind::LfFine => {
            require_burgers(op.model(), spec.kind)?;
            Kernel::Matched { dx: op.grid().dx(), order: None, m: 1 }
        }
        StepperKind::MatchedLf0 | StepperKind::MatchedLf1 => {
            require_burgers(op.model(), spec.kind)?;
            if spec.m_effective == 0 {
                return Err(Error::config("matched stepper needs m_effective >= 1"));
            }
            let order = if spec.kind == StepperKind::MatchedLf0 { 0 } else { 1 };
            Kernel::Matched { dx: op.grid().dx(), order: Some(order), m: spec.m_effective }
        }
        StepperKind::Rediscretize | StepperKind::Composed => {
            return Err(Error::config(format!(
                "stepper `{}` must be resolved against the finest level",
                spec.kind
            )))
        }
    };
    Ok(TimeStepper { spec, kernel, dt })
}

/// Builds the propagator of level `level` for coarsening factor `m`.
///
/// `fine` is the finest level's spec and `fine_op` its operator; `dt_fine` is
/// the finest step. Matched kinds emulate `m^level` fine steps.
pub fn make_level_stepper(
    spec: StepperSpec,
    op: Arc<SemiDiscreteOperator>,
    fine: StepperSpec,
    fine_op: Arc<SemiDiscreteOperator>,
    dt_fine: f64,
    level: usize,
    m: usize,
) -> Result<TimeStepper> {
    let factor = m
        .checked_pow(level as u32)
        .ok_or_else(|| Error::config("coarsening factor overflow"))?;
    if fine.kind.is_derived() {
        return Err(Error::config(format!("finest level cannot use `{}`", fine.kind)));
    }
    match spec.kind {
        StepperKind::Rediscretize => {
            make_stepper(StepperSpec { m_effective: 1, ..fine }, fine_op, dt_fine * factor as f64)
        }
        StepperKind::Composed => {
            let inner = make_stepper(fine, fine_op, dt_fine)?;
            Ok(TimeStepper {
                spec,
                dt: dt_fine,
                kernel: Kernel::Composed { inner: Box::new(inner), count: factor },
            })
        }
        StepperKind::MatchedLf0 | StepperKind::MatchedLf1 => {
            make_stepper(StepperSpec::matched(spec.kind, factor), op, dt_fine)
        }
        _ => make_stepper(StepperSpec::new(spec.kind), op, dt_fine * factor as f64),
    }
}

impl Propagator for TimeStepper {
    fn step(&self, u: &StateField) -> Result<StateField> {
        match &self.kernel {
            Kernel::Fe(op) => step_fe(op.as_ref(), u, self.dt),
            Kernel::Ssprk2(op) => step_ssprk2(op.as_ref(), u, self.dt),
            Kernel::Ssprk3(op) => step_ssprk3(op.as_ref(), u, self.dt),
            Kernel::Matched { dx, order: None, .. } => matched_lf_fine(u, self.dt, *dx),
            Kernel::Matched { dx, order: Some(o), m } => matched_lf_coarse(u, self.dt, *dx, *m, *o),
            Kernel::Composed { inner, count } => {
                let mut v = inner.step(u)?;
                for _ in 1..*count {
                    v = inner.step(&v)?;
                }
                Ok(v)
            }
        }
    }

    fn dt(&self) -> f64 {
        match &self.kernel {
            Kernel::Matched { m, .. } => self.dt * *m as f64,
            Kernel::Composed { count, .. } => self.dt * *count as f64,
            _ => self.dt,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{lf_flux, FluxConfig, FluxKind};
    use crate::grid::SpatialGrid;
    use crate::weno::WenoConfig;
    use std::f64::consts::PI;

    struct Linear(f64);

    impl RhsOperator for Linear {
        fn rhs(&self, u: &StateField) -> Result<StateField> {
            Ok(StateField::scalar(u.values().iter().map(|v| self.0 * v).collect()))
        }
    }

    fn burgers_op(n: usize, kind: FluxKind, k: usize) -> Arc<SemiDiscreteOperator> {
        let grid = SpatialGrid::new(1.0, n).unwrap();
        let weno = WenoConfig { k, ..WenoConfig::default() };
        Arc::new(SemiDiscreteOperator::new(ConservationModel::Burgers, grid, FluxConfig { kind, weno }).unwrap())
    }

    fn sine(n: usize, amp: f64, shift: f64) -> StateField {
        StateField::scalar(
            (0..n)
                .map(|i| shift + amp * (2.0 * PI * (i as f64 + 0.5) / n as f64).sin())
                .collect(),
        )
    }

    #[test]
    fn fe_with_decay_operator() {
        let u = StateField::scalar(vec![1.0]);
        let v = step_fe(&Linear(-1.0), &u, 0.1).unwrap();
        assert!((v.values()[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn amplification_factors() {
        let u = StateField::scalar(vec![1.0]);
        for lambda in [-1.0, -3.0, 0.5, 2.0] {
            for dt in [0.01, 0.1, 0.4] {
                let z: f64 = lambda * dt;
                let r2 = 1.0 + z + z * z / 2.0;
                let r3 = r2 + z * z * z / 6.0;
                let got2 = step_ssprk2(&Linear(lambda), &u, dt).unwrap().values()[0];
                let got3 = step_ssprk3(&Linear(lambda), &u, dt).unwrap().values()[0];
                assert!((got2 - r2).abs() <= 1e-14, "ssprk2 z={z}");
                assert!((got3 - r3).abs() <= 1e-14, "ssprk3 z={z}");
            }
        }
    }

    #[test]
    fn zero_operator_is_identity_for_every_stepper() {
        let op = burgers_op(16, FluxKind::Roe, 2);
        let u = StateField::scalar(vec![0.7; 16]);
        for kind in [StepperKind::Fe, StepperKind::Ssprk2, StepperKind::Ssprk3, StepperKind::LfFine] {
            let s = make_stepper(StepperSpec::new(kind), op.clone(), 0.01).unwrap();
            assert_eq!(s.step(&u).unwrap(), u, "{kind}");
        }
        for order in [0, 1] {
            assert_eq!(matched_lf_coarse(&u, 0.01, 1.0 / 16.0, 4, order).unwrap(), u);
        }
    }

    fn integrate(op: &SemiDiscreteOperator, kind: StepperKind, u0: &StateField, t: f64, n: usize) -> StateField {
        let dt = t / n as f64;
        let mut u = u0.clone();
        for _ in 0..n {
            u = match kind {
                StepperKind::Fe => step_fe(op, &u, dt),
                StepperKind::Ssprk2 => step_ssprk2(op, &u, dt),
                StepperKind::Ssprk3 => step_ssprk3(op, &u, dt),
                _ => unreachable!(),
            }
            .unwrap();
        }
        u
    }

    pub(crate) fn self_convergence_order(kind: StepperKind) -> f64 {
        let op = burgers_op(64, FluxKind::Roe, 2);
        let u0 = sine(64, 1.0, 0.0);
        let t = 0.1;
        let reference = integrate(&op, kind, &u0, t, 1280);
        let err = |n| integrate(&op, kind, &u0, t, n).dist_sq(&reference).sqrt();
        let (e1, e2) = (err(40), err(80));
        (e1 / e2).log2()
    }

    #[test]
    fn ssprk_self_convergence() {
        assert!(self_convergence_order(StepperKind::Ssprk2) >= 1.9);
        assert!(self_convergence_order(StepperKind::Ssprk3) >= 2.8);
    }

    #[test]
    fn matched_lf_fine_hand_example() {
        let u = StateField::scalar(vec![0.0, 1.0, 0.0, -1.0]);
        let v = matched_lf_fine(&u, 1.0, 1.0).unwrap();
        assert_eq!(v.values(), &[0.0, 0.0, 0.0, 0.0]);
        let c = StateField::scalar(vec![2.5; 5]);
        assert_eq!(matched_lf_fine(&c, 0.3, 0.2).unwrap(), c);
    }

    #[test]
    fn matched_lf_fine_is_lf_with_mesh_ratio_dissipation() {
        let n = 12;
        let (dx, dt) = (1.0 / n as f64, 0.02);
        let u = sine(n, 0.8, 0.1);
        let alpha = dx / dt;
        let model = ConservationModel::Burgers;
        let flux = |i: usize| lf_flux(&model, &[u.values()[i]], &[u.values()[(i + 1) % n]], alpha).unwrap()[0];
        let v = matched_lf_fine(&u, dt, dx).unwrap();
        for i in 0..n {
            let fe = u.values()[i] - dt / dx * (flux(i) - flux((i + n - 1) % n));
            assert!((v.values()[i] - fe).abs() < 1e-14);
        }
    }

    #[test]
    fn matched_order_one_with_m_two_matches_printed_form() {
        let n = 10;
        let (dx, dt) = (0.1, 0.01);
        let u = sine(n, 1.0, 0.3);
        let e = average(u.values());
        let ee = average(&e);
        let edf = average(&central_flux_difference(u.values(), dx));
        let dfe = central_flux_difference(&e, dx);
        let got = matched_lf_coarse(&u, dt, dx, 2, 1).unwrap();
        for i in 0..n {
            let want = ee[i] - dt * (edf[i] + dfe[i]);
            assert!((got.values()[i] - want).abs() < 1e-14);
        }
    }

    pub(crate) fn matching_slope(order: usize, m: usize) -> f64 {
        let n = 64;
        let dx = 1.0 / n as f64;
        let u = sine(n, 1.0, 0.0);
        let err = |dt: f64| {
            let mut fine = u.clone();
            for _ in 0..m {
                fine = matched_lf_fine(&fine, dt, dx).unwrap();
            }
            matched_lf_coarse(&u, dt, dx, m, order).unwrap().dist_sq(&fine).sqrt()
        };
        let (e1, e2) = (err(1e-4), err(5e-5));
        (e1 / e2).log2()
    }

    #[test]
    fn matched_coarse_steppers_approximate_composed_fine() {
        assert!(matching_slope(1, 2) >= 1.9);
        assert!(matching_slope(0, 2) >= 0.9);
        assert!(matching_slope(1, 4) >= 1.9);
    }

    #[test]
    fn matched_steppers_reject_systems() {
        let u = StateField::zeros(2, 4);
        assert!(matches!(matched_lf_fine(&u, 0.1, 0.1), Err(Error::Config(_))));
        let grid = SpatialGrid::new(1.0, 8).unwrap();
        let op = Arc::new(
            SemiDiscreteOperator::new(
                ConservationModel::shallow_water(),
                grid,
                FluxConfig { kind: FluxKind::Roe, weno: WenoConfig::default() },
            )
            .unwrap(),
        );
        let spec = StepperSpec::matched(StepperKind::MatchedLf1, 2);
        assert!(matches!(make_stepper(spec, op, 0.1), Err(Error::Config(_))));
    }

    #[test]
    fn level_steppers_scale_their_step() {
        let op = burgers_op(16, FluxKind::Roe, 2);
        let fine = StepperSpec::new(StepperKind::Ssprk3);
        let s = make_level_stepper(StepperSpec::new(StepperKind::Rediscretize), op.clone(), fine, op.clone(), 0.01, 2, 2).unwrap();
        assert!((s.dt() - 0.04).abs() < 1e-15);
        assert_eq!(s.spec().kind, StepperKind::Ssprk3);

        let lf = StepperSpec::new(StepperKind::LfFine);
        let s = make_level_stepper(StepperSpec::new(StepperKind::MatchedLf0), op.clone(), lf, op.clone(), 0.01, 2, 2).unwrap();
        assert!((s.dt() - 0.04).abs() < 1e-15);
        let s = make_stepper(StepperSpec::matched(StepperKind::MatchedLf0, 4), op.clone(), 0.01).unwrap();
        assert!((s.dt() - 0.04).abs() < 1e-15);

        let c = make_level_stepper(StepperSpec::new(StepperKind::Composed), op.clone(), fine, op.clone(), 0.01, 1, 4).unwrap();
        let u = sine(16, 0.5, 0.0);
        let mut want = u.clone();
        for _ in 0..4 {
            want = step_ssprk3(op.as_ref(), &want, 0.01).unwrap();
        }
        assert_eq!(c.step(&u).unwrap(), want);
        assert!(make_stepper(StepperSpec::new(StepperKind::Composed), op, 0.01).is_err());
    }

    #[test]
    fn steppers_conserve_mass() {
        let op = burgers_op(32, FluxKind::LaxFriedrichs, 1);
        let u = sine(32, 1.0, 0.2);
        let mass = u.component_sums()[0];
        let scale = u.values().iter().map(|v| v.abs()).sum::<f64>();
        for kind in [StepperKind::Fe, StepperKind::Ssprk2, StepperKind::Ssprk3, StepperKind::LfFine] {
            let v = make_stepper(StepperSpec::new(kind), op.clone(), 0.005).unwrap().step(&u).unwrap();
            assert!((v.component_sums()[0] - mass).abs() <= 1e-12 * scale, "{kind}");
        }
        for order in [0, 1] {
            let v = matched_lf_coarse(&u, 0.005, 1.0 / 32.0, 3, order).unwrap();
            assert!((v.component_sums()[0] - mass).abs() <= 1e-12 * scale);
        }
    }

    fn total_variation(u: &StateField) -> f64 {
        let v = u.values();
        let n = v.len();
        (0..n).map(|i| (v[(i + 1) % n] - v[i]).abs()).sum()
    }

    #[test]
    fn ssp_steppers_do_not_increase_variation() {
        let n = 40;
        let op = burgers_op(n, FluxKind::Roe, 0);
        let dx = 1.0 / n as f64;
        // monotone ramp on half the domain, periodic wrap gives one downward jump
        let u = StateField::scalar((0..n).map(|i| if i < n / 2 { i as f64 / n as f64 } else { 0.5 }).collect());
        let dt = 0.9 * dx / 0.5;
        for kind in [StepperKind::Fe, StepperKind::Ssprk2, StepperKind::Ssprk3] {
            let mut v = u.clone();
            for _ in 0..20 {
                let next = make_stepper(StepperSpec::new(kind), op.clone(), dt).unwrap().step(&v).unwrap();
                assert!(total_variation(&next) <= total_variation(&v) + 1e-10, "{kind}");
                v = next;
            }
        }
    }

    #[test]
    fn stepper_names_round_trip() {
        for kind in [
            StepperKind::Fe,
            StepperKind::Ssprk2,
            StepperKind::Ssprk3,
            StepperKind::LfFine,
            StepperKind::MatchedLf0,
            StepperKind::MatchedLf1,
            StepperKind::Rediscretize,
            StepperKind::Composed,
        ] {
            assert_eq!(kind.to_string().parse::<StepperKind>().unwrap(), kind);
        }
        assert!("rk4".parse::<StepperKind>().is_err());
    }
}
