//! Quick self-checks of the numerical building blocks, run by `mgrit verify`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_rational::Rational64;

use crate::error::Result;
use crate::flux::{FluxConfig, FluxKind, RhsOperator, SemiDiscreteOperator};
use crate::grid::{SpatialGrid, StateField, TemporalGrid};
use crate::mgrit::{mgrit_solve, CycleType, MgritConfig, Relaxation, RestrictionGuess};
use crate::models::ConservationModel;
use crate::serial::run_serial;
use crate::stepper::{
    make_level_stepper, make_stepper, matched_lf_coarse, matched_lf_fine, step_ssprk2, step_ssprk3, Propagator,
    StepperKind, StepperSpec,
};
use crate::weno::{build_tables, WenoConfig, MAX_DEGREE};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, result: Result<(bool, String)>) -> CheckOutcome {
    match result {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome { name, passed: false, detail: format!("error: {e}") },
    }
}

/// Deterministic pseudo-random numbers in `[0, 1)` for spot checks.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn weno_tables() -> Result<(bool, String)> {
    for k in 0..=MAX_DEGREE {
        let t = build_tables(k)?;
        let e = t.exact();
        let one = Rational64::from_integer(1);
        let rows_ok = e.c.iter().all(|row| row.iter().sum::<Rational64>() == one);
        let d_ok = e.d.iter().sum::<Rational64>() == one && e.d.iter().all(|d| *d > Rational64::from_integer(0));
        let b_ok = e.b.iter().all(|b| b.iter().all(|row| row.iter().sum::<Rational64>() == Rational64::from_integer(0)));
        if !(rows_ok && d_ok && b_ok) {
            return Ok((false, format!("k = {k}: inconsistent tables")));
        }
    }
    Ok((true, "rows of c and d sum to one, smoothness forms vanish on constants".into()))
}

struct Linear(f64);

impl RhsOperator for Linear {
    fn rhs(&self, u: &StateField) -> Result<StateField> {
        Ok(StateField::scalar(u.values().iter().map(|v| self.0 * v).collect()))
    }
}

fn amplification() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let u = StateField::scalar(vec![1.0]);
    for z in [-2.0, -0.5, 0.1, 0.7] {
        let r2 = 1.0 + z + z * z / 2.0;
        let r3 = r2 + z * z * z / 6.0;
        worst = worst.max((step_ssprk2(&Linear(z), &u, 1.0)?.values()[0] - r2).abs());
        worst = worst.max((step_ssprk3(&Linear(z), &u, 1.0)?.values()[0] - r3).abs());
    }
    Ok((worst <= 1e-14, format!("largest deviation {worst:e}")))
}

fn random_state(model: &ConservationModel, rng: &mut Lcg) -> Vec<f64> {
    match model {
        ConservationModel::Burgers => vec![2.0 * rng.next() - 1.0],
        ConservationModel::ShallowWater { .. } => vec![0.5 + rng.next(), rng.next() - 0.5],
        ConservationModel::Euler { gamma } => {
            let rho = 0.5 + rng.next();
            let u = rng.next() - 0.5;
            let p = 0.5 + rng.next();
            vec![rho, rho * u, p / (gamma - 1.0) + 0.5 * rho * u * u]
        }
    }
}

fn conservation() -> Result<(bool, String)> {
    let mut rng = Lcg(7);
    let models = [ConservationModel::Burgers, ConservationModel::shallow_water(), ConservationModel::euler()];
    let mut worst: f64 = 0.0;
    for model in models {
        for kind in [FluxKind::LaxFriedrichs, FluxKind::Roe] {
            for k in 0..=MAX_DEGREE {
                let grid = SpatialGrid::new(1.0, 16)?;
                let flux = FluxConfig { kind, weno: WenoConfig { k, ..WenoConfig::default() } };
                let op = SemiDiscreteOperator::new(model, grid, flux)?;
                let values = (0..16).flat_map(|_| random_state(&model, &mut rng)).collect();
                let u = StateField::from_values(model.n_components(), values)?;
                let rhs = op.rhs(&u)?;
                let scale: f64 = rhs.values().iter().map(|v| v.abs()).sum::<f64>() + f64::MIN_POSITIVE;
                for s in rhs.component_sums() {
                    worst = worst.max(s.abs() / scale);
                }
            }
        }
    }
    Ok((worst <= 1e-12, format!("largest relative cell-sum {worst:e}")))
}

fn roe_property() -> Result<(bool, String)> {
    let mut rng = Lcg(11);
    let mut worst: f64 = 0.0;
    for model in [ConservationModel::shallow_water(), ConservationModel::euler()] {
        for _ in 0..200 {
            let (ul, ur) = (random_state(&model, &mut rng), random_state(&model, &mut rng));
            let dec = model.roe_eigen(&model.roe_average(&ul, &ur)?)?;
            let jump: Vec<f64> = ul.iter().zip(&ur).map(|(l, r)| r - l).collect();
            let lin = dec.apply_jacobian(&jump);
            let (fl, fr) = (model.flux(&ul)?, model.flux(&ur)?);
            for c in 0..model.n_components() {
                worst = worst.max((fr[c] - fl[c] - lin[c]).abs());
            }
        }
    }
    Ok((worst <= 1e-8, format!("largest flux-jump mismatch {worst:e}")))
}

fn burgers_setup(n_x: usize, n_t: usize, horizon: f64) -> Result<(Arc<SemiDiscreteOperator>, StateField, TemporalGrid)> {
    let grid = SpatialGrid::new(1.0, n_x)?;
    let flux = FluxConfig { kind: FluxKind::Roe, weno: WenoConfig { k: 1, ..WenoConfig::default() } };
    let op = Arc::new(SemiDiscreteOperator::new(ConservationModel::Burgers, grid, flux)?);
    let u0 = StateField::scalar((0..n_x).map(|i| (2.0 * PI * grid.centre(i)).sin()).collect());
    Ok((op, u0, TemporalGrid::new(horizon, n_t)?))
}

fn two_level_exactness() -> Result<(bool, String)> {
    let (op, u0, temporal) = burgers_setup(32, 32, 0.2)?;
    let fine = StepperSpec::new(StepperKind::Ssprk3);
    let s0 = make_stepper(fine, op.clone(), temporal.dt())?;
    let reference = run_serial(&s0, &ConservationModel::Burgers, op.grid().dx(), temporal, u0.clone())?;
    let mut worst: f64 = 0.0;
    for m in [2, 4] {
        let s1 = make_level_stepper(StepperSpec::new(StepperKind::Composed), op.clone(), fine, op.clone(), temporal.dt(), 1, m)?;
        let props: Vec<Arc<dyn Propagator>> = vec![Arc::new(s0.clone()), Arc::new(s1)];
        let cfg = MgritConfig { n_levels: 2, m, max_iters: 1, ..MgritConfig::default() };
        let (_, rec) = mgrit_solve(cfg, props, &u0, temporal, Some(reference.trajectory.states()))?;
        worst = worst.max(rec.errors.first().copied().flatten().unwrap_or(f64::INFINITY));
    }
    Ok((worst < 1e-10, format!("error after one cycle {worst:e}")))
}

fn fixed_point() -> Result<(bool, String)> {
    let (op, u0, temporal) = burgers_setup(32, 32, 0.2)?;
    let fine = StepperSpec::new(StepperKind::Ssprk2);
    let s0 = make_stepper(fine, op.clone(), temporal.dt())?;
    let reference = run_serial(&s0, &ConservationModel::Burgers, op.grid().dx(), temporal, u0.clone())?;
    let mut worst: f64 = 0.0;
    for cycle in [CycleType::V, CycleType::F] {
        for relaxation in [Relaxation::F, Relaxation::Fcf] {
            for guess in [RestrictionGuess::Injection, RestrictionGuess::LastStep] {
                let cfg = MgritConfig { n_levels: 3, m: 2, cycle, relaxation, restriction_guess: guess, ..MgritConfig::default() };
                let mut props: Vec<Arc<dyn Propagator>> = vec![Arc::new(s0.clone())];
                for l in 1..3 {
                    let s = make_level_stepper(StepperSpec::new(StepperKind::Rediscretize), op.clone(), fine, op.clone(), temporal.dt(), l, 2)?;
                    props.push(Arc::new(s));
                }
                let mut h = crate::mgrit::Hierarchy::new(cfg, props, &u0, temporal.n_steps())?;
                h.set_iterate(reference.trajectory.states().to_vec())?;
                h.cycle()?;
                for (a, b) in h.iterate(0).iter().zip(reference.trajectory.states()) {
                    worst = worst.max(a.dist_sq(b).sqrt());
                }
            }
        }
    }
    Ok((worst <= 1e-12, format!("largest drift {worst:e}")))
}

fn matching() -> Result<(bool, String)> {
    let n = 64;
    let dx = 1.0 / n as f64;
    let u = StateField::scalar((0..n).map(|i| (2.0 * PI * (i as f64 + 0.5) * dx).sin()).collect());
    let slope = |order: usize| -> Result<f64> {
        let err = |dt: f64| -> Result<f64> {
            let fine = matched_lf_fine(&matched_lf_fine(&u, dt, dx)?, dt, dx)?;
            Ok(matched_lf_coarse(&u, dt, dx, 2, order)?.dist_sq(&fine).sqrt())
        };
        Ok((err(1e-4)? / err(5e-5)?).log2())
    };
    let (s0, s1) = (slope(0)?, slope(1)?);
    Ok((s0 >= 0.9 && s1 >= 1.9, format!("slopes {s0:.3} (order 0), {s1:.3} (order 1)")))
}

/// Runs every self-check.
pub fn run_self_checks() -> Vec<CheckOutcome> {
    vec![
        outcome("weno tables", weno_tables()),
        outcome("ssp amplification", amplification()),
        outcome("conservation", conservation()),
        outcome("roe linearisation", roe_property()),
        outcome("fixed point", fixed_point()),
        outcome("two-level exactness", two_level_exactness()),
        outcome("matching slopes", matching()),
    ]
}
