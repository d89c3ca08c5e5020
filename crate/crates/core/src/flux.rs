//! Numerical fluxes and the semi-discrete operator `A(u)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, StateField};
use crate::models::{ConservationModel, Vector, MAX_COMPONENTS};
use crate::weno::{all_interface_states, build_tables, WenoConfig, WenoTables};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluxKind {
    LaxFriedrichs,
    Roe,
}

impl FromStr for FluxKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lf" | "lax-friedrichs" | "laxfriedrichs" => Ok(FluxKind::LaxFriedrichs),
            "roe" => Ok(FluxKind::Roe),
            other => Err(format!("unknown flux `{other}` (expected lf or roe)")),
        }
    }
}

impl fmt::Display for FluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FluxKind::LaxFriedrichs => "lf",
            FluxKind::Roe => "roe",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxConfig {
    pub kind: FluxKind,
    pub weno: WenoConfig,
}

/// Global Lax-Friedrichs coefficient: the largest `|λ_k|` over all
/// reconstructed interface states.
pub fn lf_alpha(model: &ConservationModel, interface_states: &[(Vector, Vector)]) -> Result<f64> {
    let d = model.n_components();
    let mut alpha: f64 = 0.0;
    for (j, (ul, ur)) in interface_states.iter().enumerate() {
        for u in [ul, ur] {
            let rho = model.spectral_radius(&u[..d]).map_err(|e| e.at_cell(j))?;
            if !rho.is_finite() {
                return Err(Error::Divergence {
                    context: Some(format!("wave speed at interface {j}")),
                });
            }
            alpha = alpha.max(rho);
        }
    }
    Ok(alpha)
}

/// `½(f(uL) + f(uR)) − ½ α (uR − uL)`
pub fn lf_flux(model: &ConservationModel, ul: &[f64], ur: &[f64], alpha: f64) -> Result<Vector> {
    let d = model.n_components();
    let (fl, fr) = (model.flux(ul)?, model.flux(ur)?);
    let mut out = [0.0; MAX_COMPONENTS];
    for c in 0..d {
        out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * alpha * (ur[c] - ul[c]);
    }
    Ok(out)
}

/// Harten-Hyman entropy fix for the Roe wave speed `λ̂`.
pub fn entropy_fix(lambda_hat: f64, lambda_minus: f64, lambda_plus: f64) -> f64 {
    let delta = 0.0f64
        .max(lambda_hat - lambda_minus)
        .max(lambda_plus - lambda_hat);
    if lambda_hat.abs() < delta {
        0.5 * (lambda_hat * lambda_hat / delta + delta)
    } else {
        lambda_hat.abs()
    }
}

/// Roe flux `½(f(uL) + f(uR)) − ½ Σ_k q_H(λ̂_k) α_k r̂_k` with wave strengths
/// `α = L̂ (uR − uL)`.
pub fn roe_flux(model: &ConservationModel, ul: &[f64], ur: &[f64]) -> Result<Vector> {
    let d = model.n_components();
    let (fl, fr) = (model.flux(ul)?, model.flux(ur)?);
    let dec = model.roe_eigen(&model.roe_average(ul, ur)?)?;
    let (lam_l, lam_r) = (model.eigenvalues(ul)?, model.eigenvalues(ur)?);

    let mut jump = [0.0; MAX_COMPONENTS];
    for c in 0..d {
        jump[c] = ur[c] - ul[c];
    }
    let strength = dec.to_characteristic(&jump[..d]);

    let mut out = [0.0; MAX_COMPONENTS];
    for c in 0..d {
        out[c] = 0.5 * (fl[c] + fr[c]);
    }
    for k in 0..d {
        let speed = entropy_fix(dec.eigenvalues[k], lam_l[k], lam_r[k]);
        let coeff = 0.5 * speed * strength[k];
        for c in 0..d {
            out[c] -= coeff * dec.right[c][k];
        }
    }
    Ok(out)
}

/// Something that evaluates `du/dt = A(u)` for a method-of-lines stepper.
pub trait RhsOperator: Send + Sync {
    fn rhs(&self, u: &StateField) -> Result<StateField>;
}

/// Finite-volume semi-discretisation `[A(u)]_i = −(f_{i+1/2} − f_{i−1/2}) / Δx`.
#[derive(Debug, Clone)]
pub struct SemiDiscreteOperator {
    model: ConservationModel,
    grid: SpatialGrid,
    config: FluxConfig,
    tables: Arc<WenoTables>,
}

impl SemiDiscreteOperator {
    pub fn new(model: ConservationModel, grid: SpatialGrid, config: FluxConfig) -> Result<Self> {
        model.validate()?;
        config.weno.validate()?;
        let tables = Arc::new(build_tables(config.weno.k)?);
        Ok(Self {
            model,
            grid,
            config,
            tables,
        })
    }

    pub fn model(&self) -> &ConservationModel {
        &self.model
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn config(&self) -> &FluxConfig {
        &self.config
    }

    /// Numerical fluxes at every interface `j + 1/2`.
    pub fn interface_fluxes(&self, u: &StateField) -> Result<Vec<Vector>> {
        let states = all_interface_states(&self.model, &self.tables, &self.config.weno, u)?;
        let d = self.model.n_components();
        match self.config.kind {
            FluxKind::LaxFriedrichs => {
                let alpha = lf_alpha(&self.model, &states)?;
                states
                    .iter()
                    .enumerate()
                    .map(|(j, (ul, ur))| {
                        lf_flux(&self.model, &ul[..d], &ur[..d], alpha).map_err(|e| e.at_cell(j))
                    })
                    .collect()
            }
            FluxKind::Roe => states
                .iter()
                .enumerate()
                .map(|(j, (ul, ur))| roe_flux(&self.model, &ul[..d], &ur[..d]).map_err(|e| e.at_cell(j)))
                .collect(),
        }
    }
}

impl RhsOperator for SemiDiscreteOperator {
    fn rhs(&self, u: &StateField) -> Result<StateField> {
        let d = self.model.n_components();
        if u.n_components() != d || u.n_cells() != self.grid.n_cells() {
            return Err(Error::Dimension(format!(
                "field of {} cells x {} components on a {}-cell grid for a {}-component model",
                u.n_cells(),
                u.n_components(),
                self.grid.n_cells(),
                d
            )));
        }
        let fluxes = self.interface_fluxes(u)?;
        let n = self.grid.n_cells();
        let inv_dx = 1.0 / self.grid.dx();
        let mut out = StateField::zeros(d, n);
        for i in 0..n {
            let left = &fluxes[if i == 0 { n - 1 } else { i - 1 }];
            let right = &fluxes[i];
            let cell = out.cell_mut(i);
            for c in 0..d {
                cell[c] = -(right[c] - left[c]) * inv_dx;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::DEFAULT_GAMMA;
    use proptest::prelude::*;

    fn op(model: ConservationModel, n: usize, kind: FluxKind, k: usize) -> SemiDiscreteOperator {
        let grid = SpatialGrid::new(1.0, n).unwrap();
        let weno = WenoConfig { k, ..WenoConfig::default() };
        SemiDiscreteOperator::new(model, grid, FluxConfig { kind, weno }).unwrap()
    }

    #[test]
    fn lf_alpha_examples() {
        let pad = |v: f64| [v, 0.0, 0.0];
        let zero = vec![(pad(0.0), pad(0.0)); 3];
        assert_eq!(lf_alpha(&ConservationModel::Burgers, &zero).unwrap(), 0.0);
        let states = vec![(pad(-1.0), pad(2.0)), (pad(0.5), pad(-1.0))];
        assert_eq!(lf_alpha(&ConservationModel::Burgers, &states).unwrap(), 2.0);
        let e = [1.0, 0.0, 1.0];
        let a = lf_alpha(&ConservationModel::euler(), &[(e, e)]).unwrap();
        assert!((a - 10f64.sqrt() / 3.0).abs() < 1e-14);
    }

    #[test]
    fn lf_flux_examples() {
        let b = ConservationModel::Burgers;
        assert_eq!(lf_flux(&b, &[1.0], &[-1.0], 1.0).unwrap()[0], 1.5);
        assert_eq!(lf_flux(&b, &[0.3], &[0.3], 4.0).unwrap()[0], 0.045);
        assert_eq!(lf_flux(&b, &[1.0], &[3.0], 0.0).unwrap()[0], 0.5 * (0.5 + 4.5));
    }

    #[test]
    fn entropy_fix_examples() {
        assert_eq!(entropy_fix(3.0, 2.5, 3.5), 3.0);
        assert_eq!(entropy_fix(0.0, -1.0, 1.0), 0.5);
        assert_eq!(entropy_fix(-0.7, -0.7, -0.7), 0.7);
    }

    /// Godunov flux for Burgers from the exact Riemann solution at x/t = 0.
    fn burgers_godunov(ul: f64, ur: f64) -> f64 {
        let f = |u: f64| 0.5 * u * u;
        if ul > ur {
            // shock with speed (ul + ur)/2
            if ul + ur > 0.0 { f(ul) } else { f(ur) }
        } else if ul > 0.0 {
            f(ul)
        } else if ur < 0.0 {
            f(ur)
        } else {
            0.0
        }
    }

    #[test]
    fn roe_flux_burgers_against_riemann_solution() {
        let b = ConservationModel::Burgers;
        assert_eq!(roe_flux(&b, &[2.0], &[0.0]).unwrap()[0], 2.0);
        assert_eq!(burgers_godunov(2.0, 0.0), 2.0);
        // transonic rarefaction: the fixed Roe flux recovers f(0) = 0
        assert_eq!(roe_flux(&b, &[-1.0], &[1.0]).unwrap()[0], 0.0);
        for (l, r) in [(1.0, 0.5), (-0.5, -2.0), (0.5, 1.0), (-2.0, -1.0), (3.0, -1.0)] {
            let roe = roe_flux(&b, &[l], &[r]).unwrap()[0];
            assert!((roe - burgers_godunov(l, r)).abs() < 1e-14, "({l}, {r})");
        }
    }

    #[test]
    fn fluxes_are_consistent() {
        for (model, u) in [
            (ConservationModel::Burgers, vec![0.8]),
            (ConservationModel::shallow_water(), vec![1.2, 0.4]),
            (ConservationModel::euler(), vec![1.1, -0.3, 2.4]),
        ] {
            let f = model.flux(&u).unwrap();
            let lf = lf_flux(&model, &u, &u, 3.0).unwrap();
            let roe = roe_flux(&model, &u, &u).unwrap();
            for c in 0..model.n_components() {
                assert!((lf[c] - f[c]).abs() < 1e-14);
                assert!((roe[c] - f[c]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_field_has_zero_rhs() {
        let o = op(ConservationModel::euler(), 12, FluxKind::Roe, 2);
        let u = StateField::from_values(3, [1.0, 0.2, 2.0].repeat(12)).unwrap();
        assert!(o.rhs(&u).unwrap().values().iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn first_order_lf_matches_direct_rusanov() {
        let u = [0.3f64, -1.1, 0.8, 0.25];
        let dx = 0.25;
        let alpha = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let f = |v: f64| 0.5 * v * v;
        let flux = |a: f64, b: f64| 0.5 * (f(a) + f(b)) - 0.5 * alpha * (b - a);
        let expected: Vec<f64> = (0..4)
            .map(|i| {
                let (l, c, r) = (u[(i + 3) % 4], u[i], u[(i + 1) % 4]);
                -(flux(c, r) - flux(l, c)) / dx
            })
            .collect();
        let o = op(ConservationModel::Burgers, 4, FluxKind::LaxFriedrichs, 0);
        let got = o.rhs(&StateField::scalar(u.to_vec())).unwrap();
        for i in 0..4 {
            assert!((got.values()[i] - expected[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn rhs_rejects_mismatched_field() {
        let o = op(ConservationModel::Burgers, 8, FluxKind::Roe, 1);
        assert!(matches!(o.rhs(&StateField::scalar(vec![0.0; 4])), Err(Error::Dimension(_))));
    }

    #[test]
    fn physical_errors_carry_cell_index() {
        let o = op(ConservationModel::shallow_water(), 4, FluxKind::Roe, 0);
        let u = StateField::from_values(2, vec![1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0]).unwrap();
        match o.rhs(&u) {
            Err(Error::PhysicalState { cell: Some(_), .. }) => {}
            other => panic!("expected a located physical-state error, got {other:?}"),
        }
    }

    fn burgers_truncation_error(k: usize, n: usize) -> f64 {
        use std::f64::consts::PI;
        let h = 1.0 / n as f64;
        // exact cell averages of u = 0.5 + 0.25 sin(2πx); exact -∂f/∂x averaged = -(f(x_{i+1/2}) - f(x_{i-1/2}))/h
        let u = |x: f64| 0.5 + 0.25 * (2.0 * PI * x).sin();
        let avg: Vec<f64> = (0..n)
            .map(|i| {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                0.5 + 0.25 * ((2.0 * PI * a).cos() - (2.0 * PI * b).cos()) / (2.0 * PI * h)
            })
            .collect();
        let o = op(ConservationModel::Burgers, n, FluxKind::Roe, k);
        let got = o.rhs(&StateField::scalar(avg)).unwrap();
        (0..n)
            .map(|i| {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                let exact = -(0.5 * u(b).powi(2) - 0.5 * u(a).powi(2)) / h;
                (got.values()[i] - exact).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn rhs_order_of_accuracy_on_smooth_burgers() {
        for k in 0..=2 {
            let e1 = burgers_truncation_error(k, 64);
            let e2 = burgers_truncation_error(k, 128);
            let rate = (e1 / e2).log2();
            assert!(rate >= (2 * k + 1) as f64 - 0.3, "k={k}: rate {rate}");
        }
    }

    fn random_field(model: ConservationModel, n: usize, seed: &[f64]) -> StateField {
        let values = (0..n)
            .flat_map(|i| {
                let s = seed[i % seed.len()];
                match model {
                    ConservationModel::Burgers => vec![s],
                    ConservationModel::ShallowWater { .. } => vec![1.0 + 0.5 * s.abs(), 0.3 * s],
                    ConservationModel::Euler { .. } => {
                        let rho = 1.0 + 0.5 * s.abs();
                        let v = 0.2 * s;
                        vec![rho, rho * v, 1.0 / (DEFAULT_GAMMA - 1.0) + 0.5 * rho * v * v + 0.3 * s.abs()]
                    }
                }
            })
            .collect();
        StateField::from_values(model.n_components(), values).unwrap()
    }

    proptest! {
        #[test]
        fn rhs_conserves_every_component(
            model_idx in 0usize..3,
            roe in proptest::bool::ANY,
            k in 0usize..=3,
            characteristic in proptest::bool::ANY,
            seed in proptest::collection::vec(-1.0f64..1.0, 5..40),
        ) {
            let model = [ConservationModel::Burgers, ConservationModel::shallow_water(), ConservationModel::euler()][model_idx];
            let kind = if roe { FluxKind::Roe } else { FluxKind::LaxFriedrichs };
            let grid = SpatialGrid::new(1.0, 24).unwrap();
            let weno = WenoConfig { k, characteristic, ..WenoConfig::default() };
            let o = SemiDiscreteOperator::new(model, grid, FluxConfig { kind, weno }).unwrap();
            let u = random_field(model, 24, &seed);
            let rhs = o.rhs(&u).unwrap();
            let fluxes = o.interface_fluxes(&u).unwrap();
            for c in 0..model.n_components() {
                let scale: f64 = fluxes.iter().map(|f| f[c].abs()).sum::<f64>() / grid.dx() + 1e-300;
                let total: f64 = rhs.component(c).sum();
                prop_assert!(total.abs() <= 1e-12 * scale, "component {} sums to {}", c, total);
            }
        }
    }
}
