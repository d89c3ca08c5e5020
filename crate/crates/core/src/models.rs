//! The three conservation laws: Burgers, shallow water and Euler (ideal gas).
//!
//! Point-wise quantities use a padded `[f64; 3]`; only the first
//! [`ConservationModel::n_components`] entries are meaningful.

use crate::error::{Error, Result};

pub const MAX_COMPONENTS: usize = 3;

/// A point state (or any vector of length `D`), zero-padded to three entries.
pub type Vector = [f64; MAX_COMPONENTS];
pub type Matrix = [[f64; MAX_COMPONENTS]; MAX_COMPONENTS];

pub const DEFAULT_GRAVITY: f64 = 9.81;
pub const DEFAULT_GAMMA: f64 = 5.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConservationModel {
    /// `f(u) = u²/2`
    Burgers,
    /// State `(h, hu)`.
    ShallowWater { g: f64 },
    /// State `(ρ, ρu, E)` with `p = (γ − 1)(E − ρu²/2)`.
    Euler { gamma: f64 },
}

/// Right eigenvectors as columns of `right`, left eigenvectors as rows of `left`,
/// normalised so that `left · right = I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenDecomposition {
    pub dim: usize,
    pub eigenvalues: Vector,
    pub right: Matrix,
    pub left: Matrix,
}

/// Averaged quantities defining the Roe linearisation at an interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RoeAverage {
    Burgers { u: f64 },
    ShallowWater { h: f64, u: f64 },
    Euler { u: f64, enthalpy: f64 },
}

impl ConservationModel {
    pub fn shallow_water() -> Self {
        ConservationModel::ShallowWater { g: DEFAULT_GRAVITY }
    }

    pub fn euler() -> Self {
        ConservationModel::Euler {
            gamma: DEFAULT_GAMMA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ConservationModel::ShallowWater { g } if !(g > 0.0 && g.is_finite()) => {
                Err(Error::config(format!("gravity must be positive, got {g}")))
            }
            ConservationModel::Euler { gamma } if !(gamma > 1.0 && gamma.is_finite()) => {
                Err(Error::config(format!("gamma must exceed 1, got {gamma}")))
            }
            _ => Ok(()),
        }
    }

    pub fn n_components(&self) -> usize {
        match self {
            ConservationModel::Burgers => 1,
            ConservationModel::ShallowWater { .. } => 2,
            ConservationModel::Euler { .. } => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConservationModel::Burgers => "burgers",
            ConservationModel::ShallowWater { .. } => "shallow-water",
            ConservationModel::Euler { .. } => "euler",
        }
    }

    fn check_len(&self, u: &[f64]) {
        debug_assert_eq!(u.len(), self.n_components(), "state length does not match model");
    }

    /// Velocity and pressure for Euler; errors when `ρ ≤ 0` or `p ≤ 0`.
    fn euler_primitive(gamma: f64, u: &[f64]) -> Result<(f64, f64)> {
        let (rho, mom, energy) = (u[0], u[1], u[2]);
        if !(rho > 0.0) {
            return Err(Error::physical(format!("non-positive density {rho}")));
        }
        let vel = mom / rho;
        let p = (gamma - 1.0) * (energy - 0.5 * rho * vel * vel);
        if !(p > 0.0) {
            return Err(Error::physical(format!("non-positive pressure {p}")));
        }
        Ok((vel, p))
    }

    fn sw_velocity(u: &[f64]) -> Result<f64> {
        let h = u[0];
        if !(h > 0.0) {
            return Err(Error::physical(format!("non-positive height {h}")));
        }
        Ok(u[1] / h)
    }

    pub fn flux(&self, u: &[f64]) -> Result<Vector> {
        self.check_len(u);
        match *self {
            ConservationModel::Burgers => Ok([0.5 * u[0] * u[0], 0.0, 0.0]),
            ConservationModel::ShallowWater { g } => {
                let vel = Self::sw_velocity(u)?;
                let (h, hu) = (u[0], u[1]);
                Ok([hu, hu * vel + 0.5 * g * h * h, 0.0])
            }
            ConservationModel::Euler { gamma } => {
                let (vel, p) = Self::euler_primitive(gamma, u)?;
                Ok([u[1], u[1] * vel + p, (u[2] + p) * vel])
            }
        }
    }

    /// Jacobian eigenvalues in the order `u − c, (u), u + c`.
    pub fn eigenvalues(&self, u: &[f64]) -> Result<Vector> {
        self.check_len(u);
        match *self {
            ConservationModel::Burgers => Ok([u[0], 0.0, 0.0]),
            ConservationModel::ShallowWater { g } => {
                let vel = Self::sw_velocity(u)?;
                let c = (g * u[0]).sqrt();
                Ok([vel - c, vel + c, 0.0])
            }
            ConservationModel::Euler { gamma } => {
                let (vel, p) = Self::euler_primitive(gamma, u)?;
                let c = (gamma * p / u[0]).sqrt();
                Ok([vel - c, vel, vel + c])
            }
        }
    }

    /// `max_k |λ_k(u)|`.
    pub fn spectral_radius(&self, u: &[f64]) -> Result<f64> {
        let lambda = self.eigenvalues(u)?;
        Ok(lambda[..self.n_components()]
            .iter()
            .fold(0.0, |acc: f64, l| acc.max(l.abs())))
    }

    pub fn eigen(&self, u: &[f64]) -> Result<EigenDecomposition> {
        self.check_len(u);
        match *self {
            ConservationModel::Burgers => Ok(scalar_decomposition(u[0])),
            ConservationModel::ShallowWater { g } => {
                let vel = Self::sw_velocity(u)?;
                sw_decomposition(g, u[0], vel)
            }
            ConservationModel::Euler { gamma } => {
                let (vel, p) = Self::euler_primitive(gamma, u)?;
                let enthalpy = (u[2] + p) / u[0];
                euler_decomposition(gamma, vel, enthalpy)
            }
        }
    }

    /// Roe-averaged quantities between the left state `ul` and right state `ur`.
    pub fn roe_average(&self, ul: &[f64], ur: &[f64]) -> Result<RoeAverage> {
        self.check_len(ul);
        self.check_len(ur);
        match *self {
            ConservationModel::Burgers => Ok(RoeAverage::Burgers {
                u: 0.5 * (ul[0] + ur[0]),
            }),
            ConservationModel::ShallowWater { .. } => {
                let (vl, vr) = (Self::sw_velocity(ul)?, Self::sw_velocity(ur)?);
                let (sl, sr) = (ul[0].sqrt(), ur[0].sqrt());
                Ok(RoeAverage::ShallowWater {
                    h: 0.5 * (ul[0] + ur[0]),
                    u: (vl * sl + vr * sr) / (sl + sr),
                })
            }
            ConservationModel::Euler { gamma } => {
                let (vl, pl) = Self::euler_primitive(gamma, ul)?;
                let (vr, pr) = Self::euler_primitive(gamma, ur)?;
                let (sl, sr) = (ul[0].sqrt(), ur[0].sqrt());
                let (hl, hr) = ((ul[2] + pl) / ul[0], (ur[2] + pr) / ur[0]);
                Ok(RoeAverage::Euler {
                    u: (vl * sl + vr * sr) / (sl + sr),
                    enthalpy: (hl * sl + hr * sr) / (sl + sr),
                })
            }
        }
    }

    /// Eigenstructure of the Jacobian linearised at a Roe average.
    pub fn roe_eigen(&self, avg: &RoeAverage) -> Result<EigenDecomposition> {
        match (*self, *avg) {
            (ConservationModel::Burgers, RoeAverage::Burgers { u }) => Ok(scalar_decomposition(u)),
            (ConservationModel::ShallowWater { g }, RoeAverage::ShallowWater { h, u }) => {
                sw_decomposition(g, h, u)
            }
            (ConservationModel::Euler { gamma }, RoeAverage::Euler { u, enthalpy }) => {
                euler_decomposition(gamma, u, enthalpy)
            }
            _ => Err(Error::config("Roe average does not belong to this model")),
        }
    }

    /// Finite-difference Jacobian of the flux; used for self-checks.
    pub fn jacobian_fd(&self, u: &[f64], step: f64) -> Result<Matrix> {
        let d = self.n_components();
        let mut jac = [[0.0; MAX_COMPONENTS]; MAX_COMPONENTS];
        for col in 0..d {
            let h = step * u[col].abs().max(1.0);
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[col] += h;
            dn[col] -= h;
            let (fp, fm) = (self.flux(&up)?, self.flux(&dn)?);
            for row in 0..d {
                jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        Ok(jac)
    }
}

fn scalar_decomposition(u: f64) -> EigenDecomposition {
    let mut right = [[0.0; 3]; 3];
    let mut left = [[0.0; 3]; 3];
    right[0][0] = 1.0;
    left[0][0] = 1.0;
    EigenDecomposition {
        dim: 1,
        eigenvalues: [u, 0.0, 0.0],
        right,
        left,
    }
}

fn sw_decomposition(g: f64, h: f64, u: f64) -> Result<EigenDecomposition> {
    let c2 = g * h;
    if !(c2 > 0.0) {
        return Err(Error::physical(format!("non-positive squared wave speed {c2}")));
    }
    let c = c2.sqrt();
    let (l0, l1) = (u - c, u + c);
    // R = [[1, 1], [l0, l1]], det = l1 - l0 = 2c
    let inv = 1.0 / (2.0 * c);
    Ok(EigenDecomposition {
        dim: 2,
        eigenvalues: [l0, l1, 0.0],
        right: [[1.0, 1.0, 0.0], [l0, l1, 0.0], [0.0; 3]],
        left: [[l1 * inv, -inv, 0.0], [-l0 * inv, inv, 0.0], [0.0; 3]],
    })
}

fn euler_decomposition(gamma: f64, u: f64, enthalpy: f64) -> Result<EigenDecomposition> {
    let c2 = (gamma - 1.0) * (enthalpy - 0.5 * u * u);
    if !(c2 > 0.0) {
        return Err(Error::physical(format!("non-positive squared sound speed {c2}")));
    }
    let c = c2.sqrt();
    let right = [
        [1.0, 1.0, 1.0],
        [u - c, u, u + c],
        [enthalpy - u * c, 0.5 * u * u, enthalpy + u * c],
    ];
    let left = invert3(&right)
        .ok_or_else(|| Error::physical("singular Euler eigenvector matrix"))?;
    Ok(EigenDecomposition {
        dim: 3,
        eigenvalues: [u - c, u, u + c],
        right,
        left,
    })
}

fn invert3(m: &Matrix) -> Option<Matrix> {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let det = m[0][0] * cof(1, 2, 1, 2) - m[0][1] * cof(1, 2, 0, 2) + m[0][2] * cof(1, 2, 0, 1);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv_det = 1.0 / det;
    // adjugate: inv[i][j] = cofactor(j, i) / det
    Some([
        [
            cof(1, 2, 1, 2) * inv_det,
            -cof(0, 2, 1, 2) * inv_det,
            cof(0, 1, 1, 2) * inv_det,
        ],
        [
            -cof(1, 2, 0, 2) * inv_det,
            cof(0, 2, 0, 2) * inv_det,
            -cof(0, 1, 0, 2) * inv_det,
        ],
        [
            cof(1, 2, 0, 1) * inv_det,
            -cof(0, 2, 0, 1) * inv_det,
            cof(0, 1, 0, 1) * inv_det,
        ],
    ])
}

impl EigenDecomposition {
    /// `w = L u`
    #[inline]
    pub fn to_characteristic(&self, u: &[f64]) -> Vector {
        let mut w = [0.0; MAX_COMPONENTS];
        for (k, wk) in w.iter_mut().enumerate().take(self.dim) {
            *wk = (0..self.dim).map(|j| self.left[k][j] * u[j]).sum();
        }
        w
    }

    /// `u = R w`
    #[inline]
    pub fn from_characteristic(&self, w: &[f64]) -> Vector {
        let mut u = [0.0; MAX_COMPONENTS];
        for (i, ui) in u.iter_mut().enumerate().take(self.dim) {
            *ui = (0..self.dim).map(|k| self.right[i][k] * w[k]).sum();
        }
        u
    }

    /// `R diag(λ) L v`, the action of the Jacobian this decomposition diagonalises.
    pub fn apply_jacobian(&self, v: &[f64]) -> Vector {
        let mut w = self.to_characteristic(v);
        for k in 0..self.dim {
            w[k] *= self.eigenvalues[k];
        }
        self.from_characteristic(&w)
    }

    pub fn right_column(&self, k: usize) -> Vector {
        let mut col = [0.0; MAX_COMPONENTS];
        for (i, c) in col.iter_mut().enumerate().take(self.dim) {
            *c = self.right[i][k];
        }
        col
    }
}
