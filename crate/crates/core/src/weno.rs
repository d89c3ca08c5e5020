//! WENO reconstruction of interface values, orders `s = 2k + 1 ∈ {1, 3, 5, 7}`.
//!
//! Candidate stencil `r` for the value left of `x_{i+1/2}` covers cells
//! `i − r, …, i − r + k`, so `r = 0` is the right-most (downwind) stencil.
//! Within a stencil, coefficients and smoothness forms are ordered by
//! increasing cell index.

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::grid::{wrap_index, StateField};
use crate::models::{ConservationModel, Vector, MAX_COMPONENTS};

pub const MAX_DEGREE: usize = 3;
const MAX_STENCIL: usize = MAX_DEGREE + 1;
const MAX_WIDTH: usize = 2 * MAX_DEGREE + 1;

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Exact reconstruction tables for polynomial degree `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactTables {
    pub k: usize,
    /// `c[r][j]`: weight of the `j`-th cell of stencil `r`.
    pub c: Vec<Vec<Rational64>>,
    pub d: Vec<Rational64>,
    pub b: Vec<Vec<Vec<Rational64>>>,
}

/// Floating-point copy of [`ExactTables`] used by the reconstruction kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct WenoTables {
    k: usize,
    c: [[f64; MAX_STENCIL]; MAX_STENCIL],
    d: [f64; MAX_STENCIL],
    b: [[[f64; MAX_STENCIL]; MAX_STENCIL]; MAX_STENCIL],
    exact: ExactTables,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WenoConfig {
    pub k: usize,
    pub epsilon: f64,
    /// Reconstruct characteristic rather than conserved variables (systems only).
    pub characteristic: bool,
    /// Use the optimal weights `d_r` everywhere, i.e. the underlying linear scheme.
    pub linear_weights: bool,
}

impl Default for WenoConfig {
    fn default() -> Self {
        Self {
            k: 0,
            epsilon: DEFAULT_EPSILON,
            characteristic: true,
            linear_weights: false,
        }
    }
}

impl WenoConfig {
    /// Configuration for formal order `s = 2k + 1`.
    pub fn with_order(order: usize) -> Result<Self> {
        if order % 2 == 0 || order > 2 * MAX_DEGREE + 1 {
            return Err(Error::config(format!(
                "WENO order must be one of 1, 3, 5, 7, got {order}"
            )));
        }
        Ok(Self {
            k: order / 2,
            ..Self::default()
        })
    }

    pub fn order(&self) -> usize {
        2 * self.k + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.k > MAX_DEGREE {
            return Err(Error::config(format!("unsupported WENO degree k = {}", self.k)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config(format!("WENO epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

// (common denominator, row-major numerators)
const C_TABLES: [(i64, &[i64]); 4] = [
    (1, &[1]),
    (2, &[1, 1, -1, 3]),
    (6, &[2, 5, -1, -1, 5, 2, 2, -7, 11]),
    (12, &[3, 13, -5, 1, -1, 7, 7, -1, 1, -5, 13, 3, -3, 13, -23, 25]),
];

const D_TABLES: [(i64, &[i64]); 4] = [(1, &[1]), (3, &[2, 1]), (10, &[3, 6, 1]), (35, &[4, 18, 12, 1])];

const B_TABLES: [(i64, &[i64]); 4] = [
    (1, &[0]),
    (1, &[1, -1, -1, 1, 1, -1, -1, 1]),
    (
        6,
        &[
            20, -31, 11, -31, 50, -19, 11, -19, 8, //
            8, -13, 5, -13, 26, -13, 5, -13, 8, //
            8, -19, 11, -19, 50, -31, 11, -31, 20,
        ],
    ),
    (
        240,
        &[
            2107, -4701, 3521, -927, -4701, 11003, -8623, 2321, 3521, -8623, 7043, -1941, -927, 2321,
            -1941, 547, //
            547, -1261, 961, -247, -1261, 3443, -2983, 801, 961, -2983, 2843, -821, -247, 801, -821,
            267, //
            267, -821, 801, -247, -821, 2843, -2983, 961, 801, -2983, 3443, -1261, -247, 961, -1261,
            547, //
            547, -1941, 2321, -927, -1941, 7043, -8623, 3521, 2321, -8623, 11003, -4701, -927, 3521,
            -4701, 2107,
        ],
    ),
];

fn rationals((den, nums): (i64, &[i64])) -> Vec<Rational64> {
    nums.iter().map(|&n| Rational64::new(n, den)).collect()
}

fn to_f64(r: &Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Reconstruction coefficients, optimal weights and smoothness forms for degree `k`.
pub fn build_tables(k: usize) -> Result<WenoTables> {
    if k > MAX_DEGREE {
        return Err(Error::config(format!(
            "WENO tables exist for k = 0..={MAX_DEGREE}, got {k}"
        )));
    }
    let n = k + 1;
    let c_flat = rationals(C_TABLES[k]);
    let b_flat = rationals(B_TABLES[k]);
    let exact = ExactTables {
        k,
        c: c_flat.chunks(n).map(<[_]>::to_vec).collect(),
        d: rationals(D_TABLES[k]),
        b: b_flat
            .chunks(n * n)
            .map(|m| m.chunks(n).map(<[_]>::to_vec).collect())
            .collect(),
    };

    let mut c = [[0.0; MAX_STENCIL]; MAX_STENCIL];
    let mut d = [0.0; MAX_STENCIL];
    let mut b = [[[0.0; MAX_STENCIL]; MAX_STENCIL]; MAX_STENCIL];
    for r in 0..n {
        d[r] = to_f64(&exact.d[r]);
        for j in 0..n {
            c[r][j] = to_f64(&exact.c[r][j]);
            for l in 0..n {
                b[r][j][l] = to_f64(&exact.b[r][j][l]);
            }
        }
    }
    Ok(WenoTables { k, c, d, b, exact })
}

impl WenoTables {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn stencil_width(&self) -> usize {
        2 * self.k + 1
    }

    pub fn exact(&self) -> &ExactTables {
        &self.exact
    }

    pub fn optimal_weights(&self) -> &[f64] {
        &self.d[..=self.k]
    }

    /// `qᵀ B_r q` for the `k + 1` values of stencil `r`.
    pub fn smoothness(&self, q: &[f64], r: usize) -> f64 {
        let n = self.k + 1;
        let form = &self.b[r];
        let mut beta = 0.0;
        for j in 0..n {
            let row: f64 = (0..n).map(|l| form[j][l] * q[l]).sum();
            beta += q[j] * row;
        }
        beta
    }

    /// Nonlinear weights `ω_r` for a `2k + 1` stencil centred on cell `i`.
    pub fn weights(&self, eps: f64, q: &[f64]) -> [f64; MAX_STENCIL] {
        let k = self.k;
        let mut alpha = [0.0; MAX_STENCIL];
        let mut total = 0.0;
        for r in 0..=k {
            let beta = self.smoothness(&q[k - r..=2 * k - r], r);
            alpha[r] = self.d[r] / ((eps + beta) * (eps + beta));
            total += alpha[r];
        }
        for a in alpha.iter_mut().take(k + 1) {
            *a /= total;
        }
        alpha
    }

    fn candidate(&self, q: &[f64], r: usize) -> f64 {
        let k = self.k;
        (0..=k).map(|j| self.c[r][j] * q[k - r + j]).sum()
    }

    fn reconstruct(&self, eps: f64, linear: bool, q: &[f64]) -> f64 {
        let k = self.k;
        if k == 0 {
            return q[0];
        }
        let omega = if linear { self.d } else { self.weights(eps, q) };
        (0..=k).map(|r| omega[r] * self.candidate(q, r)).sum()
    }

    /// Value left of `x_{i+1/2}` from `q_{i−k}, …, q_{i+k}`.
    pub fn reconstruct_left(&self, eps: f64, q: &[f64]) -> f64 {
        debug_assert_eq!(q.len(), self.stencil_width());
        self.reconstruct(eps, false, q)
    }

    /// Value right of `x_{i+1/2}` from `q_{i+1−k}, …, q_{i+1+k}`: the mirror image
    /// of [`reconstruct_left`](Self::reconstruct_left).
    pub fn reconstruct_right(&self, eps: f64, q: &[f64]) -> f64 {
        debug_assert_eq!(q.len(), self.stencil_width());
        let mut rev = [0.0; MAX_WIDTH];
        for (dst, src) in rev.iter_mut().zip(q.iter().rev()) {
            *dst = *src;
        }
        self.reconstruct(eps, false, &rev[..q.len()])
    }

    fn reconstruct_pair(&self, cfg: &WenoConfig, q: &[f64]) -> (f64, f64) {
        let w = q.len();
        let mut rev = [0.0; MAX_WIDTH];
        for (dst, src) in rev.iter_mut().zip(q.iter().rev()) {
            *dst = *src;
        }
        (
            self.reconstruct(cfg.epsilon, cfg.linear_weights, q),
            self.reconstruct(cfg.epsilon, cfg.linear_weights, &rev[..w]),
        )
    }
}

/// Reconstructed values at both edges of cell `c`:
/// `(u⁻ at x_{c+1/2}, u⁺ at x_{c−1/2})`.
pub(crate) fn cell_edge_values(
    model: &ConservationModel,
    tables: &WenoTables,
    cfg: &WenoConfig,
    field: &StateField,
    c: usize,
) -> Result<(Vector, Vector)> {
    let d = model.n_components();
    let k = tables.k;
    if k == 0 {
        let mut u = [0.0; MAX_COMPONENTS];
        u[..d].copy_from_slice(field.cell(c));
        return Ok((u, u));
    }
    let n = field.n_cells();
    let width = 2 * k + 1;
    let mut stencil = [[0.0; MAX_COMPONENTS]; MAX_WIDTH];
    for (s, slot) in stencil.iter_mut().enumerate().take(width) {
        let idx = wrap_index(c as isize + s as isize - k as isize, n);
        slot[..d].copy_from_slice(field.cell(idx));
    }

    let decomposition = if cfg.characteristic && d > 1 {
        let dec = model.eigen(field.cell(c)).map_err(|e| e.at_cell(c))?;
        for slot in stencil.iter_mut().take(width) {
            *slot = dec.to_characteristic(&slot[..d]);
        }
        Some(dec)
    } else {
        None
    };

    let mut minus = [0.0; MAX_COMPONENTS];
    let mut plus = [0.0; MAX_COMPONENTS];
    let mut q = [0.0; MAX_WIDTH];
    for comp in 0..d {
        for s in 0..width {
            q[s] = stencil[s][comp];
        }
        let (l, r) = tables.reconstruct_pair(cfg, &q[..width]);
        minus[comp] = l;
        plus[comp] = r;
    }

    if let Some(dec) = decomposition {
        minus = dec.from_characteristic(&minus[..d]);
        plus = dec.from_characteristic(&plus[..d]);
    }
    Ok((minus, plus))
}

/// Left and right states at interface `x_{i+1/2}`.
///
/// With characteristic reconstruction the left state is projected on the
/// eigenvectors of cell `i` and the right state on those of cell `i + 1`.
pub fn reconstruct_interface_states(
    model: &ConservationModel,
    tables: &WenoTables,
    cfg: &WenoConfig,
    field: &StateField,
    i: usize,
) -> Result<(Vector, Vector)> {
    let n = field.n_cells();
    let (ul, _) = cell_edge_values(model, tables, cfg, field, i % n)?;
    let (_, ur) = cell_edge_values(model, tables, cfg, field, (i + 1) % n)?;
    Ok((ul, ur))
}

/// Left/right states at every interface `j + 1/2`, `j = 0..N_x`.
pub fn all_interface_states(
    model: &ConservationModel,
    tables: &WenoTables,
    cfg: &WenoConfig,
    field: &StateField,
) -> Result<Vec<(Vector, Vector)>> {
    let n = field.n_cells();
    let mut states = vec![([0.0; MAX_COMPONENTS], [0.0; MAX_COMPONENTS]); n];
    for c in 0..n {
        let (minus, plus) = cell_edge_values(model, tables, cfg, field, c)?;
        states[c].0 = minus;
        states[wrap_index(c as isize - 1, n)].1 = plus;
    }
    Ok(states)
}
