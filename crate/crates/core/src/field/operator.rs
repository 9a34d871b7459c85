use super::VectorField;
use crate::error::{Error, Result};
use crate::path::{SamplePath, TimeGrid};
use crate::quadrature::{cumulative_trapezoid, differentiate, trapezoid, trapezoid_weights};

fn check(field: &dyn VectorField, path: &SamplePath) -> Result<()> {
    Error::check_dim(field.dim(), path.dim())
}

/// `α(ω(t_k))` at every node, node-major.
pub(crate) fn field_on_path(field: &dyn VectorField, path: &SamplePath) -> Vec<f64> {
    let d = path.dim();
    let mut out = vec![0.0; path.values().len()];
    for k in 0..path.grid().num_nodes() {
        field.eval(path.at(k), &mut out[k * d..(k + 1) * d]);
    }
    out
}

/// `∇α(ω(t_k))` at every node, `d × d` row-major blocks.
pub(crate) fn jacobian_on_path(field: &dyn VectorField, path: &SamplePath) -> Vec<f64> {
    let d = path.dim();
    let dd = d * d;
    let mut out = vec![0.0; path.grid().num_nodes() * dd];
    for k in 0..path.grid().num_nodes() {
        field.jacobian(path.at(k), &mut out[k * dd..(k + 1) * dd]);
    }
    out
}

/// `G(ω)(t) = ∫₀ᵗ α(ω(s)) ds` by cumulative trapezoid.
pub fn evaluate_g(field: &dyn VectorField, path: &SamplePath) -> Result<SamplePath> {
    check(field, path)?;
    let integrand = field_on_path(field, path);
    let values = cumulative_trapezoid(&integrand, path.dim(), path.grid().step());
    SamplePath::from_values(*path.grid(), path.dim(), values)
}

/// `(DG(ω)γ)_j(t) = ∫₀ᵗ ∇α_j(ω(s))·γ(s) ds`.
pub fn apply_dg(field: &dyn VectorField, path: &SamplePath, gamma: &SamplePath) -> Result<SamplePath> {
    check(field, path)?;
    Error::check_dim(path.dim(), gamma.dim())?;
    if path.grid() != gamma.grid() {
        return Err(Error::invalid("path and direction live on different grids"));
    }
    let d = path.dim();
    let jac = jacobian_on_path(field, path);
    let mut integrand = vec![0.0; gamma.values().len()];
    for k in 0..path.grid().num_nodes() {
        let g = gamma.at(k);
        for j in 0..d {
            integrand[k * d + j] = (0..d).map(|m| jac[k * d * d + j * d + m] * g[m]).sum();
        }
    }
    let values = cumulative_trapezoid(&integrand, d, path.grid().step());
    SamplePath::from_values(*path.grid(), d, values)
}

/// `U φ(t) = ∫₀ᵗ φ` for node values of `φ ∈ L²([0,1]; ℝᵈ)`.
pub fn unitary_u(phi: &[f64], dim: usize, grid: &TimeGrid) -> Result<SamplePath> {
    if phi.len() != grid.num_nodes() * dim {
        return Err(Error::invalid("node values do not match the grid"));
    }
    SamplePath::from_values(*grid, dim, cumulative_trapezoid(phi, dim, grid.step()))
}

/// `U⁻¹γ = γ̇`, by second-order finite differences at the nodes.
pub fn u_inverse(gamma: &SamplePath) -> Vec<f64> {
    differentiate(gamma.values(), gamma.dim(), gamma.grid().step())
}

/// The kernel `K_j(t, t′) = ∇α_j(ω(t))·𝟙[t′ ≤ t]` of `T = U⁻¹∘DG(ω)∘U`, sampled on the grid.
///
/// Only the node Jacobians are stored; entries are lower triangular in `(t, t′)`.
#[derive(Debug, Clone)]
pub struct DiscreteKernel {
    grid: TimeGrid,
    dim: usize,
    jacobians: Vec<f64>,
}

pub fn kernel_t(field: &dyn VectorField, path: &SamplePath) -> Result<DiscreteKernel> {
    check(field, path)?;
    Ok(DiscreteKernel {
        grid: *path.grid(),
        dim: path.dim(),
        jacobians: jacobian_on_path(field, path),
    })
}

impl DiscreteKernel {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `K_j(t_k, t_l) ∈ ℝᵈ` written into `out`.
    pub fn entry_into(&self, j: usize, k: usize, l: usize, out: &mut [f64]) {
        let d = self.dim;
        if l <= k {
            out.copy_from_slice(&self.jacobians[k * d * d + j * d..k * d * d + (j + 1) * d]);
        } else {
            out.fill(0.0);
        }
    }

    pub fn entry(&self, j: usize, k: usize, l: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.entry_into(j, k, l, &mut out);
        out
    }

    /// `(Tφ)(t_k) = ∫₀¹ K(t_k, t′)·φ(t′) dt′` for node values of `φ`.
    pub fn apply(&self, phi: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim;
        if phi.len() != self.grid.num_nodes() * d {
            return Err(Error::invalid("node values do not match the kernel grid"));
        }
        let prim = cumulative_trapezoid(phi, d, self.grid.step());
        let mut out = vec![0.0; phi.len()];
        for k in 0..self.grid.num_nodes() {
            for j in 0..d {
                out[k * d + j] = (0..d)
                    .map(|m| self.jacobians[k * d * d + j * d + m] * prim[k * d + m])
                    .sum();
            }
        }
        Ok(out)
    }

    /// `∬ |K(t, t′)|² dt dt′` by the product trapezoid rule over all kernel entries.
    /// The jump of `𝟙[t′ ≤ t]` on the diagonal takes its mean value `½`.
    pub fn frobenius_norm_squared(&self) -> f64 {
        let d = self.dim;
        let w = trapezoid_weights(self.grid.num_steps());
        let mut buf = vec![0.0; d];
        let mut total = 0.0;
        for k in 0..self.grid.num_nodes() {
            let mut row = 0.0;
            for (l, wl) in w.iter().enumerate().take(k + 1) {
                let mut cell = 0.0;
                for j in 0..d {
                    self.entry_into(j, k, l, &mut buf);
                    cell += buf.iter().map(|v| v * v).sum::<f64>();
                }
                let weight = if l == k { 0.5 * wl } else { *wl };
                row += weight * cell;
            }
            total += w[k] * row;
        }
        total
    }
}

/// `‖DG(ω)‖₂² = Σ_j ∫₀¹ t |∇α_j(ω(t))|² dt`.
pub fn hs_norm_squared(field: &dyn VectorField, path: &SamplePath) -> Result<f64> {
    check(field, path)?;
    let jac = jacobian_on_path(field, path);
    let dd = path.dim() * path.dim();
    let grid = path.grid();
    let integrand: Vec<f64> = (0..grid.num_nodes())
        .map(|k| grid.t(k) * jac[k * dd..(k + 1) * dd].iter().map(|v| v * v).sum::<f64>())
        .collect();
    Ok(trapezoid(&integrand, grid.step()))
}
