//! Vector fields `α: ℝᵈ → ℝᵈ`, the path functional `G(ω)(t) = ∫₀ᵗ α(ω(s)) ds`,
//! its derivative and the Ramer inequality check.

pub(crate) mod operator;
mod ramer;

pub use operator::{apply_dg, evaluate_g, hs_norm_squared, kernel_t, u_inverse, unitary_u, DiscreteKernel};
pub use ramer::{gaussian_ramer_check, RamerEstimate, RamerRhs};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A `C¹` map `ℝᵈ → ℝᵈ` with an evaluable Jacobian.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64], out: &mut [f64]);

    /// Row-major `d × d`, entry `(j, m) = ∂α_j/∂x_m`.
    fn jacobian(&self, x: &[f64], out: &mut [f64]);

    fn divergence(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut jac = vec![0.0; d * d];
        self.jacobian(x, &mut jac);
        (0..d).map(|i| jac[i * d + i]).sum()
    }

    /// Scalar curl `∂α₂/∂x₁ − ∂α₁/∂x₂`, defined for `d = 2`.
    fn curl(&self, x: &[f64]) -> Option<f64> {
        if self.dim() != 2 {
            return None;
        }
        let mut jac = [0.0; 4];
        self.jacobian(x, &mut jac);
        Some(jac[2] - jac[1])
    }
}

/// `α(x, y) = (h₁x + k₁y, h₂x + k₂y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearField {
    pub h1: f64,
    pub k1: f64,
    pub h2: f64,
    pub k2: f64,
}

impl LinearField {
    pub fn new(h1: f64, k1: f64, h2: f64, k2: f64) -> Self {
        LinearField { h1, k1, h2, k2 }
    }

    pub fn jacobian_matrix(&self) -> [[f64; 2]; 2] {
        [[self.h1, self.k1], [self.h2, self.k2]]
    }

    pub fn div(&self) -> f64 {
        self.h1 + self.k2
    }

    pub fn rot(&self) -> f64 {
        self.h2 - self.k1
    }
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.h1 * x[0] + self.k1 * x[1];
        out[1] = self.h2 * x[0] + self.k2 * x[1];
    }

    fn jacobian(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&[self.h1, self.k1, self.h2, self.k2]);
    }
}

/// General linear map `x ↦ Mx` on `ℝⁿ` (row-major `M`).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    dim: usize,
    matrix: Vec<f64>,
}

impl MatrixField {
    pub fn new(dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if dim == 0 || matrix.len() != dim * dim {
            return Err(Error::invalid("matrix field needs a nonempty square matrix"));
        }
        Ok(MatrixField { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![0.0; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = 1.0;
        }
        MatrixField { dim, matrix }
    }
}

impl VectorField for MatrixField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.matrix[j * self.dim..(j + 1) * self.dim]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    fn jacobian(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.matrix);
    }
}

/// `α ≡ c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantField {
    pub value: Vec<f64>,
}

impl VectorField for ConstantField {
    fn dim(&self) -> usize {
        self.value.len()
    }

    fn eval(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.value);
    }

    fn jacobian(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// `α_i(x) = x_i + amplitude·sin(x_{i+1 mod n})`: identity plus a bounded smooth perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineField {
    pub dim: usize,
    pub amplitude: f64,
}

impl VectorField for SineField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            out[i] = x[i] + self.amplitude * x[(i + 1) % n].sin();
        }
    }

    fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        out.fill(0.0);
        for i in 0..n {
            out[i * n + i] += 1.0;
            let m = (i + 1) % n;
            out[i * n + m] += self.amplitude * x[m].cos();
        }
    }
}

/// Wraps a closure and supplies its Jacobian by central differences with step `h`
/// (default `1e-6`, truncation error `O(h²)`).
pub struct FiniteDifferenceField<F> {
    dim: usize,
    f: F,
    step: f64,
}

impl<F> FiniteDifferenceField<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FiniteDifferenceField { dim, f, step: 1e-6 }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }
}

impl<F> VectorField for FiniteDifferenceField<F>
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }

    fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        let mut xp = x.to_vec();
        let (mut fp, mut fm) = (vec![0.0; d], vec![0.0; d]);
        for m in 0..d {
            xp[m] = x[m] + self.step;
            (self.f)(&xp, &mut fp);
            xp[m] = x[m] - self.step;
            (self.f)(&xp, &mut fm);
            xp[m] = x[m];
            for j in 0..d {
                out[j * d + m] = (fp[j] - fm[j]) / (2.0 * self.step);
            }
        }
    }
}

/// Field names accepted on the command line: `linear:h1,k1,h2,k2`, `id1d`, `const:c1[,c2…]`.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Linear(LinearField),
    Identity1d,
    Constant(Vec<f64>),
}

impl FieldSpec {
    pub fn dim(&self) -> usize {
        match self {
            FieldSpec::Linear(_) => 2,
            FieldSpec::Identity1d => 1,
            FieldSpec::Constant(c) => c.len(),
        }
    }

    pub fn build(&self) -> Box<dyn VectorField> {
        match self {
            FieldSpec::Linear(l) => Box::new(*l),
            FieldSpec::Identity1d => Box::new(MatrixField::identity(1)),
            FieldSpec::Constant(c) => Box::new(ConstantField { value: c.clone() }),
        }
    }

    pub fn as_linear(&self) -> Option<LinearField> {
        match self {
            FieldSpec::Linear(l) => Some(*l),
            _ => None,
        }
    }
}

fn parse_numbers(list: &str, spec: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("bad number `{v}` in field `{spec}`")))
        })
        .collect()
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "id1d" {
            return Ok(FieldSpec::Identity1d);
        }
        if let Some(rest) = s.strip_prefix("linear:") {
            let v = parse_numbers(rest, s)?;
            if v.len() != 4 {
                return Err(Error::config(format!("`{s}`: linear field needs h1,k1,h2,k2")));
            }
            return Ok(FieldSpec::Linear(LinearField::new(v[0], v[1], v[2], v[3])));
        }
        if let Some(rest) = s.strip_prefix("const:") {
            return Ok(FieldSpec::Constant(parse_numbers(rest, s)?));
        }
        Err(Error::config(format!(
            "unknown field `{s}` (expected linear:h1,k1,h2,k2, id1d or const:c…)"
        )))
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Linear(l) => write!(f, "linear:{},{},{},{}", l.h1, l.k1, l.h2, l.k2),
            FieldSpec::Identity1d => write!(f, "id1d"),
            FieldSpec::Constant(c) => {
                let parts: Vec<_> = c.iter().map(f64::to_string).collect();
                write!(f, "const:{}", parts.join(","))
            }
        }
    }
}
