//! Spectrum of `L = DG*·DG` for linear fields.
//!
//! For `α(x) = (h₁x₁ + k₁x₂, h₂x₁ + k₂x₂)` the quadratic form is
//! `⟨η, Lγ⟩ = ∫₀¹ ηᵀ A γ dt`, i.e. `Lγ(t) = ∫₀¹ min(t, r) A γ(r) dr`, whose
//! eigenpairs are `4a_j/(π²(1+2n)²)` and `sin((π/2 + nπ)t) u_j`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::field::LinearField;
use crate::path::TimeGrid;
use crate::quadrature::trapezoid_weights;

/// The symmetric matrix `A` of the quadratic form, with its eigen-decomposition
/// sorted so that `a₁ ≥ a₂ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFormMatrix {
    pub entries: [[f64; 2]; 2],
    pub eigenvalues: [f64; 2],
    /// `eigenvectors[j]` is the unit vector `u_{j+1}`.
    pub eigenvectors: [[f64; 2]; 2],
}

impl QuadraticFormMatrix {
    pub fn from_entries(entries: [[f64; 2]; 2]) -> Result<Self> {
        let m = Matrix2::new(entries[0][0], entries[0][1], entries[1][0], entries[1][1]);
        if (m - m.transpose()).abs().max() > 1e-12 * (1.0 + m.abs().max()) {
            return Err(Error::invalid("quadratic form matrix must be symmetric"));
        }
        let eig = SymmetricEigen::new(m);
        let (mut i0, mut i1) = (0, 1);
        if eig.eigenvalues[1] > eig.eigenvalues[0] {
            (i0, i1) = (1, 0);
        }
        let scale = m.abs().max();
        let clamp = |a: f64| -> Result<f64> {
            if a < -1e-12 * scale.max(1.0) {
                return Err(Error::invalid("quadratic form matrix must be positive semidefinite"));
            }
            Ok(a.max(0.0))
        };
        let col = |i: usize| [eig.eigenvectors[(0, i)], eig.eigenvectors[(1, i)]];
        Ok(QuadraticFormMatrix {
            entries,
            eigenvalues: [clamp(eig.eigenvalues[i0])?, clamp(eig.eigenvalues[i1])?],
            eigenvectors: [col(i0), col(i1)],
        })
    }

    pub fn trace(&self) -> f64 {
        self.entries[0][0] + self.entries[1][1]
    }
}

pub fn matrix_a(field: &LinearField) -> QuadraticFormMatrix {
    let LinearField { h1, k1, h2, k2 } = *field;
    let off = h1 * k1 + h2 * k2;
    QuadraticFormMatrix::from_entries([[h1 * h1 + h2 * h2, off], [off, k1 * k1 + k2 * k2]])
        .expect("Gram matrices are symmetric positive semidefinite")
}

/// `λ_{n,j}` for `n = 0, 1, …` is `4a_j / (π²(1+2n)²)`.
pub fn closed_form_eigenvalue(a: f64, n: usize) -> f64 {
    4.0 * a / (PI * PI * ((1 + 2 * n) as f64).powi(2))
}

/// `γ_{n,j}(t) = sin((π/2 + nπ)t) u_j` (not normalized).
pub fn closed_form_eigenfunction(a: &QuadraticFormMatrix, n: usize, j: usize, t: f64) -> [f64; 2] {
    let s = ((0.5 + n as f64) * PI * t).sin();
    [s * a.eigenvectors[j][0], s * a.eigenvectors[j][1]]
}

/// `(n, j, closed, numeric, relative error)`.
pub type SpectrumRow = (usize, usize, f64, Option<f64>, Option<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub matrix: QuadraticFormMatrix,
    /// `closed[n] = [λ_{n,1}, λ_{n,2}]`.
    pub closed: Vec<[f64; 2]>,
    /// Same layout, from the discretized operator when computed.
    pub numeric: Option<Vec<[f64; 2]>>,
    /// Partial sums of singular values `Σ_{m≤n} Σ_j √λ_{m,j}`.
    pub singular_partial_sums: Vec<f64>,
}

impl SpectrumReport {
    /// One row per `(n, j)`, `j` one-based.
    pub fn rows(&self) -> Vec<SpectrumRow> {
        let mut rows = Vec::with_capacity(2 * self.closed.len());
        for (n, pair) in self.closed.iter().enumerate() {
            for j in 0..2 {
                let closed = pair[j];
                let numeric = self.numeric.as_ref().map(|v| v[n][j]);
                let rel = numeric.map(|x| relative_error(x, closed));
                rows.push((n, j + 1, closed, numeric, rel));
            }
        }
        rows
    }
}

/// `|x − reference| / |reference|`, or the absolute error when the reference is zero.
pub fn relative_error(x: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        (x - reference).abs()
    } else {
        ((x - reference) / reference).abs()
    }
}

pub fn closed_form_spectrum(a: &QuadraticFormMatrix, count: usize) -> Result<SpectrumReport> {
    if count == 0 {
        return Err(Error::invalid("spectrum count must be >= 1"));
    }
    let closed = (0..count)
        .map(|n| {
            [
                closed_form_eigenvalue(a.eigenvalues[0], n),
                closed_form_eigenvalue(a.eigenvalues[1], n),
            ]
        })
        .collect();
    Ok(SpectrumReport {
        matrix: *a,
        closed,
        numeric: None,
        singular_partial_sums: trace_class_diagnostic(a, count)?,
    })
}

/// `S_N = Σ_{n<N} Σ_j √λ_{n,j}` for `N = 1..=n_max`.
pub fn trace_class_diagnostic(a: &QuadraticFormMatrix, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::invalid("N must be >= 1"));
    }
    let roots = a.eigenvalues[0].sqrt() + a.eigenvalues[1].sqrt();
    let mut acc = 0.0;
    Ok((0..n_max)
        .map(|n| {
            acc += 2.0 * roots / (PI * (1 + 2 * n) as f64);
            acc
        })
        .collect())
}

/// `Σ_{n<N} Σ_j λ_{n,j}` for `N = 1..=n_max`; converges to `(a₁ + a₂)/2`.
pub fn eigenvalue_partial_sums(a: &QuadraticFormMatrix, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::invalid("N must be >= 1"));
    }
    let total = a.eigenvalues[0] + a.eigenvalues[1];
    let mut acc = 0.0;
    Ok((0..n_max)
        .map(|n| {
            acc += closed_form_eigenvalue(total, n);
            acc
        })
        .collect())
}

/// Symmetric Nyström discretization of the scalar operator
/// `γ ↦ ∫₀¹ min(t, r) γ(r) dr` on the nonzero nodes `t_1..t_N`:
/// `S = W^{1/2} K W^{1/2}` with trapezoid weights `W`.
#[derive(Debug, Clone)]
pub struct MinKernelOperator {
    grid: TimeGrid,
    sqrt_w: Vec<f64>,
}

/// Above this fraction of the rank, subspace iteration is no cheaper than a dense solve.
const DENSE_FRACTION: usize = 4;

impl MinKernelOperator {
    pub fn new(grid: TimeGrid) -> Self {
        let sqrt_w = trapezoid_weights(grid.num_steps())[1..]
            .iter()
            .map(|w| w.sqrt())
            .collect();
        MinKernelOperator { grid, sqrt_w }
    }

    /// Matrix size; the discretization has full rank.
    pub fn rank(&self) -> usize {
        self.grid.num_steps()
    }

    /// `Tr S = Σ_k w_k t_k`, the sum of all eigenvalues.
    pub fn trace(&self) -> f64 {
        self.sqrt_w
            .iter()
            .enumerate()
            .map(|(i, s)| s * s * self.grid.t(i + 1))
            .sum()
    }

    /// `y = S x` in `O(N)` via prefix sums.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.rank();
        // (K z)_k = Σ_{l≤k} t_l z_l + t_k Σ_{l>k} z_l
        let mut tail: f64 = x.iter().zip(&self.sqrt_w).map(|(a, s)| a * s).sum();
        let mut head = 0.0;
        for k in 0..n {
            let z = x[k] * self.sqrt_w[k];
            let t = self.grid.t(k + 1);
            head += t * z;
            tail -= z;
            y[k] = self.sqrt_w[k] * (head + t * tail);
        }
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.rank();
        DMatrix::from_fn(n, n, |i, j| self.sqrt_w[i] * self.sqrt_w[j] * self.grid.t(i.min(j) + 1))
    }

    /// Largest `count` eigenvalues (descending) with unit eigenvectors of `S`.
    pub fn top_eigenpairs(&self, count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
        let n = self.rank();
        if count == 0 || count > n {
            return Err(Error::invalid(format!(
                "requested {count} eigenvalues from a discretization of rank {n}"
            )));
        }
        if count * DENSE_FRACTION >= n {
            let eig = SymmetricEigen::new(self.dense());
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            return Ok(order[..count]
                .iter()
                .map(|&i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
                .collect());
        }
        Ok(self.subspace_iteration(count))
    }

    /// Block power iteration with Rayleigh–Ritz; the start block is a fixed
    /// pseudo-random matrix, so results are deterministic.
    fn subspace_iteration(&self, count: usize) -> Vec<(f64, Vec<f64>)> {
        let n = self.rank();
        let p = (2 * count).max(count + 8).min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut x = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
        let mut sx = DMatrix::zeros(n, p);
        let mut result = Vec::new();
        for _ in 0..10_000 {
            let q = x.clone().qr().q();
            for c in 0..p {
                // column-major storage: column c is contiguous
                let src = &q.as_slice()[c * n..(c + 1) * n];
                self.apply(src, &mut sx.as_mut_slice()[c * n..(c + 1) * n]);
            }
            let h = q.transpose() * &sx;
            let h = (&h + h.transpose()) * 0.5;
            let eig = SymmetricEigen::new(h);
            let mut order: Vec<usize> = (0..p).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            let v = DMatrix::from_fn(p, p, |i, j| eig.eigenvectors[(i, order[j])]);
            let ritz = &q * &v;
            let s_ritz = &sx * &v;
            let top = eig.eigenvalues[order[0]].abs();
            let converged = (0..count).all(|j| {
                let theta = eig.eigenvalues[order[j]];
                (s_ritz.column(j) - ritz.column(j) * theta).norm() <= 1e-13 * top.max(f64::MIN_POSITIVE)
            });
            result = (0..count)
                .map(|j| (eig.eigenvalues[order[j]], ritz.column(j).iter().copied().collect()))
                .collect();
            if converged || top == 0.0 {
                break;
            }
            x = s_ritz;
        }
        result
    }

    /// Grid function `γ(t_k)`, `k = 0..=N`, of a matrix eigenvector (`γ(0) = 0`).
    pub fn eigenfunction(&self, vector: &[f64]) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(vector.iter().zip(&self.sqrt_w).map(|(v, s)| v / s))
            .collect()
    }
}

/// Top `count` eigenvalues of the discretized `L` per `A`-eigendirection, plus closed forms.
pub fn discretized_l_spectrum(field: &LinearField, grid: &TimeGrid, count: usize) -> Result<SpectrumReport> {
    let a = matrix_a(field);
    let op = MinKernelOperator::new(*grid);
    let mu = op.top_eigenpairs(count)?;
    let mut report = closed_form_spectrum(&a, count)?;
    report.numeric = Some(
        mu.iter()
            .map(|(m, _)| [a.eigenvalues[0] * m, a.eigenvalues[1] * m])
            .collect(),
    );
    Ok(report)
}

/// Trace of the discretized `L` (sum of all its eigenvalues), `(a₁ + a₂)·Tr S`.
pub fn discretized_l_trace(field: &LinearField, grid: &TimeGrid) -> f64 {
    matrix_a(field).trace() * MinKernelOperator::new(*grid).trace()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_a() -> QuadraticFormMatrix {
        matrix_a(&LinearField::new(1.0, 0.0, 0.0, 1.0))
    }

    #[test]
    fn matrix_a_examples() {
        let a = unit_a();
        assert_eq!(a.entries, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(a.eigenvalues, [1.0, 1.0]);
        let a = matrix_a(&LinearField::new(0.0, 0.0, 1.0, 0.0));
        assert_eq!(a.entries, [[1.0, 0.0], [0.0, 0.0]]);
        assert_eq!(a.eigenvalues, [1.0, 0.0]);
        assert_eq!(matrix_a(&LinearField::new(0.0, 0.0, 0.0, 0.0)).entries, [[0.0; 2]; 2]);
    }

    #[test]
    fn matrix_a_eigenvectors() {
        let a = matrix_a(&LinearField::new(0.3, -1.2, 0.8, 0.5));
        for j in 0..2 {
            let u = a.eigenvectors[j];
            let au = [
                a.entries[0][0] * u[0] + a.entries[0][1] * u[1],
                a.entries[1][0] * u[0] + a.entries[1][1] * u[1],
            ];
            assert!((au[0] - a.eigenvalues[j] * u[0]).abs() < 1e-12);
            assert!((au[1] - a.eigenvalues[j] * u[1]).abs() < 1e-12);
            assert!((u[0].hypot(u[1]) - 1.0).abs() < 1e-12);
        }
        assert!(a.eigenvalues[0] >= a.eigenvalues[1] && a.eigenvalues[1] >= 0.0);
    }

    #[test]
    fn closed_form_values() {
        assert!((closed_form_eigenvalue(1.0, 0) - 0.405_284_734_569_351).abs() < 1e-14);
        assert!((closed_form_eigenvalue(1.0, 1) - 4.0 / (9.0 * PI * PI)).abs() < 1e-16);
        let rep = closed_form_spectrum(&matrix_a(&LinearField::new(0.0, 0.0, 1.0, 0.0)), 5).unwrap();
        assert!(rep.closed.iter().all(|l| l[1] == 0.0));
        assert!(closed_form_spectrum(&unit_a(), 0).is_err());
    }

    #[test]
    fn closed_form_eigenfunction_solves_the_kernel_equation() {
        // ∫ min(t, r) sin(ωr) dr = sin(ωt)/ω² when cos(ω) = 0
        let a = unit_a();
        let grid = TimeGrid::new(1 << 14).unwrap();
        for n in 0..4 {
            let f: Vec<f64> = grid
                .nodes()
                .map(|t| closed_form_eigenfunction(&a, n, 0, t)[0])
                .collect();
            let t: f64 = 0.37;
            let kf: Vec<f64> = grid.nodes().zip(&f).map(|(r, v)| t.min(r) * v).collect();
            let lhs = crate::quadrature::trapezoid(&kf, grid.step());
            let rhs = closed_form_eigenvalue(1.0, n) * closed_form_eigenfunction(&a, n, 0, t)[0];
            assert!((lhs - rhs).abs() < 1e-6, "n={n}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn matvec_matches_dense() {
        let op = MinKernelOperator::new(TimeGrid::new(37).unwrap());
        let x: Vec<f64> = (0..37).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let mut y = vec![0.0; 37];
        op.apply(&x, &mut y);
        let dense = op.dense() * nalgebra::DVector::from_vec(x);
        for (a, b) in y.iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn subspace_iteration_matches_dense_eigensolve() {
        let op = MinKernelOperator::new(TimeGrid::new(400).unwrap());
        let fast = op.subspace_iteration(6);
        let eig = SymmetricEigen::new(op.dense());
        let mut all: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        all.sort_by(|a, b| b.total_cmp(a));
        for (j, (mu, v)) in fast.iter().enumerate() {
            assert!((mu - all[j]).abs() < 1e-12 * all[0], "{j}: {mu} vs {}", all[j]);
            let mut sv = vec![0.0; 400];
            op.apply(v, &mut sv);
            let res: f64 = sv.iter().zip(v).map(|(a, b)| (a - mu * b).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-10);
        }
        // trace identity for the full spectrum
        assert!((all.iter().sum::<f64>() - op.trace()).abs() < 1e-12);
    }

    #[test]
    fn identity_spectrum_on_4096_grid() {
        let rep =
            discretized_l_spectrum(&LinearField::new(1.0, 0.0, 0.0, 1.0), &TimeGrid::new(4096).unwrap(), 5).unwrap();
        for (n, _, closed, numeric, rel) in rep.rows() {
            assert!(rel.unwrap() <= 1e-3, "n={n}: {closed} vs {numeric:?}");
        }
    }

    #[test]
    fn refinement_reduces_error() {
        let f = LinearField::new(1.0, 0.0, 0.0, 1.0);
        let coarse = discretized_l_spectrum(&f, &TimeGrid::new(1 << 11).unwrap(), 5).unwrap();
        let fine = discretized_l_spectrum(&f, &TimeGrid::new(1 << 13).unwrap(), 5).unwrap();
        for (c, f) in coarse.rows().iter().zip(fine.rows()) {
            assert!(f.4.unwrap() <= c.4.unwrap(), "{c:?} vs {f:?}");
        }
    }

    #[test]
    fn top_eigenvector_is_quarter_sine() {
        let grid = TimeGrid::new(2048).unwrap();
        let op = MinKernelOperator::new(grid);
        let (_, v) = &op.top_eigenpairs(1).unwrap()[0];
        let gamma = op.eigenfunction(v);
        let target: Vec<f64> = grid.nodes().map(|t| (PI * t / 2.0).sin()).collect();
        let w = trapezoid_weights(grid.num_steps());
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&w).map(|((x, y), w)| x * y * w).sum::<f64>();
        let cos = dot(&gamma, &target) / (dot(&gamma, &gamma) * dot(&target, &target)).sqrt();
        assert!(cos.abs() >= 0.999, "{cos}");
    }

    #[test]
    fn zero_field_has_zero_spectrum() {
        let rep =
            discretized_l_spectrum(&LinearField::new(0.0, 0.0, 0.0, 0.0), &TimeGrid::new(1024).unwrap(), 4).unwrap();
        assert!(rep.numeric.unwrap().iter().flatten().all(|l| l.abs() <= 1e-12));
        assert!(rep.singular_partial_sums.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn count_beyond_rank_is_an_error() {
        let g = TimeGrid::new(16).unwrap();
        assert!(discretized_l_spectrum(&LinearField::new(1.0, 0.0, 0.0, 1.0), &g, 17).is_err());
        assert!(discretized_l_spectrum(&LinearField::new(1.0, 0.0, 0.0, 1.0), &g, 16).is_ok());
    }

    #[test]
    fn singular_values_are_not_summable() {
        let s = trace_class_diagnostic(&unit_a(), 100_000).unwrap();
        // odd harmonic numbers: Σ_{n<N} 1/(2n+1) = H_{2N} − H_N / 2
        let harmonic = |m: usize| (1..=m).map(|k| 1.0 / k as f64).sum::<f64>();
        for n in [1, 10, 1_000, 10_000] {
            let odd = harmonic(2 * n) - harmonic(n) / 2.0;
            assert!((s[n - 1] - 4.0 / PI * odd).abs() < 1e-10 * s[n - 1]);
        }
        // each decade adds ≈ (2/π) ln 10: unbounded logarithmic growth
        let decade = 2.0 / PI * 10f64.ln();
        for n in [1_000, 10_000] {
            assert!((s[10 * n - 1] - s[n - 1] - decade).abs() < 1e-3);
        }
        let ratios: Vec<f64> = [10, 100, 1_000, 10_000]
            .iter()
            .map(|&n| s[2 * n - 1] / s[n - 1])
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]) && ratios.iter().all(|&r| r > 1.0));
    }

    #[test]
    fn eigenvalues_are_summable() {
        let a = matrix_a(&LinearField::new(0.4, 1.1, -0.7, 0.2));
        let s = eigenvalue_partial_sums(&a, 10_000).unwrap();
        assert!((s[9_999] - (a.eigenvalues[0] + a.eigenvalues[1]) / 2.0).abs() < 1e-3);
    }

    #[test]
    fn discretized_trace_is_half_the_trace_of_a() {
        let f = LinearField::new(0.4, 1.1, -0.7, 0.2);
        let tr = discretized_l_trace(&f, &TimeGrid::new(4096).unwrap());
        assert!((tr - (0.16 + 1.21 + 0.49 + 0.04) / 2.0).abs() < 1e-12);
    }
}
