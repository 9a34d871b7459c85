//! Wiener paths on uniform time grids, Paley–Wiener functionals and
//! Itô–Nisio basis approximations.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::{BasisElement, BasisFamily, BasisTable, ElementTable};
use crate::error::{Error, Result};

/// Uniform grid `t_k = k / num_steps` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    num_steps: usize,
}

impl TimeGrid {
    pub fn new(num_steps: usize) -> Result<Self> {
        if num_steps == 0 {
            return Err(Error::invalid("time grid needs at least one step"));
        }
        Ok(TimeGrid { num_steps })
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn num_nodes(&self) -> usize {
        self.num_steps + 1
    }

    pub fn step(&self) -> f64 {
        1.0 / self.num_steps as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 / self.num_steps as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.num_steps).map(|k| self.t(k))
    }
}

/// A continuous path `ω: [0,1] → ℝᵈ` sampled at the grid nodes, starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    grid: TimeGrid,
    dim: usize,
    values: Vec<f64>,
}

impl SamplePath {
    /// Wrap node-major values (`values[k * dim + c]`).
    pub fn from_values(grid: TimeGrid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("path dimension must be >= 1"));
        }
        if values.len() != grid.num_nodes() * dim {
            return Err(Error::invalid(format!(
                "expected {} values for {} nodes in dimension {dim}, got {}",
                grid.num_nodes() * dim,
                grid.num_nodes(),
                values.len()
            )));
        }
        if values[..dim].iter().any(|v| *v != 0.0) {
            return Err(Error::invalid("paths must start at the origin"));
        }
        Ok(SamplePath { grid, dim, values })
    }

    /// Sample a deterministic path; `f(0)` must vanish.
    pub fn from_fn(grid: TimeGrid, dim: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.num_nodes() * dim);
        for t in grid.nodes() {
            let v = f(t);
            Error::check_dim(dim, v.len())?;
            values.extend(v);
        }
        Self::from_values(grid, dim, values)
    }

    /// `ω(t) = (t, …, t)`.
    pub fn ramp(grid: TimeGrid, dim: usize) -> Result<Self> {
        Self::from_fn(grid, dim, |t| vec![t; dim])
    }

    /// `ω ≡ 0`.
    pub fn zero(grid: TimeGrid, dim: usize) -> Result<Self> {
        Self::from_values(grid, dim, vec![0.0; grid.num_nodes() * dim])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn endpoint(&self) -> &[f64] {
        self.at(self.grid.num_steps)
    }

    /// `ω` at an arbitrary time by linear interpolation between nodes.
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        let n = self.grid.num_steps;
        let x = (t.clamp(0.0, 1.0) * n as f64).min(n as f64);
        let k = (x.floor() as usize).min(n - 1);
        let s = x - k as f64;
        self.at(k)
            .iter()
            .zip(self.at(k + 1))
            .map(|(a, b)| a + s * (b - a))
            .collect()
    }

    /// Linear combination `a·self + b·other`; both paths must share grid and dimension.
    pub fn combine(&self, a: f64, other: &SamplePath, b: f64) -> Result<SamplePath> {
        Error::check_dim(self.dim, other.dim)?;
        if self.grid != other.grid {
            return Err(Error::invalid("paths live on different grids"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(SamplePath {
            grid: self.grid,
            dim: self.dim,
            values,
        })
    }

    /// Sup-norm distance to another path on the same grid.
    pub fn sup_distance(&self, other: &SamplePath) -> Result<f64> {
        Error::check_dim(self.dim, other.dim)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// CSV dump with header `t,w1[,w2…]`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|c| format!("w{c}")));
        w.write_record(&header)?;
        for k in 0..self.grid.num_nodes() {
            let mut row = vec![fmt_f64(self.grid.t(k))];
            row.extend(self.at(k).iter().map(|v| fmt_f64(*v)));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<path csv>", e))?;
        Ok(())
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Seed for per-path random streams. Path `i` draws from ChaCha8 stream `i` keyed by
/// the master seed, so an ensemble is identical under any evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSpec {
    pub master_seed: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        RngSpec { master_seed }
    }

    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index);
        rng
    }
}

/// Standard `dim`-dimensional Brownian motion on `grid`, path number `path_index`.
pub fn sample_brownian(grid: TimeGrid, dim: usize, rng: &RngSpec, path_index: u64) -> Result<SamplePath> {
    if dim == 0 {
        return Err(Error::invalid("Brownian dimension must be >= 1"));
    }
    let mut stream = rng.stream(path_index);
    let sd = grid.step().sqrt();
    let mut values = vec![0.0; grid.num_nodes() * dim];
    for k in 1..grid.num_nodes() {
        for c in 0..dim {
            let z: f64 = StandardNormal.sample(&mut stream);
            values[k * dim + c] = values[(k - 1) * dim + c] + sd * z;
        }
    }
    SamplePath::from_values(grid, dim, values)
}

/// Discrete Paley–Wiener integral `n_e(ω) = Σ_k φ(t_k)·(ω(t_{k+1}) − ω(t_k))`.
pub fn paley_wiener(path: &SamplePath, elem: &BasisElement) -> Result<f64> {
    Error::check_dim(path.dim(), elem.dim())?;
    Ok(ElementTable::new(elem, path.grid()).paley_wiener(path.values(), path.dim()))
}

fn check_family(path: &SamplePath, basis: &BasisFamily, n: usize) -> Result<()> {
    Error::check_dim(path.dim(), basis.dim())?;
    if n == 0 {
        return Err(Error::invalid("truncation n must be >= 1"));
    }
    Ok(())
}

/// `(n_{e_1}(ω), …, n_{e_n}(ω))`.
pub fn project_coefficients(path: &SamplePath, basis: &BasisFamily, n: usize) -> Result<Vec<f64>> {
    check_family(path, basis, n)?;
    let table = BasisTable::new(&basis.prefix(n)?, path.grid());
    Ok(table
        .iter()
        .map(|el| el.paley_wiener(path.values(), path.dim()))
        .collect())
}

/// Itô–Nisio approximation `W_n(t) = Σ_{i≤n} e_i(t)·n_{e_i}(ω)`.
pub fn approximate_wiener(path: &SamplePath, basis: &BasisFamily, n: usize) -> Result<SamplePath> {
    check_family(path, basis, n)?;
    let table = BasisTable::new(&basis.prefix(n)?, path.grid());
    Ok(approximate_with_table(path, &table).1)
}

/// Coefficients and the reconstructed path for a pre-tabulated prefix.
pub(crate) fn approximate_with_table(path: &SamplePath, table: &BasisTable) -> (Vec<f64>, SamplePath) {
    let dim = path.dim();
    let mut delta = vec![0.0; path.grid().num_steps() * dim];
    let coeffs: Vec<f64> = table
        .iter()
        .map(|el| {
            let c = el.paley_wiener(path.values(), dim);
            el.add_increments(c, &mut delta, dim);
            c
        })
        .collect();
    let values = integrate_increments(&delta, dim);
    let approx = SamplePath {
        grid: *path.grid(),
        dim,
        values,
    };
    (coeffs, approx)
}

/// Node values from per-cell increments, starting at zero.
pub(crate) fn integrate_increments(delta: &[f64], dim: usize) -> Vec<f64> {
    let cells = delta.len() / dim;
    let mut values = vec![0.0; (cells + 1) * dim];
    for c in 0..cells {
        for s in 0..dim {
            values[(c + 1) * dim + s] = values[c * dim + s] + delta[c * dim + s];
        }
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{component_trig_basis, haar_basis, piecewise_linear_basis, ElementLabel, ScalarShape};
    use crate::quadrature::mean_and_stderr;

    #[test]
    fn brownian_starts_at_origin() {
        let grid = TimeGrid::new(32).unwrap();
        let p = sample_brownian(grid, 2, &RngSpec::new(7), 3).unwrap();
        assert_eq!(p.at(0), &[0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(TimeGrid::new(0).is_err());
        let grid = TimeGrid::new(4).unwrap();
        assert!(sample_brownian(grid, 0, &RngSpec::new(0), 0).is_err());
        assert!(SamplePath::from_values(grid, 1, vec![1.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let grid = TimeGrid::new(16).unwrap();
        let rng = RngSpec::new(42);
        let a = sample_brownian(grid, 1, &rng, 5).unwrap();
        let b = sample_brownian(grid, 1, &rng, 5).unwrap();
        let c = sample_brownian(grid, 1, &rng, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        // order independence
        let rev: Vec<_> = (0..8)
            .rev()
            .map(|i| sample_brownian(grid, 1, &rng, i).unwrap())
            .collect();
        for (i, p) in rev.iter().rev().enumerate() {
            assert_eq!(*p, sample_brownian(grid, 1, &rng, i as u64).unwrap());
        }
    }

    #[test]
    fn brownian_moments() {
        let grid = TimeGrid::new(4).unwrap();
        let rng = RngSpec::new(2024);
        let m = 100_000;
        let mut sq = Vec::with_capacity(m);
        let mut cov = Vec::with_capacity(m);
        for i in 0..m {
            let p = sample_brownian(grid, 1, &rng, i as u64).unwrap();
            sq.push(p.endpoint()[0].powi(2));
            cov.push(p.at(1)[0] * p.at(3)[0]);
        }
        let (mean, se) = mean_and_stderr(&sq);
        assert!((mean - 1.0).abs() < 3.0 * se, "{mean} ± {se}");
        let (mean, se) = mean_and_stderr(&cov);
        assert!((mean - 0.25).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn constant_element_telescopes() {
        let grid = TimeGrid::new(64).unwrap();
        let p = sample_brownian(grid, 1, &RngSpec::new(1), 0).unwrap();
        let one = haar_basis(1).unwrap().element(0).unwrap();
        assert!((paley_wiener(&p, &one).unwrap() - p.endpoint()[0]).abs() < 1e-12);
        let coeffs = project_coefficients(&p, &haar_basis(1).unwrap(), 1).unwrap();
        assert!((coeffs[0] - p.endpoint()[0]).abs() < 1e-12);
        let w1 = approximate_wiener(&p, &haar_basis(1).unwrap(), 1).unwrap();
        for k in 0..=64 {
            assert!((w1.at(k)[0] - grid.t(k) * p.endpoint()[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_against_ramp_vanishes() {
        let grid = TimeGrid::new(1000).unwrap();
        let p = SamplePath::ramp(grid, 1).unwrap();
        let cos = BasisElement::new(
            1,
            vec![crate::basis::Component {
                slot: 0,
                scale: std::f64::consts::SQRT_2,
                shape: ScalarShape::Cos { freq: 1 },
            }],
            ElementLabel::Trig { freq: 1, slot: 1 },
        );
        assert!(paley_wiener(&p, &cos).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ramp_projection_onto_trig() {
        let grid = TimeGrid::new(256).unwrap();
        let p = SamplePath::ramp(grid, 1).unwrap();
        let w = approximate_wiener(&p, &component_trig_basis(1).unwrap(), 1).unwrap();
        assert!(w.sup_distance(&p).unwrap() < 1e-12);
        let p2 = SamplePath::ramp(grid, 2).unwrap();
        let c = project_coefficients(&p2, &component_trig_basis(2).unwrap(), 2).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_matches_coefficients() {
        let grid = TimeGrid::new(512).unwrap();
        let p = sample_brownian(grid, 2, &RngSpec::new(3), 9).unwrap();
        let basis = component_trig_basis(2).unwrap();
        let n = 22;
        let coeffs = project_coefficients(&p, &basis, n).unwrap();
        let w = approximate_wiener(&p, &basis, n).unwrap();
        let elems = basis.prefix(n).unwrap();
        for k in 0..=512 {
            let t = grid.t(k);
            let mut direct = [0.0; 2];
            for (c, e) in coeffs.iter().zip(&elems) {
                let prim = e.primitive(t);
                direct[0] += c * prim[0];
                direct[1] += c * prim[1];
            }
            assert!((direct[0] - w.at(k)[0]).abs() < 1e-12);
            assert!((direct[1] - w.at(k)[1]).abs() < 1e-12);
        }
        assert_eq!(w.at(0), &[0.0, 0.0]);
    }

    #[test]
    fn paley_wiener_coefficients_are_orthonormal_gaussians() {
        let grid = TimeGrid::new(64).unwrap();
        let rng = RngSpec::new(11);
        let basis = component_trig_basis(2).unwrap();
        let n = 6;
        let m = 100_000;
        let mut products = vec![Vec::with_capacity(m); n * n];
        let mut firsts = Vec::with_capacity(m);
        for i in 0..m {
            let p = sample_brownian(grid, 2, &rng, i as u64).unwrap();
            let c = project_coefficients(&p, &basis, n).unwrap();
            firsts.push(c[2]);
            for a in 0..n {
                for b in 0..n {
                    products[a * n + b].push(c[a] * c[b]);
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let (mean, se) = mean_and_stderr(&products[a * n + b]);
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((mean - target).abs() < 3.0 * se, "({a},{b}) {mean} ± {se}");
            }
        }
        let (mean, se) = mean_and_stderr(&firsts);
        assert!(mean.abs() < 3.0 * se);
    }

    #[test]
    fn haar_approximation_converges_uniformly() {
        let grid = TimeGrid::new(1024).unwrap();
        let rng = RngSpec::new(5);
        let basis = haar_basis(1).unwrap();
        let levels = [2usize, 8, 32, 128];
        let mut errs: Vec<Vec<f64>> = vec![Vec::new(); levels.len()];
        for i in 0..100 {
            let p = sample_brownian(grid, 1, &rng, i).unwrap();
            for (j, &n) in levels.iter().enumerate() {
                let w = approximate_wiener(&p, &basis, n).unwrap();
                errs[j].push(w.sup_distance(&p).unwrap());
            }
        }
        let medians: Vec<f64> = errs
            .iter_mut()
            .map(|e| {
                e.sort_by(f64::total_cmp);
                e[e.len() / 2]
            })
            .collect();
        for w in medians.windows(2) {
            assert!(w[1] <= w[0], "{medians:?}");
        }
    }

    #[test]
    fn plin_is_linear_interpolation_at_knots() {
        let grid = TimeGrid::new(64).unwrap();
        let p = sample_brownian(grid, 1, &RngSpec::new(8), 1).unwrap();
        let w = approximate_wiener(&p, &piecewise_linear_basis(8, 1).unwrap(), 8).unwrap();
        for k in (0..=64).step_by(8) {
            assert!((w.at(k)[0] - p.at(k)[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let grid = TimeGrid::new(2).unwrap();
        let p = SamplePath::ramp(grid, 2).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,w1,w2");
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[2],
            "5.0000000000000000e-1,5.0000000000000000e-1,5.0000000000000000e-1"
        );
    }
}
