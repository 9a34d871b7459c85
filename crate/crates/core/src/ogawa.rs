//! Truncated Ogawa sums, renormalization traces, Wong–Zakai sums and reference
//! Itô/Stratonovich integrals along sampled paths.
//!
//! For an integrand `f(t, ω) = α(ω(t))` and a basis `{φ_i}` with primitives `e_i`:
//!
//! ```text
//! g_n  = Σ_{i≤n} n_{e_i}(ω) ∫₀¹ f(t)·φ_i(t) dt
//! r_n  = Σ_{i≤n} ∫₀¹ φ_i(t)·∇α(ω(t)) e_i(t) dt       (= Tr P_n DG(ω))
//! h_n  = g_n − r_n
//! g′_n = ∫₀¹ α(ω_n(t))·ω̇_n(t) dt,  ω_n = Σ_{i≤n} e_i n_{e_i}(ω)
//! ```

use std::io::Write;

use crate::basis::{
    parse_family, piecewise_linear_basis, BasisElement, BasisFamily, BasisTable, ElementTable, EnumerationOrder,
};
use crate::error::{Error, Result};
use crate::field::operator::{field_on_path, jacobian_on_path};
use crate::field::VectorField;
use crate::path::{fmt_f64, integrate_increments, SamplePath, TimeGrid};

/// An integrand `f(t, ω) ∈ ℝᵈ`, sampled at the grid nodes of a path.
pub trait Integrand: Sync {
    fn dim(&self) -> usize;

    /// Node-major values `f(t_k, ω)`.
    fn sample(&self, path: &SamplePath) -> Vec<f64>;
}

/// The canonical integrand `f(t, ω) = α(ω(t))`.
pub struct FieldIntegrand<'a>(pub &'a dyn VectorField);

impl Integrand for FieldIntegrand<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn sample(&self, path: &SamplePath) -> Vec<f64> {
        field_on_path(self.0, path)
    }
}

/// Arbitrary (possibly anticipating) integrand given node by node.
pub struct FnIntegrand<F> {
    dim: usize,
    f: F,
}

impl<F> FnIntegrand<F>
where
    F: Fn(usize, &SamplePath, &mut [f64]) + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnIntegrand { dim, f }
    }
}

impl<F> Integrand for FnIntegrand<F>
where
    F: Fn(usize, &SamplePath, &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, path: &SamplePath) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; path.grid().num_nodes() * d];
        for k in 0..path.grid().num_nodes() {
            (self.f)(k, path, &mut out[k * d..(k + 1) * d]);
        }
        out
    }
}

fn prefix_table(path: &SamplePath, basis: &BasisFamily, n: usize) -> Result<BasisTable> {
    Error::check_dim(path.dim(), basis.dim())?;
    if n == 0 {
        return Err(Error::invalid("truncation n must be >= 1"));
    }
    Ok(BasisTable::new(&basis.prefix(n)?, path.grid()))
}

/// `g_n` by the coefficient sum `Σ n_{e_i} ∫ f·φ_i`.
pub fn ogawa_partial_sum(f: &dyn Integrand, path: &SamplePath, basis: &BasisFamily, n: usize) -> Result<f64> {
    Error::check_dim(path.dim(), f.dim())?;
    let table = prefix_table(path, basis, n)?;
    let values = f.sample(path);
    let (d, h) = (path.dim(), path.grid().step());
    Ok(table
        .iter()
        .map(|el| el.paley_wiener(path.values(), d) * el.pairing(&values, d, h))
        .sum())
}

/// `g_n` as the Stieltjes integral `∫₀¹ f dW_n` against the Itô–Nisio approximation.
pub fn ogawa_partial_sum_stieltjes(f: &dyn Integrand, path: &SamplePath, basis: &BasisFamily, n: usize) -> Result<f64> {
    Error::check_dim(path.dim(), f.dim())?;
    let table = prefix_table(path, basis, n)?;
    let d = path.dim();
    let cells = path.grid().num_steps();
    // one-sided values of Ẇ_n on each cell
    let (mut start, mut end) = (vec![0.0; cells * d], vec![0.0; cells * d]);
    for el in table.iter() {
        el.add_derivative(el.paley_wiener(path.values(), d), &mut start, &mut end, d);
    }
    let values = f.sample(path);
    let mut acc = 0.0;
    for c in 0..cells {
        for s in 0..d {
            acc += values[c * d + s] * start[c * d + s] + values[(c + 1) * d + s] * end[c * d + s];
        }
    }
    Ok(0.5 * path.grid().step() * acc)
}

/// `⟨e, DG(ω)e⟩ = ∫₀¹ φ(t)·(e(t)·∇)α(ω(t)) dt` for a single element.
pub fn diagonal_entry(field: &dyn VectorField, path: &SamplePath, elem: &BasisElement) -> Result<f64> {
    Error::check_dim(field.dim(), path.dim())?;
    Error::check_dim(path.dim(), elem.dim())?;
    let jac = jacobian_on_path(field, path);
    Ok(ElementTable::new(elem, path.grid()).diagonal(&jac, path.dim(), path.grid().step()))
}

/// `r_n = Tr(P_n DG(ω))`.
pub fn renormalization_term(field: &dyn VectorField, path: &SamplePath, basis: &BasisFamily, n: usize) -> Result<f64> {
    Ok(*renormalization_trajectory(field, path, basis, n)?.last().unwrap())
}

/// `(r_1, …, r_n)`: the renormalization term at every prefix length.
pub fn renormalization_trajectory(
    field: &dyn VectorField,
    path: &SamplePath,
    basis: &BasisFamily,
    n: usize,
) -> Result<Vec<f64>> {
    Error::check_dim(field.dim(), path.dim())?;
    let table = prefix_table(path, basis, n)?;
    let jac = jacobian_on_path(field, path);
    let (d, h) = (path.dim(), path.grid().step());
    let mut acc = 0.0;
    Ok(table
        .iter()
        .map(|el| {
            acc += el.diagonal(&jac, d, h);
            acc
        })
        .collect())
}

/// `h_n = g_n − r_n`.
pub fn renormalized_sum(field: &dyn VectorField, path: &SamplePath, basis: &BasisFamily, n: usize) -> Result<f64> {
    let g = ogawa_partial_sum(&FieldIntegrand(field), path, basis, n)?;
    let r = renormalization_term(field, path, basis, n)?;
    Ok(g - r)
}

/// `∫₀¹ α(x(t))·ẋ(t) dt` for node values of a Cameron–Martin path `x`, by the
/// trapezoidal Stieltjes sum `Σ ½(α(x_k) + α(x_{k+1}))·(x_{k+1} − x_k)`.
fn line_integral(field: &dyn VectorField, values: &[f64], dim: usize) -> f64 {
    let nodes = values.len() / dim;
    let mut prev = vec![0.0; dim];
    let mut next = vec![0.0; dim];
    field.eval(&values[..dim], &mut prev);
    let mut acc = 0.0;
    for k in 0..nodes - 1 {
        field.eval(&values[(k + 1) * dim..(k + 2) * dim], &mut next);
        for s in 0..dim {
            acc += 0.5 * (prev[s] + next[s]) * (values[(k + 1) * dim + s] - values[k * dim + s]);
        }
        std::mem::swap(&mut prev, &mut next);
    }
    acc
}

/// `g′_n = ∫₀¹ α(ω_n(t))·ω̇_n(t) dt` with `ω_n` the basis approximation of the path.
pub fn wong_zakai_sum(field: &dyn VectorField, path: &SamplePath, basis: &BasisFamily, n: usize) -> Result<f64> {
    Error::check_dim(field.dim(), path.dim())?;
    let table = prefix_table(path, basis, n)?;
    let (_, approx) = crate::path::approximate_with_table(path, &table);
    Ok(line_integral(field, approx.values(), path.dim()))
}

/// Left-point sum `Σ α(ω(t_k))·Δω_k`.
pub fn ito_integral(field: &dyn VectorField, path: &SamplePath) -> Result<f64> {
    Error::check_dim(field.dim(), path.dim())?;
    let d = path.dim();
    let mut a = vec![0.0; d];
    let mut acc = 0.0;
    for k in 0..path.grid().num_steps() {
        field.eval(path.at(k), &mut a);
        acc += (0..d).map(|s| a[s] * (path.at(k + 1)[s] - path.at(k)[s])).sum::<f64>();
    }
    Ok(acc)
}

/// Midpoint sum `Σ α((ω(t_k) + ω(t_{k+1}))/2)·Δω_k`.
pub fn stratonovich_integral(field: &dyn VectorField, path: &SamplePath) -> Result<f64> {
    Error::check_dim(field.dim(), path.dim())?;
    let d = path.dim();
    let mut mid = vec![0.0; d];
    let mut a = vec![0.0; d];
    let mut acc = 0.0;
    for k in 0..path.grid().num_steps() {
        let (x0, x1) = (path.at(k), path.at(k + 1));
        for s in 0..d {
            mid[s] = 0.5 * (x0[s] + x1[s]);
        }
        field.eval(&mid, &mut a);
        acc += (0..d).map(|s| a[s] * (x1[s] - x0[s])).sum::<f64>();
    }
    Ok(acc)
}

/// `½ ∫₀¹ ∇·α(ω(t)) dt` by trapezoid: the Itô–Stratonovich correction.
pub fn half_divergence_integral(field: &dyn VectorField, path: &SamplePath) -> Result<f64> {
    Error::check_dim(field.dim(), path.dim())?;
    let div: Vec<f64> = (0..path.grid().num_nodes())
        .map(|k| field.divergence(path.at(k)))
        .collect();
    Ok(0.5 * crate::quadrature::trapezoid(&div, path.grid().step()))
}

/// A sequence of finite-dimensional projectors `P_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorSequence {
    /// `P_n` projects onto the first `n` elements of an enumerated family.
    Prefix(BasisFamily),
    /// `P_n` projects onto the piecewise-linear paths with knots at `i/n`.
    PiecewiseLinearLevels { dim: usize },
}

impl ProjectorSequence {
    /// Parse a basis name plus order. `plin` without a level selects the
    /// piecewise-linear level sequence; `plin:<level>` is one finite family.
    pub fn parse(name: &str, order: EnumerationOrder, dim: usize) -> Result<Self> {
        if name.trim() == "plin" {
            if order != EnumerationOrder::Balanced {
                return Err(Error::config("piecewise-linear levels take no order"));
            }
            if dim == 0 {
                return Err(Error::UnsupportedDimension { what: "plin", dim });
            }
            return Ok(ProjectorSequence::PiecewiseLinearLevels { dim });
        }
        Ok(ProjectorSequence::Prefix(parse_family(name, dim)?.with_order(order)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            ProjectorSequence::Prefix(f) => f.dim(),
            ProjectorSequence::PiecewiseLinearLevels { dim } => *dim,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProjectorSequence::Prefix(f) => f.to_string(),
            ProjectorSequence::PiecewiseLinearLevels { .. } => "plin".to_string(),
        }
    }

    /// Tabulate every projector needed for `schedule` on `grid`.
    pub fn prepare(&self, grid: &TimeGrid, schedule: &[usize]) -> Result<PreparedProjectors> {
        validate_schedule(schedule)?;
        let max = *schedule.last().unwrap();
        let check_knots = |level: usize| -> Result<()> {
            if !grid.num_steps().is_multiple_of(level) {
                return Err(Error::config(format!(
                    "piecewise-linear level {level} does not divide the grid ({} steps)",
                    grid.num_steps()
                )));
            }
            Ok(())
        };
        let tables = match self {
            ProjectorSequence::Prefix(family) => {
                if let crate::basis::FamilyKind::PiecewiseLinear { level, .. } = family.kind() {
                    check_knots(level as usize)?;
                }
                vec![BasisTable::new(&family.prefix(max)?, grid)]
            }
            ProjectorSequence::PiecewiseLinearLevels { dim } => schedule
                .iter()
                .map(|&level| {
                    check_knots(level)?;
                    let family = piecewise_linear_basis(level as u32, *dim)?;
                    Ok(BasisTable::new(&family.prefix(family.len().unwrap())?, grid))
                })
                .collect::<Result<_>>()?,
        };
        Ok(PreparedProjectors {
            sequence: *self,
            schedule: schedule.to_vec(),
            tables,
        })
    }
}

pub(crate) fn validate_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::config("truncation schedule is empty"));
    }
    if schedule[0] == 0 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(
            "truncation schedule must be strictly increasing and start at >= 1",
        ));
    }
    Ok(())
}

/// Projector tables for one grid and schedule, shared read-only across paths.
#[derive(Debug, Clone)]
pub struct PreparedProjectors {
    sequence: ProjectorSequence,
    schedule: Vec<usize>,
    tables: Vec<BasisTable>,
}

impl PreparedProjectors {
    pub fn sequence(&self) -> &ProjectorSequence {
        &self.sequence
    }

    pub fn schedule(&self) -> &[usize] {
        &self.schedule
    }

    pub fn grid(&self) -> &TimeGrid {
        self.tables[0].grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub n: usize,
    pub g: f64,
    pub r: f64,
    pub h: f64,
    pub gprime: f64,
}

/// Per-path record of the truncated sums across a schedule, with reference integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct OgawaLedger {
    pub basis: String,
    pub path_index: u64,
    pub entries: Vec<LedgerEntry>,
    pub ito: f64,
    pub strat: f64,
}

struct PathContext<'a> {
    field: &'a dyn VectorField,
    path: &'a SamplePath,
    alpha: Vec<f64>,
    jac: Vec<f64>,
}

impl PathContext<'_> {
    /// `(g, r, g′)` over a full table, or running values at each `stops` prefix length.
    fn sweep(&self, table: &BasisTable, stops: &[usize]) -> Vec<(f64, f64, f64)> {
        let d = self.path.dim();
        let h = self.path.grid().step();
        let mut delta = vec![0.0; self.path.grid().num_steps() * d];
        let (mut g, mut r) = (0.0, 0.0);
        let mut out = Vec::with_capacity(stops.len());
        let mut next = 0;
        for (i, el) in table.iter().enumerate() {
            let coef = el.paley_wiener(self.path.values(), d);
            g += coef * el.pairing(&self.alpha, d, h);
            r += el.diagonal(&self.jac, d, h);
            el.add_increments(coef, &mut delta, d);
            if next < stops.len() && stops[next] == i + 1 {
                let approx = integrate_increments(&delta, d);
                out.push((g, r, line_integral(self.field, &approx, d)));
                next += 1;
            }
        }
        out
    }
}

/// Evaluate every schedule entry of `projectors` on one path.
pub fn build_ledger(
    field: &dyn VectorField,
    path: &SamplePath,
    projectors: &PreparedProjectors,
    path_index: u64,
) -> Result<OgawaLedger> {
    Error::check_dim(field.dim(), path.dim())?;
    Error::check_dim(path.dim(), projectors.sequence.dim())?;
    if path.grid() != projectors.grid() {
        return Err(Error::invalid("path grid differs from the tabulated projector grid"));
    }
    let ctx = PathContext {
        field,
        path,
        alpha: field_on_path(field, path),
        jac: jacobian_on_path(field, path),
    };
    let sums: Vec<(f64, f64, f64)> = match projectors.sequence {
        ProjectorSequence::Prefix(_) => ctx.sweep(&projectors.tables[0], &projectors.schedule),
        ProjectorSequence::PiecewiseLinearLevels { .. } => {
            projectors.tables.iter().map(|t| ctx.sweep(t, &[t.len()])[0]).collect()
        }
    };
    let entries = projectors
        .schedule
        .iter()
        .zip(sums)
        .map(|(&n, (g, r, gprime))| LedgerEntry {
            n,
            g,
            r,
            h: g - r,
            gprime,
        })
        .collect();
    Ok(OgawaLedger {
        basis: projectors.sequence.label(),
        path_index,
        entries,
        ito: ito_integral(field, path)?,
        strat: stratonovich_integral(field, path)?,
    })
}

/// CSV `path_index,n,g,r,h,gprime,ito,strat` with 17 significant digits.
pub fn write_ledger_csv<W: Write>(ledgers: &[OgawaLedger], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path_index", "n", "g", "r", "h", "gprime", "ito", "strat"])?;
    for l in ledgers {
        for e in &l.entries {
            w.write_record([
                l.path_index.to_string(),
                e.n.to_string(),
                fmt_f64(e.g),
                fmt_f64(e.r),
                fmt_f64(e.h),
                fmt_f64(e.gprime),
                fmt_f64(l.ito),
                fmt_f64(l.strat),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<ledger csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{component_trig_basis, haar_basis, mixed_trig_basis, piecewise_linear_basis};
    use crate::field::{ConstantField, LinearField, MatrixField, SineField};
    use crate::path::{sample_brownian, RngSpec};
    use crate::quadrature::mean_and_stderr;
    use std::f64::consts::PI;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(n).unwrap()
    }

    const ID1: fn() -> MatrixField = || MatrixField::identity(1);

    #[test]
    fn zero_integrand_gives_zero() {
        let g = grid(64);
        let p = sample_brownian(g, 2, &RngSpec::new(0), 0).unwrap();
        let zero = ConstantField { value: vec![0.0, 0.0] };
        for n in [1, 5, 17] {
            let v = ogawa_partial_sum(&FieldIntegrand(&zero), &p, &component_trig_basis(2).unwrap(), n).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn identity_on_ramp_with_constant_basis() {
        let g = grid(128);
        let p = SamplePath::ramp(g, 1).unwrap();
        let id = ID1();
        let basis = haar_basis(1).unwrap();
        let g1 = ogawa_partial_sum(&FieldIntegrand(&id), &p, &basis, 1).unwrap();
        assert!((g1 - 0.5).abs() < 1e-14);
        let r1 = renormalization_term(&id, &p, &basis, 1).unwrap();
        assert!((r1 - 0.5).abs() < 1e-14);
        assert!(renormalized_sum(&id, &p, &basis, 1).unwrap().abs() < 1e-14);
    }

    #[test]
    fn coefficient_and_stieltjes_routes_agree() {
        let g = grid(1024);
        let rng = RngSpec::new(1);
        let f = SineField { dim: 2, amplitude: 0.4 };
        for i in 0..10 {
            let p = sample_brownian(g, 2, &rng, i).unwrap();
            for basis in [
                haar_basis(2).unwrap(),
                component_trig_basis(2).unwrap(),
                mixed_trig_basis(),
            ] {
                let a = ogawa_partial_sum(&FieldIntegrand(&f), &p, &basis, 8).unwrap();
                let b = ogawa_partial_sum_stieltjes(&FieldIntegrand(&f), &p, &basis, 8).unwrap();
                assert!((a - b).abs() < 1e-10, "{basis}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn coefficient_route_matches_inner_product_with_g() {
        // g_n = ⟨G(ω), P̃_n ω⟩ = Σ_i n_{e_i} ⟨G, e_i⟩ with ⟨G, e_i⟩ = ∫ Ġ·φ_i
        let g = grid(2048);
        let p = sample_brownian(g, 2, &RngSpec::new(2), 0).unwrap();
        let f = LinearField::new(1.0, 0.5, -0.3, 2.0);
        let basis = component_trig_basis(2).unwrap();
        let n = 10;
        let gn = ogawa_partial_sum(&FieldIntegrand(&f), &p, &basis, n).unwrap();
        let gpath = crate::field::evaluate_g(&f, &p).unwrap();
        let gdot = crate::field::u_inverse(&gpath);
        let cs = crate::path::project_coefficients(&p, &basis, n).unwrap();
        let table = BasisTable::new(&basis.prefix(n).unwrap(), &g);
        let via_g: f64 = cs
            .iter()
            .zip(table.iter())
            .map(|(c, el)| c * el.pairing(&gdot, 2, g.step()))
            .sum();
        assert!((gn - via_g).abs() < 1e-3, "{gn} vs {via_g}");
    }

    #[test]
    fn fn_integrand_hook() {
        let g = grid(256);
        let p = sample_brownian(g, 1, &RngSpec::new(3), 0).unwrap();
        // anticipating integrand f(t, ω) = ω(1)
        let f = FnIntegrand::new(1, |_k, path: &SamplePath, out: &mut [f64]| out[0] = path.endpoint()[0]);
        let v = ogawa_partial_sum(&f, &p, &haar_basis(1).unwrap(), 16).unwrap();
        // only the constant element sees a constant integrand
        assert!((v - p.endpoint()[0].powi(2)).abs() < 1e-12);
    }

    #[test]
    fn constant_field_renormalization_vanishes() {
        let g = grid(256);
        let p = sample_brownian(g, 2, &RngSpec::new(4), 0).unwrap();
        let c = ConstantField { value: vec![1.5, -0.5] };
        for n in [1, 4, 33] {
            assert_eq!(
                renormalization_term(&c, &p, &component_trig_basis(2).unwrap(), n).unwrap(),
                0.0
            );
        }
        let h = renormalized_sum(&c, &p, &haar_basis(2).unwrap(), 64).unwrap();
        let want = 1.5 * p.endpoint()[0] - 0.5 * p.endpoint()[1];
        assert!((h - want).abs() < 1e-12);
    }

    #[test]
    fn plin_trace_is_half_divergence_at_every_level() {
        let g = grid(720);
        let p = sample_brownian(g, 2, &RngSpec::new(5), 0).unwrap();
        let f = LinearField::new(0.7, -1.3, 2.1, 0.4);
        for level in [1u32, 2, 3, 5, 8, 16, 45] {
            let basis = piecewise_linear_basis(level, 2).unwrap();
            let r = renormalization_term(&f, &p, &basis, 2 * level as usize).unwrap();
            assert!((r - 0.55).abs() < 1e-10, "level {level}: {r}");
            let e = basis.element(0).unwrap();
            let entry = diagonal_entry(&f, &p, &e).unwrap();
            assert!((entry - 0.7 / (2.0 * level as f64)).abs() < 1e-10);
        }
    }

    #[test]
    fn psi_trace_is_half_divergence() {
        let g = grid(1024);
        let p = sample_brownian(g, 2, &RngSpec::new(6), 0).unwrap();
        let f = LinearField::new(0.7, -1.3, 2.1, 0.4);
        let traj = renormalization_trajectory(&f, &p, &component_trig_basis(2).unwrap(), 40).unwrap();
        for r in &traj[1..] {
            assert!((r - 0.55).abs() < 1e-10);
        }
    }

    #[test]
    fn xi_entries_follow_the_curl() {
        let g = grid(1024);
        let p = SamplePath::zero(g, 2).unwrap();
        let f = LinearField::new(0.3, -1.0, 1.5, 0.2);
        let basis = mixed_trig_basis();
        for i in 2..2 + 4 * 10 {
            let e = basis.element(i).unwrap();
            let crate::basis::ElementLabel::Trig { freq, slot } = e.label() else {
                unreachable!()
            };
            let sign = if slot == 1 || slot == 4 { 1.0 } else { -1.0 };
            let want = sign * f.rot() / (4.0 * PI * freq as f64);
            assert!((diagonal_entry(&f, &p, &e).unwrap() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_renormalization_is_path_independent() {
        let g = grid(512);
        let rng = RngSpec::new(7);
        let f = LinearField::new(1.0, 2.0, 3.0, 4.0);
        let basis = haar_basis(2).unwrap();
        let base = renormalization_term(&f, &sample_brownian(g, 2, &rng, 0).unwrap(), &basis, 30).unwrap();
        for i in 1..20 {
            let r = renormalization_term(&f, &sample_brownian(g, 2, &rng, i).unwrap(), &basis, 30).unwrap();
            assert!((r - base).abs() < 1e-10);
        }
    }

    #[test]
    fn wong_zakai_constant_field() {
        let g = grid(256);
        let p = sample_brownian(g, 2, &RngSpec::new(8), 0).unwrap();
        let c = ConstantField { value: vec![2.0, 1.0] };
        let v = wong_zakai_sum(&c, &p, &piecewise_linear_basis(8, 2).unwrap(), 16).unwrap();
        let want = 2.0 * p.endpoint()[0] + p.endpoint()[1];
        assert!((v - want).abs() < 1e-12);
    }

    #[test]
    fn wong_zakai_chain_rule_for_identity() {
        let g = grid(512);
        let p = sample_brownian(g, 1, &RngSpec::new(9), 0).unwrap();
        for level in [1u32, 4, 16, 64] {
            let v = wong_zakai_sum(&ID1(), &p, &piecewise_linear_basis(level, 1).unwrap(), level as usize).unwrap();
            assert!((v - p.endpoint()[0].powi(2) / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn reference_integrals() {
        let g = grid(1000);
        let ramp = SamplePath::ramp(g, 1).unwrap();
        let id = ID1();
        let ito = ito_integral(&id, &ramp).unwrap();
        assert!((ito - 0.5).abs() <= 1.0 / 1000.0);
        let strat = stratonovich_integral(&id, &ramp).unwrap();
        assert!((strat - 0.5).abs() < 1e-12);
        let p = sample_brownian(g, 1, &RngSpec::new(10), 0).unwrap();
        assert!((stratonovich_integral(&id, &p).unwrap() - p.endpoint()[0].powi(2) / 2.0).abs() < 1e-12);
        let c = ConstantField { value: vec![3.0] };
        assert!((ito_integral(&c, &p).unwrap() - 3.0 * p.endpoint()[0]).abs() < 1e-12);
    }

    #[test]
    fn ito_sum_is_centered() {
        let g = grid(64);
        let rng = RngSpec::new(11);
        let sums: Vec<f64> = (0..20_000)
            .map(|i| ito_integral(&ID1(), &sample_brownian(g, 1, &rng, i).unwrap()).unwrap())
            .collect();
        let (mean, se) = mean_and_stderr(&sums);
        assert!(mean.abs() < 3.0 * se);
    }

    #[test]
    fn ledger_identity_and_schedule() {
        let g = grid(256);
        let rng = RngSpec::new(12);
        let f = SineField { dim: 2, amplitude: 0.3 };
        let seq = ProjectorSequence::Prefix(component_trig_basis(2).unwrap());
        let prepared = seq.prepare(&g, &[2, 6, 20]).unwrap();
        let p = sample_brownian(g, 2, &rng, 0).unwrap();
        let ledger = build_ledger(&f, &p, &prepared, 0).unwrap();
        assert_eq!(ledger.entries.len(), 3);
        for e in &ledger.entries {
            assert_eq!(e.h, e.g - e.r);
            let basis = component_trig_basis(2).unwrap();
            let g_direct = ogawa_partial_sum(&FieldIntegrand(&f), &p, &basis, e.n).unwrap();
            assert!((g_direct - e.g).abs() < 1e-12);
            let wz = wong_zakai_sum(&f, &p, &basis, e.n).unwrap();
            assert!((wz - e.gprime).abs() < 1e-12);
        }
    }

    #[test]
    fn plin_levels_sequence() {
        let g = grid(64);
        let seq = ProjectorSequence::parse("plin", EnumerationOrder::Balanced, 1).unwrap();
        let prepared = seq.prepare(&g, &[1, 2, 4, 8]).unwrap();
        let p = sample_brownian(g, 1, &RngSpec::new(13), 0).unwrap();
        let ledger = build_ledger(&ID1(), &p, &prepared, 0).unwrap();
        for e in &ledger.entries {
            assert!((e.gprime - p.endpoint()[0].powi(2) / 2.0).abs() < 1e-12);
            assert!((e.r - 0.5).abs() < 1e-12);
        }
        assert!(seq.prepare(&g, &[3]).is_err());
        assert!(seq.prepare(&g, &[4, 2]).is_err());
        assert!(ProjectorSequence::parse("plin", EnumerationOrder::Adversarial(2), 2).is_err());
    }

    #[test]
    fn finite_family_exhaustion() {
        let g = grid(64);
        let p = SamplePath::zero(g, 1).unwrap();
        let r = ogawa_partial_sum(&FieldIntegrand(&ID1()), &p, &piecewise_linear_basis(4, 1).unwrap(), 5);
        assert!(matches!(r, Err(Error::BasisExhausted { .. })));
    }

    #[test]
    fn ledger_csv_header() {
        let ledger = OgawaLedger {
            basis: "haar".into(),
            path_index: 3,
            entries: vec![LedgerEntry {
                n: 4,
                g: 1.0,
                r: 0.5,
                h: 0.5,
                gprime: 0.9,
            }],
            ito: 0.1,
            strat: 0.2,
        };
        let mut buf = Vec::new();
        write_ledger_csv(&[ledger], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("path_index,n,g,r,h,gprime,ito,strat\n3,4,1.0000000000000000e0,"));
    }
}
