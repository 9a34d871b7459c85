//! Orthonormal systems of `L²([0,1]; ℝᵈ)` with closed-form primitives.

mod element;
mod family;
mod table;

pub use element::{BasisElement, Component, ElementLabel, ScalarShape, Side};
pub use family::{
    component_trig_basis, haar_basis, mixed_trig_basis, parse_family, piecewise_linear_basis, BasisFamily,
    EnumerationOrder, FamilyKind,
};
pub use table::{BasisTable, ElementTable};

use crate::error::{Error, Result};
use crate::path::TimeGrid;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `⟨φ, χ⟩_{L²}` by the cellwise one-sided trapezoid.
pub fn inner_product(a: &BasisElement, b: &BasisElement, grid: &TimeGrid) -> Result<f64> {
    Error::check_dim(a.dim(), b.dim())?;
    let mut acc = 0.0;
    for c in 0..grid.num_steps() {
        let (t0, t1) = (grid.t(c), grid.t(c + 1));
        acc += dot(&a.value_at(t0, Side::Right), &b.value_at(t0, Side::Right));
        acc += dot(&a.value_at(t1, Side::Left), &b.value_at(t1, Side::Left));
    }
    Ok(0.5 * grid.step() * acc)
}

/// Gram matrix (row-major `n × n`) of the first `n` elements.
pub fn gram_matrix(family: &BasisFamily, n: usize, grid: &TimeGrid) -> Result<Vec<f64>> {
    let elems = family.prefix(n)?;
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = inner_product(&elems[i], &elems[j], grid)?;
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    Ok(g)
}

/// `(‖u_1‖, …, ‖u_N‖)` with `u_n(t) = Σ_{i≤n} φ_i(t)·e_i(t)`.
///
/// A family is regular when this sequence stays bounded.
pub fn regularity_diagnostic(family: &BasisFamily, n_max: usize, grid: &TimeGrid) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::invalid("regularity diagnostic needs N >= 1"));
    }
    let elems = family.prefix(n_max)?;
    let steps = grid.num_steps();
    let mut u_start = vec![0.0; steps];
    let mut u_end = vec![0.0; steps];
    let mut norms = Vec::with_capacity(n_max);
    for el in &elems {
        for c in 0..steps {
            let (t0, t1) = (grid.t(c), grid.t(c + 1));
            u_start[c] += dot(&el.value_at(t0, Side::Right), &el.primitive(t0));
            u_end[c] += dot(&el.value_at(t1, Side::Left), &el.primitive(t1));
        }
        let sq: f64 = u_start.iter().zip(&u_end).map(|(a, b)| a * a + b * b).sum();
        norms.push((0.5 * grid.step() * sq).sqrt());
    }
    Ok(norms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    fn max_gram_defect(family: &BasisFamily, n: usize, grid: &TimeGrid) -> f64 {
        let g = gram_matrix(family, n, grid).unwrap();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[i * n + j] - target).abs());
            }
        }
        worst
    }

    #[test]
    fn psi_gram_identity() {
        let grid = TimeGrid::new(1024).unwrap();
        assert!(max_gram_defect(&component_trig_basis(2).unwrap(), 10, &grid) < 1e-8);
    }

    #[test]
    fn xi_gram_identity() {
        let grid = TimeGrid::new(1024).unwrap();
        assert!(max_gram_defect(&mixed_trig_basis(), 10, &grid) < 1e-8);
    }

    #[test]
    fn haar_gram_identity() {
        let grid = TimeGrid::new(256).unwrap();
        assert!(max_gram_defect(&haar_basis(1).unwrap(), 16, &grid) < 1e-10);
        assert!(max_gram_defect(&haar_basis(2).unwrap(), 16, &grid) < 1e-10);
    }

    #[test]
    fn plin_level4_gram_exact_on_quarter_grid() {
        let grid = TimeGrid::new(4).unwrap();
        assert!(max_gram_defect(&piecewise_linear_basis(4, 2).unwrap(), 8, &grid) < 1e-14);
    }

    #[test]
    fn every_family_orthonormal_on_fine_grid() {
        let grid = TimeGrid::new(1 << 14).unwrap();
        let families = [
            component_trig_basis(1).unwrap(),
            component_trig_basis(2).unwrap(),
            mixed_trig_basis(),
            mixed_trig_basis().with_order(EnumerationOrder::Adversarial(4)).unwrap(),
            haar_basis(1).unwrap(),
            haar_basis(2).unwrap(),
            piecewise_linear_basis(16, 2).unwrap(),
        ];
        for f in &families {
            assert!(max_gram_defect(f, 32, &grid) < 1e-6, "{f}");
        }
    }

    #[test]
    fn constant_primitives() {
        let psi = component_trig_basis(2).unwrap();
        assert_eq!(psi.element(0).unwrap().primitive(0.3), vec![0.3, 0.0]);
        let haar = haar_basis(2).unwrap();
        assert_eq!(haar.element(1).unwrap().primitive(0.7), vec![0.0, 0.7]);
        let e = psi.element(2).unwrap().primitive(0.25);
        assert!((e[0] - SQRT_2 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(e[1], 0.0);
    }

    #[test]
    fn plin_level_one_is_constant() {
        let f = piecewise_linear_basis(1, 1).unwrap();
        let e = f.element(0).unwrap();
        assert_eq!(e.value(0.4), vec![1.0]);
        assert_eq!(e.primitive(0.4), vec![0.4]);
    }

    #[test]
    fn primitive_derivative_matches_value() {
        let grid = TimeGrid::new(64).unwrap();
        let h = 1e-6;
        let families = [
            component_trig_basis(2).unwrap(),
            mixed_trig_basis(),
            haar_basis(2).unwrap(),
        ];
        for f in &families {
            for el in f.prefix(12).unwrap() {
                for k in 0..grid.num_steps() {
                    // cell midpoints avoid the jumps
                    let t = grid.t(k) + 0.5 * grid.step();
                    let (p, m) = (el.primitive(t + h), el.primitive(t - h));
                    let v = el.value(t);
                    for c in 0..el.dim() {
                        let fd = (p[c] - m[c]) / (2.0 * h);
                        assert!((fd - v[c]).abs() < 1e-5, "{} at {t}", el.label());
                    }
                }
            }
        }
    }

    #[test]
    fn regularity_of_constant_basis() {
        let grid = TimeGrid::new(512).unwrap();
        let u = regularity_diagnostic(&haar_basis(1).unwrap(), 1, &grid).unwrap();
        assert!((u[0] - 1.0 / 3f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn haar_and_trig_are_regular() {
        let grid = TimeGrid::new(4096).unwrap();
        for f in [haar_basis(1).unwrap(), component_trig_basis(1).unwrap()] {
            let u = regularity_diagnostic(&f, 64, &grid).unwrap();
            let max_tail = u[15..].iter().cloned().fold(0.0, f64::max);
            assert!(max_tail <= 1.1 * u[15], "{f}: {max_tail} vs {}", u[15]);
        }
    }

    proptest! {
        #[test]
        fn prefixes_have_distinct_labels(k in 1u32..20, n in 1usize..120) {
            let f = mixed_trig_basis().with_order(EnumerationOrder::Adversarial(k)).unwrap();
            let labels: std::collections::HashSet<_> = (0..n).map(|i| f.label(i).unwrap()).collect();
            prop_assert_eq!(labels.len(), n);
        }

        #[test]
        fn haar_prefix_labels_distinct(d in 1usize..4, n in 1usize..200) {
            let f = haar_basis(d).unwrap();
            let labels: std::collections::HashSet<_> = (0..n).map(|i| f.label(i).unwrap()).collect();
            prop_assert_eq!(labels.len(), n);
        }
    }
}
