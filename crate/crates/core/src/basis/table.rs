//! Basis elements sampled on a time grid.
//!
//! Every integral against `φ` uses the cellwise trapezoid
//! `Σ_c h/2 [F(t_c)·φ(t_c⁺) + F(t_{c+1})·φ(t_{c+1}⁻)]`. One-sided limits make the
//! rule exact for piecewise-constant elements whose jumps sit on grid nodes, and
//! for trigonometric polynomials it is the periodic trapezoid rule.

use super::element::{BasisElement, Side};
use crate::path::TimeGrid;

#[derive(Debug, Clone)]
struct ComponentTable {
    slot: usize,
    /// `φ(t_c⁺)` for each support cell.
    start: Vec<f64>,
    /// `φ(t_{c+1}⁻)` for each support cell.
    end: Vec<f64>,
    /// `e(t_k)` for nodes `first..=last`.
    prim: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ElementTable {
    first: usize,
    last: usize,
    comps: Vec<ComponentTable>,
}

fn support_cells(element: &BasisElement, num_steps: usize) -> (usize, usize) {
    let (a, b) = element.support();
    let n = num_steps as f64;
    let first = ((a * n + 1e-9).floor().max(0.0) as usize).min(num_steps - 1);
    let last = ((b * n - 1e-9).ceil() as usize).clamp(first + 1, num_steps);
    (first, last)
}

impl ElementTable {
    pub fn new(element: &BasisElement, grid: &TimeGrid) -> Self {
        let (first, last) = support_cells(element, grid.num_steps());
        let comps = element
            .components()
            .iter()
            .map(|c| {
                let start = (first..last)
                    .map(|k| c.scale * c.shape.value(grid.t(k), Side::Right))
                    .collect();
                let end = (first..last)
                    .map(|k| c.scale * c.shape.value(grid.t(k + 1), Side::Left))
                    .collect();
                let prim = (first..=last).map(|k| c.scale * c.shape.primitive(grid.t(k))).collect();
                ComponentTable {
                    slot: c.slot,
                    start,
                    end,
                    prim,
                }
            })
            .collect();
        ElementTable { first, last, comps }
    }

    /// Node values `first..=last` of a node-major array.
    fn nodes<'a>(&self, values: &'a [f64], width: usize) -> &'a [f64] {
        &values[self.first * width..(self.last + 1) * width]
    }

    /// Left-point Paley–Wiener sum `Σ_c φ(t_c⁺)·(ω(t_{c+1}) − ω(t_c))`.
    pub fn paley_wiener(&self, path: &[f64], dim: usize) -> f64 {
        let nodes = self.nodes(path, dim);
        let mut acc = 0.0;
        for comp in &self.comps {
            let s = comp.slot;
            for ((x0, x1), phi) in nodes
                .chunks_exact(dim)
                .zip(nodes[dim..].chunks_exact(dim))
                .zip(&comp.start)
            {
                acc += phi * (x1[s] - x0[s]);
            }
        }
        acc
    }

    /// `∫₀¹ F(t)·φ(t) dt` for node values `F`.
    pub fn pairing(&self, field: &[f64], dim: usize, step: f64) -> f64 {
        let nodes = self.nodes(field, dim);
        let mut acc = 0.0;
        for comp in &self.comps {
            let s = comp.slot;
            let cells = nodes.chunks_exact(dim).zip(nodes[dim..].chunks_exact(dim));
            for ((f0, f1), (a, b)) in cells.zip(comp.start.iter().zip(&comp.end)) {
                acc += f0[s] * a + f1[s] * b;
            }
        }
        0.5 * step * acc
    }

    /// `∫₀¹ φ(t)·J(t) e(t) dt` for node Jacobians `J` (row-major `dim × dim` per node).
    pub fn diagonal(&self, jacobians: &[f64], dim: usize, step: f64) -> f64 {
        let dd = dim * dim;
        let jac = self.nodes(jacobians, dd);
        let cells = self.last - self.first;
        let mut acc = 0.0;
        if let [comp] = self.comps.as_slice() {
            // φ and e share one slot: only J_{ss} contributes
            let ss = comp.slot * dim + comp.slot;
            let je: Vec<f64> = jac.chunks_exact(dd).zip(&comp.prim).map(|(j, e)| j[ss] * e).collect();
            for ((a, b), j) in comp.start.iter().zip(&comp.end).zip(je.windows(2)) {
                acc += a * j[0] + b * j[1];
            }
        } else {
            for comp in &self.comps {
                let row = comp.slot * dim;
                let je: Vec<f64> = (0..=cells)
                    .map(|i| self.comps.iter().map(|o| jac[i * dd + row + o.slot] * o.prim[i]).sum())
                    .collect();
                for i in 0..cells {
                    acc += comp.start[i] * je[i] + comp.end[i] * je[i + 1];
                }
            }
        }
        0.5 * step * acc
    }

    /// `delta[c] += coef · (e(t_{c+1}) − e(t_c))` over support cells.
    pub fn add_increments(&self, coef: f64, delta: &mut [f64], dim: usize) {
        let cells = &mut delta[self.first * dim..self.last * dim];
        for comp in &self.comps {
            for (d, e) in cells.chunks_exact_mut(dim).zip(comp.prim.windows(2)) {
                d[comp.slot] += coef * (e[1] - e[0]);
            }
        }
    }

    /// Accumulate `coef · φ` into one-sided per-cell derivative buffers.
    pub fn add_derivative(&self, coef: f64, start: &mut [f64], end: &mut [f64], dim: usize) {
        for comp in &self.comps {
            for (i, c) in (self.first..self.last).enumerate() {
                start[c * dim + comp.slot] += coef * comp.start[i];
                end[c * dim + comp.slot] += coef * comp.end[i];
            }
        }
    }
}

/// A finite list of basis elements tabulated on one grid, shareable across paths.
#[derive(Debug, Clone)]
pub struct BasisTable {
    dim: usize,
    grid: TimeGrid,
    elements: Vec<ElementTable>,
}

impl BasisTable {
    pub fn new(elements: &[BasisElement], grid: &TimeGrid) -> Self {
        let dim = elements.first().map_or(1, BasisElement::dim);
        BasisTable {
            dim,
            grid: *grid,
            elements: elements.iter().map(|e| ElementTable::new(e, grid)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, i: usize) -> &ElementTable {
        &self.elements[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ElementTable> {
        self.elements.iter()
    }
}
