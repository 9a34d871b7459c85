//! Trapezoidal rules on uniform grids.
//!
//! Node-valued data is stored node-major: entry `(k, c)` of a `dim`-vector
//! field lives at `k * dim + c`.

/// Composite trapezoid of scalar node values with spacing `step`.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}

/// Cumulative trapezoid of `dim`-vector node values; the result starts at zero.
pub fn cumulative_trapezoid(values: &[f64], dim: usize, step: f64) -> Vec<f64> {
    let nodes = values.len() / dim;
    let mut out = vec![0.0; values.len()];
    for k in 1..nodes {
        for c in 0..dim {
            let cell = 0.5 * step * (values[(k - 1) * dim + c] + values[k * dim + c]);
            out[k * dim + c] = out[(k - 1) * dim + c] + cell;
        }
    }
    out
}

/// Trapezoid weights `h/2, h, ..., h, h/2` for `num_steps` cells.
pub fn trapezoid_weights(num_steps: usize) -> Vec<f64> {
    let h = 1.0 / num_steps as f64;
    let mut w = vec![h; num_steps + 1];
    w[0] = 0.5 * h;
    w[num_steps] = 0.5 * h;
    w
}

/// Node-wise derivative of `dim`-vector node values: central differences inside,
/// second-order one-sided stencils at both ends.
pub fn differentiate(values: &[f64], dim: usize, step: f64) -> Vec<f64> {
    let nodes = values.len() / dim;
    let mut out = vec![0.0; values.len()];
    if nodes < 3 {
        if nodes == 2 {
            for c in 0..dim {
                let d = (values[dim + c] - values[c]) / step;
                out[c] = d;
                out[dim + c] = d;
            }
        }
        return out;
    }
    let at = |k: usize, c: usize| values[k * dim + c];
    for c in 0..dim {
        out[c] = (-3.0 * at(0, c) + 4.0 * at(1, c) - at(2, c)) / (2.0 * step);
        for k in 1..nodes - 1 {
            out[k * dim + c] = (at(k + 1, c) - at(k - 1, c)) / (2.0 * step);
        }
        let n = nodes - 1;
        out[n * dim + c] = (3.0 * at(n, c) - 4.0 * at(n - 1, c) + at(n - 2, c)) / (2.0 * step);
    }
    out
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let m = samples.len();
    if m == 0 {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / m as f64;
    if m == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}
