use rand_distr::{Distribution, StandardNormal};

use super::VectorField;
use crate::path::RngSpec;
use crate::quadrature::mean_and_stderr;

/// Form of the right-hand side of the Gaussian inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RamerRhs {
    /// `E[|f|² + ‖Jf‖₂²]`.
    #[default]
    Plain,
    /// `E[(|f|² + ‖Jf‖₂²)²]`.
    Squared,
}

/// Monte Carlo estimates for `E[(f(x)·x − Tr Jf(x))²] ≤ E[|f(x)|² + ‖Jf(x)‖₂²]`
/// under the standard Gaussian on `ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamerEstimate {
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    /// Standard error of the per-sample difference `lhs_i − rhs_i`.
    pub diff_se: f64,
    pub samples: usize,
}

impl RamerEstimate {
    /// `lhs ≤ rhs + 3·SE` with the SE of the paired difference.
    pub fn holds(&self) -> bool {
        self.lhs - self.rhs <= 3.0 * self.diff_se + 1e-12
    }

    /// `|lhs − rhs| ≤ 3·SE`.
    pub fn is_equality(&self) -> bool {
        (self.lhs - self.rhs).abs() <= 3.0 * self.diff_se + 1e-12
    }
}

pub fn gaussian_ramer_check(f: &dyn VectorField, samples: usize, rng: &RngSpec, rhs_form: RamerRhs) -> RamerEstimate {
    let n = f.dim();
    let mut stream = rng.stream(0);
    let mut x = vec![0.0; n];
    let mut fx = vec![0.0; n];
    let mut jac = vec![0.0; n * n];
    let mut lhs = Vec::with_capacity(samples);
    let mut rhs = Vec::with_capacity(samples);
    let mut diff = Vec::with_capacity(samples);
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = StandardNormal.sample(&mut stream);
        }
        f.eval(&x, &mut fx);
        f.jacobian(&x, &mut jac);
        let dot: f64 = fx.iter().zip(&x).map(|(a, b)| a * b).sum();
        let trace: f64 = (0..n).map(|i| jac[i * n + i]).sum();
        let l = (dot - trace).powi(2);
        let base = fx.iter().map(|v| v * v).sum::<f64>() + jac.iter().map(|v| v * v).sum::<f64>();
        let r = match rhs_form {
            RamerRhs::Plain => base,
            RamerRhs::Squared => base * base,
        };
        lhs.push(l);
        rhs.push(r);
        diff.push(l - r);
    }
    let (lhs_mean, lhs_se) = mean_and_stderr(&lhs);
    let (rhs_mean, rhs_se) = mean_and_stderr(&rhs);
    let (_, diff_se) = mean_and_stderr(&diff);
    RamerEstimate {
        lhs: lhs_mean,
        lhs_se,
        rhs: rhs_mean,
        rhs_se,
        diff_se,
        samples,
    }
}
