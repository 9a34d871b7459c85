use std::f64::consts::{PI, SQRT_2};
use std::fmt;

/// Which one-sided limit to take at a jump of a piecewise-constant element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Limit from the right, `φ(t⁺)`.
    Right,
    /// Limit from the left, `φ(t⁻)`.
    Left,
}

/// Scalar profile of one coordinate of a basis element on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarShape {
    Constant,
    /// `cos(2π·freq·t)`
    Cos {
        freq: u32,
    },
    /// `sin(2π·freq·t)`
    Sin {
        freq: u32,
    },
    /// Dyadic Haar wavelet `2^{level/2}·h(2^level·t − position)`.
    Haar {
        level: u32,
        position: u32,
    },
    /// `√n·𝟙[i/n, (i+1)/n]`, the derivative of the piecewise-linear element `z_{n,i}`.
    Ramp {
        level: u32,
        index: u32,
    },
}

fn in_interval(t: f64, a: f64, b: f64, side: Side) -> bool {
    match side {
        Side::Right => t >= a && t < b,
        Side::Left => t > a && t <= b,
    }
}

impl ScalarShape {
    pub fn value(&self, t: f64, side: Side) -> f64 {
        match *self {
            ScalarShape::Constant => 1.0,
            ScalarShape::Cos { freq } => (2.0 * PI * freq as f64 * t).cos(),
            ScalarShape::Sin { freq } => (2.0 * PI * freq as f64 * t).sin(),
            ScalarShape::Haar { level, position } => {
                let scale = (1u64 << level) as f64;
                let (a, mid, b) = (
                    position as f64 / scale,
                    (position as f64 + 0.5) / scale,
                    (position as f64 + 1.0) / scale,
                );
                let amp = scale.sqrt();
                if in_interval(t, a, mid, side) {
                    amp
                } else if in_interval(t, mid, b, side) {
                    -amp
                } else {
                    0.0
                }
            }
            ScalarShape::Ramp { level, index } => {
                let n = level as f64;
                if in_interval(t, index as f64 / n, (index as f64 + 1.0) / n, side) {
                    n.sqrt()
                } else {
                    0.0
                }
            }
        }
    }

    /// Closed-form primitive `∫₀ᵗ` of the profile.
    pub fn primitive(&self, t: f64) -> f64 {
        match *self {
            ScalarShape::Constant => t,
            ScalarShape::Cos { freq } => {
                let w = 2.0 * PI * freq as f64;
                (w * t).sin() / w
            }
            ScalarShape::Sin { freq } => {
                let w = 2.0 * PI * freq as f64;
                (1.0 - (w * t).cos()) / w
            }
            ScalarShape::Haar { level, position } => {
                let scale = (1u64 << level) as f64;
                let (a, mid, b) = (
                    position as f64 / scale,
                    (position as f64 + 0.5) / scale,
                    (position as f64 + 1.0) / scale,
                );
                let amp = scale.sqrt();
                if t <= a || t >= b {
                    0.0
                } else if t <= mid {
                    amp * (t - a)
                } else {
                    amp * (b - t)
                }
            }
            ScalarShape::Ramp { level, index } => {
                let n = level as f64;
                let (a, b) = (index as f64 / n, (index as f64 + 1.0) / n);
                if t <= a {
                    0.0
                } else if t < b {
                    n.sqrt() * (t - a)
                } else {
                    1.0 / n.sqrt()
                }
            }
        }
    }

    /// Closed interval of `[0,1]` outside which the profile vanishes.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ScalarShape::Constant | ScalarShape::Cos { .. } | ScalarShape::Sin { .. } => (0.0, 1.0),
            ScalarShape::Haar { level, position } => {
                let scale = (1u64 << level) as f64;
                (position as f64 / scale, (position as f64 + 1.0) / scale)
            }
            ScalarShape::Ramp { level, index } => {
                let n = level as f64;
                (index as f64 / n, (index as f64 + 1.0) / n)
            }
        }
    }
}

/// One nonzero coordinate of a basis element: `scale · shape(t)` in `slot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub slot: usize,
    pub scale: f64,
    pub shape: ScalarShape,
}

/// Identity of an element inside its family, independent of enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementLabel {
    /// Constant unit vector in `slot`.
    Constant {
        slot: usize,
    },
    /// Oscillatory element of a trigonometric family; `slot` is 1-based within the frequency block.
    Trig {
        freq: u32,
        slot: u8,
    },
    Haar {
        level: u32,
        position: u32,
        slot: usize,
    },
    Ramp {
        level: u32,
        index: u32,
        slot: usize,
    },
}

impl fmt::Display for ElementLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementLabel::Constant { slot } => write!(f, "const[{slot}]"),
            ElementLabel::Trig { freq, slot } => write!(f, "trig[{freq},{slot}]"),
            ElementLabel::Haar { level, position, slot } => write!(f, "haar[{level},{position}][{slot}]"),
            ElementLabel::Ramp { level, index, slot } => write!(f, "ramp[{level},{index}][{slot}]"),
        }
    }
}

/// An element `φ` of an orthonormal system of `L²([0,1]; ℝᵈ)` together with its
/// primitive `e(t) = ∫₀ᵗ φ`, both in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisElement {
    dim: usize,
    components: Vec<Component>,
    label: ElementLabel,
}

impl BasisElement {
    pub fn new(dim: usize, components: Vec<Component>, label: ElementLabel) -> Self {
        debug_assert!(components.iter().all(|c| c.slot < dim));
        BasisElement { dim, components, label }
    }

    pub(crate) fn scalar(dim: usize, slot: usize, scale: f64, shape: ScalarShape, label: ElementLabel) -> Self {
        Self::new(dim, vec![Component { slot, scale, shape }], label)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> ElementLabel {
        self.label
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// `φ(t)` using the right-continuous convention (left limit at `t = 1`).
    pub fn value(&self, t: f64) -> Vec<f64> {
        let side = if t >= 1.0 { Side::Left } else { Side::Right };
        self.value_at(t, side)
    }

    pub fn value_at(&self, t: f64, side: Side) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for c in &self.components {
            out[c.slot] += c.scale * c.shape.value(t, side);
        }
        out
    }

    /// `e(t) = ∫₀ᵗ φ(s) ds`.
    pub fn primitive(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for c in &self.components {
            out[c.slot] += c.scale * c.shape.primitive(t);
        }
        out
    }

    pub fn support(&self) -> (f64, f64) {
        self.components.iter().fold((1.0, 0.0), |(lo, hi), c| {
            let (a, b) = c.shape.support();
            (f64::min(lo, a), f64::max(hi, b))
        })
    }
}

pub(crate) const TRIG_AMPLITUDE: f64 = SQRT_2;
