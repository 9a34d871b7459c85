use std::fmt;
use std::str::FromStr;

use super::element::{BasisElement, Component, ElementLabel, ScalarShape, TRIG_AMPLITUDE};
use crate::error::{Error, Result};

/// Enumeration of a family's natural index set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnumerationOrder {
    /// Constants first, then complete frequency (or dyadic level) blocks.
    #[default]
    Balanced,
    /// Constants, then slots 1 and 4 of frequencies `1..=K`, then slots 2 and 3 of
    /// the same frequencies, then balanced blocks from frequency `K + 1`.
    /// Only meaningful for four-slot trigonometric blocks.
    Adversarial(u32),
}

impl fmt::Display for EnumerationOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnumerationOrder::Balanced => write!(f, "balanced"),
            EnumerationOrder::Adversarial(k) => write!(f, "adversarial:{k}"),
        }
    }
}

impl FromStr for EnumerationOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "balanced" {
            return Ok(EnumerationOrder::Balanced);
        }
        if let Some(k) = s.strip_prefix("adversarial:") {
            let k: u32 = k
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("bad adversarial order `{s}`")))?;
            if k == 0 {
                return Err(Error::config("adversarial order needs K >= 1"));
            }
            return Ok(EnumerationOrder::Adversarial(k));
        }
        Err(Error::config(format!(
            "unknown order `{s}` (expected balanced or adversarial:<K>)"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `ψ`: constants plus `√2 cos`, `√2 sin` placed in one coordinate at a time.
    ComponentTrig {
        dim: usize,
    },
    /// `ξ` (d = 2): constants plus `(cos,sin)`, `(sin,cos)`, `(−cos,sin)`, `(−sin,cos)`.
    MixedTrig,
    Haar {
        dim: usize,
    },
    /// The `d·level` elements `(z_{n,i}, 0, …)` and their coordinate permutations.
    PiecewiseLinear {
        level: u32,
        dim: usize,
    },
}

/// An orthonormal system of `L²([0,1]; ℝᵈ)` under a fixed enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisFamily {
    kind: FamilyKind,
    order: EnumerationOrder,
}

pub fn component_trig_basis(dim: usize) -> Result<BasisFamily> {
    if !(1..=2).contains(&dim) {
        return Err(Error::UnsupportedDimension { what: "psi-trig", dim });
    }
    Ok(BasisFamily {
        kind: FamilyKind::ComponentTrig { dim },
        order: EnumerationOrder::Balanced,
    })
}

pub fn mixed_trig_basis() -> BasisFamily {
    BasisFamily {
        kind: FamilyKind::MixedTrig,
        order: EnumerationOrder::Balanced,
    }
}

pub fn haar_basis(dim: usize) -> Result<BasisFamily> {
    if dim == 0 {
        return Err(Error::UnsupportedDimension { what: "haar", dim });
    }
    Ok(BasisFamily {
        kind: FamilyKind::Haar { dim },
        order: EnumerationOrder::Balanced,
    })
}

pub fn piecewise_linear_basis(level: u32, dim: usize) -> Result<BasisFamily> {
    if level == 0 {
        return Err(Error::invalid("piecewise-linear level must be >= 1"));
    }
    if dim == 0 {
        return Err(Error::UnsupportedDimension { what: "plin", dim });
    }
    Ok(BasisFamily {
        kind: FamilyKind::PiecewiseLinear { level, dim },
        order: EnumerationOrder::Balanced,
    })
}

impl BasisFamily {
    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn order(&self) -> EnumerationOrder {
        self.order
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            FamilyKind::ComponentTrig { dim } | FamilyKind::Haar { dim } => dim,
            FamilyKind::MixedTrig => 2,
            FamilyKind::PiecewiseLinear { dim, .. } => dim,
        }
    }

    /// Number of elements, `None` for infinite families.
    pub fn len(&self) -> Option<usize> {
        match self.kind {
            FamilyKind::PiecewiseLinear { level, dim } => Some(level as usize * dim),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Re-enumerate the family. Adversarial orders need four-slot frequency blocks.
    pub fn with_order(self, order: EnumerationOrder) -> Result<Self> {
        if let EnumerationOrder::Adversarial(_) = order {
            if self.block_size() != Some(4) {
                return Err(Error::config(format!(
                    "order `{order}` needs a four-slot trigonometric family, got `{self}`"
                )));
            }
        }
        Ok(BasisFamily { order, ..self })
    }

    fn block_size(&self) -> Option<u32> {
        match self.kind {
            FamilyKind::ComponentTrig { dim } => Some(2 * dim as u32),
            FamilyKind::MixedTrig => Some(4),
            _ => None,
        }
    }

    /// Natural label of the `i`-th element (0-based) under the family's order.
    pub fn label(&self, i: usize) -> Result<ElementLabel> {
        if let Some(len) = self.len() {
            if i >= len {
                return Err(self.exhausted(i + 1));
            }
        }
        let d = self.dim();
        Ok(match self.kind {
            FamilyKind::ComponentTrig { .. } | FamilyKind::MixedTrig => {
                if i < d {
                    ElementLabel::Constant { slot: i }
                } else {
                    let block = self.block_size().unwrap() as usize;
                    let (freq, slot) = trig_position(i - d, block, self.order);
                    ElementLabel::Trig { freq, slot }
                }
            }
            FamilyKind::Haar { .. } => {
                if i < d {
                    ElementLabel::Constant { slot: i }
                } else {
                    // level ℓ holds 2^ℓ positions per coordinate
                    let mut j = i - d;
                    let mut level = 0u32;
                    while j >= (d << level) {
                        j -= d << level;
                        level += 1;
                    }
                    ElementLabel::Haar {
                        level,
                        position: (j / d) as u32,
                        slot: j % d,
                    }
                }
            }
            FamilyKind::PiecewiseLinear { level, .. } => ElementLabel::Ramp {
                level,
                index: (i / d) as u32,
                slot: i % d,
            },
        })
    }

    /// The `i`-th element (0-based) under the family's order.
    pub fn element(&self, i: usize) -> Result<BasisElement> {
        let label = self.label(i)?;
        Ok(self.element_for(label))
    }

    /// The first `n` elements.
    pub fn prefix(&self, n: usize) -> Result<Vec<BasisElement>> {
        if let Some(len) = self.len() {
            if n > len {
                return Err(self.exhausted(n));
            }
        }
        (0..n).map(|i| self.element(i)).collect()
    }

    fn exhausted(&self, requested: usize) -> Error {
        Error::BasisExhausted {
            family: self.to_string(),
            requested,
            available: self.len().unwrap_or(usize::MAX),
        }
    }

    pub fn element_for(&self, label: ElementLabel) -> BasisElement {
        let d = self.dim();
        match label {
            ElementLabel::Constant { slot } => BasisElement::scalar(d, slot, 1.0, ScalarShape::Constant, label),
            ElementLabel::Trig { freq, slot } => match self.kind {
                FamilyKind::MixedTrig => {
                    let (cos, sin) = (ScalarShape::Cos { freq }, ScalarShape::Sin { freq });
                    let (x, y) = match slot {
                        1 => ((1.0, cos), (1.0, sin)),
                        2 => ((1.0, sin), (1.0, cos)),
                        3 => ((-1.0, cos), (1.0, sin)),
                        _ => ((-1.0, sin), (1.0, cos)),
                    };
                    BasisElement::new(
                        2,
                        vec![
                            Component {
                                slot: 0,
                                scale: x.0,
                                shape: x.1,
                            },
                            Component {
                                slot: 1,
                                scale: y.0,
                                shape: y.1,
                            },
                        ],
                        label,
                    )
                }
                _ => {
                    let s = (slot - 1) as usize;
                    let shape = if s.is_multiple_of(2) {
                        ScalarShape::Cos { freq }
                    } else {
                        ScalarShape::Sin { freq }
                    };
                    BasisElement::scalar(d, s / 2, TRIG_AMPLITUDE, shape, label)
                }
            },
            ElementLabel::Haar { level, position, slot } => {
                BasisElement::scalar(d, slot, 1.0, ScalarShape::Haar { level, position }, label)
            }
            ElementLabel::Ramp { level, index, slot } => {
                BasisElement::scalar(d, slot, 1.0, ScalarShape::Ramp { level, index }, label)
            }
        }
    }
}

/// `(frequency, 1-based slot)` of the `j`-th oscillatory element.
fn trig_position(j: usize, block: usize, order: EnumerationOrder) -> (u32, u8) {
    let balanced = |j: usize, first_freq: usize| ((first_freq + j / block) as u32, (1 + j % block) as u8);
    match order {
        EnumerationOrder::Balanced => balanced(j, 1),
        EnumerationOrder::Adversarial(k) => {
            let k = k as usize;
            if j < 2 * k {
                ((1 + j / 2) as u32, [1, 4][j % 2])
            } else if j < 4 * k {
                let j = j - 2 * k;
                ((1 + j / 2) as u32, [2, 3][j % 2])
            } else {
                balanced(j - 4 * k, k + 1)
            }
        }
    }
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FamilyKind::ComponentTrig { .. } => write!(f, "psi-trig")?,
            FamilyKind::MixedTrig => write!(f, "xi-mixed")?,
            FamilyKind::Haar { .. } => write!(f, "haar")?,
            FamilyKind::PiecewiseLinear { level, .. } => write!(f, "plin:{level}")?,
        }
        if self.order != EnumerationOrder::Balanced {
            write!(f, "/{}", self.order)?;
        }
        Ok(())
    }
}

/// Parse a family name (`psi-trig`, `xi-mixed`, `haar`, `plin:<level>`) for dimension `dim`.
pub fn parse_family(name: &str, dim: usize) -> Result<BasisFamily> {
    let name = name.trim();
    let family = match name {
        "psi-trig" => component_trig_basis(dim),
        "xi-mixed" => {
            if dim != 2 {
                return Err(Error::UnsupportedDimension { what: "xi-mixed", dim });
            }
            Ok(mixed_trig_basis())
        }
        "haar" => haar_basis(dim),
        _ => match name.strip_prefix("plin:") {
            Some(level) => {
                let level: u32 = level
                    .trim()
                    .parse()
                    .map_err(|_| Error::config(format!("bad piecewise-linear level in `{name}`")))?;
                piecewise_linear_basis(level, dim)
            }
            None => return Err(Error::config(format!("unknown basis family `{name}`"))),
        },
    };
    family.map_err(|e| match e {
        Error::InvalidArgument(m) => Error::Config(m),
        other => other,
    })
}
