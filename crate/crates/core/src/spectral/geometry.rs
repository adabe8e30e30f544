use crate::error::{Error, Result};

/// Relative slack used when deciding whether a point lies on the closure of a box.
const CLOSURE_SLACK: f64 = 1e-12;

/// The spatial domain Ω: an interval ]0,a[ or a rectangle ]0,a1[×]0,a2[.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainGeometry {
    Interval { a: f64 },
    Rectangle { a1: f64, a2: f64 },
}

fn check_length(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Geometry(format!("{name} must be positive and finite, got {value}")))
    }
}

impl DomainGeometry {
    pub fn interval(a: f64) -> Result<Self> {
        check_length("a", a)?;
        Ok(Self::Interval { a })
    }

    pub fn rectangle(a1: f64, a2: f64) -> Result<Self> {
        check_length("a1", a1)?;
        check_length("a2", a2)?;
        Ok(Self::Rectangle { a1, a2 })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Interval { a } => check_length("a", a),
            Self::Rectangle { a1, a2 } => {
                check_length("a1", a1)?;
                check_length("a2", a2)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Interval { .. } => 1,
            Self::Rectangle { .. } => 2,
        }
    }

    /// Side length along `axis`.
    pub fn length(&self, axis: usize) -> f64 {
        match (*self, axis) {
            (Self::Interval { a }, 0) => a,
            (Self::Rectangle { a1, .. }, 0) => a1,
            (Self::Rectangle { a2, .. }, 1) => a2,
            _ => panic!("axis {axis} out of range for a {}D domain", self.dim()),
        }
    }

    pub fn contains_closed(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point.iter().enumerate().all(|(k, &x)| {
                let len = self.length(k);
                let slack = CLOSURE_SLACK * len;
                x.is_finite() && x >= -slack && x <= len + slack
            })
    }

    pub fn contains_open(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .enumerate()
                .all(|(k, &x)| x.is_finite() && x > 0.0 && x < self.length(k))
    }

    /// Ω itself as a box region.
    pub fn whole(&self) -> Subregion {
        match *self {
            Self::Interval { a } => Subregion::SubInterval { alpha: 0.0, beta: a },
            Self::Rectangle { a1, a2 } => Subregion::SubRectangle {
                alpha1: 0.0,
                beta1: a1,
                alpha2: 0.0,
                beta2: a2,
            },
        }
    }
}

/// An axis-aligned subregion ω of Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Subregion {
    SubInterval { alpha: f64, beta: f64 },
    SubRectangle { alpha1: f64, beta1: f64, alpha2: f64, beta2: f64 },
}

impl Subregion {
    pub fn interval(alpha: f64, beta: f64) -> Self {
        Self::SubInterval { alpha, beta }
    }

    pub fn rectangle(alpha1: f64, beta1: f64, alpha2: f64, beta2: f64) -> Self {
        Self::SubRectangle { alpha1, beta1, alpha2, beta2 }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::SubInterval { .. } => 1,
            Self::SubRectangle { .. } => 2,
        }
    }

    /// `(lo, hi)` along `axis`.
    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        match (*self, axis) {
            (Self::SubInterval { alpha, beta }, 0) => (alpha, beta),
            (Self::SubRectangle { alpha1, beta1, .. }, 0) => (alpha1, beta1),
            (Self::SubRectangle { alpha2, beta2, .. }, 1) => (alpha2, beta2),
            _ => panic!("axis {axis} out of range for a {}D region", self.dim()),
        }
    }

    pub(crate) fn from_bounds(bounds: &[(f64, f64)]) -> Self {
        match bounds {
            [(alpha, beta)] => Self::SubInterval { alpha: *alpha, beta: *beta },
            [(alpha1, beta1), (alpha2, beta2)] => Self::SubRectangle {
                alpha1: *alpha1,
                beta1: *beta1,
                alpha2: *alpha2,
                beta2: *beta2,
            },
            _ => panic!("regions are 1D or 2D"),
        }
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim()).map(|k| {
            let (lo, hi) = self.bounds(k);
            hi - lo
        }).product()
    }

    pub fn contains_point(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point.iter().enumerate().all(|(k, &x)| {
                let (lo, hi) = self.bounds(k);
                x >= lo && x <= hi
            })
    }

    /// Whether `other` is contained in this region (closed boxes).
    pub fn contains_region(&self, other: &Subregion) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|k| {
                let (lo, hi) = self.bounds(k);
                let (olo, ohi) = other.bounds(k);
                olo >= lo && ohi <= hi
            })
    }

    /// Checks `0 <= lo < hi <= len` on every axis of `domain`.
    pub fn validate_in(&self, domain: &DomainGeometry) -> Result<()> {
        if self.dim() != domain.dim() {
            return Err(Error::Domain(format!(
                "subregion is {}D but the domain is {}D",
                self.dim(),
                domain.dim()
            )));
        }
        for k in 0..self.dim() {
            let (lo, hi) = self.bounds(k);
            let len = domain.length(k);
            if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi > len || lo >= hi {
                return Err(Error::Domain(format!(
                    "subregion bounds ({lo}, {hi}) on axis {k} must satisfy 0 <= lo < hi <= {len}"
                )));
            }
        }
        Ok(())
    }

    /// Middle half of the region along every axis.
    pub fn middle_half(&self) -> Self {
        let bounds: Vec<_> = (0..self.dim())
            .map(|k| {
                let (lo, hi) = self.bounds(k);
                let q = 0.25 * (hi - lo);
                (lo + q, hi - q)
            })
            .collect();
        Self::from_bounds(&bounds)
    }
}
