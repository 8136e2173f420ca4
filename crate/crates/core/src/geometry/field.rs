use serde::{Deserialize, Serialize};

use super::Vec2;
use crate::error::{Error, Result};

/// Uniform-grid scalar field, row-major (`values[j * nx + i]` at
/// `origin + h (i, j)`).
///
/// `nx` and `ny` count grid nodes. A single row (`ny == 1`) represents a field
/// over an interval, used for one-dimensional graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawField")]
pub struct ScalarField2D {
    values: Vec<f64>,
    nx: usize,
    ny: usize,
    h: f64,
    origin: Vec2,
}

#[derive(Deserialize)]
struct RawField {
    values: Vec<f64>,
    nx: usize,
    ny: usize,
    h: f64,
    origin: Vec2,
}

impl TryFrom<RawField> for ScalarField2D {
    type Error = Error;

    fn try_from(r: RawField) -> Result<Self> {
        ScalarField2D::new(r.nx, r.ny, r.h, r.origin, r.values)
    }
}

pub const MIN_NODES: usize = 8;

impl ScalarField2D {
    pub fn new(nx: usize, ny: usize, h: f64, origin: Vec2, values: Vec<f64>) -> Result<Self> {
        if nx < MIN_NODES || (ny < MIN_NODES && ny != 1) {
            return Err(Error::InvalidField(format!("grid {nx}x{ny} below {MIN_NODES} nodes")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidField(format!("spacing h = {h}")));
        }
        if values.len() != nx * ny {
            return Err(Error::InvalidField(format!("{} values for a {nx}x{ny} grid", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("non-finite value".into()));
        }
        Ok(ScalarField2D { values, nx, ny, h, origin })
    }

    pub fn from_fn(nx: usize, ny: usize, h: f64, origin: Vec2, f: impl Fn(Vec2) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f(origin + Vec2::new(i as f64 * h, j as f64 * h)));
            }
        }
        Self::new(nx, ny, h, origin, values)
    }

    /// Line field on `[x0, x0 + (nx-1) h]`.
    pub fn line(nx: usize, h: f64, x0: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(nx, 1, h, Vec2::new(x0, 0.0), |p| f(p.x))
    }

    /// A field on the same grid with new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.nx, self.ny, self.h, self.origin, values)
    }

    /// Pointwise map preserving the grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    /// Spatial dimension of the domain: 1 for line fields, else 2.
    pub fn dim(&self) -> usize {
        if self.ny == 1 {
            1
        } else {
            2
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    #[inline]
    pub fn pos(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 * self.h, j as f64 * self.h)
    }

    pub fn same_grid(&self, o: &ScalarField2D) -> bool {
        self.nx == o.nx && self.ny == o.ny && self.h == o.h && self.origin == o.origin
    }

    /// Upper corner of the domain.
    pub fn extent(&self) -> Vec2 {
        self.pos(self.nx - 1, self.ny - 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation, clamped to the domain.
    pub fn sample(&self, p: Vec2) -> f64 {
        let fx = ((p.x - self.origin.x) / self.h).clamp(0.0, (self.nx - 1) as f64);
        let i = (fx.floor() as usize).min(self.nx.saturating_sub(2));
        let tx = fx - i as f64;
        if self.ny == 1 {
            return self.get(i, 0) * (1.0 - tx) + self.get(i + 1, 0) * tx;
        }
        let fy = ((p.y - self.origin.y) / self.h).clamp(0.0, (self.ny - 1) as f64);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let ty = fy - j as f64;
        let a = self.get(i, j) * (1.0 - tx) + self.get(i + 1, j) * tx;
        let b = self.get(i, j + 1) * (1.0 - tx) + self.get(i + 1, j + 1) * tx;
        a * (1.0 - ty) + b * ty
    }

    /// Central-difference gradient at an interior node; one-sided at edges.
    pub fn gradient(&self, i: usize, j: usize) -> Vec2 {
        let d = |lo: f64, hi: f64, span: f64| (hi - lo) / (span * self.h);
        let gx = if i == 0 {
            d(self.get(0, j), self.get(1, j), 1.0)
        } else if i == self.nx - 1 {
            d(self.get(i - 1, j), self.get(i, j), 1.0)
        } else {
            d(self.get(i - 1, j), self.get(i + 1, j), 2.0)
        };
        let gy = if self.ny == 1 {
            0.0
        } else if j == 0 {
            d(self.get(i, 0), self.get(i, 1), 1.0)
        } else if j == self.ny - 1 {
            d(self.get(i, j - 1), self.get(i, j), 1.0)
        } else {
            d(self.get(i, j - 1), self.get(i, j + 1), 2.0)
        };
        Vec2::new(gx, gy)
    }

    /// Sub-grid of nodes `i0..=i1`, `j0..=j1`.
    pub fn window(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> Result<Self> {
        let mut values = Vec::with_capacity((i1 - i0 + 1) * (j1 - j0 + 1));
        for j in j0..=j1 {
            values.extend_from_slice(&self.values[self.idx(i0, j)..=self.idx(i1, j)]);
        }
        Self::new(i1 - i0 + 1, j1 - j0 + 1, self.h, self.pos(i0, j0), values)
    }

    /// The nodes in the middle half of the domain along every axis.
    pub fn middle_window(&self) -> Result<Self> {
        let (i0, i1) = ((self.nx - 1) / 4, 3 * (self.nx - 1) / 4);
        if self.ny == 1 {
            return self.window(i0, i1, 0, 0);
        }
        let (j0, j1) = ((self.ny - 1) / 4, 3 * (self.ny - 1) / 4);
        self.window(i0, i1, j0, j1)
    }

    /// Node indices whose position lies in the middle half of the domain
    /// along every axis.
    pub fn middle_half(&self, i: usize, j: usize) -> bool {
        let inside = |k: usize, n: usize| {
            let s = k as f64 / (n - 1) as f64;
            (0.25..=0.75).contains(&s)
        };
        inside(i, self.nx) && (self.ny == 1 || inside(j, self.ny))
    }
}
