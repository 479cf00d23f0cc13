//! Symmetric 2×2 matrices and sample moments.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::dataset::Point2;

/// Relative determinant threshold below which a scatter matrix is treated
/// as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_tr = self.trace() / 2.0;
        let d = ((self.xx - self.yy) / 2.0).hypot(self.xy);
        (half_tr - d, half_tr + d)
    }

    pub fn is_singular(&self) -> bool {
        !(self.xx > 0.0 && self.yy > 0.0) || self.det() <= SINGULAR_EPS * self.xx * self.yy
    }

    pub fn inverse(&self) -> Option<SymMat2> {
        if self.is_singular() {
            return None;
        }
        let det = self.det();
        Some(SymMat2::new(self.yy / det, -self.xy / det, self.xx / det))
    }

    /// vᵀ M v
    pub fn quad_form(&self, v: Point2) -> f64 {
        self.xx * v.x * v.x + 2.0 * self.xy * v.x * v.y + self.yy * v.y * v.y
    }

    /// Largest absolute eigenvalue (spectral norm for symmetric matrices).
    pub fn operator_norm(&self) -> f64 {
        let (lo, hi) = self.eigenvalues();
        lo.abs().max(hi.abs())
    }
}

impl Mul<f64> for SymMat2 {
    type Output = SymMat2;
    fn mul(self, k: f64) -> SymMat2 {
        SymMat2::new(self.xx * k, self.xy * k, self.yy * k)
    }
}

impl std::ops::Sub for SymMat2 {
    type Output = SymMat2;
    fn sub(self, o: SymMat2) -> SymMat2 {
        SymMat2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

/// Sample mean and covariance (denominator `m − 1`) of the selected points.
/// Returns `None` for fewer than two points.
pub fn mean_cov<I>(points: I) -> Option<(Point2, SymMat2)>
where
    I: IntoIterator<Item = Point2>,
    I::IntoIter: Clone,
{
    let it = points.into_iter();
    let (mut m, mut sx, mut sy) = (0usize, 0.0, 0.0);
    for p in it.clone() {
        m += 1;
        sx += p.x;
        sy += p.y;
    }
    if m < 2 {
        return None;
    }
    let mean = Point2::new(sx / m as f64, sy / m as f64);
    let (mut cxx, mut cxy, mut cyy) = (0.0, 0.0, 0.0);
    for p in it {
        let d = p - mean;
        cxx += d.x * d.x;
        cxy += d.x * d.y;
        cyy += d.y * d.y;
    }
    let denom = (m - 1) as f64;
    Some((mean, SymMat2::new(cxx / denom, cxy / denom, cyy / denom)))
}
