//! Exact planar primitives: rectangles, discs, affine maps.

use crate::C;
use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub im_min: f64,
    pub re_max: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, im_min: f64, re_max: f64, im_max: f64) -> Self {
        Rect {
            re_min,
            im_min,
            re_max,
            im_max,
        }
    }

    /// Smallest rectangle containing all points, padded by `pad`.
    pub fn hull(points: &[C], pad: f64) -> Self {
        let mut r = Rect::new(
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        );
        for p in points {
            r.re_min = r.re_min.min(p.re);
            r.im_min = r.im_min.min(p.im);
            r.re_max = r.re_max.max(p.re);
            r.im_max = r.im_max.max(p.im);
        }
        r.pad(pad)
    }

    pub fn pad(&self, pad: f64) -> Self {
        Rect::new(
            self.re_min - pad,
            self.im_min - pad,
            self.re_max + pad,
            self.im_max + pad,
        )
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> C {
        C::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    pub fn contains(&self, z: C) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

/// Open or closed disc; openness is tracked by the caller, the data is the same.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: C,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: C, radius: f64) -> Self {
        assert!(radius > 0.0, "disc radius must be positive");
        Disc { center, radius }
    }

    pub fn contains(&self, z: C) -> bool {
        (z - self.center).norm() < self.radius
    }

    pub fn contains_closed(&self, z: C) -> bool {
        (z - self.center).norm() <= self.radius
    }

    /// Signed distance from `z` to the boundary circle (negative inside).
    pub fn signed_distance(&self, z: C) -> f64 {
        (z - self.center).norm() - self.radius
    }

    /// Distance between two closed discs (0 if they intersect).
    pub fn distance(&self, other: &Disc) -> f64 {
        ((self.center - other.center).norm() - self.radius - other.radius).max(0.0)
    }

    /// Whether `other` is contained in this closed disc.
    pub fn contains_disc(&self, other: &Disc) -> bool {
        (self.center - other.center).norm() + other.radius <= self.radius
    }

    pub fn bbox(&self) -> Rect {
        Rect::new(
            self.center.re - self.radius,
            self.center.im - self.radius,
            self.center.re + self.radius,
            self.center.im + self.radius,
        )
    }
}

/// Affine map `z -> scale * z + offset` with a real scale factor.
///
/// This is the normalisation transform recorded when a compact set is moved
/// into the unit disc; `scale` is kept real so distances divide uniformly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    pub offset: C,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap {
            scale: 1.0,
            offset: C::new(0.0, 0.0),
        }
    }

    /// Map sending `center` to the origin and dividing by `s`: `z -> (z - center)/s`.
    pub fn normalizing(center: C, s: f64) -> Self {
        AffineMap {
            scale: 1.0 / s,
            offset: -center / s,
        }
    }

    pub fn apply(&self, z: C) -> C {
        z * self.scale + self.offset
    }

    pub fn inverse(&self) -> Self {
        AffineMap {
            scale: 1.0 / self.scale,
            offset: -self.offset / self.scale,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.scale == 1.0 && self.offset == C::new(0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_roundtrip() {
        let m = AffineMap::normalizing(C::new(10.0, 0.0), 4.0);
        let z = C::new(12.0, -3.0);
        let w = m.apply(z);
        let back = m.inverse().apply(w);
        assert!((back - z).norm() < 1e-12);
    }

    #[test]
    fn disc_chain_distances() {
        // |0 - (-3)| = 3 > 1 + 1: D_0 and Delta_0 are disjoint with gap 1.
        let d0 = Disc::new(C::new(0.0, 0.0), 1.0);
        let delta0 = Disc::new(C::new(-3.0, 0.0), 1.0);
        assert!((d0.distance(&delta0) - 1.0).abs() < 1e-15);
    }
}
