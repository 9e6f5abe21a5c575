use alloc::vec::Vec;

use super::Shape;
use crate::math;
use crate::{Error, Point, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ObstacleKind {
    /// Horizontal segments `[a_n - r_n, a_n + r_n] x {0}`.
    Slit,
    /// Closed discs `B(a_n, r_n)`.
    RoadRunner,
}

/// A disc around the boundary point with a geometric sequence of obstacles
/// accumulating at it: centres `a_n = a0 q^n`, radii `r_n = c0 p^n`,
/// `n = 1, 2, ...`, measured from the anchor along the positive real
/// direction.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ParametricDomain {
    pub kind: ObstacleKind,
    pub a0: f64,
    pub q: f64,
    pub c0: f64,
    pub p: f64,
    /// Position of the boundary point inside the unit root square.
    pub anchor: Point,
}

impl ParametricDomain {
    /// Where the boundary point sits in the unit square unless told
    /// otherwise. The height is not dyadic, so horizontal slits never run
    /// along a grid line.
    pub const DEFAULT_ANCHOR: Point = Point::new(0.5, 1.0 / 3.0);

    pub fn new(kind: ObstacleKind, a0: f64, q: f64, c0: f64, p: f64) -> Result<Self> {
        let d = ParametricDomain { kind, a0, q, c0, p, anchor: Self::DEFAULT_ANCHOR };
        d.validate()?;
        Ok(d)
    }

    pub fn slit(a0: f64, q: f64, c0: f64, p: f64) -> Result<Self> {
        Self::new(ObstacleKind::Slit, a0, q, c0, p)
    }

    pub fn road_runner(a0: f64, q: f64, c0: f64, p: f64) -> Result<Self> {
        Self::new(ObstacleKind::RoadRunner, a0, q, c0, p)
    }

    pub fn with_anchor(mut self, anchor: Point) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn with_kind(mut self, kind: ObstacleKind) -> Self {
        self.kind = kind;
        self
    }

    /// Checks `0 < q, p < 1`, positive scales, and the ordering
    /// `a_{n+1} + r_{n+1} < a_n - r_n` for every `n >= 1`.
    ///
    /// The ordering is equivalent to `c0 p^n (1 + p) < a0 q^n (1 - q)`. For
    /// `p <= q` the ratio of the two sides is monotone in `n`, so the single
    /// inequality at `n = 1` decides it; `p > q` always fails eventually.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.a0, self.q, self.c0, self.p, self.anchor.re, self.anchor.im]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidDomain("parameters must be finite"));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidDomain("q must lie in (0, 1)"));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidDomain("p must lie in (0, 1)"));
        }
        if !(self.a0 > 0.0 && self.c0 > 0.0) {
            return Err(Error::InvalidDomain("a0 and c0 must be positive"));
        }
        if self.p > self.q {
            return Err(Error::InvalidDomain("p > q makes the obstacles overlap eventually"));
        }
        if self.c0 * self.p * (1.0 + self.p) >= self.a0 * self.q * (1.0 - self.q) {
            return Err(Error::InvalidDomain("obstacles 1 and 2 overlap"));
        }
        for n in 1..=64 {
            if self.center(n + 1) + self.radius(n + 1) >= self.center(n) - self.radius(n) {
                return Err(Error::InvalidDomain("obstacles are not disjoint and ordered"));
            }
        }
        Ok(())
    }

    pub fn center(&self, n: u32) -> f64 {
        self.a0 * math::powf(self.q, n as f64)
    }

    pub fn radius(&self, n: u32) -> f64 {
        self.c0 * math::powf(self.p, n as f64)
    }

    /// Radius of the disc whose interior, minus the obstacles, is the domain.
    pub fn enclosing_radius(&self) -> f64 {
        self.center(1) + self.radius(1)
    }

    /// Obstacle `n` relative to the boundary point at the origin.
    pub fn obstacle_at_origin(&self, n: u32) -> Shape {
        self.obstacle_about(n, Point::new(0.0, 0.0))
    }

    /// Obstacle `n` placed relative to the anchor.
    pub fn obstacle(&self, n: u32) -> Shape {
        self.obstacle_about(n, self.anchor)
    }

    fn obstacle_about(&self, n: u32, b: Point) -> Shape {
        let a = self.center(n);
        let r = self.radius(n);
        match self.kind {
            ObstacleKind::Slit => Shape::Segment {
                from: b + Point::new(a - r, 0.0),
                to: b + Point::new(a + r, 0.0),
            },
            ObstacleKind::RoadRunner => Shape::Disc { center: b + Point::new(a, 0.0), radius: r },
        }
    }

    /// First index whose obstacle radius falls below `leaf_side`; obstacles
    /// from there on are not materialized.
    pub fn truncation_index(&self, leaf_side: f64) -> u32 {
        let mut n = 1;
        while self.radius(n) >= leaf_side && n < 4096 {
            n += 1;
        }
        n
    }

    /// Obstacles `1 .. truncation` placed at the anchor.
    pub fn obstacles_before(&self, truncation: u32) -> Vec<Shape> {
        (1..truncation).map(|n| self.obstacle(n)).collect()
    }

    /// Whether obstacle `n` (about the origin) lies in the open sector
    /// `|arg z| < pi/4`.
    pub fn in_right_sector(&self, n: u32) -> bool {
        let a = self.center(n);
        let r = self.radius(n);
        match self.kind {
            ObstacleKind::Slit => a - r > 0.0,
            ObstacleKind::RoadRunner => r < a * core::f64::consts::FRAC_1_SQRT_2,
        }
    }
}
