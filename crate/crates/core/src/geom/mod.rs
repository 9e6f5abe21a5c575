//! Planar geometry: dyadic squares, annuli, scenes and their quadtree
//! rasterization.

mod parametric;
mod raster;
mod shapes;

pub use parametric::{ObstacleKind, ParametricDomain};
pub use raster::{annulus_clip, complement_in_ball, disc_clip, rasterize, Complement, RasterMode, RasterSet};
pub use shapes::{Scene, Shape};
pub(crate) use shapes::Piece;

use crate::math;
use crate::Point;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Closed dyadic square `[m 2^-n, (m+1) 2^-n] x [r 2^-n, (r+1) 2^-n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DyadicSquare {
    pub m: i64,
    pub r: i64,
    pub n: u32,
}

impl DyadicSquare {
    /// The unit square `[0,1]^2`.
    pub const UNIT: DyadicSquare = DyadicSquare { m: 0, r: 0, n: 0 };

    pub const fn new(m: i64, r: i64, n: u32) -> Self {
        DyadicSquare { m, r, n }
    }

    #[inline]
    pub fn side(&self) -> f64 {
        math::dyadic_side(self.n as i64)
    }

    pub fn lower_left(&self) -> Point {
        let s = self.side();
        Point::new(self.m as f64 * s, self.r as f64 * s)
    }

    pub fn center(&self) -> Point {
        let s = self.side();
        Point::new((self.m as f64 + 0.5) * s, (self.r as f64 + 0.5) * s)
    }

    pub fn rect(&self) -> Rect {
        let s = self.side();
        let x0 = self.m as f64 * s;
        let y0 = self.r as f64 * s;
        Rect::new(x0, y0, x0 + s, y0 + s)
    }

    /// The square with the same centre and `factor` times the side.
    pub fn dilated(&self, factor: f64) -> Rect {
        let c = self.center();
        let h = 0.5 * factor * self.side();
        Rect::new(c.re - h, c.im - h, c.re + h, c.im + h)
    }

    /// Children in the order (0,0), (1,0), (0,1), (1,1).
    pub fn children(&self) -> [DyadicSquare; 4] {
        let (m, r, n) = (2 * self.m, 2 * self.r, self.n + 1);
        [
            DyadicSquare::new(m, r, n),
            DyadicSquare::new(m + 1, r, n),
            DyadicSquare::new(m, r + 1, n),
            DyadicSquare::new(m + 1, r + 1, n),
        ]
    }

    pub fn parent(&self) -> Option<DyadicSquare> {
        (self.n > 0).then(|| DyadicSquare::new(self.m >> 1, self.r >> 1, self.n - 1))
    }

    /// The ancestor at `level <= self.n`.
    pub fn ancestor(&self, level: u32) -> DyadicSquare {
        debug_assert!(level <= self.n);
        let d = self.n - level;
        DyadicSquare::new(self.m >> d, self.r >> d, level)
    }

    /// Dyadic containment (`other` is a descendant of, or equal to, `self`).
    pub fn contains_square(&self, other: &DyadicSquare) -> bool {
        other.n >= self.n && other.ancestor(self.n) == *self
    }

    /// Same level and the closed squares meet (the 9 squares of `S^+`).
    pub fn is_neighbor(&self, other: &DyadicSquare) -> bool {
        self.n == other.n && (self.m - other.m).abs() <= 1 && (self.r - other.r).abs() <= 1
    }
}

/// Axis-aligned closed rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.re >= self.x0 && p.re <= self.x1 && p.im >= self.y0 && p.im <= self.y1
    }

    pub fn contains_point_open(&self, p: Point) -> bool {
        p.re > self.x0 && p.re < self.x1 && p.im > self.y0 && p.im < self.y1
    }

    pub fn contains_rect(&self, o: &Rect) -> bool {
        o.x0 >= self.x0 && o.x1 <= self.x1 && o.y0 >= self.y0 && o.y1 <= self.y1
    }

    /// `o` lies in the open interior of `self`.
    pub fn contains_rect_open(&self, o: &Rect) -> bool {
        o.x0 > self.x0 && o.x1 < self.x1 && o.y0 > self.y0 && o.y1 < self.y1
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.x0 <= o.x1 && o.x0 <= self.x1 && self.y0 <= o.y1 && o.y0 <= self.y1
    }

    /// Closed `self` meets the open interior of `o`.
    pub fn meets_interior_of(&self, o: &Rect) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }

    /// Distance from `p` to the nearest point of the rectangle.
    pub fn min_dist(&self, p: Point) -> f64 {
        let dx = (self.x0 - p.re).max(0.0).max(p.re - self.x1);
        let dy = (self.y0 - p.im).max(0.0).max(p.im - self.y1);
        math::hypot(dx, dy)
    }

    /// Distance from `p` to the farthest corner.
    pub fn max_dist(&self, p: Point) -> f64 {
        let dx = math::abs(p.re - self.x0).max(math::abs(p.re - self.x1));
        let dy = math::abs(p.im - self.y0).max(math::abs(p.im - self.y1));
        math::hypot(dx, dy)
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x0, self.y1),
            Point::new(self.x1, self.y1),
        ]
    }

    pub fn union(&self, o: &Rect) -> Rect {
        Rect::new(self.x0.min(o.x0), self.y0.min(o.y0), self.x1.max(o.x1), self.y1.max(o.y1))
    }
}

/// Dyadic annulus `A_n(b) = { 2^-n-1 <= |z - b| <= 2^-n }`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Annulus {
    pub center: Point,
    pub index: u32,
}

impl Annulus {
    pub fn new(center: Point, index: u32) -> Self {
        Annulus { center, index }
    }

    pub fn outer_radius(&self) -> f64 {
        math::dyadic_side(self.index as i64)
    }

    pub fn inner_radius(&self) -> f64 {
        math::dyadic_side(self.index as i64 + 1)
    }

    pub fn contains(&self, z: Point) -> bool {
        let d = math::dist(z, self.center);
        d >= self.inner_radius() && d <= self.outer_radius()
    }

    /// The closed rectangle meets the closed annulus.
    pub fn meets_rect(&self, rect: &Rect) -> bool {
        rect.min_dist(self.center) <= self.outer_radius()
            && rect.max_dist(self.center) >= self.inner_radius()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_tile_parent() {
        let s = DyadicSquare::new(3, -2, 4);
        let area: f64 = s.children().iter().map(|c| c.side() * c.side()).sum();
        assert_eq!(area, s.side() * s.side());
        for c in s.children() {
            assert_eq!(c.parent(), Some(s));
            assert!(s.rect().contains_rect(&c.rect()));
            assert!(s.contains_square(&c));
        }
        assert_eq!(DyadicSquare::UNIT.parent(), None);
    }

    #[test]
    fn negative_indices_have_floor_parents() {
        let s = DyadicSquare::new(-1, -3, 2);
        assert_eq!(s.parent(), Some(DyadicSquare::new(-1, -2, 1)));
        assert_eq!(s.rect(), Rect::new(-0.25, -0.75, 0.0, -0.5));
    }

    #[test]
    fn consecutive_annuli_share_a_circle() {
        let b = Point::new(0.5, 0.5);
        let a3 = Annulus::new(b, 3);
        let a4 = Annulus::new(b, 4);
        assert_eq!(a3.inner_radius(), a4.outer_radius());
        assert_eq!(a3.inner_radius() * 2.0, a3.outer_radius());
        let on_circle = b + Point::new(a4.outer_radius(), 0.0);
        assert!(a3.contains(on_circle) && a4.contains(on_circle));
    }
}
