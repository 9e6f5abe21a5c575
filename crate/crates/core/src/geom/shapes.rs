use alloc::vec::Vec;

use super::{DyadicSquare, ParametricDomain, Rect};
use crate::math;
use crate::Point;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// One ingredient of a compact planar set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Shape {
    Segment { from: Point, to: Point },
    Disc { center: Point, radius: f64 },
    Dyadic(DyadicSquare),
    /// Union of the level-`n` dyadic squares with the listed `(m, r)`.
    Bitmap { n: u32, cells: Vec<(i64, i64)> },
}

/// A compact set given as a finite union of shapes, inside a root square.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Scene {
    pub root: DyadicSquare,
    pub shapes: Vec<Shape>,
    pub parametric: Option<ParametricDomain>,
}

impl Default for Scene {
    fn default() -> Self {
        Scene::new(DyadicSquare::UNIT)
    }
}

impl Scene {
    pub fn new(root: DyadicSquare) -> Self {
        Scene { root, shapes: Vec::new(), parametric: None }
    }

    pub fn with_shape(mut self, shape: Shape) -> Self {
        self.shapes.push(shape);
        self
    }

    pub fn push(&mut self, shape: Shape) {
        self.shapes.push(shape);
    }

    /// Index of the first shape not contained in the root square.
    pub fn first_outside_root(&self) -> Option<usize> {
        self.shapes.iter().position(|s| !s.inside_square(&self.root))
    }
}

impl Shape {
    pub fn segment(from: Point, to: Point) -> Self {
        Shape::Segment { from, to }
    }

    pub fn disc(center: Point, radius: f64) -> Self {
        Shape::Disc { center, radius }
    }

    pub fn bbox(&self) -> Rect {
        match self {
            Shape::Segment { from, to } => Rect::new(
                from.re.min(to.re),
                from.im.min(to.im),
                from.re.max(to.re),
                from.im.max(to.im),
            ),
            Shape::Disc { center, radius } => Rect::new(
                center.re - radius,
                center.im - radius,
                center.re + radius,
                center.im + radius,
            ),
            Shape::Dyadic(s) => s.rect(),
            Shape::Bitmap { n, cells } => {
                let mut it = cells.iter().map(|&(m, r)| DyadicSquare::new(m, r, *n).rect());
                match it.next() {
                    Some(first) => it.fold(first, |acc, r| acc.union(&r)),
                    None => Rect::new(0.0, 0.0, 0.0, 0.0),
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Shape::Bitmap { cells, .. } if cells.is_empty())
    }

    pub(crate) fn inside_square(&self, root: &DyadicSquare) -> bool {
        match self {
            Shape::Dyadic(s) => root.contains_square(s),
            Shape::Bitmap { n, cells } => cells
                .iter()
                .all(|&(m, r)| root.contains_square(&DyadicSquare::new(m, r, *n))),
            Shape::Disc { radius, .. } if *radius < 0.0 || !radius.is_finite() => false,
            _ => root.rect().contains_rect(&self.bbox()),
        }
    }

    /// Dyadic cells making up a square-valued shape.
    pub fn cells(&self) -> Vec<DyadicSquare> {
        match self {
            Shape::Dyadic(s) => alloc::vec![*s],
            Shape::Bitmap { n, cells } => {
                cells.iter().map(|&(m, r)| DyadicSquare::new(m, r, *n)).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Outer predicate: does the closed rectangle meet the shape?
    ///
    /// Square-valued shapes are matched against their open interiors, so a
    /// dyadic literal occupies exactly the leaves it is made of.
    pub fn meets_rect(&self, rect: &Rect) -> bool {
        match self {
            Shape::Segment { from, to } => segment_meets_rect(*from, *to, rect),
            Shape::Disc { center, radius } => rect.min_dist(*center) <= *radius,
            Shape::Dyadic(s) => rect.meets_interior_of(&s.rect()),
            Shape::Bitmap { n, cells } => cells
                .iter()
                .any(|&(m, r)| rect.meets_interior_of(&DyadicSquare::new(m, r, *n).rect())),
        }
    }

    /// Inner predicate: is the closed rectangle contained in the shape?
    pub fn contains_rect(&self, rect: &Rect) -> bool {
        match self {
            Shape::Segment { .. } => rect.width() <= 0.0 && rect.height() <= 0.0 && self.meets_rect(rect),
            Shape::Disc { center, radius } => rect.max_dist(*center) <= *radius,
            Shape::Dyadic(s) => s.rect().contains_rect(rect),
            Shape::Bitmap { n, cells } => cells
                .iter()
                .any(|&(m, r)| DyadicSquare::new(m, r, *n).rect().contains_rect(rect)),
        }
    }

    /// Distance from `b` to the nearest point of the shape.
    pub fn min_dist(&self, b: Point) -> f64 {
        match self {
            Shape::Segment { from, to } => point_segment_dist(b, *from, *to),
            Shape::Disc { center, radius } => (math::dist(b, *center) - radius).max(0.0),
            _ => self
                .cells()
                .iter()
                .map(|c| c.rect().min_dist(b))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Distance from `b` to the farthest point of the shape.
    pub fn max_dist(&self, b: Point) -> f64 {
        match self {
            Shape::Segment { from, to } => math::dist(b, *from).max(math::dist(b, *to)),
            Shape::Disc { center, radius } => math::dist(b, *center) + radius,
            _ => self.cells().iter().map(|c| c.rect().max_dist(b)).fold(0.0, f64::max),
        }
    }
}

/// Connected pieces used by the continuum detector: segments, discs and
/// closed rectangles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Piece {
    Segment(Point, Point),
    Disc(Point, f64),
    Rect(Rect),
}

impl Piece {
    pub(crate) fn from_shape(shape: &Shape) -> Vec<Piece> {
        match shape {
            Shape::Segment { from, to } => alloc::vec![Piece::Segment(*from, *to)],
            Shape::Disc { center, radius } => alloc::vec![Piece::Disc(*center, *radius)],
            _ => shape.cells().iter().map(|c| Piece::Rect(c.rect())).collect(),
        }
    }

    pub(crate) fn min_dist(&self, b: Point) -> f64 {
        match *self {
            Piece::Segment(a, c) => point_segment_dist(b, a, c),
            Piece::Disc(c, r) => (math::dist(b, c) - r).max(0.0),
            Piece::Rect(r) => r.min_dist(b),
        }
    }

    pub(crate) fn max_dist(&self, b: Point) -> f64 {
        match *self {
            Piece::Segment(a, c) => math::dist(b, a).max(math::dist(b, c)),
            Piece::Disc(c, r) => math::dist(b, c) + r,
            Piece::Rect(r) => r.max_dist(b),
        }
    }

    /// The closed pieces intersect.
    pub(crate) fn meets(&self, other: &Piece) -> bool {
        use Piece::*;
        match (*self, *other) {
            (Segment(a, b), Segment(c, d)) => segments_meet(a, b, c, d),
            (Segment(a, b), Disc(c, r)) | (Disc(c, r), Segment(a, b)) => {
                point_segment_dist(c, a, b) <= r
            }
            (Segment(a, b), Rect(q)) | (Rect(q), Segment(a, b)) => segment_meets_rect(a, b, &q),
            (Disc(c1, r1), Disc(c2, r2)) => math::dist(c1, c2) <= r1 + r2,
            (Disc(c, r), Rect(q)) | (Rect(q), Disc(c, r)) => q.min_dist(c) <= r,
            (Rect(p), Rect(q)) => p.intersects(&q),
        }
    }
}

pub(crate) fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return math::dist(p, a);
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    math::dist(p, a + ab * t)
}

/// Liang-Barsky clipping of the closed segment against the closed rectangle.
pub(crate) fn segment_meets_rect(a: Point, b: Point, rect: &Rect) -> bool {
    let d = b - a;
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    let checks = [
        (-d.re, a.re - rect.x0),
        (d.re, rect.x1 - a.re),
        (-d.im, a.im - rect.y0),
        (d.im, rect.y1 - a.im),
    ];
    for (p, q) in checks {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

pub(crate) fn segments_meet(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn segment_rect_touching_edge_counts() {
        let r = Rect::new(0.0, 0.0, 0.5, 0.5);
        assert!(segment_meets_rect(p(0.0, 0.0), p(1.0, 0.0), &r));
        assert!(!segment_meets_rect(p(0.0, -0.1), p(1.0, -0.1), &r));
        assert!(segment_meets_rect(p(-1.0, 0.25), p(2.0, 0.25), &r));
        assert!(segment_meets_rect(p(0.25, 0.25), p(0.25, 0.25), &r));
        // Diagonal passing just outside a corner.
        assert!(!segment_meets_rect(p(0.6, 0.0), p(1.0, 0.4), &r));
        assert!(segment_meets_rect(p(0.5, 0.0), p(1.0, 0.4), &r));
    }

    #[test]
    fn segments_meet_cases() {
        assert!(segments_meet(p(0.0, 0.0), p(1.0, 1.0), p(0.0, 1.0), p(1.0, 0.0)));
        assert!(!segments_meet(p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0), p(1.0, 1.0)));
        assert!(segments_meet(p(0.0, 0.0), p(1.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)));
        assert!(!segments_meet(p(0.0, 0.0), p(1.0, 0.0), p(1.5, 0.0), p(2.0, 0.0)));
    }

    #[test]
    fn point_segment_distance() {
        assert_eq!(point_segment_dist(p(0.5, 1.0), p(0.0, 0.0), p(1.0, 0.0)), 1.0);
        assert_eq!(point_segment_dist(p(2.0, 0.0), p(0.0, 0.0), p(1.0, 0.0)), 1.0);
    }

    #[test]
    fn dyadic_literal_matches_interior_only() {
        let s = Shape::Dyadic(DyadicSquare::new(1, 1, 2));
        // Neighbour sharing an edge is not met.
        assert!(!s.meets_rect(&DyadicSquare::new(2, 1, 2).rect()));
        assert!(s.meets_rect(&DyadicSquare::new(1, 1, 2).rect()));
        assert!(s.meets_rect(&DyadicSquare::new(0, 0, 1).rect()));
    }
}
