//! Finite atomic measures, the dyadic Frostman sweep and ball-growth checks.

use alloc::vec::Vec;

use crate::content::Gauge;
use crate::error::check_beta;
use crate::geom::{RasterSet, Rect};
use crate::math;
use crate::{Error, Point, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Divisor applied after the dyadic sweep to pass from square caps to ball
/// growth.
pub const FROSTMAN_SAFETY: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Atom {
    pub point: Point,
    pub weight: f64,
}

impl Atom {
    pub fn new(point: Point, weight: f64) -> Self {
        Atom { point, weight }
    }
}

/// Nonnegative weights at finitely many points. Serialized as
/// `{"atoms": [[x, y, w], ...]}`; deserialization validates.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(into = "MeasureRepr", try_from = "MeasureRepr"))]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
    total: f64,
}

#[cfg(feature = "serde")]
#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    atoms: Vec<[f64; 3]>,
}

#[cfg(feature = "serde")]
impl From<DiscreteMeasure> for MeasureRepr {
    fn from(mu: DiscreteMeasure) -> Self {
        MeasureRepr { atoms: mu.atoms.iter().map(|a| [a.point.re, a.point.im, a.weight]).collect() }
    }
}

#[cfg(feature = "serde")]
impl TryFrom<MeasureRepr> for DiscreteMeasure {
    type Error = Error;

    fn try_from(repr: MeasureRepr) -> Result<Self> {
        DiscreteMeasure::new(repr.atoms.iter().map(|a| Atom::new(Point::new(a[0], a[1]), a[2])).collect())
    }
}

impl DiscreteMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if !(a.weight >= 0.0 && a.weight.is_finite()) {
                return Err(Error::InvalidArgument("atom weights must be finite and nonnegative"));
            }
            if !(a.point.re.is_finite() && a.point.im.is_finite()) {
                return Err(Error::InvalidArgument("atom locations must be finite"));
            }
        }
        Ok(Self::from_atoms_unchecked(atoms))
    }

    pub(crate) fn from_atoms_unchecked(atoms: Vec<Atom>) -> Self {
        let total = atoms.iter().map(|a| a.weight).sum();
        DiscreteMeasure { atoms, total }
    }

    pub fn dirac(point: Point, weight: f64) -> Result<Self> {
        Self::new(alloc::vec![Atom::new(point, weight)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_atoms_unchecked(
            self.atoms.iter().map(|a| Atom::new(a.point, a.weight * factor)).collect(),
        )
    }

    /// Atoms satisfying `keep`, weights unchanged.
    pub fn restrict<F: FnMut(Point) -> bool>(&self, mut keep: F) -> Self {
        Self::from_atoms_unchecked(self.atoms.iter().copied().filter(|a| keep(a.point)).collect())
    }

    /// Pushforward under `map`, weights multiplied by `weight_factor`.
    pub fn pushforward<F: Fn(Point) -> Point>(&self, map: F, weight_factor: f64) -> Self {
        Self::from_atoms_unchecked(
            self.atoms
                .iter()
                .map(|a| Atom::new(map(a.point), a.weight * weight_factor))
                .collect(),
        )
    }

    /// Concatenation of atom lists (atoms at equal points are not merged).
    pub fn plus(&self, other: &DiscreteMeasure) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        Self::from_atoms_unchecked(atoms)
    }

    pub fn bbox(&self) -> Option<Rect> {
        let first = self.atoms.first()?;
        let mut r = Rect::new(first.point.re, first.point.im, first.point.re, first.point.im);
        for a in &self.atoms[1..] {
            r.x0 = r.x0.min(a.point.re);
            r.x1 = r.x1.max(a.point.re);
            r.y0 = r.y0.min(a.point.im);
            r.y1 = r.y1.max(a.point.im);
        }
        Some(r)
    }

    /// Mass of the closed ball, by direct summation.
    pub fn mass_in_ball(&self, center: Point, radius: f64) -> f64 {
        let r2 = radius * radius;
        self.atoms
            .iter()
            .filter(|a| in_closed_ball(a.point, center, r2))
            .map(|a| a.weight)
            .sum()
    }

    /// Nearest atom to `z` and its distance.
    pub fn nearest(&self, z: Point) -> Option<(usize, f64)> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (i, math::dist(a.point, z)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

#[inline]
fn in_closed_ball(p: Point, c: Point, r2: f64) -> bool {
    let dx = p.re - c.re;
    let dy = p.im - c.im;
    dx * dx + dy * dy <= r2
}

/// Dyadic sweep without the final division: an atom of weight `cap(leaf
/// side)` at each occupied leaf center, then for levels `N-1` up to the root
/// every node of mass above `cap(side)` is rescaled onto its cap.
///
/// Afterwards `mu(S) <= cap(side S)` for every node up to rounding.
pub fn frostman_sweep(set: &RasterSet, gauge: &Gauge) -> Result<DiscreteMeasure> {
    gauge.validate()?;
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let leaf_cap = gauge.eval(set.leaf_side());
    let mut weights: Vec<f64> = alloc::vec![leaf_cap; set.len()];
    for level in (0..set.depth()).rev() {
        let cap = gauge.eval(set.node_side(level));
        for (_, range) in set.nodes_at(level) {
            let mass: f64 = weights[range.clone()].iter().sum();
            if mass > cap {
                let factor = cap / mass;
                for w in &mut weights[range] {
                    *w *= factor;
                }
            }
        }
    }
    let atoms = set
        .leaf_squares()
        .zip(weights)
        .map(|(sq, w)| Atom::new(sq.center(), w))
        .collect();
    Ok(DiscreteMeasure::from_atoms_unchecked(atoms))
}

/// Frostman measure with growth `beta` on the occupied leaves.
pub fn frostman(set: &RasterSet, beta: f64) -> Result<DiscreteMeasure> {
    check_beta(beta)?;
    Ok(frostman_sweep(set, &Gauge::PowerLaw(beta))?.scaled(1.0 / FROSTMAN_SAFETY))
}

/// Frostman measure capped by the ladder gauge `min(r^beta, 2^j r^(beta+eta))`,
/// whose ball ratios decay below the crossover scale.
pub fn frostman_lower(set: &RasterSet, beta: f64, eta: f64, j: u32) -> Result<DiscreteMeasure> {
    Ok(frostman_sweep(set, &Gauge::Ladder { beta, eta, j })?.scaled(1.0 / FROSTMAN_SAFETY))
}

/// Ball centers and radii sampled by [`growth_check`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SamplingSpec {
    pub centers: Vec<Point>,
    pub radii: Vec<f64>,
}

impl SamplingSpec {
    /// Atom locations plus a `grid x grid` lattice over the root, with
    /// radii `2^-i` from `leaf_side` up to 1.
    pub fn standard(mu: &DiscreteMeasure, root: Rect, leaf_side: f64, grid: usize) -> Self {
        let mut centers: Vec<Point> = mu.atoms().iter().map(|a| a.point).collect();
        if grid > 0 {
            let (dx, dy) = (root.width() / grid as f64, root.height() / grid as f64);
            for i in 0..grid {
                for j in 0..grid {
                    centers.push(Point::new(
                        root.x0 + (i as f64 + 0.5) * dx,
                        root.y0 + (j as f64 + 0.5) * dy,
                    ));
                }
            }
        }
        let mut radii = Vec::new();
        let mut r = 1.0;
        while r >= leaf_side * (1.0 - 1e-12) && radii.len() < 64 {
            radii.push(r);
            r *= 0.5;
        }
        radii.reverse();
        SamplingSpec { centers, radii }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GrowthReport {
    pub max_ratio: f64,
    pub worst_center: Point,
    pub worst_radius: f64,
    pub samples: usize,
}

impl GrowthReport {
    pub fn passes(&self) -> bool {
        self.max_ratio <= 1.0
    }
}

/// Uniform buckets with per-row prefix sums, so that cells entirely inside
/// a ball are summed in O(1) per row and only boundary cells are scanned.
struct BallIndex<'a> {
    atoms: &'a [Atom],
    x0: f64,
    y0: f64,
    cell: f64,
    dim: usize,
    /// Atom indices grouped by cell, row-major.
    order: Vec<usize>,
    starts: Vec<usize>,
    /// `row_prefix[row * (dim + 1) + i]` is the mass of cells `0..i` in `row`.
    row_prefix: Vec<f64>,
}

impl<'a> BallIndex<'a> {
    fn new(mu: &'a DiscreteMeasure) -> Option<Self> {
        let bbox = mu.bbox()?;
        let atoms = mu.atoms();
        let dim = (math::sqrt(atoms.len() as f64) as usize).clamp(1, 512);
        let extent = bbox.width().max(bbox.height()).max(f64::MIN_POSITIVE);
        let cell = extent * (1.0 + 1e-9) / dim as f64;
        let cell_of = |p: Point| {
            let i = (((p.re - bbox.x0) / cell) as usize).min(dim - 1);
            let j = (((p.im - bbox.y0) / cell) as usize).min(dim - 1);
            j * dim + i
        };
        let mut counts = alloc::vec![0usize; dim * dim + 1];
        for a in atoms {
            counts[cell_of(a.point) + 1] += 1;
        }
        for c in 1..counts.len() {
            counts[c] += counts[c - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut order = alloc::vec![0usize; atoms.len()];
        for (idx, a) in atoms.iter().enumerate() {
            let c = cell_of(a.point);
            order[fill[c]] = idx;
            fill[c] += 1;
        }
        let mut row_prefix = alloc::vec![0.0; dim * (dim + 1)];
        for row in 0..dim {
            for i in 0..dim {
                let c = row * dim + i;
                let m: f64 = order[starts[c]..starts[c + 1]].iter().map(|&k| atoms[k].weight).sum();
                row_prefix[row * (dim + 1) + i + 1] = row_prefix[row * (dim + 1) + i] + m;
            }
        }
        Some(BallIndex { atoms, x0: bbox.x0, y0: bbox.y0, cell, dim, order, starts, row_prefix })
    }

    fn cell_rect(&self, i: usize, j: usize) -> Rect {
        let x = self.x0 + i as f64 * self.cell;
        let y = self.y0 + j as f64 * self.cell;
        Rect::new(x, y, x + self.cell, y + self.cell)
    }

    fn index_range(&self, lo: f64, hi: f64, origin: f64) -> Option<(usize, usize)> {
        let a = math::floor((lo - origin) / self.cell);
        let b = math::floor((hi - origin) / self.cell);
        if b < 0.0 || a >= self.dim as f64 {
            return None;
        }
        Some((a.max(0.0) as usize, (b as usize).min(self.dim - 1)))
    }

    fn cell_mass_scan(&self, c: usize, center: Point, r2: f64) -> f64 {
        self.order[self.starts[c]..self.starts[c + 1]]
            .iter()
            .map(|&k| &self.atoms[k])
            .filter(|a| in_closed_ball(a.point, center, r2))
            .map(|a| a.weight)
            .sum()
    }

    fn mass(&self, center: Point, radius: f64) -> f64 {
        let r2 = radius * radius;
        let Some((j0, j1)) = self.index_range(center.im - radius, center.im + radius, self.y0) else {
            return 0.0;
        };
        let Some((i0, i1)) = self.index_range(center.re - radius, center.re + radius, self.x0) else {
            return 0.0;
        };
        let inside = |rect: &Rect| {
            rect.corners().iter().all(|&p| in_closed_ball(p, center, r2))
        };
        let mut total = 0.0;
        for j in j0..=j1 {
            // Cells fully inside the ball form a contiguous run in the row;
            // find it around the column of the center.
            let mut full: Option<(usize, usize)> = None;
            let ci = math::floor((center.re - self.x0) / self.cell);
            if ci >= i0 as f64 && ci <= i1 as f64 {
                let ci = ci as usize;
                if inside(&self.cell_rect(ci, j)) {
                    let (mut a, mut b) = (ci, ci);
                    while a > i0 && inside(&self.cell_rect(a - 1, j)) {
                        a -= 1;
                    }
                    while b < i1 && inside(&self.cell_rect(b + 1, j)) {
                        b += 1;
                    }
                    full = Some((a, b));
                }
            }
            let base = j * (self.dim + 1);
            match full {
                Some((a, b)) => {
                    total += self.row_prefix[base + b + 1] - self.row_prefix[base + a];
                    for i in (i0..a).chain(b + 1..=i1) {
                        total += self.cell_mass_scan(j * self.dim + i, center, r2);
                    }
                }
                None => {
                    for i in i0..=i1 {
                        total += self.cell_mass_scan(j * self.dim + i, center, r2);
                    }
                }
            }
        }
        total
    }
}

/// Largest `mu(closed ball(a, r)) / r^beta` over the sampled family.
pub fn growth_check(mu: &DiscreteMeasure, beta: f64, sampling: &SamplingSpec) -> Result<GrowthReport> {
    check_beta(beta)?;
    let mut report = GrowthReport {
        max_ratio: 0.0,
        worst_center: Point::new(0.0, 0.0),
        worst_radius: 0.0,
        samples: sampling.centers.len() * sampling.radii.len(),
    };
    let Some(index) = BallIndex::new(mu) else {
        return Ok(report);
    };
    for &r in &sampling.radii {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument("sampling radii must be positive"));
        }
        let scale = math::powf(r, beta);
        for &c in &sampling.centers {
            let ratio = index.mass(c, r) / scale;
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
                report.worst_center = c;
                report.worst_radius = r;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::dyadic_content;
    use crate::geom::{rasterize, DyadicSquare, RasterMode, Scene, Shape};

    fn segment_raster(depth: u32) -> RasterSet {
        let scene = Scene::default().with_shape(Shape::segment(Point::new(0.0, 0.0), Point::new(1.0, 0.0)));
        rasterize(&scene, depth, 16, RasterMode::Outer).unwrap()
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(DiscreteMeasure::dirac(Point::new(0.0, 0.0), -1.0).is_err());
        assert!(DiscreteMeasure::dirac(Point::new(0.0, 0.0), f64::NAN).is_err());
    }

    #[test]
    fn segment_sweep_saturates_root() {
        for depth in 1..=10 {
            let mu = frostman_sweep(&segment_raster(depth), &Gauge::PowerLaw(0.5)).unwrap();
            assert!((mu.total() - 1.0).abs() < 1e-12, "depth {depth}: {}", mu.total());
            let f = frostman(&segment_raster(depth), 0.5).unwrap();
            assert!((f.total() - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn single_leaf() {
        let set = RasterSet::from_leaves(DyadicSquare::UNIT, 10, [(3, 700)]);
        let mu = frostman(&set, 0.5).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.total(), math::exp2(-5.0) / 8.0);
    }

    #[test]
    fn full_square_root_cap_binds() {
        let set = RasterSet::full(DyadicSquare::UNIT, 5);
        let mu = frostman_sweep(&set, &Gauge::PowerLaw(0.5)).unwrap();
        assert!((mu.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_set_is_an_error() {
        let set = RasterSet::empty(DyadicSquare::UNIT, 3);
        assert_eq!(frostman(&set, 0.5), Err(Error::EmptySet));
    }

    #[test]
    fn zero_measure_growth() {
        let s = SamplingSpec { centers: alloc::vec![Point::new(0.5, 0.5)], radii: alloc::vec![0.1, 1.0] };
        let r = growth_check(&DiscreteMeasure::zero(), 0.5, &s).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        assert_eq!(r.samples, 2);
    }

    #[test]
    fn point_mass_ratio() {
        let mu = DiscreteMeasure::dirac(Point::new(0.0, 0.0), 0.3).unwrap();
        let s = SamplingSpec {
            centers: alloc::vec![Point::new(0.0, 0.0)],
            radii: alloc::vec![1.0, 0.25, 1.0 / 1024.0],
        };
        let r = growth_check(&mu, 0.5, &s).unwrap();
        assert!((r.max_ratio - 0.3 * 32.0).abs() < 1e-12);
        assert_eq!(r.worst_radius, 1.0 / 1024.0);
    }

    #[test]
    fn indexed_mass_matches_direct_sum() {
        let scene = Scene::default()
            .with_shape(Shape::disc(Point::new(0.4, 0.4), 0.3))
            .with_shape(Shape::segment(Point::new(0.1, 0.9), Point::new(0.9, 0.8)));
        let set = rasterize(&scene, 6, 16, RasterMode::Outer).unwrap();
        let mu = frostman(&set, 0.6).unwrap();
        let index = BallIndex::new(&mu).unwrap();
        let spec = SamplingSpec::standard(&mu, DyadicSquare::UNIT.rect(), set.leaf_side(), 9);
        for &r in &spec.radii {
            for c in spec.centers.iter().step_by(7) {
                let a = index.mass(*c, r);
                let b = mu.mass_in_ball(*c, r);
                assert!((a - b).abs() <= 1e-12 * (1.0 + b), "{c} {r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn frostman_segment_has_growth() {
        for depth in 2..=8 {
            let set = segment_raster(depth);
            let mu = frostman(&set, 0.5).unwrap();
            let spec = SamplingSpec::standard(&mu, DyadicSquare::UNIT.rect(), set.leaf_side(), 16);
            let r = growth_check(&mu, 0.5, &spec).unwrap();
            assert!(r.passes(), "depth {depth}: {}", r.max_ratio);
            assert!(r.max_ratio > 0.0);
            assert!(mu.total() >= dyadic_content(&set, 0.5).unwrap().value / 8.0 - 1e-12);
        }
    }

    #[test]
    fn ladder_cap_is_smaller() {
        let set = segment_raster(8);
        let plain = frostman(&set, 0.5).unwrap();
        let lower = frostman_lower(&set, 0.5, 0.5, 2).unwrap();
        assert!(lower.total() <= plain.total());
        assert!(lower.total() > 0.0);
    }
}
