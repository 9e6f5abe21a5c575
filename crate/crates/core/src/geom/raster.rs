//! Linear quadtree: occupied leaves are stored as sorted Morton codes, so
//! every dyadic node of the tree is a contiguous run of codes sharing a
//! prefix and the internal nodes present are exactly the prefixes that occur.

use alloc::vec::Vec;
use core::ops::Range;

use super::{Annulus, DyadicSquare, ParametricDomain, Rect, Scene, Shape};
use crate::{Error, Point, Result, MAX_DEPTH};

/// Outer rasterization marks every leaf meeting a shape (a certified cover);
/// inner marks only leaves contained in a shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RasterMode {
    #[default]
    Outer,
    Inner,
}

/// A compact set discretized as occupied leaves of depth `depth` below
/// `root`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterSet {
    root: DyadicSquare,
    depth: u32,
    codes: Vec<u64>,
}

fn spread(mut x: u64) -> u64 {
    x &= 0xffff_ffff;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    (x | (x << 1)) & 0x5555_5555_5555_5555
}

fn compact(mut x: u64) -> u64 {
    x &= 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x >> 4)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x >> 8)) & 0x0000_ffff_0000_ffff;
    (x | (x >> 16)) & 0x0000_0000_ffff_ffff
}

/// Morton code of the cell `(i, j)`: bits of `i` at even positions.
#[inline]
pub fn morton(i: u32, j: u32) -> u64 {
    spread(i as u64) | (spread(j as u64) << 1)
}

#[inline]
pub fn demorton(code: u64) -> (u32, u32) {
    (compact(code) as u32, compact(code >> 1) as u32)
}

impl RasterSet {
    pub fn empty(root: DyadicSquare, depth: u32) -> Self {
        assert!(depth <= MAX_DEPTH, "depth above MAX_DEPTH");
        RasterSet { root, depth, codes: Vec::new() }
    }

    /// Builds a raster from leaf indices relative to the root; indices
    /// outside `[0, 2^depth)` are dropped.
    pub fn from_leaves<I: IntoIterator<Item = (u32, u32)>>(root: DyadicSquare, depth: u32, leaves: I) -> Self {
        let mut set = RasterSet::empty(root, depth);
        let n = 1u64 << depth;
        set.codes = leaves
            .into_iter()
            .filter(|&(i, j)| (i as u64) < n && (j as u64) < n)
            .map(|(i, j)| morton(i, j))
            .collect();
        set.normalize();
        set
    }

    pub fn full(root: DyadicSquare, depth: u32) -> Self {
        let n = 1u32 << depth;
        let mut set = RasterSet::empty(root, depth);
        set.codes = (0..(n as u64 * n as u64)).collect();
        set
    }

    fn normalize(&mut self) {
        self.codes.sort_unstable();
        self.codes.dedup();
    }

    pub fn root(&self) -> DyadicSquare {
        self.root
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Sorted Morton codes of the occupied leaves.
    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn leaves(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.codes.iter().map(|&c| demorton(c))
    }

    pub fn contains(&self, i: u32, j: u32) -> bool {
        self.codes.binary_search(&morton(i, j)).is_ok()
    }

    /// Absolute side length of a leaf.
    pub fn leaf_side(&self) -> f64 {
        self.node_side(self.depth)
    }

    /// Absolute side length of a node `level` steps below the root.
    pub fn node_side(&self, level: u32) -> f64 {
        crate::math::dyadic_side(self.root.n as i64 + level as i64)
    }

    /// Absolute dyadic square of a node given by its Morton prefix.
    pub fn node_square(&self, level: u32, prefix: u64) -> DyadicSquare {
        let (i, j) = demorton(prefix);
        DyadicSquare::new(
            (self.root.m << level) + i as i64,
            (self.root.r << level) + j as i64,
            self.root.n + level,
        )
    }

    pub fn leaf_square(&self, i: u32, j: u32) -> DyadicSquare {
        self.node_square(self.depth, morton(i, j))
    }

    pub fn leaf_squares(&self) -> impl Iterator<Item = DyadicSquare> + '_ {
        self.codes.iter().map(|&c| self.node_square(self.depth, c))
    }

    /// Occupied nodes at `level` (0 = root) with the ranges of leaf indices
    /// below each, in Morton order.
    pub fn nodes_at(&self, level: u32) -> Vec<(u64, Range<usize>)> {
        debug_assert!(level <= self.depth);
        let shift = 2 * (self.depth - level);
        let mut out: Vec<(u64, Range<usize>)> = Vec::new();
        for (idx, &c) in self.codes.iter().enumerate() {
            let prefix = c >> shift;
            match out.last_mut() {
                Some((p, range)) if *p == prefix => range.end = idx + 1,
                _ => out.push((prefix, idx..idx + 1)),
            }
        }
        out
    }

    /// Keeps the leaves whose closed square satisfies `keep`.
    pub fn filter<F: FnMut(&Rect) -> bool>(&self, mut keep: F) -> RasterSet {
        let codes = self
            .codes
            .iter()
            .copied()
            .filter(|&c| keep(&self.node_square(self.depth, c).rect()))
            .collect();
        RasterSet { root: self.root, depth: self.depth, codes }
    }

    /// The same set seen at a coarser depth: a coarse leaf is occupied iff
    /// one of its descendants is.
    pub fn coarsen(&self, depth: u32) -> RasterSet {
        assert!(depth <= self.depth);
        let shift = 2 * (self.depth - depth);
        let mut codes: Vec<u64> = self.codes.iter().map(|c| c >> shift).collect();
        codes.dedup();
        RasterSet { root: self.root, depth, codes }
    }

    pub fn union(&self, other: &RasterSet) -> RasterSet {
        assert_eq!((self.root, self.depth), (other.root, other.depth), "incompatible rasters");
        let mut codes = self.codes.clone();
        codes.extend_from_slice(&other.codes);
        let mut out = RasterSet { root: self.root, depth: self.depth, codes };
        out.normalize();
        out
    }

    pub fn is_subset(&self, other: &RasterSet) -> bool {
        self.root == other.root
            && self.depth == other.depth
            && self.codes.iter().all(|c| other.codes.binary_search(c).is_ok())
    }

    /// Image under `z -> (z + corner) / 2` in root coordinates: the set is
    /// shrunk by one half into quadrant `(qx, qy)` and refined by one level.
    pub fn half_scale(&self, qx: u32, qy: u32) -> RasterSet {
        assert!(qx < 2 && qy < 2);
        let n = 1u32 << self.depth;
        RasterSet::from_leaves(
            self.root,
            self.depth + 1,
            self.leaves().map(|(i, j)| (i + qx * n, j + qy * n)),
        )
    }

    /// Greedy quadtree compression: the occupied leaves grouped into maximal
    /// fully-occupied dyadic squares.
    pub fn maximal_blocks(&self) -> Vec<DyadicSquare> {
        let mut out = Vec::new();
        self.collect_blocks(0, 0, &self.codes, &mut out);
        out
    }

    fn collect_blocks(&self, level: u32, prefix: u64, codes: &[u64], out: &mut Vec<DyadicSquare>) {
        if codes.is_empty() {
            return;
        }
        let below = 2 * (self.depth - level);
        let capacity = 1u64 << below;
        if codes.len() as u64 == capacity {
            out.push(self.node_square(level, prefix));
            return;
        }
        let shift = below - 2;
        let mut start = 0;
        for child in 0..4u64 {
            let key = (prefix << 2) | child;
            let end = start + codes[start..].iter().take_while(|&&c| c >> shift == key).count();
            self.collect_blocks(level + 1, key, &codes[start..end], out);
            start = end;
        }
    }
}

/// Rasterizes every shape of `scene` at `depth` below its root.
pub fn rasterize(scene: &Scene, depth: u32, cap: u32, mode: RasterMode) -> Result<RasterSet> {
    let cap = cap.min(MAX_DEPTH);
    if depth > cap {
        return Err(Error::DepthTooLarge { depth, cap });
    }
    if let Some(index) = scene.first_outside_root() {
        return Err(Error::ShapeOutsideRoot { index });
    }
    Ok(rasterize_shapes(scene.root, &scene.shapes, depth, mode))
}

pub(crate) fn rasterize_shapes(root: DyadicSquare, shapes: &[Shape], depth: u32, mode: RasterMode) -> RasterSet {
    let mut codes = Vec::new();
    for shape in shapes {
        match shape {
            Shape::Dyadic(_) | Shape::Bitmap { .. } => {
                for cell in shape.cells() {
                    push_cell(root, depth, &cell, mode, &mut codes);
                }
            }
            _ => descend(root, depth, shape, mode, &mut codes),
        }
    }
    let mut set = RasterSet { root, depth, codes };
    set.normalize();
    set
}

fn push_cell(root: DyadicSquare, depth: u32, cell: &DyadicSquare, mode: RasterMode, codes: &mut Vec<u64>) {
    let leaf_level = root.n + depth;
    let (lo_m, lo_r, count) = if cell.n <= leaf_level {
        let k = leaf_level - cell.n;
        (cell.m << k, cell.r << k, 1i64 << k)
    } else {
        if mode == RasterMode::Inner {
            return;
        }
        let a = cell.ancestor(leaf_level);
        (a.m, a.r, 1)
    };
    let base_m = root.m << depth;
    let base_r = root.r << depth;
    let n = 1i64 << depth;
    for dj in 0..count {
        for di in 0..count {
            let i = lo_m + di - base_m;
            let j = lo_r + dj - base_r;
            if (0..n).contains(&i) && (0..n).contains(&j) {
                codes.push(morton(i as u32, j as u32));
            }
        }
    }
}

fn descend(root: DyadicSquare, depth: u32, shape: &Shape, mode: RasterMode, codes: &mut Vec<u64>) {
    let mut stack: Vec<(u32, u32, u32)> = alloc::vec![(0, 0, 0)];
    while let Some((i, j, level)) = stack.pop() {
        let sq = DyadicSquare::new(
            (root.m << level) + i as i64,
            (root.r << level) + j as i64,
            root.n + level,
        );
        let rect = sq.rect();
        if !shape.meets_rect(&rect) {
            continue;
        }
        if level == depth {
            if mode == RasterMode::Outer || shape.contains_rect(&rect) {
                codes.push(morton(i, j));
            }
            continue;
        }
        for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            stack.push((2 * i + di, 2 * j + dj, level + 1));
        }
    }
}

/// Leaves of `set` meeting the closed annulus.
pub fn annulus_clip(set: &RasterSet, ann: &Annulus) -> RasterSet {
    set.filter(|rect| ann.meets_rect(rect))
}

/// Leaves of `set` meeting the closed disc `B(center, radius)`.
pub fn disc_clip(set: &RasterSet, center: Point, radius: f64) -> RasterSet {
    set.filter(|rect| rect.min_dist(center) <= radius)
}

/// A domain near a boundary point: an explicit scene of obstacles (the
/// complement of `U`), or a parametric slit / road-runner family.
#[derive(Debug, Clone, PartialEq)]
pub enum Complement {
    Scene(Scene),
    Parametric(ParametricDomain),
}

/// Raster of the obstacle set inside the closed ball `B(b, radius)`, and for
/// parametric domains the index at which the obstacle sequence was cut off.
pub fn complement_in_ball(
    domain: &Complement,
    b: Point,
    radius: f64,
    depth: u32,
    cap: u32,
) -> Result<(RasterSet, Option<u32>)> {
    match domain {
        Complement::Scene(scene) => {
            let raster = rasterize(scene, depth, cap, RasterMode::Outer)?;
            Ok((disc_clip(&raster, b, radius), None))
        }
        Complement::Parametric(param) => {
            let placed = param.with_anchor(b);
            let mut scene = Scene::new(DyadicSquare::UNIT);
            let leaf = crate::math::dyadic_side(depth as i64);
            let truncation = placed.truncation_index(leaf);
            scene.shapes = placed.obstacles_before(truncation);
            let raster = rasterize(&scene, depth, cap, RasterMode::Outer)?;
            Ok((disc_clip(&raster, b, radius), Some(truncation)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_segment() -> Scene {
        Scene::default().with_shape(Shape::segment(Point::new(0.0, 0.0), Point::new(1.0, 0.0)))
    }

    #[test]
    fn morton_roundtrip() {
        for (i, j) in [(0, 0), (1, 0), (0, 1), (65535, 12345), (7, 9)] {
            assert_eq!(demorton(morton(i, j)), (i, j));
        }
        assert_eq!(morton(1, 0), 1);
        assert_eq!(morton(0, 1), 2);
        assert_eq!(morton(3, 2) >> 2, morton(1, 1));
    }

    #[test]
    fn empty_scene_rasterizes_empty() {
        let r = rasterize(&Scene::default(), 4, 14, RasterMode::Outer).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn unit_segment_depth_three_is_bottom_row() {
        let r = rasterize(&unit_segment(), 3, 14, RasterMode::Outer).unwrap();
        assert_eq!(r.len(), 8);
        assert!(r.leaves().all(|(_, j)| j == 0));
    }

    #[test]
    fn centred_disc_touches_all_quadrants() {
        let scene = Scene::default().with_shape(Shape::disc(Point::new(0.5, 0.5), 0.5));
        let r = rasterize(&scene, 1, 14, RasterMode::Outer).unwrap();
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn errors_are_reported() {
        assert_eq!(
            rasterize(&unit_segment(), 15, 14, RasterMode::Outer),
            Err(Error::DepthTooLarge { depth: 15, cap: 14 })
        );
        let out = Scene::default().with_shape(Shape::disc(Point::new(0.9, 0.5), 0.2));
        assert_eq!(
            rasterize(&out, 3, 14, RasterMode::Outer),
            Err(Error::ShapeOutsideRoot { index: 0 })
        );
    }

    #[test]
    fn dyadic_literal_occupies_its_leaves() {
        let scene = Scene::default().with_shape(Shape::Dyadic(DyadicSquare::new(1, 0, 1)));
        let r = rasterize(&scene, 3, 14, RasterMode::Outer).unwrap();
        assert_eq!(r.len(), 16);
        assert!(r.leaves().all(|(i, j)| i >= 4 && j < 4));
        let fine = Scene::default().with_shape(Shape::Dyadic(DyadicSquare::new(1000, 3, 12)));
        let r = rasterize(&fine, 3, 14, RasterMode::Outer).unwrap();
        assert_eq!(r.leaves().collect::<Vec<_>>(), vec![(1000 >> 9, 0)]);
        assert!(rasterize(&fine, 3, 14, RasterMode::Inner).unwrap().is_empty());
    }

    #[test]
    fn inner_mode_is_inside_outer() {
        let scene = Scene::default().with_shape(Shape::disc(Point::new(0.5, 0.5), 0.4));
        let outer = rasterize(&scene, 6, 14, RasterMode::Outer).unwrap();
        let inner = rasterize(&scene, 6, 14, RasterMode::Inner).unwrap();
        assert!(!inner.is_empty());
        assert!(inner.is_subset(&outer));
        assert!(inner.len() < outer.len());
        assert!(rasterize(&unit_segment(), 5, 14, RasterMode::Inner).unwrap().is_empty());
    }

    #[test]
    fn annulus_clip_matches_distance_oracle() {
        let full = RasterSet::full(DyadicSquare::UNIT, 5);
        let ann = Annulus::new(Point::new(0.0, 0.0), 1);
        let clipped = annulus_clip(&full, &ann);
        // Oracle: dense sampling of each leaf square for a point in the annulus.
        let h = full.leaf_side();
        for (i, j) in full.leaves() {
            let mut hit = false;
            for a in 0..=64 {
                for c in 0..=64 {
                    let z = Point::new((i as f64 + a as f64 / 64.0) * h, (j as f64 + c as f64 / 64.0) * h);
                    let d = crate::math::modulus(z);
                    hit |= (0.25..=0.5).contains(&d);
                }
            }
            assert_eq!(clipped.contains(i, j), hit, "leaf ({i}, {j})");
        }
    }

    #[test]
    fn clip_of_empty_or_disjoint_is_empty() {
        let ann = Annulus::new(Point::new(0.5, 0.5), 3);
        assert!(annulus_clip(&RasterSet::empty(DyadicSquare::UNIT, 6), &ann).is_empty());
        let corner = Scene::default().with_shape(Shape::Dyadic(DyadicSquare::new(0, 0, 3)));
        let r = rasterize(&corner, 6, 14, RasterMode::Outer).unwrap();
        assert!(annulus_clip(&r, &ann).is_empty());
    }

    #[test]
    fn maximal_blocks_reassemble_the_set() {
        let scene = Scene::default()
            .with_shape(Shape::Dyadic(DyadicSquare::new(0, 0, 1)))
            .with_shape(Shape::Dyadic(DyadicSquare::new(5, 6, 3)));
        let r = rasterize(&scene, 4, 14, RasterMode::Outer).unwrap();
        let blocks = r.maximal_blocks();
        assert_eq!(blocks, vec![DyadicSquare::new(0, 0, 1), DyadicSquare::new(5, 6, 3)]);
        let rebuilt = rasterize_shapes(
            DyadicSquare::UNIT,
            &blocks.iter().map(|b| Shape::Dyadic(*b)).collect::<Vec<_>>(),
            4,
            RasterMode::Outer,
        );
        assert_eq!(rebuilt, r);
    }

    #[test]
    fn parametric_complement_contains_each_obstacle() {
        let d = ParametricDomain::slit(0.5, 0.5, 0.25, 0.25).unwrap();
        let b = ParametricDomain::DEFAULT_ANCHOR;
        let (r, trunc) = complement_in_ball(&Complement::Parametric(d), b, 0.5, 8, 14).unwrap();
        let trunc = trunc.unwrap();
        assert_eq!(trunc, d.truncation_index(1.0 / 256.0));
        // Oracle: enumerate the leaves each materialized slit meets directly.
        let mut expected = Vec::new();
        let h = 1.0 / 256.0;
        for n in 1..trunc {
            let (lo, hi) = (b.re + d.center(n) - d.radius(n), b.re + d.center(n) + d.radius(n));
            let j = crate::math::floor(b.im / h) as u32;
            // Closed leaves: one ending exactly at `lo` also meets the slit.
            let i0 = (crate::math::ceil(lo / h) - 1.0).max(0.0) as u32;
            let i1 = crate::math::floor(hi / h) as u32;
            for i in i0..=i1 {
                expected.push((i, j));
            }
        }
        let expected = RasterSet::from_leaves(DyadicSquare::UNIT, 8, expected);
        assert_eq!(r, expected);

        let rr = d.with_kind(super::super::ObstacleKind::RoadRunner);
        let (discs, _) = complement_in_ball(&Complement::Parametric(rr), b, 0.5, 8, 14).unwrap();
        assert!(r.is_subset(&discs));
        assert!(discs.len() > r.len());
    }
}
