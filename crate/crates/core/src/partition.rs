//! Partition of unity subordinate to a dyadic cover.
//!
//! Given dyadic squares `S_n` (side at most 1) covering a compact `E`,
//! builds functions `phi_n`, finitely many nonzero, with `sum phi_n = 1` near
//! `E`, `supp phi_n` inside `5 S_n`, and `N_k(phi_n)` bounded independently
//! of the cover. Steps:
//!
//! 1. sort by nonincreasing side, ties by `(m, r)`;
//! 2. greedy finite subcover by the open `5/4` dilates;
//! 3. one pruning pass dropping squares inside a cordon `5/4 S \ S`;
//! 4. per generation `m` (side `2^-m`), allocate every square of `G_m^+` to
//!    the lexicographically smallest `(m, r)` member of `G_m` it touches and
//!    set `phi_T = (1 - tau) sum_{n(S) = T} psi_S`, `tau <- tau + (1 - tau)
//!    sigma_m`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::geom::{DyadicSquare, RasterSet, Rect};
use crate::math;
use crate::smoothfn::{nk_seminorm, GridFunction, SmoothProfile};
use crate::{Error, Point, Result, MAX_DEPTH};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Default grid nodes per side of an atom's home square.
pub const DEFAULT_POINTS_PER_SIDE: f64 = 160.0;

/// Cells checked for coverage beyond which the build is refused.
const MAX_CELLS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionAtom {
    pub phi: GridFunction,
    pub home: DyadicSquare,
    pub generation: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GenerationStats {
    pub generation: u32,
    pub atoms: usize,
    /// Largest `N_k` over the generation's atoms.
    pub max_nk: f64,
    /// Largest `|grad tau_m| 2^-m` sampled on the generation's atom grids.
    pub tau_gradient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionResult {
    pub atoms: Vec<PartitionAtom>,
    pub covered: RasterSet,
    pub k: u32,
    pub generations: Vec<GenerationStats>,
    /// `sum phi_n` sampled over the neighbourhood of `E`.
    pub sum_field: GridFunction,
    /// `max |sum phi_n - 1|` over points of the `3/2` dilates of the
    /// occupied leaves.
    pub sum_error_max: f64,
    /// Nonzero atom nodes outside the closed `5 S` of the home square.
    pub support_violations: usize,
    /// Smallest and largest atom value seen on the grids.
    pub value_range: (f64, f64),
    pub squares_in: usize,
    pub squares_kept: usize,
    pub squares_pruned: usize,
}

impl PartitionResult {
    pub fn max_nk(&self) -> f64 {
        self.generations.iter().fold(0.0, |m, g| m.max(g.max_nk))
    }
}

struct Generation {
    level: u32,
    squares: Vec<DyadicSquare>,
    /// `G_m^+` keyed by `(m, r)`, valued by allocation index into `squares`.
    plus: BTreeMap<(i64, i64), usize>,
}

/// Pointwise evaluation of the construction.
pub struct PartitionEvaluator {
    generations: Vec<Generation>,
    profile: SmoothProfile,
}

/// Bumps of one axis at level side `s`: column index range and, per sample,
/// `rho(|x/s - i - 1/2|) / sum_i' rho(|x/s - i' - 1/2|)`.
struct AxisTable {
    i0: i64,
    width: usize,
    values: Vec<f64>,
}

impl AxisTable {
    fn new(coords: &[f64], side: f64, profile: &SmoothProfile) -> Self {
        let lo = coords.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = coords.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let i0 = math::floor(lo / side) as i64 - 1;
        let i1 = math::floor(hi / side) as i64 + 1;
        let width = (i1 - i0 + 1) as usize;
        let mut values = alloc::vec![0.0; width * coords.len()];
        for (c, &x) in coords.iter().enumerate() {
            let u = x / side;
            let total = axis_sum(u, profile);
            let base = math::floor(u) as i64;
            for i in base - 1..=base + 1 {
                let v = profile.eval(math::abs(u - (i as f64 + 0.5)));
                if v != 0.0 {
                    values[c * width + (i - i0) as usize] = v / total;
                }
            }
        }
        AxisTable { i0, width, values }
    }

    fn get(&self, c: usize, i: i64) -> f64 {
        let k = i - self.i0;
        if k < 0 || k as usize >= self.width {
            0.0
        } else {
            self.values[c * self.width + k as usize]
        }
    }
}

/// `1 - tau`, with rounding residue below `1e-14` flushed to zero so that
/// squares already fully covered by coarser generations get `phi = 0`.
#[inline]
fn remainder(tau: f64) -> f64 {
    let r = 1.0 - tau;
    if r < 1e-14 {
        0.0
    } else {
        r
    }
}

fn axis_sum(u: f64, profile: &SmoothProfile) -> f64 {
    let base = math::floor(u);
    (-2..=2).map(|d| profile.eval(math::abs(u - (base + d as f64 + 0.5)))).sum()
}

impl PartitionEvaluator {
    /// `sum_{S in G^+ near z} psi_S(z)`, optionally only the squares
    /// allocated to `only`.
    fn sigma(&self, g: &Generation, z: Point, only: Option<usize>) -> f64 {
        let s = math::dyadic_side(g.level as i64);
        let (u, v) = (z.re / s, z.im / s);
        let (ci, cj) = (math::floor(u) as i64, math::floor(v) as i64);
        let mut acc = 0.0;
        let mut norm = None;
        for j in cj - 1..=cj + 1 {
            let py = self.profile.eval(math::abs(v - (j as f64 + 0.5)));
            if py == 0.0 {
                continue;
            }
            for i in ci - 1..=ci + 1 {
                let Some(&alloc) = g.plus.get(&(i, j)) else { continue };
                if only.is_some_and(|t| t != alloc) {
                    continue;
                }
                let px = self.profile.eval(math::abs(u - (i as f64 + 0.5)));
                if px == 0.0 {
                    continue;
                }
                let tau = *norm.get_or_insert_with(|| axis_sum(u, &self.profile) * axis_sum(v, &self.profile));
                acc += px * py / tau;
            }
        }
        acc
    }

    /// `tau` after the first `count` generations.
    pub fn tau(&self, count: usize, z: Point) -> f64 {
        let mut tau = 0.0;
        for g in &self.generations[..count] {
            tau += remainder(tau) * self.sigma(g, z, None);
        }
        tau
    }

    /// `phi_T` for the `t`-th square of generation index `gi`.
    pub fn phi(&self, gi: usize, t: usize, z: Point) -> f64 {
        let local = self.sigma(&self.generations[gi], z, Some(t));
        if local == 0.0 {
            return 0.0;
        }
        remainder(self.tau(gi, z)) * local
    }

    /// `sum_n phi_n(z)`, accumulated term by term per generation.
    pub fn sum(&self, z: Point) -> f64 {
        let mut tau = 0.0;
        let mut total = 0.0;
        for g in &self.generations {
            let sigma = self.sigma(g, z, None);
            total += remainder(tau) * sigma;
            tau += remainder(tau) * sigma;
        }
        total
    }

    pub fn generation_levels(&self) -> impl Iterator<Item = u32> + '_ {
        self.generations.iter().map(|g| g.level)
    }

    /// `phi_T` and `tau` after generation `gi` on the square lattice
    /// `origin + (c h, r h)`, `0 <= r, c < n`. Uses the product structure
    /// `psi_S(x, y) = (rho_x / sum rho_x) (rho_y / sum rho_y)`.
    /// `N_k` of an atom on its support. Atoms whose support is a sliver too
    /// thin for the base grid are resampled over their support box.
    fn atom_nk(&self, gi: usize, t: usize, phi: &GridFunction, k: u32) -> Result<f64> {
        let mut grid = phi.cropped_to_support(2);
        for _ in 0..4 {
            match nk_seminorm(&grid, k) {
                Err(Error::GridTooCoarse { required, .. }) if grid.rows() > 1 => {
                    let extent = (grid.rows().max(grid.cols()) - 1) as f64 * grid.spacing();
                    let h = 0.5 * required;
                    let n = math::ceil(extent / h) as usize + 1;
                    if n > 2048 {
                        break;
                    }
                    let (values, _) = self.grid_phi_tau(gi, t, grid.origin(), h, n);
                    grid = GridFunction::new(grid.origin(), h, n, n, values)?.cropped_to_support(2);
                }
                other => return other.map(|v| v.value),
            }
        }
        nk_seminorm(&grid, k).map(|v| v.value)
    }

    fn grid_phi_tau(&self, gi: usize, t: usize, origin: Point, h: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let xs: Vec<f64> = (0..n).map(|c| origin.re + c as f64 * h).collect();
        let ys: Vec<f64> = (0..n).map(|r| origin.im + r as f64 * h).collect();
        let mut tau = alloc::vec![0.0; n * n];
        let mut phi = alloc::vec![0.0; n * n];
        for (g_idx, g) in self.generations[..=gi].iter().enumerate() {
            let s = math::dyadic_side(g.level as i64);
            let ax = AxisTable::new(&xs, s, &self.profile);
            let ay = AxisTable::new(&ys, s, &self.profile);
            // Dense window of allocations over the lattice extent.
            let (wi, wj) = (ax.width, ay.width);
            let mut window: Vec<Option<usize>> = alloc::vec![None; wi * wj];
            for (key, &alloc) in g.plus.range((ax.i0, i64::MIN)..=(ax.i0 + wi as i64 - 1, i64::MAX)) {
                let (di, dj) = (key.0 - ax.i0, key.1 - ay.i0);
                if dj >= 0 && (dj as usize) < wj {
                    window[dj as usize * wi + di as usize] = Some(alloc);
                }
            }
            let own = g_idx == gi;
            for (r, &y) in ys.iter().enumerate().take(n) {
                let cj = math::floor(y / s) as i64;
                for (c, &x) in xs.iter().enumerate().take(n) {
                    let ci = math::floor(x / s) as i64;
                    let mut sigma = 0.0;
                    let mut local = 0.0;
                    for j in cj - 1..=cj + 1 {
                        let py = ay.get(r, j);
                        if py == 0.0 {
                            continue;
                        }
                        for i in ci - 1..=ci + 1 {
                            let (di, dj) = (i - ax.i0, j - ay.i0);
                            if di < 0 || dj < 0 || di as usize >= wi || dj as usize >= wj {
                                continue;
                            }
                            let Some(alloc) = window[dj as usize * wi + di as usize] else { continue };
                            let v = ax.get(c, i) * py;
                            sigma += v;
                            if own && alloc == t {
                                local += v;
                            }
                        }
                    }
                    let k = r * n + c;
                    if own && local != 0.0 {
                        phi[k] = remainder(tau[k]) * local;
                    }
                    tau[k] += remainder(tau[k]) * sigma;
                }
            }
        }
        (phi, tau)
    }
}

fn cordon_contains(s: &DyadicSquare, t: &DyadicSquare) -> bool {
    let outer = s.dilated(1.25);
    let tr = t.rect();
    outer.contains_rect(&tr) && !s.rect().intersects(&tr)
}

/// Leaves of `e` refined to `level` (absolute), as dyadic squares.
fn cells_at(e: &RasterSet, level: u32) -> Result<Vec<DyadicSquare>> {
    let leaf_level = e.root().n + e.depth();
    if level <= leaf_level {
        return Ok(e.leaf_squares().collect());
    }
    let extra = level - leaf_level;
    if extra > MAX_DEPTH || (e.len() as u64) << (2 * extra) > MAX_CELLS as u64 {
        return Err(Error::InvalidArgument("cover squares are too fine for the raster"));
    }
    let k = 1i64 << extra;
    let mut out = Vec::new();
    for leaf in e.leaf_squares() {
        for dj in 0..k {
            for di in 0..k {
                out.push(DyadicSquare::new(leaf.m * k + di, leaf.r * k + dj, level));
            }
        }
    }
    Ok(out)
}

fn sorted_squares(squares: &[DyadicSquare]) -> Vec<DyadicSquare> {
    let mut v = squares.to_vec();
    v.sort_by(|a, b| a.n.cmp(&b.n).then(a.m.cmp(&b.m)).then(a.r.cmp(&b.r)));
    v.dedup();
    v
}

/// Steps 1 to 3: the finite subcover after pruning, with counts.
pub fn select_cover(squares: &[DyadicSquare], e: &RasterSet) -> Result<(Vec<DyadicSquare>, usize)> {
    let sorted = sorted_squares(squares);
    let finest = sorted.iter().map(|s| s.n).max().unwrap_or(0);
    let mut uncovered = cells_at(e, finest)?;
    let mut kept = Vec::new();
    for s in &sorted {
        if uncovered.is_empty() {
            break;
        }
        let open = s.dilated(1.25);
        let before = uncovered.len();
        uncovered.retain(|c| !open.contains_rect_open(&c.rect()));
        if uncovered.len() < before {
            kept.push(*s);
        }
    }
    if let Some(cell) = uncovered.first() {
        let leaf_level = e.root().n + e.depth();
        let leaf = if cell.n > leaf_level { cell.ancestor(leaf_level) } else { *cell };
        let root = e.root().ancestor(e.root().n);
        let shift = leaf_level - e.root().n;
        let (i, j) = (leaf.m - (root.m << shift), leaf.r - (root.r << shift));
        return Err(Error::NotACover { leaf: (i as u32, j as u32) });
    }
    let mut removed = alloc::vec![false; kept.len()];
    for i in 0..kept.len() {
        if removed[i] {
            continue;
        }
        for j in i + 1..kept.len() {
            if !removed[j] && cordon_contains(&kept[i], &kept[j]) {
                removed[j] = true;
            }
        }
    }
    let pruned = removed.iter().filter(|&&r| r).count();
    let cover = kept.into_iter().zip(removed).filter(|(_, r)| !r).map(|(s, _)| s).collect();
    Ok((cover, pruned))
}

fn build_generations(cover: &[DyadicSquare]) -> Vec<Generation> {
    let mut levels: BTreeMap<u32, Vec<DyadicSquare>> = BTreeMap::new();
    for s in cover {
        levels.entry(s.n).or_default().push(*s);
    }
    levels
        .into_iter()
        .map(|(level, mut squares)| {
            squares.sort_by_key(|s| (s.m, s.r));
            let own: BTreeMap<(i64, i64), usize> =
                squares.iter().enumerate().map(|(t, s)| ((s.m, s.r), t)).collect();
            let mut plus = BTreeMap::new();
            let mut neighbours = BTreeSet::new();
            for s in &squares {
                for dj in -1..=1 {
                    for di in -1..=1 {
                        neighbours.insert((s.m + di, s.r + dj));
                    }
                }
            }
            for key in neighbours {
                let alloc = own.get(&key).copied().unwrap_or_else(|| {
                    // Smallest (m, r) among the members whose S^+ contains key.
                    (-1..=1)
                        .flat_map(|di| (-1..=1).map(move |dj| (key.0 + di, key.1 + dj)))
                        .filter_map(|k| own.get(&k).map(|&t| (k, t)))
                        .min()
                        .map(|(_, t)| t)
                        .expect("neighbour of a member")
                });
                plus.insert(key, alloc);
            }
            Generation { level, squares, plus }
        })
        .collect()
}

/// Runs the construction on a cover of `e`. Atom grids span `5 S` plus two
/// nodes of margin at `side / points_per_side`; `N_3` needs about 160
/// nodes per side to resolve the profile's transition band.
pub fn build_partition(
    squares: &[DyadicSquare],
    e: &RasterSet,
    k: u32,
    profile: SmoothProfile,
    points_per_side: f64,
) -> Result<PartitionResult> {
    if !(points_per_side >= 8.0) {
        return Err(Error::InvalidArgument("points per side must be at least 8"));
    }
    let (cover, pruned) = select_cover(squares, e)?;
    let evaluator = PartitionEvaluator { generations: build_generations(&cover), profile };

    let mut atoms = Vec::new();
    let mut stats = Vec::new();
    let mut violations = 0usize;
    let mut value_range = (f64::INFINITY, f64::NEG_INFINITY);
    for (gi, g) in evaluator.generations.iter().enumerate() {
        let side = math::dyadic_side(g.level as i64);
        let spacing = side / points_per_side;
        let mut gen_stats = GenerationStats { generation: g.level, atoms: g.squares.len(), max_nk: 0.0, tau_gradient: 0.0 };
        for (t, home) in g.squares.iter().enumerate() {
            let half = (math::ceil(2.5 * points_per_side) as usize) + 2;
            let n = 2 * half + 1;
            let origin = home.center() - Point::new(half as f64 * spacing, half as f64 * spacing);
            let (values, tau) = evaluator.grid_phi_tau(gi, t, origin, spacing, n);
            let phi = GridFunction::new(origin, spacing, n, n, values)?;
            let five = home.dilated(5.0);
            for z in phi.support_nodes() {
                if !five.contains_point(z) {
                    violations += 1;
                }
            }
            for &v in phi.values() {
                value_range.0 = value_range.0.min(v);
                value_range.1 = value_range.1.max(v);
            }
            gen_stats.max_nk = gen_stats.max_nk.max(evaluator.atom_nk(gi, t, &phi, k)?);
            for r in 1..n - 1 {
                for c in 1..n - 1 {
                    let gx = (tau[r * n + c + 1] - tau[r * n + c - 1]) / (2.0 * spacing);
                    let gy = (tau[(r + 1) * n + c] - tau[(r - 1) * n + c]) / (2.0 * spacing);
                    gen_stats.tau_gradient = gen_stats.tau_gradient.max(math::hypot(gx, gy) * side);
                }
            }
            atoms.push(PartitionAtom { phi, home: *home, generation: g.level });
        }
        stats.push(gen_stats);
    }

    // Partition property on the 3/2 dilates of the leaves.
    let mut sum_error_max: f64 = 0.0;
    let mut hull: Option<Rect> = None;
    for leaf in e.leaf_squares() {
        let nb = leaf.dilated(1.5);
        hull = Some(hull.map_or(nb, |h| h.union(&nb)));
        let n = 5;
        for j in 0..n {
            for i in 0..n {
                let z = Point::new(
                    nb.x0 + nb.width() * i as f64 / (n - 1) as f64,
                    nb.y0 + nb.height() * j as f64 / (n - 1) as f64,
                );
                sum_error_max = sum_error_max.max(math::abs(evaluator.sum(z) - 1.0));
            }
        }
    }
    let field_box = hull.unwrap_or(e.root().rect());
    let extent = field_box.width().max(field_box.height());
    let finest_leaf = e.leaf_side();
    let spacing = (finest_leaf / 4.0).max(extent / 256.0);
    let count = (math::ceil(extent / spacing) as usize + 1).max(2);
    let sum_field = GridFunction::sample(Point::new(field_box.x0, field_box.y0), spacing, count, count, |z| evaluator.sum(z))?;

    if atoms.is_empty() {
        value_range = (0.0, 0.0);
    }
    Ok(PartitionResult {
        atoms,
        covered: e.clone(),
        k,
        generations: stats,
        sum_field,
        sum_error_max,
        support_violations: violations,
        value_range,
        squares_in: squares.len(),
        squares_kept: cover.len(),
        squares_pruned: pruned,
    })
}

/// The evaluator behind [`build_partition`], for pointwise checks.
pub fn partition_evaluator(squares: &[DyadicSquare], e: &RasterSet, profile: SmoothProfile) -> Result<PartitionEvaluator> {
    let (cover, _) = select_cover(squares, e)?;
    Ok(PartitionEvaluator { generations: build_generations(&cover), profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p() -> SmoothProfile {
        SmoothProfile::default()
    }

    #[test]
    fn single_square() {
        let s = DyadicSquare::new(1, 2, 2);
        let e = RasterSet::from_leaves(DyadicSquare::UNIT, 4, (4..8).flat_map(|i| (8..12).map(move |j| (i, j))));
        let res = build_partition(&[s], &e, 3, p(), 128.0).unwrap();
        assert_eq!(res.atoms.len(), 1);
        assert_eq!(res.support_violations, 0);
        assert!(res.sum_error_max < 1e-12, "{}", res.sum_error_max);
        let ev = partition_evaluator(&[s], &e, p()).unwrap();
        let nb = s.dilated(1.5);
        for i in 0..=10 {
            for j in 0..=10 {
                let z = Point::new(nb.x0 + nb.width() * i as f64 / 10.0, nb.y0 + nb.height() * j as f64 / 10.0);
                assert!((ev.phi(0, 0, z) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn not_a_cover() {
        let e = RasterSet::from_leaves(DyadicSquare::UNIT, 3, [(0, 0), (7, 7)]);
        let err = build_partition(&[DyadicSquare::new(0, 0, 2)], &e, 1, p(), 32.0).unwrap_err();
        assert_eq!(err, Error::NotACover { leaf: (7, 7) });
    }

    #[test]
    fn two_adjacent_squares() {
        let a = DyadicSquare::new(1, 1, 2);
        let b = DyadicSquare::new(2, 1, 2);
        let e = RasterSet::from_leaves(DyadicSquare::UNIT, 3, [(2, 2), (3, 2), (4, 3), (5, 3)]);
        let res = build_partition(&[b, a], &e, 3, p(), 128.0).unwrap();
        assert_eq!(res.atoms.len(), 2);
        assert_eq!(res.support_violations, 0);
        assert!(res.sum_error_max < 1e-9);
        assert!(res.value_range.0 >= 0.0 && res.value_range.1 <= 1.0 + 1e-9);
    }

    #[test]
    fn cordon_squares_are_pruned() {
        let big = DyadicSquare::new(1, 1, 2);
        // Side 1/32 square just outside `big`, inside its 5/4 dilate.
        let touching = DyadicSquare::new(16, 10, 5);
        assert!(!cordon_contains(&big, &touching));
        // Side 1/64, strictly inside the cordon and touching the 5/4 boundary,
        // so the greedy pass keeps it for its own leaf.
        let small = DyadicSquare::new(33, 20, 6);
        assert!(cordon_contains(&big, &small));
        let e = RasterSet::from_leaves(DyadicSquare::UNIT, 6, [(20, 20), (33, 20)]);
        let (cover, pruned) = select_cover(&[small, big], &e).unwrap();
        assert_eq!(cover, vec![big]);
        assert_eq!(pruned, 1);
        let res = build_partition(&[small, big], &e, 1, p(), 32.0).unwrap();
        assert!(res.sum_error_max < 1e-12);
    }

    #[test]
    fn multi_scale() {
        let coarse = DyadicSquare::new(0, 0, 0);
        let fine = DyadicSquare::new(3, 3, 3);
        let e = RasterSet::from_leaves(DyadicSquare::UNIT, 3, [(0, 0), (3, 3)]);
        let ev = partition_evaluator(&[coarse, fine], &e, p()).unwrap();
        // The fine square lies inside the coarse one, so the greedy
        // subcover keeps only the coarse one.
        assert_eq!(ev.generation_levels().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn grid_matches_pointwise() {
        let squares = [DyadicSquare::new(0, 0, 1), DyadicSquare::new(5, 2, 3), DyadicSquare::new(6, 2, 3)];
        let e = RasterSet::from_leaves(DyadicSquare::UNIT, 3, [(0, 0), (1, 1), (5, 2), (6, 2)]);
        let res = build_partition(&squares, &e, 1, p(), 64.0).unwrap();
        let ev = partition_evaluator(&squares, &e, p()).unwrap();
        assert_eq!(ev.generation_levels().collect::<Vec<_>>(), vec![1, 3]);
        for atom in &res.atoms {
            let gi = if atom.generation == 1 { 0 } else { 1 };
            let t = if atom.home.m == 6 { 1 } else { 0 };
            let g = &atom.phi;
            for r in (0..g.rows()).step_by(7) {
                for c in (0..g.cols()).step_by(5) {
                    let want = ev.phi(gi, t, g.node(r, c));
                    assert!((g.value(r, c) - want).abs() < 1e-12);
                }
            }
        }
        assert!(res.sum_error_max < 1e-12);
        assert_eq!(res.support_violations, 0);
    }
}
