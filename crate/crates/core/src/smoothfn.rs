//! Grid-sampled test functions and their `N_k` seminorms.
//!
//! `N_k(phi) = d(phi)^k * max_{|alpha| = k} sup |d^alpha phi|` where `d` is
//! the diameter of the support. It is invariant under rescaling of the
//! variable and homogeneous in `phi`. Derivatives are iterated compact
//! centered differences, with zero extension outside the grid.

use alloc::vec::Vec;

use crate::geom::DyadicSquare;
use crate::math;
use crate::{Error, Point, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Highest derivative order the finite-difference seminorm supports.
pub const MAX_K: u32 = 4;

/// Support diameter over grid spacing required before differentiating.
pub const MIN_POINTS_PER_DIAMETER: f64 = 64.0;

/// Ratio between the step-`h` and step-`2h` derivative sups above which the
/// grid is deemed not to resolve the function.
pub const JUMP_RATIO: f64 = 1.5;

/// Real values on the nodes `origin + (c h, r h)`, row-major by `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    origin: Point,
    spacing: f64,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    support_diameter: f64,
}

impl GridFunction {
    pub fn new(origin: Point, spacing: f64, rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::GridInvalid("spacing must be positive"));
        }
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::GridInvalid("values must fill rows x cols"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::GridInvalid("values must be finite"));
        }
        if !(origin.re.is_finite() && origin.im.is_finite()) {
            return Err(Error::GridInvalid("origin must be finite"));
        }
        let mut g = GridFunction { origin, spacing, rows, cols, values, support_diameter: 0.0 };
        g.support_diameter = g.compute_support_diameter();
        Ok(g)
    }

    /// Samples `f` at every node.
    pub fn sample<F: FnMut(Point) -> f64>(origin: Point, spacing: f64, rows: usize, cols: usize, mut f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(origin + Point::new(c as f64 * spacing, r as f64 * spacing)));
            }
        }
        Self::new(origin, spacing, rows, cols, values)
    }

    /// Samples `f` on the smallest grid of the given spacing, anchored at
    /// `center`, that covers the square of half-width `radius`.
    pub fn sample_centered<F: FnMut(Point) -> f64>(center: Point, radius: f64, spacing: f64, f: F) -> Result<Self> {
        if !(radius > 0.0 && spacing > 0.0) {
            return Err(Error::GridInvalid("radius and spacing must be positive"));
        }
        let half = math::ceil(radius / spacing) as usize;
        if half > 4096 {
            return Err(Error::GridInvalid("grid too large"));
        }
        let n = 2 * half + 1;
        let origin = center - Point::new(half as f64 * spacing, half as f64 * spacing);
        Self::sample(origin, spacing, n, n, f)
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn node(&self, row: usize, col: usize) -> Point {
        self.origin + Point::new(col as f64 * self.spacing, row as f64 * self.spacing)
    }

    /// Diameter of the convex hull of the nonzero nodes.
    pub fn support_diameter(&self) -> f64 {
        self.support_diameter
    }

    /// Nonzero nodes.
    pub fn support_nodes(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.rows)
            .flat_map(move |r| (0..self.cols).map(move |c| (r, c)))
            .filter(move |&(r, c)| self.value(r, c) != 0.0)
            .map(move |(r, c)| self.node(r, c))
    }

    /// The same function on the smallest sub-grid holding every nonzero
    /// node plus `margin` nodes on each side. `N_k` is unchanged because
    /// derivatives already extend by zero outside the grid.
    pub fn cropped_to_support(&self, margin: usize) -> Self {
        let mut bounds: Option<(usize, usize, usize, usize)> = None;
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.value(r, c) != 0.0 {
                    let b = bounds.get_or_insert((r, r, c, c));
                    b.0 = b.0.min(r);
                    b.1 = b.1.max(r);
                    b.2 = b.2.min(c);
                    b.3 = b.3.max(c);
                }
            }
        }
        let Some((r0, r1, c0, c1)) = bounds else {
            return self.clone();
        };
        let (r0, c0) = (r0.saturating_sub(margin), c0.saturating_sub(margin));
        let (r1, c1) = ((r1 + margin).min(self.rows - 1), (c1 + margin).min(self.cols - 1));
        let (rows, cols) = (r1 - r0 + 1, c1 - c0 + 1);
        let mut values = Vec::with_capacity(rows * cols);
        for r in r0..=r1 {
            values.extend_from_slice(&self.values[r * self.cols + c0..=r * self.cols + c1]);
        }
        GridFunction {
            origin: self.node(r0, c0),
            spacing: self.spacing,
            rows,
            cols,
            values,
            support_diameter: self.support_diameter,
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(math::abs(*v)))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let values = self.values.iter().map(|v| v * factor).collect();
        GridFunction { values, ..self.clone() }.recomputed()
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &GridFunction, f: F) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridInvalid("grids differ"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(GridFunction { values, ..self.clone() }.recomputed())
    }

    pub fn product(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn sum(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.origin == other.origin && self.spacing == other.spacing && self.rows == other.rows && self.cols == other.cols
    }

    /// Bilinear interpolation; `None` outside the sampled rectangle.
    pub fn eval(&self, z: Point) -> Option<f64> {
        let x = (z.re - self.origin.re) / self.spacing;
        let y = (z.im - self.origin.im) / self.spacing;
        let (xmax, ymax) = ((self.cols - 1) as f64, (self.rows - 1) as f64);
        let tol = 1e-9;
        if !(x >= -tol && y >= -tol && x <= xmax + tol && y <= ymax + tol) {
            return None;
        }
        let x = x.clamp(0.0, xmax);
        let y = y.clamp(0.0, ymax);
        let c0 = (math::floor(x) as usize).min(self.cols.saturating_sub(2));
        let r0 = (math::floor(y) as usize).min(self.rows.saturating_sub(2));
        let c1 = (c0 + 1).min(self.cols - 1);
        let r1 = (r0 + 1).min(self.rows - 1);
        let fx = x - c0 as f64;
        let fy = y - r0 as f64;
        let bottom = self.value(r0, c0) * (1.0 - fx) + self.value(r0, c1) * fx;
        let top = self.value(r1, c0) * (1.0 - fx) + self.value(r1, c1) * fx;
        Some(bottom * (1.0 - fy) + top * fy)
    }

    fn recomputed(mut self) -> Self {
        self.support_diameter = self.compute_support_diameter();
        self
    }

    fn compute_support_diameter(&self) -> f64 {
        // Per row only the outermost nonzero nodes can be hull vertices.
        let mut extreme: Vec<Point> = Vec::new();
        for r in 0..self.rows {
            let row = &self.values[r * self.cols..(r + 1) * self.cols];
            let first = row.iter().position(|&v| v != 0.0);
            let last = row.iter().rposition(|&v| v != 0.0);
            if let (Some(a), Some(b)) = (first, last) {
                extreme.push(self.node(r, a));
                if b != a {
                    extreme.push(self.node(r, b));
                }
            }
        }
        hull_diameter(extreme)
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Diameter of a finite point set via its convex hull.
fn hull_diameter(mut pts: Vec<Point>) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: &mut dyn Iterator<Item = &Point> =
            if pass == 0 { &mut pts.iter() } else { &mut pts.iter().rev() };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let mut best: f64 = 0.0;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            best = best.max(math::dist(hull[i], hull[j]));
        }
    }
    if hull.is_empty() {
        // Collinear-duplicate degenerate case.
        best = math::dist(pts[0], pts[pts.len() - 1]);
    }
    best
}

/// Result of [`nk_seminorm`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct NkValue {
    pub k: u32,
    pub value: f64,
    /// Grid spacing the derivatives were taken at.
    pub grid_order: f64,
    pub support_diameter: f64,
}

/// One difference `(f(x + s h) - f(x)) / (s h)` along an axis, read as
/// centered at the midpoint. Iterating gives the compact centered `k`-th
/// difference, second-order accurate at the shifted nodes.
fn step_diff(values: &[f64], rows: usize, cols: usize, along_x: bool, stride: usize, h: f64) -> Vec<f64> {
    let mut out = alloc::vec![0.0; values.len()];
    let inv = 1.0 / (stride as f64 * h);
    if along_x {
        for r in 0..rows {
            let row = &values[r * cols..(r + 1) * cols];
            let dst = &mut out[r * cols..(r + 1) * cols];
            let split = cols.saturating_sub(stride);
            for c in 0..split {
                dst[c] = (row[c + stride] - row[c]) * inv;
            }
            for c in split..cols {
                dst[c] = -row[c] * inv;
            }
        }
    } else {
        let split = rows.saturating_sub(stride);
        for r in 0..rows {
            let dst = &mut out[r * cols..(r + 1) * cols];
            let here = &values[r * cols..(r + 1) * cols];
            if r < split {
                let next = &values[(r + stride) * cols..(r + stride + 1) * cols];
                for c in 0..cols {
                    dst[c] = (next[c] - here[c]) * inv;
                }
            } else {
                for c in 0..cols {
                    dst[c] = -here[c] * inv;
                }
            }
        }
    }
    out
}

/// Sup over the grid of `|d^alpha f|` for each multi-index `(a, k - a)`,
/// combining the components of a vector-valued function in the Euclidean
/// norm, with the given node stride.
fn derivative_sup(components: &[&GridFunction], k: u32, stride: usize) -> f64 {
    let g = components[0];
    let (rows, cols, h) = (g.rows, g.cols, g.spacing);
    let mut best: f64 = 0.0;
    let mut sq: Vec<Vec<f64>> = (0..=k).map(|_| alloc::vec![0.0; g.values.len()]).collect();
    for comp in components {
        // d_x^a f for a = 0..=k, then d_y^(k-a) of each.
        let mut dx = comp.values.clone();
        for a in 0..=k {
            if a > 0 {
                dx = step_diff(&dx, rows, cols, true, stride, h);
            }
            let mut d = dx.clone();
            for _ in a..k {
                d = step_diff(&d, rows, cols, false, stride, h);
            }
            for (s, v) in sq[a as usize].iter_mut().zip(&d) {
                *s += v * v;
            }
        }
    }
    for acc in &sq {
        best = acc.iter().fold(best, |m, v| m.max(*v));
    }
    math::sqrt(best)
}

/// `N_k` of a real grid function.
pub fn nk_seminorm(phi: &GridFunction, k: u32) -> Result<NkValue> {
    nk_seminorm_components(&[phi], k)
}

/// `N_k` of `re + i im`, with `|d^alpha|` the complex modulus.
pub fn nk_seminorm_complex(re: &GridFunction, im: &GridFunction, k: u32) -> Result<NkValue> {
    nk_seminorm_components(&[re, im], k)
}

fn nk_seminorm_components(components: &[&GridFunction], k: u32) -> Result<NkValue> {
    if k > MAX_K {
        return Err(Error::InvalidArgument("N_k is only estimated for k <= 4"));
    }
    let g = components[0];
    if components.iter().any(|c| !c.same_grid(g)) {
        return Err(Error::GridInvalid("component grids differ"));
    }
    let d = if components.len() == 1 {
        g.support_diameter
    } else {
        let mut extreme = Vec::new();
        for c in components {
            extreme.extend(c.support_nodes());
        }
        hull_diameter(extreme)
    };
    let mut out = NkValue { k, value: 0.0, grid_order: g.spacing, support_diameter: d };
    if components.iter().all(|c| c.is_zero()) {
        return Ok(out);
    }
    if k == 0 {
        out.value = derivative_sup(components, 0, 1);
        return Ok(out);
    }
    let required = d / MIN_POINTS_PER_DIAMETER;
    if g.spacing > required {
        return Err(Error::GridTooCoarse { spacing: g.spacing, required });
    }
    let fine = derivative_sup(components, k, 1);
    let coarse = derivative_sup(components, k, 2);
    if fine > JUMP_RATIO * coarse {
        // Unresolved features: the estimate grows as the step shrinks.
        return Err(Error::GridTooCoarse { spacing: g.spacing, required: g.spacing * coarse / fine });
    }
    out.value = math::powf(d, k as f64) * fine;
    Ok(out)
}

/// `g(u) = e^(-1/u)` for `u > 0`, else 0.
fn mollifier_seed(u: f64) -> f64 {
    if u > 0.0 {
        math::exp(-1.0 / u)
    } else {
        0.0
    }
}

/// Smooth step: 0 for `u <= 0`, 1 for `u >= 1`, `C^infinity` in between.
pub fn smooth_step(u: f64) -> f64 {
    let a = mollifier_seed(u);
    let b = mollifier_seed(1.0 - u);
    if a + b == 0.0 {
        return if u >= 1.0 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

/// Nonincreasing profile equal to 1 on `[0, plateau]` and 0 on
/// `[cutoff, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SmoothProfile {
    pub plateau: f64,
    pub cutoff: f64,
}

impl Default for SmoothProfile {
    fn default() -> Self {
        SmoothProfile { plateau: 0.625, cutoff: 0.75 }
    }
}

impl SmoothProfile {
    pub fn new(plateau: f64, cutoff: f64) -> Result<Self> {
        if 0.0 < plateau && plateau < cutoff && cutoff.is_finite() {
            Ok(SmoothProfile { plateau, cutoff })
        } else {
            Err(Error::InvalidArgument("profile needs 0 < plateau < cutoff"))
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        smooth_step((self.cutoff - r) / (self.cutoff - self.plateau))
    }
}

/// Default nodes per support diameter for constructed test functions.
pub const DEFAULT_POINTS_PER_DIAMETER: f64 = 192.0;

/// `phi_n(x) = rho(n |x - b|)`: 1 on `B(b, plateau/n)`, supported in
/// `B(b, cutoff/n)`. The grid spacing scales like `1/n`, so the sampled
/// functions are exact rescalings of one another.
pub fn standard_pincher(b: Point, n: u32, profile: SmoothProfile, points_per_diameter: f64) -> Result<GridFunction> {
    if n == 0 {
        return Err(Error::InvalidArgument("pincher index must be at least 1"));
    }
    if !(points_per_diameter >= 2.0) {
        return Err(Error::InvalidArgument("points per diameter must be at least 2"));
    }
    let nf = n as f64;
    let reach = profile.cutoff / nf;
    let spacing = 2.0 * reach / points_per_diameter;
    GridFunction::sample_centered(b, reach + 2.0 * spacing, spacing, |z| profile.eval(nf * math::dist(z, b)))
}

/// Bump of the tessellation at level `m`: `rho(|x - a| / s) rho(|y - c| / s)`
/// for the square of side `s` centered at `(a, c)`. Equal to 1 on the
/// `5/4` dilate, supported in the `3/2` dilate.
pub fn tess_theta(square: &DyadicSquare, profile: &SmoothProfile, z: Point) -> f64 {
    let s = square.side();
    let c = square.center();
    profile.eval(math::abs(z.re - c.re) / s) * profile.eval(math::abs(z.im - c.im) / s)
}

/// Sum of all level-`m` bumps at `z`. It factors as a product of two 1-D
/// sums with at most two nonzero terms each, so `1 <= tau <= 4`.
pub fn tess_tau(m: u32, profile: &SmoothProfile, z: Point) -> f64 {
    let s = math::dyadic_side(m as i64);
    axis_sum(z.re / s, profile) * axis_sum(z.im / s, profile)
}

fn axis_sum(x: f64, profile: &SmoothProfile) -> f64 {
    // Bumps centered at i + 1/2 with reach below 1 in units of the side.
    let base = math::floor(x);
    let mut total = 0.0;
    for di in -2..=2 {
        let center = base + di as f64 + 0.5;
        total += profile.eval(math::abs(x - center));
    }
    total
}

/// `psi_S = theta_S / tau` at `z`.
pub fn tess_psi(square: &DyadicSquare, profile: &SmoothProfile, z: Point) -> f64 {
    let theta = tess_theta(square, profile, z);
    if theta == 0.0 {
        return 0.0;
    }
    theta / tess_tau(square.n, profile, z)
}

/// The functions `psi_S` for `S = [i 2^-m, ...] x [j 2^-m, ...]` with
/// `i, j` in the given ranges, each sampled over its `3/2` dilate with
/// `points_per_side` nodes per side of `S`.
pub fn tess_partition(
    m: u32,
    i_range: core::ops::Range<i64>,
    j_range: core::ops::Range<i64>,
    profile: SmoothProfile,
    points_per_side: f64,
) -> Result<Vec<(DyadicSquare, GridFunction)>> {
    if !(points_per_side >= 2.0) {
        return Err(Error::InvalidArgument("points per side must be at least 2"));
    }
    let side = math::dyadic_side(m as i64);
    let spacing = side / points_per_side;
    let mut out = Vec::new();
    for j in j_range {
        for i in i_range.clone() {
            let sq = DyadicSquare::new(i, j, m);
            let g = GridFunction::sample_centered(sq.center(), 0.75 * side + 2.0 * spacing, spacing, |z| {
                tess_psi(&sq, &profile, z)
            })?;
            out.push((sq, g));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rho() -> SmoothProfile {
        SmoothProfile::default()
    }

    #[test]
    fn profile_shape() {
        let p = rho();
        assert_eq!(p.eval(0.0), 1.0);
        assert_eq!(p.eval(0.625), 1.0);
        assert_eq!(p.eval(0.75), 0.0);
        assert_eq!(p.eval(3.0), 0.0);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = p.eval(i as f64 / 1000.0);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev);
            prev = v;
        }
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn indicator_is_too_rough() {
        let g = GridFunction::sample_centered(Point::new(0.0, 0.0), 0.6, 1.0 / 256.0, |z| {
            if math::modulus(z) <= 0.5 { 1.0 } else { 0.0 }
        })
        .unwrap();
        assert_eq!(nk_seminorm(&g, 0).unwrap().value, 1.0);
        for k in 1..=3 {
            assert!(matches!(nk_seminorm(&g, k), Err(Error::GridTooCoarse { .. })), "k = {k}");
        }
    }

    #[test]
    fn zero_function() {
        let g = GridFunction::sample(Point::new(0.0, 0.0), 0.1, 5, 5, |_| 0.0).unwrap();
        assert_eq!(g.support_diameter(), 0.0);
        assert_eq!(nk_seminorm(&g, 3).unwrap().value, 0.0);
    }

    #[test]
    fn coarse_grid_rejected() {
        let g = standard_pincher(Point::new(0.0, 0.0), 1, rho(), 20.0).unwrap();
        assert!(matches!(nk_seminorm(&g, 1), Err(Error::GridTooCoarse { .. })));
        assert!(nk_seminorm(&g, 0).is_ok());
    }

    #[test]
    fn pincher_support() {
        let g = standard_pincher(Point::new(0.0, 0.0), 1, rho(), 192.0).unwrap();
        for r in 0..g.rows() {
            for c in 0..g.cols() {
                let z = g.node(r, c);
                let v = g.value(r, c);
                if math::modulus(z) >= 0.75 {
                    assert_eq!(v, 0.0);
                }
                if math::modulus(z) <= 0.625 {
                    assert_eq!(v, 1.0);
                }
            }
        }
        assert!(g.support_diameter() <= 1.5);
        assert!(g.support_diameter() > 1.45);
    }

    #[test]
    fn pincher_n2_constant_in_n() {
        let b = Point::new(0.3, -0.2);
        let base = nk_seminorm(&standard_pincher(b, 1, rho(), 192.0).unwrap(), 2).unwrap().value;
        assert!(base > 0.0);
        for n in [2, 4, 8] {
            let v = nk_seminorm(&standard_pincher(b, n, rho(), 192.0).unwrap(), 2).unwrap().value;
            assert!((v / base - 1.0).abs() < 0.02, "n = {n}: {v} vs {base}");
        }
    }

    #[test]
    fn homogeneity_is_exact() {
        let g = standard_pincher(Point::new(0.0, 0.0), 2, rho(), 192.0).unwrap();
        let n = nk_seminorm(&g, 2).unwrap().value;
        for kappa in [0.5, 2.0, 4.0] {
            let v = nk_seminorm(&g.scaled(kappa), 2).unwrap().value;
            assert_eq!(v, kappa * n);
        }
    }

    #[test]
    fn tau_bounds_and_partition_sum() {
        let p = rho();
        let m = 1;
        let psis = tess_partition(m, -1..5, -1..5, p, 32.0).unwrap();
        assert_eq!(psis.len(), 36);
        // Central 4x4 block of squares [0, 2]^2 at level 1.
        let mut worst: f64 = 0.0;
        for a in 0..=80 {
            for b in 0..=80 {
                let z = Point::new(a as f64 / 40.0, b as f64 / 40.0);
                let tau = tess_tau(m, &p, z);
                assert!((1.0..=4.0).contains(&tau), "tau {tau}");
                let s: f64 = psis.iter().map(|(sq, _)| tess_psi(sq, &p, z)).sum();
                let nonzero = psis.iter().filter(|(sq, _)| tess_psi(sq, &p, z) != 0.0).count();
                assert!(nonzero <= 4);
                worst = worst.max((s - 1.0).abs());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn psi_support_in_three_halves() {
        let p = rho();
        for (sq, g) in tess_partition(2, 0..2, 0..2, p, 32.0).unwrap() {
            let box32 = sq.dilated(1.5);
            for z in g.support_nodes() {
                assert!(box32.contains_point_open(z), "{z}");
            }
        }
    }

    #[test]
    fn bilinear_eval_matches_nodes() {
        let g = GridFunction::sample(Point::new(-1.0, 2.0), 0.25, 4, 5, |z| z.re + 2.0 * z.im).unwrap();
        assert_eq!(g.eval(g.node(2, 3)), Some(g.value(2, 3)));
        let z = Point::new(-0.9, 2.3);
        assert!((g.eval(z).unwrap() - (z.re + 2.0 * z.im)).abs() < 1e-12);
        assert_eq!(g.eval(Point::new(5.0, 0.0)), None);
    }
}
