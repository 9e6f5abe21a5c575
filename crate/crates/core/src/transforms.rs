//! Poisson and Cauchy transforms of discrete measures.
//!
//! Sign convention for point evaluation by pairing: with `chi = 1/(z - b)`
//! near the support of `mu`,
//!
//! ```text
//! Cau(mu)(b) = sum w / (pi (b - p)) = -<chi / pi, mu>
//! ```
//!
//! This is the normative convention; [`cauchy_eval_pairing`] agrees with
//! [`cauchy_transform`] under it.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::geom::Rect;
use crate::measures::{Atom, DiscreteMeasure};
use crate::smoothfn::{GridFunction, SmoothProfile};
use crate::math;
use crate::{Error, Point, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// `P_t(z) = t / (pi (t^2 + |z|^2)^(3/2))`.
pub fn poisson_kernel(z: Point, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveT(t));
    }
    Ok(kernel(z.norm_sqr(), t))
}

#[inline]
fn kernel(r2: f64, t: f64) -> f64 {
    let q = t * t + r2;
    t / (PI * q * math::sqrt(q))
}

/// `sum w_i P_t(z - p_i)`.
pub fn poisson_transform(mu: &DiscreteMeasure, z: Point, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveT(t));
    }
    Ok(mu.atoms().iter().map(|a| a.weight * kernel((z - a.point).norm_sqr(), t)).sum())
}

/// Sampling of the half-space `(z, t)` for norm estimates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PoissonGridSpec {
    /// Lattice of `z_count x z_count` points spanning `z_box` (endpoints
    /// included).
    pub z_box: Rect,
    pub z_count: usize,
    /// Points sampled in addition to the lattice.
    pub extra_points: Vec<Point>,
    pub t_min: f64,
    pub t_max: f64,
    /// Log-spaced values from `t_min` to `t_max`.
    pub t_count: usize,
}

pub const DEFAULT_Z_COUNT: usize = 64;
pub const DEFAULT_T_COUNT: usize = 48;
pub const DEFAULT_T_MIN: f64 = 1.0 / 65536.0;
pub const DEFAULT_T_MAX: f64 = 4.0;

impl PoissonGridSpec {
    /// 64 x 64 lattice over the atoms' bounding box dilated by 4 about its
    /// center, plus the atoms themselves; 48 log-spaced `t` in `[2^-16, 4]`.
    /// A degenerate box is widened to half-width 1/4 before dilating.
    pub fn default_for(mu: &DiscreteMeasure) -> Self {
        let bbox = mu.bbox().unwrap_or(Rect::new(0.0, 0.0, 0.0, 0.0));
        let c = bbox.center();
        let half = (0.5 * bbox.width().max(bbox.height())).max(if bbox.width().max(bbox.height()) > 0.0 { 0.0 } else { 0.25 });
        let h = 4.0 * half;
        PoissonGridSpec {
            z_box: Rect::new(c.re - h, c.im - h, c.re + h, c.im + h),
            z_count: DEFAULT_Z_COUNT,
            extra_points: mu.atoms().iter().map(|a| a.point).collect(),
            t_min: DEFAULT_T_MIN,
            t_max: DEFAULT_T_MAX,
            t_count: DEFAULT_T_COUNT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max >= self.t_min && self.t_max.is_finite()) {
            return Err(Error::GridInvalid("need 0 < t_min <= t_max"));
        }
        if self.t_count == 0 || (self.t_count == 1 && self.t_max != self.t_min) {
            return Err(Error::GridInvalid("t grid needs at least two values"));
        }
        if self.z_count == 0 && self.extra_points.is_empty() {
            return Err(Error::GridInvalid("no z samples"));
        }
        let b = &self.z_box;
        if !(b.x1 >= b.x0 && b.y1 >= b.y0 && b.x0.is_finite() && b.y0.is_finite() && b.x1.is_finite() && b.y1.is_finite()) {
            return Err(Error::GridInvalid("invalid z box"));
        }
        Ok(())
    }

    pub fn t_values(&self) -> Vec<f64> {
        if self.t_count == 1 {
            return alloc::vec![self.t_min];
        }
        let (a, b) = (math::ln(self.t_min), math::ln(self.t_max));
        (0..self.t_count)
            .map(|i| {
                if i == self.t_count - 1 {
                    self.t_max
                } else if i == 0 {
                    self.t_min
                } else {
                    math::exp(a + (b - a) * i as f64 / (self.t_count - 1) as f64)
                }
            })
            .collect()
    }

    pub fn z_values(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.z_count * self.z_count + self.extra_points.len());
        let n = self.z_count;
        let step = |lo: f64, hi: f64, i: usize| if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
        for j in 0..n {
            for i in 0..n {
                out.push(Point::new(step(self.z_box.x0, self.z_box.x1, i), step(self.z_box.y0, self.z_box.y1, j)));
            }
        }
        out.extend_from_slice(&self.extra_points);
        out
    }

    /// The grid pushed through `z -> factor z`, `t -> factor t`.
    pub fn scaled(&self, factor: f64) -> Self {
        let b = &self.z_box;
        PoissonGridSpec {
            z_box: Rect::new(b.x0 * factor, b.y0 * factor, b.x1 * factor, b.y1 * factor),
            z_count: self.z_count,
            extra_points: self.extra_points.iter().map(|p| p * factor).collect(),
            t_min: self.t_min * factor,
            t_max: self.t_max * factor,
            t_count: self.t_count,
        }
    }
}

/// Grid estimate of `sup t^-s |P_t * mu|`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TsNormEstimate {
    pub s: f64,
    pub value: f64,
    pub attaining_z: Point,
    pub attaining_t: f64,
    /// Least-squares slope of `log(t^-s sup_z |F|)` against `log t` over the
    /// three smallest decades of the `t` grid. Positive means the ratio
    /// decays as `t -> 0`; near zero means it does not; negative means the
    /// estimate is still growing at `t_min`.
    pub little_o: Option<f64>,
    /// The supremum keeps growing as `t_min` shrinks.
    pub t_min_dependent: bool,
}

/// Slope below which the estimate is reported as dependent on `t_min`.
pub const T_MIN_SLOPE_TOLERANCE: f64 = 0.05;

/// Sup over the grid of `t^-s |P_t * mu|` for `s < 0`.
pub fn ts_norm_estimate(mu: &DiscreteMeasure, s: f64, grid: &PoissonGridSpec) -> Result<TsNormEstimate> {
    if !(s < 0.0) {
        return Err(Error::InvalidArgument("norm estimates need s < 0"));
    }
    grid.validate()?;
    let ts = grid.t_values();
    let zs = grid.z_values();
    let weights: Vec<f64> = ts.iter().map(|&t| math::powf(t, -s)).collect();
    // sup over z for every t.
    let mut sup_z = alloc::vec![0.0f64; ts.len()];
    let mut arg_z = alloc::vec![Point::new(0.0, 0.0); ts.len()];
    let mut r2 = alloc::vec![0.0f64; mu.len()];
    for &z in &zs {
        for (d, a) in r2.iter_mut().zip(mu.atoms()) {
            *d = (z - a.point).norm_sqr();
        }
        for (ti, &t) in ts.iter().enumerate() {
            let f: f64 = mu.atoms().iter().zip(&r2).map(|(a, &d)| a.weight * kernel(d, t)).sum();
            let f = math::abs(f);
            if f > sup_z[ti] {
                sup_z[ti] = f;
                arg_z[ti] = z;
            }
        }
    }
    let mut est = TsNormEstimate {
        s,
        value: 0.0,
        attaining_z: Point::new(0.0, 0.0),
        attaining_t: ts[0],
        little_o: None,
        t_min_dependent: false,
    };
    for ti in 0..ts.len() {
        let v = weights[ti] * sup_z[ti];
        if v > est.value {
            est.value = v;
            est.attaining_z = arg_z[ti];
            est.attaining_t = ts[ti];
        }
    }
    let limit = grid.t_min * 1000.0 * (1.0 + 1e-12);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ti in 0..ts.len() {
        let v = weights[ti] * sup_z[ti];
        if ts[ti] <= limit && v > 0.0 {
            xs.push(math::ln(ts[ti]));
            ys.push(math::ln(v));
        }
    }
    est.little_o = math::ls_slope(&xs, &ys);
    est.t_min_dependent = matches!(est.little_o, Some(slope) if slope < -T_MIN_SLOPE_TOLERANCE);
    Ok(est)
}

/// Distribution `f o A` for `A(z) = r z`: atoms at `p / r`, weights `w / r^2`.
/// For `s < 0`, `||f o A||_s = r^s ||f||_s` on grids scaled by `1/r`.
pub fn compose_dilation(mu: &DiscreteMeasure, r: f64) -> Result<DiscreteMeasure> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument("dilation factor must be positive"));
    }
    Ok(mu.pushforward(|p| p / r, 1.0 / (r * r)))
}

fn check_clearance(mu: &DiscreteMeasure, z: Point, exclusion: f64) -> Result<()> {
    if let Some((i, d)) = mu.nearest(z) {
        if d <= 0.0 || d < exclusion {
            return Err(Error::TooCloseToSupport { nearest: mu.atoms()[i].point, distance: d });
        }
    }
    Ok(())
}

/// `sum w / (pi (z - p))`, refused within `exclusion` of an atom.
pub fn cauchy_transform(mu: &DiscreteMeasure, z: Point, exclusion: f64) -> Result<Complex64> {
    check_clearance(mu, z, exclusion)?;
    Ok(cauchy_sum(mu.atoms(), z))
}

pub(crate) fn cauchy_sum(atoms: &[Atom], z: Point) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in atoms {
        acc += a.weight / (z - a.point);
    }
    acc / PI
}

/// A complex test function evaluated pointwise. `None` outside its domain.
pub trait TestFunction {
    fn eval(&self, z: Point) -> Option<Complex64>;
}

impl<F: Fn(Point) -> Complex64> TestFunction for F {
    fn eval(&self, z: Point) -> Option<Complex64> {
        Some(self(z))
    }
}

/// A complex function sampled as real and imaginary grids.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    pub re: GridFunction,
    pub im: GridFunction,
}

impl ComplexGrid {
    pub fn new(re: GridFunction, im: GridFunction) -> Result<Self> {
        if !re.same_grid(&im) {
            return Err(Error::GridInvalid("real and imaginary grids differ"));
        }
        Ok(ComplexGrid { re, im })
    }

    pub fn sample<F: Fn(Point) -> Complex64>(origin: Point, spacing: f64, rows: usize, cols: usize, f: F) -> Result<Self> {
        let re = GridFunction::sample(origin, spacing, rows, cols, |z| f(z).re)?;
        let im = GridFunction::sample(origin, spacing, rows, cols, |z| f(z).im)?;
        Ok(ComplexGrid { re, im })
    }
}

impl TestFunction for ComplexGrid {
    fn eval(&self, z: Point) -> Option<Complex64> {
        Some(Complex64::new(self.re.eval(z)?, self.im.eval(z)?))
    }
}

/// `chi(z) = (1 - rho(|z - b| / radius)) / (z - b)`: smooth, zero near `b`,
/// and equal to `1/(z - b)` once `|z - b| >= cutoff * radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffKernel {
    pub b: Point,
    pub radius: f64,
    pub profile: SmoothProfile,
}

impl CutoffKernel {
    /// The kernel that is exact on every atom of `mu`. `None` if `b` is an
    /// atom.
    pub fn for_measure(mu: &DiscreteMeasure, b: Point) -> Option<Self> {
        let profile = SmoothProfile::default();
        let radius = match mu.nearest(b) {
            Some((_, d)) if d > 0.0 => d,
            Some(_) => return None,
            None => 1.0,
        };
        Some(CutoffKernel { b, radius, profile })
    }
}

impl TestFunction for CutoffKernel {
    fn eval(&self, z: Point) -> Option<Complex64> {
        let d = z - self.b;
        let r = math::modulus(d);
        let cut = 1.0 - self.profile.eval(r / self.radius);
        if cut == 0.0 {
            return Some(Complex64::new(0.0, 0.0));
        }
        Some(cut / d)
    }
}

/// Relative tolerance for `chi = 1/(z - b)` on the support.
pub const CHI_TOLERANCE: f64 = 1e-9;

/// Point evaluation `-<chi / pi, mu>` of the Cauchy transform at `b`.
pub fn cauchy_eval_pairing<T: TestFunction + ?Sized>(mu: &DiscreteMeasure, b: Point, chi: &T, tolerance: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in mu.atoms() {
        let d = a.point - b;
        if d.re == 0.0 && d.im == 0.0 {
            return Err(Error::BInSupport { b });
        }
        let exact = 1.0 / d;
        let error = match chi.eval(a.point) {
            Some(v) => {
                let e = (v - exact).norm() / exact.norm().max(1.0);
                if e <= tolerance {
                    acc += a.weight * v;
                    continue;
                }
                e
            }
            None => f64::INFINITY,
        };
        return Err(Error::ChiMismatchOnSupport { atom: a.point, error });
    }
    Ok(-acc / PI)
}

/// Reweights atoms by `phi(p)`; the Cauchy transform of the result is the
/// localization of the Cauchy transform of `mu`.
pub fn vitushkin_localize(mu: &DiscreteMeasure, phi: &GridFunction) -> Result<DiscreteMeasure> {
    let mut atoms = Vec::with_capacity(mu.len());
    for a in mu.atoms() {
        let v = phi.eval(a.point).ok_or(Error::PhiDomainMismatch { atom: a.point })?;
        atoms.push(Atom::new(a.point, a.weight * v));
    }
    // Interpolated weights may dip below zero only if phi does.
    DiscreteMeasure::new(atoms)
}

/// Discrete Cauchy-Riemann residual of `Cau(mu)` on a lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CrResidual {
    /// `max |d/dz-bar F|` by central differences.
    pub residual: f64,
    /// `max |d/dz F|` on the same nodes, for scale.
    pub derivative: f64,
    pub nodes: usize,
}

/// Central-difference `d/dz-bar` of the Cauchy transform at lattice nodes
/// of `rect` (`count x count`) whose stencil stays `clearance` away from
/// every atom.
pub fn cauchy_cr_residual(mu: &DiscreteMeasure, rect: Rect, count: usize, step: f64, clearance: f64) -> Result<CrResidual> {
    if count < 2 || !(step > 0.0) {
        return Err(Error::GridInvalid("need count >= 2 and step > 0"));
    }
    let mut out = CrResidual { residual: 0.0, derivative: 0.0, nodes: 0 };
    for j in 0..count {
        for i in 0..count {
            let z = Point::new(
                rect.x0 + rect.width() * i as f64 / (count - 1) as f64,
                rect.y0 + rect.height() * j as f64 / (count - 1) as f64,
            );
            if let Some((_, d)) = mu.nearest(z) {
                if d < clearance + step {
                    continue;
                }
            }
            let hx = Point::new(step, 0.0);
            let hy = Point::new(0.0, step);
            let fx = (cauchy_sum(mu.atoms(), z + hx) - cauchy_sum(mu.atoms(), z - hx)) / (2.0 * step);
            let fy = (cauchy_sum(mu.atoms(), z + hy) - cauchy_sum(mu.atoms(), z - hy)) / (2.0 * step);
            let i_unit = Complex64::new(0.0, 1.0);
            let dbar = 0.5 * (fx + i_unit * fy);
            let dz = 0.5 * (fx - i_unit * fy);
            out.residual = out.residual.max(dbar.norm());
            out.derivative = out.derivative.max(dz.norm());
            out.nodes += 1;
        }
    }
    Ok(out)
}
