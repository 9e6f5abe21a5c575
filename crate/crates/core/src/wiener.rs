//! Wiener-type series `sum_n 2^((k+1) n) content(A_n(b) \ U)` and the
//! verdicts drawn from them.
//!
//! Raster data can certify divergence (a continuum of the complement
//! crossing every annulus of a tail window) but never convergence: the tail
//! beyond the finest annulus is unresolved. Convergent verdicts come only
//! from parametric families, whose terms are geometric, or from an empty
//! complement.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::content::{dyadic_content, lower_content_ladder};
use crate::error::check_beta;
use crate::geom::{annulus_clip, complement_in_ball, rasterize, Annulus, Complement, DyadicSquare, ParametricDomain, Piece, RasterMode, RasterSet, Scene, Shape};
use crate::measures::{frostman, DiscreteMeasure};
use crate::smoothfn::{smooth_step, GridFunction};
use crate::transforms::{cauchy_transform, ts_norm_estimate, ComplexGrid, PoissonGridSpec};
use crate::math;
use crate::{Error, Point, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Which content enters the series.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum SeriesContent {
    /// Exact dyadic content `M^beta`.
    Upper,
    /// Lower content `M^beta_*` by the gauge ladder.
    Lower { eta: f64, ladder_len: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SeriesSpec {
    /// Boundary point. Parametric domains carry their own (the anchor) and
    /// ignore this field.
    pub b: Point,
    pub s: f64,
    /// Derivation order; 0 is point evaluation.
    pub k: u32,
    pub content: SeriesContent,
}

impl SeriesSpec {
    pub fn new(s: f64, k: u32) -> Result<Self> {
        let spec = SeriesSpec { b: Point::new(0.0, 0.0), s, k, content: SeriesContent::Upper };
        spec.validate()?;
        Ok(spec)
    }

    pub fn at(mut self, b: Point) -> Self {
        self.b = b;
        self
    }

    pub fn with_content(mut self, content: SeriesContent) -> Self {
        self.content = content;
        self
    }

    pub fn beta(&self) -> f64 {
        self.s + 1.0
    }

    /// Exponent of the closed-form terms, `(k + 1) beta`.
    pub fn gamma(&self) -> f64 {
        (self.k as f64 + 1.0) * self.beta()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > -1.0 && self.s < 0.0) {
            return Err(Error::InvalidArgument("s must lie in (-1, 0)"));
        }
        if !(self.b.re.is_finite() && self.b.im.is_finite()) {
            return Err(Error::InvalidArgument("boundary point must be finite"));
        }
        if let SeriesContent::Lower { eta, ladder_len } = self.content {
            if !(eta > 0.0 && eta.is_finite()) || ladder_len == 0 {
                return Err(Error::InvalidArgument("lower content needs eta > 0 and a nonempty ladder"));
            }
        }
        check_beta(self.beta())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Verdict {
    Converges,
    Diverges,
    Undetermined,
}

/// Closed form behind a verdict.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum TailModel {
    /// Terms `c0^gamma / a0 * ratio^n`; `exact_sum` is the full series when
    /// `ratio < 1`.
    Geometric { ratio: f64, exact_sum: Option<f64> },
    /// A continuum of the complement crosses every annulus `from..=to`; the
    /// terms there are at least `bounds`.
    Continuum { from: u32, to: u32, bounds: Vec<f64> },
    /// No obstacle meets `B(b, 1/2)`.
    ObstacleFree,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SeriesTerm {
    pub n: u32,
    /// `2^((k+1) n) content`.
    pub value: f64,
    pub content: f64,
    /// The ladder hit the depth cap.
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum SeriesWarning {
    /// The annulus holds no obstacle leaf.
    NoObstacle { n: u32 },
    /// The obstacle leaves may cover the whole annulus.
    AnnulusCovered { n: u32 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SeriesReport {
    pub spec: SeriesSpec,
    pub terms: Vec<SeriesTerm>,
    pub partial_sums: Vec<f64>,
    pub verdict: Verdict,
    pub tail_model: Option<TailModel>,
    /// The last partial sum; comparable to the dual norm of evaluation at
    /// `b` up to multiplicative constants.
    pub dual_norm_estimate: f64,
    pub warnings: Vec<SeriesWarning>,
}

impl SeriesReport {
    fn from_terms(spec: SeriesSpec, terms: Vec<SeriesTerm>, warnings: Vec<SeriesWarning>) -> Self {
        let mut acc = 0.0;
        let partial_sums: Vec<f64> = terms
            .iter()
            .map(|t| {
                acc += t.value;
                acc
            })
            .collect();
        SeriesReport {
            spec,
            terms,
            partial_sums,
            verdict: Verdict::Undetermined,
            tail_model: None,
            dual_norm_estimate: acc,
            warnings,
        }
    }
}

fn boundary_point(domain: &Complement, spec: &SeriesSpec) -> Point {
    match domain {
        Complement::Parametric(p) => p.anchor,
        Complement::Scene(_) => spec.b,
    }
}

fn root_of(domain: &Complement) -> DyadicSquare {
    match domain {
        Complement::Parametric(_) => DyadicSquare::UNIT,
        Complement::Scene(s) => s.root,
    }
}

/// Raster terms for `n = 1..=n_max` at `depth` below the domain's root.
///
/// Upper content uses one raster; lower content runs the ladder at depths
/// `max(depth, ceil(4 j / eta))`, clipped to `cap`. The verdict is
/// `Converges` when no obstacle meets `B(b, 1/2)` and `Undetermined`
/// otherwise.
pub fn series_terms(domain: &Complement, spec: &SeriesSpec, n_max: u32, depth: u32, cap: u32) -> Result<SeriesReport> {
    spec.validate()?;
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1"));
    }
    let cap = cap.min(crate::MAX_DEPTH);
    let b = boundary_point(domain, spec);
    let root = root_of(domain);
    let leaf = root.side() * math::dyadic_side(depth as i64);
    for n in 1..=n_max {
        if Annulus::new(b, n).inner_radius() < leaf {
            return Err(Error::DepthInsufficient { n, depth });
        }
    }
    let beta = spec.beta();
    let mut rasters: BTreeMap<u32, RasterSet> = BTreeMap::new();
    let mut raster_at = |d: u32| -> Result<RasterSet> {
        if let Some(r) = rasters.get(&d) {
            return Ok(r.clone());
        }
        let (r, _) = complement_in_ball(domain, b, 0.5, d, cap)?;
        rasters.insert(d, r.clone());
        Ok(r)
    };
    let base = raster_at(depth)?;
    let mut terms = Vec::with_capacity(n_max as usize);
    let mut warnings = Vec::new();
    for n in 1..=n_max {
        let ann = Annulus::new(b, n);
        let clip = annulus_clip(&base, &ann);
        if clip.is_empty() {
            warnings.push(SeriesWarning::NoObstacle { n });
        } else {
            let covered = clip.len() as f64 * leaf * leaf;
            let area = PI * (ann.outer_radius() * ann.outer_radius() - ann.inner_radius() * ann.inner_radius());
            if covered >= area {
                warnings.push(SeriesWarning::AnnulusCovered { n });
            }
        }
        // Finer outer rasters of the annulus are nested in this one.
        let (content, truncated) = match spec.content {
            _ if clip.is_empty() => (0.0, false),
            SeriesContent::Upper => (dyadic_content(&clip, beta)?.value, false),
            SeriesContent::Lower { eta, ladder_len } => {
                let est = lower_content_ladder(beta, eta, ladder_len, depth, cap, |d| {
                    Ok(annulus_clip(&raster_at(d)?, &ann))
                })?;
                (est.estimate, est.truncated)
            }
        };
        let weight = math::exp2((spec.k as f64 + 1.0) * n as f64);
        terms.push(SeriesTerm { n, value: weight * content, content, truncated });
    }
    let mut report = SeriesReport::from_terms(*spec, terms, warnings);
    if base.is_empty() {
        report.verdict = Verdict::Converges;
        report.tail_model = Some(TailModel::ObstacleFree);
    }
    Ok(report)
}

/// Exact verdict for a geometric family: the closed-form terms are
/// `r_n^gamma / a_n = c0^gamma / a0 * rho^n` with `gamma = (k + 1) beta`
/// and `rho = p^gamma / q`. Converges iff `rho < 1`.
///
/// Reports `n_max` closed-form terms (none for `n_max = 0`). The term
/// `content` field holds `r_n^gamma`.
pub fn classify_parametric(domain: &ParametricDomain, spec: &SeriesSpec, n_max: u32) -> Result<SeriesReport> {
    spec.validate()?;
    domain.validate()?;
    let gamma = spec.gamma();
    let ratio = math::powf(domain.p, gamma) / domain.q;
    let scale = math::powf(domain.c0, gamma) / domain.a0;
    let terms = (1..=n_max)
        .map(|n| {
            let content = math::powf(domain.radius(n), gamma);
            SeriesTerm { n, value: content / domain.center(n), content, truncated: false }
        })
        .collect();
    let mut report = SeriesReport::from_terms(spec.at(domain.anchor), terms, Vec::new());
    let converges = ratio < 1.0;
    report.verdict = if converges { Verdict::Converges } else { Verdict::Diverges };
    report.tail_model = Some(TailModel::Geometric {
        ratio,
        exact_sum: converges.then(|| scale * ratio / (1.0 - ratio)),
    });
    Ok(report)
}

/// Parametric domains (or scenes carrying a parametric description) go to
/// [`classify_parametric`]. Scenes get raster terms and a verdict from the
/// continuum detector over the tail window `ceil(n_max / 2)..=n_max`.
pub fn classify(domain: &Complement, spec: &SeriesSpec, n_max: u32, depth: u32, cap: u32) -> Result<SeriesReport> {
    let scene = match domain {
        Complement::Parametric(p) => return classify_parametric(p, spec, n_max),
        Complement::Scene(Scene { parametric: Some(p), .. }) => return classify_parametric(p, spec, n_max),
        Complement::Scene(scene) => scene,
    };
    let mut report = series_terms(domain, spec, n_max, depth, cap)?;
    if report.verdict == Verdict::Converges {
        return Ok(report);
    }
    let from = n_max.div_ceil(2).max(1);
    let crossing = continuum_crossings(scene, spec.b, n_max);
    if (from..=n_max).all(|n| crossing[n as usize - 1]) {
        let bounds = (from..=n_max).map(|n| continuum_term_bound(spec, n)).collect();
        report.verdict = Verdict::Diverges;
        report.tail_model = Some(TailModel::Continuum { from, to: n_max, bounds });
    }
    Ok(report)
}

/// Lower bound for term `n` when a continuum crosses `A_n`: it meets both
/// circles, so any square cover has total side at least the width
/// `2^(-n-1)` over `sqrt 2`.
pub fn continuum_term_bound(spec: &SeriesSpec, n: u32) -> f64 {
    let width = math::dyadic_side(n as i64 + 1);
    math::exp2((spec.k as f64 + 1.0) * n as f64) * math::powf(width * core::f64::consts::FRAC_1_SQRT_2, spec.beta())
}

/// For each `n = 1..=n_max`: does a connected union of scene pieces meet
/// both `B(b, 2^(-n-1))` and the complement of the open `B(b, 2^-n)`?
/// Such a union contains a continuum crossing the closed annulus.
pub fn continuum_crossings(scene: &Scene, b: Point, n_max: u32) -> Vec<bool> {
    let pieces: Vec<Piece> = scene.shapes.iter().flat_map(Piece::from_shape).collect();
    let mut parent: Vec<usize> = (0..pieces.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..pieces.len() {
        for j in (i + 1)..pieces.len() {
            if pieces[i].meets(&pieces[j]) {
                let (a, c) = (find(&mut parent, i), find(&mut parent, j));
                if a != c {
                    parent[a] = c;
                }
            }
        }
    }
    // Per component: nearest and farthest distance to b.
    let mut near = alloc::vec![f64::INFINITY; pieces.len()];
    let mut far = alloc::vec![0.0f64; pieces.len()];
    for (i, piece) in pieces.iter().enumerate() {
        let c = find(&mut parent, i);
        near[c] = near[c].min(piece.min_dist(b));
        far[c] = far[c].max(piece.max_dist(b));
    }
    (1..=n_max)
        .map(|n| {
            let ann = Annulus::new(b, n);
            (0..pieces.len()).any(|c| near[c] <= ann.inner_radius() && far[c] >= ann.outer_radius())
        })
        .collect()
}

/// How the witness scales its measures.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum LambdaRule {
    /// `lambda_n = min(1, 1 / (2^n M2(E_n)))` with `E_n` the obstacle
    /// raster inside `A_n`.
    ContentNormalized,
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct WitnessTerm {
    pub n: u32,
    pub lambda: f64,
    pub mu: DiscreteMeasure,
    /// `2^n M2(E_n)`.
    pub content_term: f64,
    /// `h_n(0) = -lambda_n Cau(mu_n)(0)`.
    pub value_at_zero: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DivergenceWitness {
    pub n_terms: u32,
    pub terms: Vec<WitnessTerm>,
    pub value_at_zero: Complex64,
    /// Grid sup of `t^(2 - beta) |P_t * sum lambda_n mu_n|`.
    pub norm_bound_grid: f64,
}

impl DivergenceWitness {
    /// `g_N = sum lambda_n mu_n`.
    pub fn combined_measure(&self) -> DiscreteMeasure {
        self.terms
            .iter()
            .fold(DiscreteMeasure::zero(), |acc, t| acc.plus(&t.mu.scaled(t.lambda)))
    }
}

/// A dyadic square of side at least twice the diameter of `rect`, and the
/// translation taking the center of `rect` to the point `(1/2, 1/3)` of
/// that square. The height is not dyadic, so horizontal slits stay off the
/// grid lines.
fn local_frame(rect: &crate::geom::Rect) -> (DyadicSquare, Point) {
    let diam = math::hypot(rect.width(), rect.height()).max(f64::MIN_POSITIVE);
    let level = math::floor(-math::log2(2.0 * diam)).max(0.0) as u32;
    let c = rect.center();
    let side = math::dyadic_side(level as i64);
    let sq = DyadicSquare::new(math::floor(c.re / side) as i64, math::floor(c.im / side) as i64, level);
    let target = sq.lower_left() + Point::new(0.5 * side, side / 3.0);
    (sq, target - c)
}

fn translated(shape: &Shape, by: Point) -> Shape {
    match *shape {
        Shape::Segment { from, to } => Shape::segment(from + by, to + by),
        Shape::Disc { center, radius } => Shape::disc(center + by, radius),
        ref other => other.clone(),
    }
}

/// Builds `h_n = -lambda_n Cau(mu_n)`, `n = 1..=n_terms`, about the origin:
/// `mu_n` is the Frostman measure of obstacle `n` restricted to `A_n(0)`
/// and the open sector `|arg z| < pi/4`. Each obstacle is rasterized at
/// `local_depth` in a dyadic frame matched to its size and translated back;
/// ball growth is translation invariant.
///
/// `grid` defaults to the standard Poisson grid of the combined measure.
pub fn divergence_witness(
    domain: &ParametricDomain,
    spec: &SeriesSpec,
    n_terms: u32,
    local_depth: u32,
    rule: LambdaRule,
    grid: Option<&PoissonGridSpec>,
) -> Result<DivergenceWitness> {
    if classify_parametric(domain, spec, 0)?.verdict != Verdict::Diverges {
        return Err(Error::NotDivergent);
    }
    if n_terms == 0 {
        return Err(Error::InvalidArgument("witness needs at least one term"));
    }
    if let LambdaRule::Constant(c) = rule {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument("lambda must be positive"));
        }
    }
    let beta = spec.beta();
    let origin = Point::new(0.0, 0.0);
    let mut terms = Vec::with_capacity(n_terms as usize);
    for n in 1..=n_terms {
        if !domain.in_right_sector(n) {
            return Err(Error::ObstacleOutsideSector { index: n });
        }
        let shape = domain.obstacle_at_origin(n);
        let (root, shift) = local_frame(&shape.bbox());
        let scene = Scene::new(root).with_shape(translated(&shape, shift));
        let raster = rasterize(&scene, local_depth, crate::MAX_DEPTH, RasterMode::Outer)?;
        let ann = Annulus::new(origin, n);
        let mu = frostman(&raster, beta)?
            .pushforward(|p| p - shift, 1.0)
            .restrict(|p| ann.contains(p) && math::abs(math::atan2(p.im, p.re)) < FRAC_PI_4);
        let clip = annulus_clip(&raster, &Annulus::new(origin + shift, n));
        let content_term = if clip.is_empty() {
            0.0
        } else {
            math::exp2(n as f64) * dyadic_content(&clip, beta)?.value
        };
        let lambda = match rule {
            LambdaRule::Constant(c) => c,
            LambdaRule::ContentNormalized if content_term > 1.0 => 1.0 / content_term,
            LambdaRule::ContentNormalized => 1.0,
        };
        let value_at_zero = -cauchy_transform(&mu, origin, 0.0)? * lambda;
        terms.push(WitnessTerm { n, lambda, mu, content_term, value_at_zero });
    }
    let mut witness = DivergenceWitness {
        n_terms,
        value_at_zero: terms.iter().map(|t| t.value_at_zero).sum(),
        terms,
        norm_bound_grid: 0.0,
    };
    let g = witness.combined_measure();
    if !g.is_empty() {
        let default_grid;
        let grid = match grid {
            Some(g) => g,
            None => {
                default_grid = PoissonGridSpec::default_for(&g);
                &default_grid
            }
        };
        witness.norm_bound_grid = ts_norm_estimate(&g, beta - 2.0, grid)?.value;
    }
    Ok(witness)
}

/// Radial profile in `u = -log2 |z - b|`: 1 on `[0, 1]`, 0 outside
/// `(-1, 2)`.
fn annular_bump(u: f64) -> f64 {
    if u < 0.0 {
        smooth_step(u + 1.0)
    } else if u > 1.0 {
        smooth_step(2.0 - u)
    } else {
        1.0
    }
}

/// `phi_n` at `z`: the bump of `A_n` divided by the sum of the bumps of
/// all annuli `A_m`, `m` in `Z`. Zero at `b`.
pub fn annular_phi(b: Point, n: u32, z: Point) -> f64 {
    let r = math::dist(z, b);
    if r == 0.0 {
        return 0.0;
    }
    let u = -math::log2(r);
    let own = annular_bump(u - n as f64);
    if own == 0.0 {
        return 0.0;
    }
    let m0 = math::floor(u) as i64;
    let total: f64 = (m0 - 1..=m0 + 1).map(|m| annular_bump(u - m as f64)).sum();
    own / total
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnularTestFunction {
    pub n: u32,
    pub phi: GridFunction,
    /// `phi_n / (z - b)` on the same grid.
    pub phi_over: ComplexGrid,
}

/// `phi_1, ..., phi_{n_max}` about `b`: `phi_n` vanishes off
/// `A_{n-1} u A_n u A_{n+1}` and the family sums to 1 on
/// `A_2 u ... u A_{n_max - 1}`.
///
/// Each grid covers `B(b, 2^(1-n))` with `points_per_diameter` nodes across
/// that diameter; the spacing is a fixed fraction of `2^-n`, so the grids
/// rescale exactly.
pub fn annular_test_functions(b: Point, n_max: u32, points_per_diameter: f64) -> Result<Vec<AnnularTestFunction>> {
    if !(points_per_diameter >= 2.0 && points_per_diameter.is_finite()) {
        return Err(Error::InvalidArgument("points per diameter must be at least 2"));
    }
    (1..=n_max)
        .map(|n| {
            let reach = math::dyadic_side(n as i64 - 1);
            let spacing = 2.0 * reach / points_per_diameter;
            let phi = GridFunction::sample_centered(b, reach, spacing, |z| annular_phi(b, n, z))?;
            let over = |z: Point| {
                let v = annular_phi(b, n, z);
                if v == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(v, 0.0) / (z - b)
                }
            };
            let phi_over = ComplexGrid::sample(phi.origin(), spacing, phi.rows(), phi.cols(), over)?;
            Ok(AnnularTestFunction { n, phi, phi_over })
        })
        .collect()
}

/// Obstacles of a parametric domain placed about `b`, as a scene in the
/// unit square.
pub fn parametric_scene(domain: &ParametricDomain, leaf_side: f64) -> Scene {
    let mut scene = Scene::new(DyadicSquare::UNIT);
    scene.shapes = domain.obstacles_before(domain.truncation_index(leaf_side));
    scene.parametric = Some(*domain);
    scene
}
