//! Dyadic Hausdorff contents.
//!
//! The dyadic content of a raster is the infimum of `sum h(side(S))` over
//! covers of its occupied leaves by dyadic subsquares `S` of the root. On a
//! quadtree the infimum is attained and obeys
//!
//! ```text
//! cost(S) = 0                                   S empty
//!         = h(side S)                           S an occupied leaf
//!         = min(h(side S), sum cost(children))  otherwise
//! ```
//!
//! which is evaluated bottom-up over the Morton-ordered leaves.

use alloc::vec::Vec;

use crate::error::check_beta;
use crate::geom::{rasterize, DyadicSquare, RasterMode, RasterSet, Scene};
use crate::math;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Covering cost as a function of the side length.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Gauge {
    /// `h(r) = r^beta`.
    PowerLaw(f64),
    /// `h(r) = min(r^beta, 2^j r^(beta + eta))`.
    Ladder { beta: f64, eta: f64, j: u32 },
    /// Piecewise-linear through the listed `(r, h)` pairs, linear from the
    /// origin below the first pair and constant beyond the last.
    Tabulated(Vec<(f64, f64)>),
}

impl Gauge {
    pub fn validate(&self) -> Result<()> {
        match self {
            Gauge::PowerLaw(beta) => check_beta(*beta),
            Gauge::Ladder { beta, eta, .. } => {
                check_beta(*beta)?;
                if *eta > 0.0 && eta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::GaugeInvalid("ladder eta must be positive"))
                }
            }
            Gauge::Tabulated(points) => {
                if points.is_empty() {
                    return Err(Error::GaugeInvalid("empty table"));
                }
                for &(r, h) in points {
                    if !(r > 0.0 && r.is_finite() && h >= 0.0 && h.is_finite()) {
                        return Err(Error::GaugeInvalid("table entries must have r > 0 and finite h >= 0"));
                    }
                }
                for w in points.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::GaugeInvalid("table radii must increase"));
                    }
                    if w[1].1 < w[0].1 {
                        return Err(Error::GaugeInvalid("gauge must be nondecreasing"));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Gauge::PowerLaw(beta) => math::powf(r, *beta),
            Gauge::Ladder { beta, eta, j } => {
                let plain = math::powf(r, *beta);
                let damped = math::exp2(*j as f64) * math::powf(r, beta + eta);
                plain.min(damped)
            }
            Gauge::Tabulated(points) => {
                let (r0, h0) = points[0];
                if r <= r0 {
                    return h0 * r / r0;
                }
                for w in points.windows(2) {
                    let ((ra, ha), (rb, hb)) = (w[0], w[1]);
                    if r <= rb {
                        return ha + (hb - ha) * (r - ra) / (rb - ra);
                    }
                }
                points[points.len() - 1].1
            }
        }
    }

    /// Side at which the ladder gauge stops following `r^beta`.
    pub fn ladder_crossover(&self) -> Option<f64> {
        match self {
            Gauge::Ladder { eta, j, .. } => Some(math::exp2(-(*j as f64) / eta)),
            _ => None,
        }
    }
}

/// What a [`ContentResult`] measures.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum ContentKind {
    DyadicExact,
    GaugeDyadicExact,
    BallBracket { lower: f64, upper: f64 },
    LadderSequence(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ContentResult {
    pub value: f64,
    pub kind: ContentKind,
    /// Set when the depth cap cut a ladder schedule short.
    pub truncated: bool,
}

impl ContentResult {
    fn exact(value: f64, kind: ContentKind) -> Self {
        ContentResult { value, kind, truncated: false }
    }
}

struct NodeCost {
    prefix: u64,
    cost: f64,
    take_self: bool,
}

/// Bottom-up DP; returns the node costs of every level, root level first.
fn cover_levels<F: Fn(f64) -> f64>(set: &RasterSet, h: F) -> Vec<Vec<NodeCost>> {
    let depth = set.depth();
    let mut levels: Vec<Vec<NodeCost>> = Vec::with_capacity(depth as usize + 1);
    let leaf_cost = h(set.leaf_side());
    let mut current: Vec<NodeCost> = set
        .codes()
        .iter()
        .map(|&prefix| NodeCost { prefix, cost: leaf_cost, take_self: true })
        .collect();
    for level in (0..depth).rev() {
        let own = h(set.node_side(level));
        let mut parents: Vec<NodeCost> = Vec::new();
        for node in &current {
            let p = node.prefix >> 2;
            match parents.last_mut() {
                Some(last) if last.prefix == p => last.cost += node.cost,
                _ => parents.push(NodeCost { prefix: p, cost: node.cost, take_self: false }),
            }
        }
        for parent in &mut parents {
            if own <= parent.cost {
                parent.cost = own;
                parent.take_self = true;
            }
        }
        levels.push(current);
        current = parents;
    }
    levels.push(current);
    levels.reverse();
    levels
}

fn cover_cost<F: Fn(f64) -> f64>(set: &RasterSet, h: F) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    cover_levels(set, h)[0][0].cost
}

/// `beta`-dimensional dyadic content of the occupied leaves.
pub fn dyadic_content(set: &RasterSet, beta: f64) -> Result<ContentResult> {
    check_beta(beta)?;
    let value = cover_cost(set, |side| math::powf(side, beta));
    Ok(ContentResult::exact(value, ContentKind::DyadicExact))
}

/// Dyadic `h`-content.
pub fn gauge_content(set: &RasterSet, gauge: &Gauge) -> Result<ContentResult> {
    gauge.validate()?;
    let value = cover_cost(set, |side| gauge.eval(side));
    Ok(ContentResult::exact(value, ContentKind::GaugeDyadicExact))
}

/// A cover attaining the dyadic content (ties resolved toward the larger
/// square).
pub fn optimal_cover(set: &RasterSet, beta: f64) -> Result<Vec<DyadicSquare>> {
    check_beta(beta)?;
    let mut out = Vec::new();
    if set.is_empty() {
        return Ok(out);
    }
    let levels = cover_levels(set, |side| math::powf(side, beta));
    let mut frontier = alloc::vec![0u64];
    for (level, nodes) in levels.iter().enumerate() {
        let mut next = Vec::new();
        for node in nodes {
            if frontier.binary_search(&node.prefix).is_err() {
                continue;
            }
            if node.take_self {
                out.push(set.node_square(level as u32, node.prefix));
            } else {
                next.extend((0..4).map(|c| (node.prefix << 2) | c));
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(out)
}

/// Ladder schedule depth `ceil(4 j / eta)`.
pub fn ladder_depth(j: u32, eta: f64) -> u32 {
    let d = math::ceil(4.0 * j as f64 / eta);
    if d > u32::MAX as f64 {
        u32::MAX
    } else {
        d as u32
    }
}

/// Values `v_j` of the lower-content ladder and the depths used.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LadderEstimate {
    pub values: Vec<f64>,
    pub depths: Vec<u32>,
    pub estimate: f64,
    pub truncated: bool,
}

impl LadderEstimate {
    pub fn into_result(self) -> ContentResult {
        ContentResult {
            value: self.estimate,
            truncated: self.truncated,
            kind: ContentKind::LadderSequence(self.values),
        }
    }
}

/// Runs the ladder `v_j = M_{h_j}(E at depth N(j))`, `h_j = min(r^beta,
/// 2^j r^(beta+eta))`, for `j = 1..=ladder_len`, rasterizing through
/// `raster_at`. Depths are `max(min_depth, ceil(4 j / eta))`, clipped to
/// `cap` (which sets the truncation flag).
pub fn lower_content_ladder<F>(
    beta: f64,
    eta: f64,
    ladder_len: u32,
    min_depth: u32,
    cap: u32,
    mut raster_at: F,
) -> Result<LadderEstimate>
where
    F: FnMut(u32) -> Result<RasterSet>,
{
    check_beta(beta)?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::GaugeInvalid("ladder eta must be positive"));
    }
    if ladder_len == 0 {
        return Err(Error::InvalidArgument("ladder length must be positive"));
    }
    let mut values = Vec::with_capacity(ladder_len as usize);
    let mut depths = Vec::with_capacity(ladder_len as usize);
    let mut truncated = false;
    for j in 1..=ladder_len {
        let wanted = ladder_depth(j, eta).max(min_depth);
        let depth = if wanted > cap {
            truncated = true;
            cap
        } else {
            wanted
        };
        let raster = raster_at(depth)?;
        let v = gauge_content(&raster, &Gauge::Ladder { beta, eta, j })?.value;
        values.push(v);
        depths.push(depth);
    }
    let estimate = values.iter().copied().fold(0.0, f64::max);
    Ok(LadderEstimate { values, depths, estimate, truncated })
}

/// Lower-content estimate of a scene: the largest ladder value. The result
/// is still returned when the cap truncates the schedule, with
/// `truncated` set.
pub fn lower_content_estimate(scene: &Scene, beta: f64, eta: f64, ladder_len: u32, cap: u32) -> Result<ContentResult> {
    let cap = cap.min(crate::MAX_DEPTH);
    lower_content_ladder(beta, eta, ladder_len, 0, cap, |depth| {
        rasterize(scene, depth, cap, RasterMode::Outer)
    })
    .map(LadderEstimate::into_result)
}

/// Bracket `[2^(-beta-2) M2, 2^(beta/2) M2]` for the ball content, from the
/// two comparison inequalities between ball and dyadic contents.
pub fn ball_bracket(set: &RasterSet, beta: f64) -> Result<ContentResult> {
    let m2 = dyadic_content(set, beta)?.value;
    let lower = math::exp2(-beta - 2.0) * m2;
    let upper = math::exp2(beta / 2.0) * m2;
    Ok(ContentResult::exact(m2, ContentKind::BallBracket { lower, upper }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Shape, DyadicSquare};
    use crate::Point;
    use alloc::vec;

    fn unit_segment() -> Scene {
        Scene::default().with_shape(Shape::segment(Point::new(0.0, 0.0), Point::new(1.0, 0.0)))
    }

    fn raster(scene: &Scene, depth: u32) -> RasterSet {
        rasterize(scene, depth, 16, RasterMode::Outer).unwrap()
    }

    #[test]
    fn empty_set_has_zero_content() {
        let e = RasterSet::empty(DyadicSquare::UNIT, 5);
        assert_eq!(dyadic_content(&e, 0.5).unwrap().value, 0.0);
        let b = ball_bracket(&e, 0.5).unwrap();
        assert_eq!(b.kind, ContentKind::BallBracket { lower: 0.0, upper: 0.0 });
    }

    #[test]
    fn unit_segment_content_is_one() {
        for depth in 0..=12 {
            let r = raster(&unit_segment(), depth);
            assert_eq!(dyadic_content(&r, 0.5).unwrap().value, 1.0, "depth {depth}");
        }
    }

    #[test]
    fn full_square_content_is_one() {
        let r = RasterSet::full(DyadicSquare::UNIT, 4);
        assert_eq!(dyadic_content(&r, 0.5).unwrap().value, 1.0);
        // One level of refinement by hand: 4 * 2^-0.5 > 1.
        assert!(4.0 * math::powf(0.5, 0.5) > 1.0);
    }

    #[test]
    fn beta_out_of_range() {
        let r = RasterSet::full(DyadicSquare::UNIT, 1);
        for beta in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(dyadic_content(&r, beta), Err(Error::BetaOutOfRange(_))));
        }
    }

    #[test]
    fn power_gauge_matches_dyadic_content() {
        let scene = Scene::default().with_shape(Shape::disc(Point::new(0.3, 0.6), 0.2));
        let r = raster(&scene, 7);
        let a = dyadic_content(&r, 0.37).unwrap().value;
        let b = gauge_content(&r, &Gauge::PowerLaw(0.37)).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn zero_table_gauge_gives_zero() {
        let r = raster(&unit_segment(), 5);
        let g = Gauge::Tabulated(vec![(0.01, 0.0), (0.5, 0.0), (1.0, 0.0)]);
        assert_eq!(gauge_content(&r, &g).unwrap().value, 0.0);
        assert!(gauge_content(&r, &Gauge::Tabulated(vec![(0.5, 1.0), (1.0, 0.5)])).is_err());
        assert!(gauge_content(&r, &Gauge::Tabulated(vec![])).is_err());
    }

    #[test]
    fn ladder_below_crossover_is_plain_power() {
        let g = Gauge::Ladder { beta: 0.5, eta: 0.5, j: 8 };
        assert_eq!(g.ladder_crossover(), Some(math::exp2(-16.0)));
        let r = raster(&unit_segment(), 8);
        assert_eq!(gauge_content(&r, &g).unwrap().value, 1.0);
    }

    #[test]
    fn lower_estimate_of_unit_segment() {
        let res = lower_content_estimate(&unit_segment(), 0.5, 0.5, 4, 14).unwrap();
        assert_eq!(res.value, 1.0);
        assert!(res.truncated);
        match res.kind {
            ContentKind::LadderSequence(v) => assert_eq!(v, vec![1.0; 4]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lower_estimate_of_a_point_decays() {
        // A dyadic literal far below any leaf scale is a single occupied leaf.
        let point = Scene::default().with_shape(Shape::Dyadic(DyadicSquare::new(12345, 6789, 30)));
        let res = lower_content_estimate(&point, 0.5, 0.5, 3, 16).unwrap();
        let ContentKind::LadderSequence(v) = res.kind else { panic!() };
        // v_j = h_j(2^-N(j)) = 2^(j - N(j)) with N(j) = 8 j, the last one capped at 16.
        assert_eq!(v[0], math::exp2(1.0 - 8.0));
        assert_eq!(v[1], math::exp2(2.0 - 16.0));
        // Capped: the leaf stays at 2^-16 while j grows, so v_3 rises again.
        assert_eq!(v[2], math::exp2(3.0 - 16.0));
        assert!(v[0] > v[1]);
        assert!(res.truncated);
    }

    #[test]
    fn empty_scene_ladder_is_zero() {
        let res = lower_content_estimate(&Scene::default(), 0.5, 0.5, 3, 14).unwrap();
        assert_eq!(res.value, 0.0);
    }

    #[test]
    fn unit_segment_bracket() {
        let r = raster(&unit_segment(), 6);
        let ContentKind::BallBracket { lower, upper } = ball_bracket(&r, 0.5).unwrap().kind else {
            panic!()
        };
        assert!((lower - 0.176_776_695_296_636_9).abs() < 1e-12);
        assert!((upper - 1.189_207_115_002_721).abs() < 1e-12);
        assert!(lower <= 1.0 && 1.0 <= upper);
    }

    #[test]
    fn half_scaling_multiplies_by_two_to_minus_beta() {
        let scene = Scene::default()
            .with_shape(Shape::disc(Point::new(0.4, 0.55), 0.3))
            .with_shape(Shape::segment(Point::new(0.0, 0.1), Point::new(0.9, 0.2)));
        let r = raster(&scene, 6);
        for beta in [0.2, 0.5, 0.8] {
            let base = ball_bracket(&r, beta).unwrap();
            let half = ball_bracket(&r.half_scale(1, 0), beta).unwrap();
            let factor = math::exp2(-beta);
            assert!((half.value - factor * base.value).abs() <= 1e-15 * base.value);
        }
    }

    #[test]
    fn optimal_cover_attains_content() {
        let scene = Scene::default()
            .with_shape(Shape::disc(Point::new(0.3, 0.3), 0.25))
            .with_shape(Shape::segment(Point::new(0.6, 0.9), Point::new(0.95, 0.1)));
        let r = raster(&scene, 6);
        for beta in [0.1, 0.5, 0.9] {
            let cover = optimal_cover(&r, beta).unwrap();
            let cost: f64 = cover.iter().map(|s| math::powf(s.side(), beta)).sum();
            let content = dyadic_content(&r, beta).unwrap().value;
            assert!((cost - content).abs() < 1e-12);
            for leaf in r.leaf_squares() {
                assert!(cover.iter().any(|s| s.contains_square(&leaf)));
            }
        }
    }
}
