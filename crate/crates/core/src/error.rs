use core::fmt;

use crate::Point;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure mode of the core crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DepthTooLarge { depth: u32, cap: u32 },
    ShapeOutsideRoot { index: usize },
    BetaOutOfRange(f64),
    GaugeInvalid(&'static str),
    EmptySet,
    NonpositiveT(f64),
    GridInvalid(&'static str),
    TooCloseToSupport { nearest: Point, distance: f64 },
    ChiMismatchOnSupport { atom: Point, error: f64 },
    BInSupport { b: Point },
    PhiDomainMismatch { atom: Point },
    GridTooCoarse { spacing: f64, required: f64 },
    NotACover { leaf: (u32, u32) },
    SquareTooLarge { level: i64 },
    DepthInsufficient { n: u32, depth: u32 },
    NotDivergent,
    ObstacleOutsideSector { index: u32 },
    InvalidDomain(&'static str),
    InvalidArgument(&'static str),
}

impl Error {
    /// Stable machine-readable name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DepthTooLarge { .. } => "DepthTooLarge",
            Error::ShapeOutsideRoot { .. } => "ShapeOutsideRoot",
            Error::BetaOutOfRange(_) => "BetaOutOfRange",
            Error::GaugeInvalid(_) => "GaugeInvalid",
            Error::EmptySet => "EmptySet",
            Error::NonpositiveT(_) => "NonpositiveT",
            Error::GridInvalid(_) => "GridInvalid",
            Error::TooCloseToSupport { .. } => "TooCloseToSupport",
            Error::ChiMismatchOnSupport { .. } => "ChiMismatchOnSupport",
            Error::BInSupport { .. } => "BInSupport",
            Error::PhiDomainMismatch { .. } => "PhiDomainMismatch",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::NotACover { .. } => "NotACover",
            Error::SquareTooLarge { .. } => "SquareTooLarge",
            Error::DepthInsufficient { .. } => "DepthInsufficient",
            Error::NotDivergent => "NotDivergent",
            Error::ObstacleOutsideSector { .. } => "ObstacleOutsideSector",
            Error::InvalidDomain(_) => "InvalidDomain",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DepthTooLarge { depth, cap } => {
                write!(f, "depth {depth} exceeds the cap {cap}")
            }
            Error::ShapeOutsideRoot { index } => {
                write!(f, "shape #{index} does not lie inside the root square")
            }
            Error::BetaOutOfRange(b) => write!(f, "beta = {b} is not in (0, 1)"),
            Error::GaugeInvalid(why) => write!(f, "invalid gauge: {why}"),
            Error::EmptySet => f.write_str("the set is empty"),
            Error::NonpositiveT(t) => write!(f, "t = {t} must be positive"),
            Error::GridInvalid(why) => write!(f, "invalid grid: {why}"),
            Error::TooCloseToSupport { nearest, distance } => write!(
                f,
                "evaluation point within {distance} of the atom at ({}, {})",
                nearest.re, nearest.im
            ),
            Error::ChiMismatchOnSupport { atom, error } => write!(
                f,
                "test function differs from 1/(z-b) by {error} at atom ({}, {})",
                atom.re, atom.im
            ),
            Error::BInSupport { b } => {
                write!(f, "point ({}, {}) lies on the support", b.re, b.im)
            }
            Error::PhiDomainMismatch { atom } => write!(
                f,
                "atom ({}, {}) lies outside the grid of the localizing function",
                atom.re, atom.im
            ),
            Error::GridTooCoarse { spacing, required } => write!(
                f,
                "grid spacing {spacing} does not resolve the function (need <= {required})"
            ),
            Error::NotACover { leaf } => write!(
                f,
                "occupied leaf ({}, {}) is not covered by the squares",
                leaf.0, leaf.1
            ),
            Error::SquareTooLarge { level } => {
                write!(f, "square at level {level} has side larger than 1")
            }
            Error::DepthInsufficient { n, depth } => {
                write!(f, "annulus A_{n} is below the leaf scale of depth {depth}")
            }
            Error::NotDivergent => f.write_str("the series converges; no divergence witness"),
            Error::ObstacleOutsideSector { index } => {
                write!(f, "obstacle {index} leaves the sector |arg z| < pi/4")
            }
            Error::InvalidDomain(why) => write!(f, "invalid domain: {why}"),
            Error::InvalidArgument(why) => write!(f, "invalid argument: {why}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::BetaOutOfRange(beta))
    }
}
