//! On-disk formats: scenes, measures and grid functions as JSON.

use std::fs;
use std::path::Path;

use lipcap_core::geom::{DyadicSquare, ObstacleKind, ParametricDomain, Scene, Shape};
use lipcap_core::measures::DiscreteMeasure;
use lipcap_core::smoothfn::GridFunction;
use lipcap_core::Point;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SquareFile {
    pub m: i64,
    pub r: i64,
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ShapeFile {
    Segment { from: [f64; 2], to: [f64; 2] },
    Disc { center: [f64; 2], radius: f64 },
    Dyadic { m: i64, r: i64, n: u32 },
    Bitmap { n: u32, cells: Vec<[i64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricFile {
    pub kind: ObstacleKind,
    pub a0: f64,
    pub q: f64,
    pub c0: f64,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    #[serde(default)]
    pub root: SquareFile,
    #[serde(default)]
    pub shapes: Vec<ShapeFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parametric: Option<ParametricFile>,
}

fn pt(p: [f64; 2]) -> Point {
    Point::new(p[0], p[1])
}

fn arr(p: Point) -> [f64; 2] {
    [p.re, p.im]
}

impl ParametricFile {
    pub fn to_domain(&self) -> Result<ParametricDomain, CliError> {
        let d = ParametricDomain::new(self.kind, self.a0, self.q, self.c0, self.p)?;
        Ok(match self.anchor {
            Some(a) => d.with_anchor(pt(a)),
            None => d,
        })
    }

    pub fn from_domain(d: &ParametricDomain) -> Self {
        let anchor = (d.anchor != ParametricDomain::DEFAULT_ANCHOR).then(|| arr(d.anchor));
        ParametricFile { kind: d.kind, a0: d.a0, q: d.q, c0: d.c0, p: d.p, anchor }
    }
}

impl SceneFile {
    pub fn to_scene(&self) -> Result<Scene, CliError> {
        let root = DyadicSquare::new(self.root.m, self.root.r, self.root.n);
        let mut scene = Scene::new(root);
        for shape in &self.shapes {
            scene.push(match shape {
                ShapeFile::Segment { from, to } => Shape::segment(pt(*from), pt(*to)),
                ShapeFile::Disc { center, radius } => Shape::disc(pt(*center), *radius),
                ShapeFile::Dyadic { m, r, n } => Shape::Dyadic(DyadicSquare::new(*m, *r, *n)),
                ShapeFile::Bitmap { n, cells } => Shape::Bitmap { n: *n, cells: cells.iter().map(|c| (c[0], c[1])).collect() },
            });
        }
        scene.parametric = self.parametric.as_ref().map(ParametricFile::to_domain).transpose()?;
        Ok(scene)
    }

    pub fn from_scene(scene: &Scene) -> Self {
        let shapes = scene
            .shapes
            .iter()
            .map(|s| match s {
                Shape::Segment { from, to } => ShapeFile::Segment { from: arr(*from), to: arr(*to) },
                Shape::Disc { center, radius } => ShapeFile::Disc { center: arr(*center), radius: *radius },
                Shape::Dyadic(sq) => ShapeFile::Dyadic { m: sq.m, r: sq.r, n: sq.n },
                Shape::Bitmap { n, cells } => ShapeFile::Bitmap { n: *n, cells: cells.iter().map(|&(m, r)| [m, r]).collect() },
            })
            .collect();
        SceneFile {
            root: SquareFile { m: scene.root.m, r: scene.root.r, n: scene.root.n },
            shapes,
            parametric: scene.parametric.as_ref().map(ParametricFile::from_domain),
        }
    }
}

/// Row-major samples on a square lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    pub origin: [f64; 2],
    pub spacing: f64,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl GridFile {
    pub fn to_grid(&self) -> Result<GridFunction, CliError> {
        Ok(GridFunction::new(pt(self.origin), self.spacing, self.rows, self.cols, self.values.clone())?)
    }

    pub fn from_grid(g: &GridFunction) -> Self {
        GridFile { origin: arr(g.origin()), spacing: g.spacing(), rows: g.rows(), cols: g.cols(), values: g.values().to_vec() }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.display().to_string(), source: e })
}

pub fn read_scene(path: &Path) -> Result<Scene, CliError> {
    read_json::<SceneFile>(path)?.to_scene()
}

/// `{"atoms": [[x, y, w], ...]}` with finite locations and weights >= 0.
pub fn read_measure(path: &Path) -> Result<DiscreteMeasure, CliError> {
    read_json(path)
}
