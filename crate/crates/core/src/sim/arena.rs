use serde::{Deserialize, Serialize};

use crate::geometry::{half_planes, HalfPlane, Shape, Vec2};
use crate::reference::FloorColor;

use super::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorPatch {
    pub shape: Shape,
    pub color: FloorColor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Light {
    pub position: Vec2,
    pub intensity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
}

/// Static description of an arena. Coordinates in metres.
///
/// `bounds` is a counterclockwise convex polygon. When several floor patches
/// overlap, the one listed last decides the color.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaSpec {
    pub bounds: Vec<Vec2>,
    pub default_floor: FloorColor,
    #[serde(default)]
    pub floor_patches: Vec<FloorPatch>,
    #[serde(default)]
    pub lights: Vec<Light>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Where robot centers are placed at the start of an episode.
    pub start_region: Shape,
}

impl ArenaSpec {
    /// Axis-aligned square of side `side` centred on the origin.
    pub fn square_bounds(side: f64) -> Vec<Vec2> {
        let h = side / 2.0;
        vec![Vec2::new(-h, -h), Vec2::new(h, -h), Vec2::new(h, h), Vec2::new(-h, h)]
    }

    /// Check the arena invariants and return its edge half-planes.
    pub fn validate(&self) -> Result<Vec<HalfPlane>, SimError> {
        let planes = half_planes(&self.bounds)
            .ok_or_else(|| SimError::InvalidArena("bounds must be a non-degenerate counterclockwise convex polygon".into()))?;
        let inside = |p: Vec2| planes.iter().all(|hp| hp.signed_distance(p) >= -1e-12);
        for (i, patch) in self.floor_patches.iter().enumerate() {
            if patch.shape.is_degenerate() {
                return Err(SimError::InvalidArena(format!("floor patch {i} is degenerate")));
            }
            if !patch.shape.extreme_points().into_iter().all(inside) {
                return Err(SimError::InvalidArena(format!("floor patch {i} extends outside the bounds")));
            }
        }
        for (i, light) in self.lights.iter().enumerate() {
            if !(light.intensity >= 0.0 && light.intensity.is_finite()) {
                return Err(SimError::InvalidArena(format!("light {i} has invalid intensity")));
            }
        }
        if self.start_region.is_degenerate() {
            return Err(SimError::InvalidArena("start region is degenerate".into()));
        }
        if let Some(grid) = self.grid {
            if grid.rows == 0 || grid.cols == 0 {
                return Err(SimError::InvalidArena("grid needs at least one row and column".into()));
            }
            if !self.is_axis_aligned_rectangle() {
                return Err(SimError::InvalidArena(
                    "a grid can only partition an axis-aligned rectangular arena".into(),
                ));
            }
        }
        Ok(planes)
    }

    fn is_axis_aligned_rectangle(&self) -> bool {
        if self.bounds.len() != 4 {
            return false;
        }
        let (min, max) = self.bounding_box();
        self.bounds
            .iter()
            .all(|p| (p.x == min.x || p.x == max.x) && (p.y == min.y || p.y == max.y))
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        self.bounds.iter().fold(
            (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
            |(lo, hi), p| (Vec2::new(lo.x.min(p.x), lo.y.min(p.y)), Vec2::new(hi.x.max(p.x), hi.y.max(p.y))),
        )
    }

    pub fn floor_at(&self, p: Vec2) -> FloorColor {
        self.floor_patches
            .iter()
            .rev()
            .find(|patch| patch.shape.contains(p))
            .map_or(self.default_floor, |patch| patch.color)
    }

    pub fn cell_count(&self) -> usize {
        self.grid.map_or(0, |g| g.rows * g.cols)
    }

    /// Row-major index of the grid cell containing `p`. Points on interior
    /// cell edges belong to the cell with the larger index.
    pub fn grid_cell(&self, p: Vec2) -> Option<usize> {
        let grid = self.grid?;
        let (min, max) = self.bounding_box();
        if p.x < min.x || p.x > max.x || p.y < min.y || p.y > max.y {
            return None;
        }
        let fx = (p.x - min.x) / (max.x - min.x) * grid.cols as f64;
        let fy = (p.y - min.y) / (max.y - min.y) * grid.rows as f64;
        let col = (fx.floor() as usize).min(grid.cols - 1);
        let row = (fy.floor() as usize).min(grid.rows - 1);
        Some(row * grid.cols + col)
    }

    /// The grid cells as rectangles, row-major.
    pub fn grid_cells(&self) -> Vec<Shape> {
        let Some(grid) = self.grid else { return Vec::new() };
        let (min, max) = self.bounding_box();
        let w = (max.x - min.x) / grid.cols as f64;
        let h = (max.y - min.y) / grid.rows as f64;
        let mut cells = Vec::with_capacity(grid.rows * grid.cols);
        for r in 0..grid.rows {
            for c in 0..grid.cols {
                let lo = Vec2::new(min.x + c as f64 * w, min.y + r as f64 * h);
                let hi = Vec2::new(
                    if c + 1 == grid.cols { max.x } else { min.x + (c + 1) as f64 * w },
                    if r + 1 == grid.rows { max.y } else { min.y + (r + 1) as f64 * h },
                );
                cells.push(Shape::Rectangle { min: lo, max: hi });
            }
        }
        cells
    }

    /// Copy with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> ArenaSpec {
        ArenaSpec {
            bounds: self.bounds.iter().map(|p| *p * factor).collect(),
            default_floor: self.default_floor,
            floor_patches: self
                .floor_patches
                .iter()
                .map(|p| FloorPatch {
                    shape: p.shape.scaled(factor),
                    color: p.color,
                })
                .collect(),
            lights: self
                .lights
                .iter()
                .map(|l| Light {
                    position: l.position * factor,
                    intensity: l.intensity,
                })
                .collect(),
            grid: self.grid,
            start_region: self.start_region.scaled(factor),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("arena specs always serialize")
    }

    pub fn from_toml(text: &str) -> Result<ArenaSpec, SimError> {
        let arena: ArenaSpec = toml::from_str(text).map_err(|e| SimError::InvalidArena(e.to_string()))?;
        arena.validate()?;
        Ok(arena)
    }
}
