use serde::{Deserialize, Serialize};

use crate::weight::unit_sphere_area;
use crate::{Error, Result};

/// Shape of the truncated computational domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    /// `[-L, L]` in one dimension, Dirichlet at both ends.
    Line,
    /// `[0, R]` for radially symmetric data in `R^N`, reflecting at the
    /// origin and Dirichlet at `R`.
    Radial,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawGrid {
    geometry: GeometryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    nodes: usize,
}

/// A uniform nodal grid on `[-L, L]` or `[0, R]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridSpec {
    geometry: GeometryKind,
    extent: f64,
    nodes: usize,
    dim: usize,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        match raw.geometry {
            GeometryKind::Line => {
                if raw.dim.is_some_and(|d| d != 1) {
                    return Err(Error::input("line geometry is one-dimensional"));
                }
                let l = raw
                    .half_width
                    .ok_or_else(|| Error::input("line grid needs half_width"))?;
                GridSpec::line(l, raw.nodes)
            }
            GeometryKind::Radial => {
                let r = raw
                    .radius
                    .ok_or_else(|| Error::input("radial grid needs radius"))?;
                GridSpec::radial(r, raw.nodes, raw.dim.unwrap_or(1))
            }
        }
    }
}

impl From<GridSpec> for RawGrid {
    fn from(g: GridSpec) -> Self {
        match g.geometry {
            GeometryKind::Line => RawGrid {
                geometry: g.geometry,
                half_width: Some(g.extent),
                radius: None,
                dim: None,
                nodes: g.nodes,
            },
            GeometryKind::Radial => RawGrid {
                geometry: g.geometry,
                half_width: None,
                radius: Some(g.extent),
                dim: Some(g.dim),
                nodes: g.nodes,
            },
        }
    }
}

impl GridSpec {
    /// `nodes` points on `[-half_width, half_width]`; `nodes` must be odd so
    /// that `x = 0` is a node.
    pub fn line(half_width: f64, nodes: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::input(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if nodes < 3 || nodes.is_multiple_of(2) {
            return Err(Error::input(format!(
                "line grid needs an odd node count >= 3, got {nodes}"
            )));
        }
        Ok(Self {
            geometry: GeometryKind::Line,
            extent: half_width,
            nodes,
            dim: 1,
        })
    }

    /// `nodes` points on `[0, radius]` for radial profiles in `R^dim`.
    pub fn radial(radius: f64, nodes: usize, dim: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::input(format!(
                "radius must be positive, got {radius}"
            )));
        }
        if nodes < 3 {
            return Err(Error::input(format!(
                "radial grid needs >= 3 nodes, got {nodes}"
            )));
        }
        if dim == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        Ok(Self {
            geometry: GeometryKind::Radial,
            extent: radius,
            nodes,
            dim,
        })
    }

    /// A line grid with spacing closest to `dx` (rounded so the node count is odd).
    pub fn line_with_spacing(half_width: f64, dx: f64) -> Result<Self> {
        let cells = (2.0 * half_width / dx).round().max(2.0) as usize;
        let cells = cells + cells % 2;
        Self::line(half_width, cells + 1)
    }

    /// A radial grid with spacing closest to `dr`.
    pub fn radial_with_spacing(radius: f64, dr: f64, dim: usize) -> Result<Self> {
        let cells = (radius / dr).round().max(2.0) as usize;
        Self::radial(radius, cells + 1, dim)
    }

    pub fn geometry(&self) -> GeometryKind {
        self.geometry
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `L` for a line grid, `R` for a radial grid.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        match self.geometry {
            GeometryKind::Line => 2.0 * self.extent / (self.nodes - 1) as f64,
            GeometryKind::Radial => self.extent / (self.nodes - 1) as f64,
        }
    }

    /// Signed coordinate (line) or radius (radial) of node `i`.
    pub fn coordinate(&self, i: usize) -> f64 {
        let h = self.spacing();
        match self.geometry {
            GeometryKind::Line => {
                let c = self.center_index() as f64;
                (i as f64 - c) * h
            }
            GeometryKind::Radial => i as f64 * h,
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.coordinate(i)).collect()
    }

    /// Node sitting on the degeneracy point.
    pub fn center_index(&self) -> usize {
        match self.geometry {
            GeometryKind::Line => (self.nodes - 1) / 2,
            GeometryKind::Radial => 0,
        }
    }

    /// Indices of nodes held at zero by the Dirichlet condition.
    pub fn dirichlet_nodes(&self) -> Vec<usize> {
        match self.geometry {
            GeometryKind::Line => vec![0, self.nodes - 1],
            GeometryKind::Radial => vec![self.nodes - 1],
        }
    }

    /// Nodes adjacent to the Dirichlet boundary, watched by the leak monitor.
    pub fn sentinel_nodes(&self) -> Vec<usize> {
        match self.geometry {
            GeometryKind::Line => vec![1, self.nodes - 2],
            GeometryKind::Radial => vec![self.nodes - 2],
        }
    }

    /// Control-volume measure attached to each node.
    ///
    /// Line: `dx` (half cells at the ends). Radial: the shell volume
    /// `|S^{N-1}| (r_+^N - r_-^N) / N` of the cell around the node.
    pub fn cell_volumes(&self) -> Vec<f64> {
        let h = self.spacing();
        let m = self.nodes;
        match self.geometry {
            GeometryKind::Line => (0..m)
                .map(|i| if i == 0 || i == m - 1 { 0.5 * h } else { h })
                .collect(),
            GeometryKind::Radial => {
                let n = self.dim as i32;
                let area = unit_sphere_area(self.dim);
                (0..m)
                    .map(|i| {
                        let r = i as f64 * h;
                        let lo = (r - 0.5 * h).max(0.0);
                        let hi = if i == m - 1 { r } else { r + 0.5 * h };
                        area * (hi.powi(n) - lo.powi(n)) / n as f64
                    })
                    .collect()
            }
        }
    }
}

/// Nodal values on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nodes() {
            return Err(Error::input(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.nodes()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::input(format!("field value {bad} is not finite")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.nodes());
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.nodes()],
        }
    }

    /// Samples `f` at every node coordinate (signed `x` or radius `r`).
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.coordinates().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    /// Mass-one spike at node `index`.
    pub fn delta(grid: GridSpec, index: usize) -> Result<Self> {
        if index >= grid.nodes() {
            return Err(Error::input(format!("node {index} out of range")));
        }
        let mut values = vec![0.0; grid.nodes()];
        values[index] = 1.0 / grid.cell_volumes()[index];
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `integral u` with the grid's control volumes.
    pub fn mass(&self) -> f64 {
        dot(&self.values, &self.grid.cell_volumes())
    }

    /// `integral over |x| <= radius of u`.
    pub fn window_mass(&self, radius: f64) -> f64 {
        let vols = self.grid.cell_volumes();
        (0..self.grid.nodes())
            .filter(|&i| self.grid.coordinate(i).abs() <= radius)
            .map(|i| self.values[i] * vols[i])
            .sum()
    }

    /// Discrete `L^q` norm; `q = f64::INFINITY` gives the sup norm.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.sup_norm();
        }
        let vols = self.grid.cell_volumes();
        self.values
            .iter()
            .zip(vols.iter())
            .map(|(u, w)| u.abs().powf(q) * w)
            .sum::<f64>()
            .powf(1.0 / q)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| lambda * v).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Largest absolute value at the nodes next to the Dirichlet boundary.
    pub fn boundary_leak(&self) -> f64 {
        self.grid
            .sentinel_nodes()
            .into_iter()
            .map(|i| self.values[i].abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_grid_has_center_node() {
        let g = GridSpec::line(2.0, 5).unwrap();
        assert_eq!(g.coordinates(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(g.center_index(), 2);
        assert!(GridSpec::line(2.0, 4).is_err());
        assert!(GridSpec::line(2.0, 1).is_err());
        assert!(GridSpec::line(-1.0, 5).is_err());
    }

    #[test]
    fn radial_volumes_sum_to_ball() {
        let g = GridSpec::radial(3.0, 31, 3).unwrap();
        let total: f64 = g.cell_volumes().iter().sum();
        let ball = 4.0 / 3.0 * std::f64::consts::PI * 27.0;
        assert!((total / ball - 1.0).abs() < 1e-12);
        let g = GridSpec::radial(3.0, 31, 1).unwrap();
        let total: f64 = g.cell_volumes().iter().sum();
        assert!((total - 6.0).abs() < 1e-12);
    }

    #[test]
    fn spacing_constructors() {
        let g = GridSpec::line_with_spacing(10.0, 0.1).unwrap();
        assert_eq!(g.nodes(), 201);
        assert!((g.spacing() - 0.1).abs() < 1e-12);
        let g = GridSpec::radial_with_spacing(10.0, 0.5, 2).unwrap();
        assert_eq!(g.nodes(), 21);
    }

    #[test]
    fn field_rejects_bad_values() {
        let g = GridSpec::line(1.0, 3).unwrap();
        assert!(Field::new(g, vec![0.0, f64::NAN, 0.0]).is_err());
        assert!(Field::new(g, vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn delta_has_unit_mass() {
        for g in [
            GridSpec::line(5.0, 101).unwrap(),
            GridSpec::radial(5.0, 51, 2).unwrap(),
        ] {
            let d = Field::delta(g, g.center_index()).unwrap();
            assert!((d.mass() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_json_shape() {
        let g = GridSpec::radial(4.0, 9, 2).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"geometry":"radial","radius":4.0,"dim":2,"nodes":9}"#);
        let back: GridSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let bad: std::result::Result<GridSpec, _> =
            serde_json::from_str(r#"{"geometry":"line","half_width":1.0,"nodes":4}"#);
        assert!(bad.is_err());
    }
}
