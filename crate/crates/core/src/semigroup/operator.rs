use super::grid::{GeometryKind, GridSpec};
use crate::weight::{unit_sphere_area, WeightCase, WeightSpec};
use crate::{Error, Result};

/// Conservative three-point discretization of `div(w grad u)` with the weight
/// sampled at cell faces and homogeneous Dirichlet data at the outer boundary.
///
/// Rows at Dirichlet nodes are identically zero, so those values stay put
/// (at zero) under any evolution.
#[derive(Clone, Debug)]
pub struct DiffusionOperator {
    grid: GridSpec,
    weight: WeightSpec,
    face_weights: Vec<f64>,
    pub(crate) lower: Vec<f64>,
    pub(crate) diag: Vec<f64>,
    pub(crate) upper: Vec<f64>,
}

impl DiffusionOperator {
    pub fn new(grid: GridSpec, weight: WeightSpec) -> Result<Self> {
        match grid.geometry() {
            GeometryKind::Line if weight.dim() != 1 => {
                return Err(Error::input("line geometry needs a one-dimensional weight"));
            }
            GeometryKind::Radial if weight.case() != WeightCase::RadialPower => {
                return Err(Error::input(
                    "radial geometry needs the radial power weight",
                ));
            }
            GeometryKind::Radial if weight.dim() != grid.dim() => {
                return Err(Error::input(format!(
                    "radial grid has dimension {}, weight has {}",
                    grid.dim(),
                    weight.dim()
                )));
            }
            _ => {}
        }
        let m = grid.nodes();
        let h = grid.spacing();
        let face_weights: Vec<f64> = (0..m - 1)
            .map(|j| weight.eval_distance(grid.coordinate(j) + 0.5 * h))
            .collect();
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        match grid.geometry() {
            GeometryKind::Line => {
                let inv = 1.0 / (h * h);
                for i in 1..m - 1 {
                    lower[i] = face_weights[i - 1] * inv;
                    upper[i] = face_weights[i] * inv;
                    diag[i] = -(lower[i] + upper[i]);
                }
            }
            GeometryKind::Radial => {
                let n = grid.dim() as i32;
                let area = unit_sphere_area(grid.dim());
                let vols = grid.cell_volumes();
                let face_area = |j: usize| area * (grid.coordinate(j) + 0.5 * h).powi(n - 1);
                for i in 0..m - 1 {
                    let scale = 1.0 / (h * vols[i]);
                    if i > 0 {
                        lower[i] = face_area(i - 1) * face_weights[i - 1] * scale;
                    }
                    upper[i] = face_area(i) * face_weights[i] * scale;
                    diag[i] = -(lower[i] + upper[i]);
                }
            }
        }
        Ok(Self {
            grid,
            weight,
            face_weights,
            lower,
            diag,
            upper,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn face_weights(&self) -> &[f64] {
        &self.face_weights
    }

    /// `(sub, main, super)` diagonals, each of length `M`.
    pub fn diagonals(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.lower, &self.diag, &self.upper)
    }

    /// `out = A u`.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let m = u.len();
        for i in 0..m {
            let mut s = self.diag[i] * u[i];
            if i > 0 {
                s += self.lower[i] * u[i - 1];
            }
            if i + 1 < m {
                s += self.upper[i] * u[i + 1];
            }
            out[i] = s;
        }
    }

    /// Largest diagonal magnitude; `1 / max|diag|` bounds Crank-Nicolson
    /// steps that keep the explicit half nonnegative.
    pub fn max_rate(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// Builds the discrete operator for a grid and weight.
pub fn build_operator(grid: GridSpec, weight: WeightSpec) -> Result<DiffusionOperator> {
    DiffusionOperator::new(grid, weight)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_weight(alpha: f64) -> WeightSpec {
        WeightSpec::new(WeightCase::AxisPower, alpha, 1).unwrap()
    }

    #[test]
    fn unweighted_line_is_second_difference() {
        let g = GridSpec::line(1.0, 11).unwrap();
        let op = build_operator(g, line_weight(0.0)).unwrap();
        let h2 = g.spacing().powi(2);
        for i in 1..10 {
            assert!((op.lower[i] * h2 - 1.0).abs() < 1e-12);
            assert!((op.upper[i] * h2 - 1.0).abs() < 1e-12);
            assert!((op.diag[i] * h2 + 2.0).abs() < 1e-12);
        }
        assert_eq!(op.diag[0], 0.0);
        assert_eq!(op.diag[10], 0.0);
    }

    #[test]
    fn faces_next_to_degeneracy_are_positive() {
        let g = GridSpec::line(1.0, 21).unwrap();
        let op = build_operator(g, line_weight(0.5)).unwrap();
        let c = g.center_index();
        let expect = (0.5 * g.spacing()).sqrt();
        assert!((op.face_weights()[c - 1] - expect).abs() < 1e-14);
        assert!((op.face_weights()[c] - expect).abs() < 1e-14);
        assert!(op.face_weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn sign_pattern_and_conservation() {
        for (g, w) in [
            (GridSpec::line(3.0, 31).unwrap(), line_weight(0.7)),
            (
                GridSpec::radial(3.0, 31, 2).unwrap(),
                WeightSpec::new(WeightCase::RadialPower, 0.4, 2).unwrap(),
            ),
            (
                GridSpec::radial(3.0, 31, 3).unwrap(),
                WeightSpec::classical(3).unwrap(),
            ),
        ] {
            let op = build_operator(g, w).unwrap();
            let (l, d, u) = op.diagonals();
            for i in 0..g.nodes() {
                assert!(l[i] >= 0.0 && u[i] >= 0.0 && d[i] <= 0.0);
                assert!((l[i] + d[i] + u[i]).abs() <= 1e-12 * d[i].abs().max(1.0));
            }
            // Flux form: sum_i vol_i (A u)_i only sees the boundary flux.
            let vols = g.cell_volumes();
            let mut u0 = vec![0.0; g.nodes()];
            for (i, v) in u0.iter_mut().enumerate().take(g.nodes() - 5).skip(3) {
                *v = ((i * 7919) % 13) as f64;
            }
            let mut au = vec![0.0; g.nodes()];
            op.apply(&u0, &mut au);
            let total: f64 = au.iter().zip(&vols).map(|(a, v)| a * v).sum();
            let scale: f64 = au.iter().zip(&vols).map(|(a, v)| (a * v).abs()).sum();
            assert!(total.abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn geometry_weight_mismatch() {
        let g = GridSpec::line(1.0, 11).unwrap();
        assert!(build_operator(g, WeightSpec::classical(2).unwrap()).is_err());
        let r = GridSpec::radial(1.0, 11, 2).unwrap();
        let axis = WeightSpec::new(WeightCase::AxisPower, 0.2, 2).unwrap();
        assert!(build_operator(r, axis).is_err());
        assert!(build_operator(r, WeightSpec::classical(3).unwrap()).is_err());
    }

    #[test]
    fn polar_stencil_matches_textbook_form() {
        // (1 / (r h^2)) [ r_{i+1/2} (u_{i+1} - u_i) - r_{i-1/2} (u_i - u_{i-1}) ]
        let g = GridSpec::radial(2.0, 21, 2).unwrap();
        let op = build_operator(g, WeightSpec::classical(2).unwrap()).unwrap();
        let h = g.spacing();
        for i in 1..20 {
            let r = g.coordinate(i);
            assert!((op.upper[i] - (r + 0.5 * h) / (r * h * h)).abs() < 1e-10);
            assert!((op.lower[i] - (r - 0.5 * h) / (r * h * h)).abs() < 1e-10);
        }
    }
}
