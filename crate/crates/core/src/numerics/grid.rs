use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// How the nodes of a [`RadialGrid`] are spaced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Spacing {
    Uniform,
    /// Consecutive cell widths grow by `ratio`.
    Geometric {
        ratio: f64,
    },
}

/// Ordered radial nodes on `[0, R]`, `nodes[0] == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    spacing: Spacing,
}

impl RadialGrid {
    /// `cells + 1` equally spaced nodes on `[0, radius]`.
    pub fn uniform(radius: f64, cells: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!(
                "grid radius must be positive, got {radius}"
            )));
        }
        if cells == 0 {
            return Err(invalid("grid needs at least one cell"));
        }
        let h = radius / cells as f64;
        let mut nodes: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
        nodes[cells] = radius;
        Ok(Self {
            nodes,
            spacing: Spacing::Uniform,
        })
    }

    /// Geometrically graded grid: the first cell is the narrowest and each
    /// subsequent cell is `ratio` times wider. `ratio == 1` is uniform.
    pub fn geometric(radius: f64, cells: usize, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(invalid(format!(
                "geometric ratio must be positive, got {ratio}"
            )));
        }
        if (ratio - 1.0).abs() < 1e-14 {
            return Self::uniform(radius, cells);
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!(
                "grid radius must be positive, got {radius}"
            )));
        }
        if cells == 0 {
            return Err(invalid("grid needs at least one cell"));
        }
        let total = (ratio.powi(cells as i32) - 1.0) / (ratio - 1.0);
        let first = radius / total;
        let mut nodes = Vec::with_capacity(cells + 1);
        nodes.push(0.0);
        let mut width = first;
        let mut y = 0.0;
        for _ in 0..cells {
            y += width;
            nodes.push(y);
            width *= ratio;
        }
        nodes[cells] = radius;
        Ok(Self {
            nodes,
            spacing: Spacing::Geometric { ratio },
        })
    }

    /// Wrap externally produced nodes; they must start at 0 and increase strictly.
    pub fn from_nodes(nodes: Vec<f64>, spacing: Spacing) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(invalid("grid needs at least two nodes"));
        }
        if nodes[0] != 0.0 {
            return Err(invalid("grid must start at the center (nodes[0] = 0)"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(invalid("grid nodes must be finite and strictly increasing"));
        }
        Ok(Self { nodes, spacing })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Number of nodes (`N + 1`).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn radius(&self) -> f64 {
        *self.nodes.last().expect("grid is never empty")
    }

    pub fn width(&self, cell: usize) -> f64 {
        self.nodes[cell + 1] - self.nodes[cell]
    }

    /// Index of the cell containing `y` (clamped to the grid).
    pub fn locate(&self, y: f64) -> usize {
        let last = self.cells() - 1;
        if y <= 0.0 {
            return 0;
        }
        match self.spacing {
            Spacing::Uniform => {
                let h = self.nodes[1];
                ((y / h) as usize).min(last)
            }
            Spacing::Geometric { .. } => {
                let idx = self.nodes.partition_point(|&x| x <= y);
                idx.saturating_sub(1).min(last)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_hits_endpoints() {
        let g = RadialGrid::uniform(2.0, 8).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.radius(), 2.0);
        assert_eq!(g.locate(0.26), 1);
        assert_eq!(g.locate(2.0), 7);
    }

    #[test]
    fn geometric_grid_grows_by_ratio() {
        let g = RadialGrid::geometric(1.0, 10, 1.1).unwrap();
        assert_eq!(g.radius(), 1.0);
        let r = g.width(5) / g.width(4);
        assert!((r - 1.1).abs() < 1e-12);
        assert_eq!(g.locate(g.nodes()[3] + 1e-9), 3);
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(RadialGrid::from_nodes(vec![0.0, 1.0, 1.0], Spacing::Uniform).is_err());
        assert!(RadialGrid::from_nodes(vec![0.1, 1.0], Spacing::Uniform).is_err());
        assert!(RadialGrid::uniform(0.0, 4).is_err());
    }
}
