//! Uniform grids on Ω = (-1, 1) and nodal functions on them.

use crate::error::{Error, Result};

pub const LEFT: f64 = -1.0;
pub const RIGHT: f64 = 1.0;

/// Uniform mesh with `M` nodes on `[-1, 1]` and trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    h: f64,
}

impl Mesh {
    pub const MIN_NODES: usize = 9;

    pub fn new(m: usize) -> Result<Self> {
        if m < Self::MIN_NODES {
            return Err(Error::Config(format!("mesh needs at least {} nodes, got {m}", Self::MIN_NODES)));
        }
        let h = (RIGHT - LEFT) / (m - 1) as f64;
        let nodes = (0..m)
            .map(|i| if i == m - 1 { RIGHT } else { LEFT + h * i as f64 })
            .collect();
        let mut weights = vec![h; m];
        weights[0] = 0.5 * h;
        weights[m - 1] = 0.5 * h;
        Ok(Self { nodes, weights, h })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn x(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Indices `1..M-1`.
    pub fn interior(&self) -> std::ops::Range<usize> {
        1..self.len() - 1
    }

    /// Nodes with `|x| ≤ 1/2`.
    pub fn middle_half(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.nodes[i].abs() <= 0.5 + 1e-12).collect()
    }

    /// The mesh with every cell halved (`2M - 1` nodes).
    pub fn refined(&self) -> Self {
        Self::new(2 * self.len() - 1).expect("refinement of a valid mesh")
    }

    /// Support interval `[a_i, b_i]` of the trapezoid weight of node `i`.
    pub fn dual_cell(&self, i: usize) -> (f64, f64) {
        let x = self.nodes[i];
        let a = if i == 0 { x } else { x - 0.5 * self.h };
        let b = if i == self.len() - 1 { x } else { x + 0.5 * self.h };
        (a, b)
    }
}

/// Nodal values on a [`Mesh`], piecewise linear in between and zero outside Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    mesh: Mesh,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::Config(format!(
                "grid function has {} values for a mesh of {} nodes",
                values.len(),
                mesh.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("grid function values must be finite, found {v}")));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        Self { mesh: mesh.clone(), values: vec![0.0; mesh.len()] }
    }

    /// Sample `f` at the nodes.
    pub fn from_fn(mesh: &Mesh, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = mesh.nodes().iter().map(|&x| f(x)).collect();
        Self::new(mesh.clone(), values)
    }

    /// Sample `f` at interior nodes and put zeros on the boundary.
    pub fn from_fn_zero_bc(mesh: &Mesh, f: impl Fn(f64) -> f64) -> Result<Self> {
        let m = mesh.len();
        let values = (0..m)
            .map(|i| if i == 0 || i == m - 1 { 0.0 } else { f(mesh.x(i)) })
            .collect();
        Self::new(mesh.clone(), values)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when both boundary values vanish (member of the zero-trace space).
    pub fn vanishes_on_boundary(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.len() - 1] == 0.0
    }

    /// Piecewise-linear interpolant, extended by zero outside Ω.
    pub fn eval(&self, x: f64) -> f64 {
        if !(LEFT..=RIGHT).contains(&x) {
            return 0.0;
        }
        let h = self.mesh.h();
        let m = self.len();
        let k = (((x - LEFT) / h).floor() as usize).min(m - 2);
        let x0 = self.mesh.x(k);
        let t = ((x - x0) / h).clamp(0.0, 1.0);
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { mesh: self.mesh.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn try_map(&self, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect::<Result<Vec<_>>>()?;
        Self::new(self.mesh.clone(), values)
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self + a * other` on the same mesh.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "grid functions on different meshes");
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect();
        Self { mesh: self.mesh.clone(), values }
    }

    /// Mirror image `x ↦ u(-x)`.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { mesh: self.mesh.clone(), values }
    }

    /// `sup |self - other|` over the nodes of the coarser of the two meshes
    /// (meshes must be nested by repeated halving).
    pub fn sup_diff_on_shared(&self, other: &Self) -> f64 {
        let (coarse, fine) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        let ratio = (fine.len() - 1) / (coarse.len() - 1);
        assert_eq!(ratio * (coarse.len() - 1), fine.len() - 1, "meshes are not nested");
        coarse
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (v - fine.values[i * ratio]).abs())
            .fold(0.0, f64::max)
    }

    /// Restrict to the nodes of a coarser nested mesh.
    pub fn restrict_to(&self, coarse: &Mesh) -> Result<Self> {
        let (m, c) = (self.len(), coarse.len());
        if c > m || (m - 1) % (c - 1) != 0 {
            return Err(Error::Config(format!("mesh with {c} nodes is not nested in mesh with {m} nodes")));
        }
        let ratio = (m - 1) / (c - 1);
        Self::new(coarse.clone(), (0..c).map(|i| self.values[i * ratio]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_invariants() {
        let m = Mesh::new(33).unwrap();
        assert_eq!(m.len(), 33);
        assert!((m.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(m.nodes().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(m.x(16), 0.0);
        assert!(Mesh::new(8).is_err());
        assert_eq!(m.refined().len(), 65);
    }

    #[test]
    fn interpolation_and_extension() {
        let m = Mesh::new(9).unwrap();
        let u = GridFunction::from_fn(&m, |x| 2.0 * x + 1.0).unwrap();
        assert!((u.eval(0.1) - 1.2).abs() < 1e-14);
        assert_eq!(u.eval(1.5), 0.0);
        assert_eq!(u.eval(-1.0001), 0.0);
        assert!((u.eval(1.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn nested_restriction() {
        let fine = Mesh::new(17).unwrap();
        let coarse = Mesh::new(9).unwrap();
        let u = GridFunction::from_fn(&fine, |x| x * x).unwrap();
        let r = u.restrict_to(&coarse).unwrap();
        assert!((r.values()[2] - 0.25).abs() < 1e-14);
        let v = GridFunction::from_fn(&coarse, |x| x * x).unwrap();
        assert!(u.sup_diff_on_shared(&v) < 1e-14);
    }

    #[test]
    fn rejects_non_finite() {
        let m = Mesh::new(9).unwrap();
        let mut v = vec![0.0; 9];
        v[3] = f64::NAN;
        assert!(GridFunction::new(m, v).is_err());
    }
}
