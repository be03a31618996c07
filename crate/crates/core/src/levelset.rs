//! Piecewise linear level-set representation of the interface.

use crate::error::{FemError, Result};
use crate::mesh::Mesh;
use crate::scalar::{norm, Real, Vec3};

/// Relative threshold (in units of the mesh size) below which a nodal value
/// counts as zero and is pushed to the positive side.
pub const ZERO_SHIFT: f64 = 1e-12;

/// Signed distance to the unit sphere.
pub fn phi_sphere<T: Real>(x: Vec3<T>) -> T {
    norm(x) - T::one()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TetClass {
    /// All nodal values negative.
    Inside1,
    /// All nodal values positive.
    Inside2,
    Cut,
}

impl TetClass {
    pub fn from_values<T: Real>(values: &[T; 4]) -> Self {
        let neg = values.iter().filter(|v| **v < T::zero()).count();
        match neg {
            4 => TetClass::Inside1,
            0 => TetClass::Inside2,
            _ => TetClass::Cut,
        }
    }
}

/// Nodal values of the P1 interpolant of a level-set function.
#[derive(Debug, Clone)]
pub struct LevelSetField<'m, T> {
    pub mesh: &'m Mesh<T>,
    pub nodal_values: Vec<T>,
    /// Vertices whose value was shifted off zero.
    pub shifted: Vec<usize>,
}

impl<'m, T: Real> LevelSetField<'m, T> {
    /// Nodal interpolation of `phi`, followed by the exact-zero shift.
    pub fn interpolate_p1<F>(phi: F, mesh: &'m Mesh<T>) -> Result<Self>
    where
        F: Fn(Vec3<T>) -> T,
    {
        let values = mesh.vertices.iter().map(|&x| phi(x)).collect();
        Self::from_nodal_values(values, mesh)
    }

    pub fn from_nodal_values(mut values: Vec<T>, mesh: &'m Mesh<T>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(FemError::InvalidMesh(format!(
                "{} nodal values for {} vertices",
                values.len(),
                mesh.num_vertices()
            )));
        }
        let eps = T::lit(ZERO_SHIFT) * mesh.mesh_size();
        let mut shifted = Vec::new();
        for (v, value) in values.iter_mut().enumerate() {
            if !value.is_finite() {
                return Err(FemError::NonFiniteLevelSet { vertex: v });
            }
            if value.abs() < eps {
                *value = eps;
                shifted.push(v);
            }
        }
        Ok(Self { mesh, nodal_values: values, shifted })
    }

    pub fn tet_values(&self, t: usize) -> [T; 4] {
        self.mesh.tets[t].map(|v| self.nodal_values[v])
    }

    pub fn classify(&self, t: usize) -> TetClass {
        TetClass::from_values(&self.tet_values(t))
    }

    pub fn classes(&self) -> Vec<TetClass> {
        (0..self.mesh.num_tets()).map(|t| self.classify(t)).collect()
    }

    pub fn cut_tets(&self) -> Vec<usize> {
        (0..self.mesh.num_tets()).filter(|&t| self.classify(t) == TetClass::Cut).collect()
    }
}
