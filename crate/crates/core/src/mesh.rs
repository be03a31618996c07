//! Structured Kuhn (Freudenthal) triangulations of an axis-aligned box.

use crate::error::{FemError, Result};
use crate::scalar::{norm, sub, tet_signed_volume, Real, Vec3};

/// Axis-aligned box `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub low: Vec3<T>,
    pub high: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn new(low: Vec3<T>, high: Vec3<T>) -> Self {
        Self { low, high }
    }

    /// The cube `[-a, a]^3`.
    pub fn symmetric_cube(a: T) -> Self {
        Self::new([-a; 3], [a; 3])
    }

    pub fn volume(&self) -> T {
        (0..3).map(|d| self.high[d] - self.low[d]).fold(T::one(), |acc, e| acc * e)
    }

    fn is_degenerate(&self) -> bool {
        (0..3).any(|d| !self.low[d].is_finite() || !self.high[d].is_finite() || self.high[d] <= self.low[d])
    }
}

/// For each of the 3! axis orders, the path of unit steps from corner
/// (0,0,0) to corner (1,1,1) spans one Kuhn tetrahedron.
const KUHN_PATHS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Conforming tetrahedral mesh of a box, built from `n^3` sub-cubes that are
/// each split into six Kuhn tetrahedra sharing the main diagonal.
#[derive(Debug, Clone)]
pub struct Mesh<T> {
    pub vertices: Vec<Vec3<T>>,
    pub tets: Vec<[usize; 4]>,
    /// Number of uniform refinements applied since the initial mesh.
    pub level: u32,
    /// Sub-cubes per axis.
    pub subdivisions: usize,
    pub bounds: Aabb<T>,
    /// Ascending indices of vertices lying on a face of the box.
    pub boundary_vertices: Vec<usize>,
    on_boundary: Vec<bool>,
}

impl<T: Real> Mesh<T> {
    /// Builds the level-0 Kuhn mesh with `n` sub-cubes per axis.
    pub fn build_cube_mesh(n: usize, bounds: Aabb<T>) -> Result<Self> {
        if n == 0 {
            return Err(FemError::InvalidMesh("need at least one subdivision per axis".into()));
        }
        if bounds.is_degenerate() {
            return Err(FemError::InvalidMesh("box bounds are degenerate".into()));
        }
        let mut mesh = Self::kuhn(n, bounds);
        mesh.level = 0;
        Ok(mesh)
    }

    /// Mesh used by the experiments: `[-1.5, 1.5]^3`, 4 cubes per axis at level 0,
    /// refined `level` times.
    pub fn box_level(level: u32) -> Self {
        let n = 4usize << level;
        let mut mesh = Self::kuhn(n, Aabb::symmetric_cube(T::lit(1.5)));
        mesh.level = level;
        mesh
    }

    /// Uniform refinement. For a structured Kuhn mesh, rebuilding with twice
    /// the subdivisions is exactly the red refinement of every tetrahedron pair
    /// along the cube diagonals.
    pub fn refine_uniform(&self) -> Self {
        let mut mesh = Self::kuhn(2 * self.subdivisions, self.bounds);
        mesh.level = self.level + 1;
        mesh
    }

    fn kuhn(n: usize, bounds: Aabb<T>) -> Self {
        let np = n + 1;
        let idx = |i: usize, j: usize, k: usize| (i * np + j) * np + k;
        let coord = |d: usize, i: usize| {
            if i == n {
                bounds.high[d]
            } else {
                let t = T::from_usize_lossy(i) / T::from_usize_lossy(n);
                bounds.low[d] + t * (bounds.high[d] - bounds.low[d])
            }
        };

        let mut vertices = Vec::with_capacity(np * np * np);
        let mut on_boundary = Vec::with_capacity(np * np * np);
        for i in 0..np {
            for j in 0..np {
                for k in 0..np {
                    vertices.push([coord(0, i), coord(1, j), coord(2, k)]);
                    on_boundary.push([i, j, k].iter().any(|&c| c == 0 || c == n));
                }
            }
        }
        let boundary_vertices = (0..vertices.len()).filter(|&v| on_boundary[v]).collect();

        // Orientation of each path pattern in index space; odd permutations
        // produce negatively oriented tets and get two vertices swapped.
        let patterns: Vec<[[usize; 3]; 4]> = KUHN_PATHS
            .iter()
            .map(|path| {
                let mut offs = [[0usize; 3]; 4];
                for s in 0..3 {
                    offs[s + 1] = offs[s];
                    offs[s + 1][path[s]] = 1;
                }
                let as_f = |o: [usize; 3]| o.map(|c| c as f64);
                let p = [as_f(offs[0]), as_f(offs[1]), as_f(offs[2]), as_f(offs[3])];
                if tet_signed_volume(&p) < 0.0 {
                    offs.swap(2, 3);
                }
                offs
            })
            .collect();

        let mut tets = Vec::with_capacity(6 * n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for offs in &patterns {
                        tets.push(offs.map(|o| idx(i + o[0], j + o[1], k + o[2])));
                    }
                }
            }
        }

        Self {
            vertices,
            tets,
            level: 0,
            subdivisions: n,
            bounds,
            boundary_vertices,
            on_boundary,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn tet_points(&self, t: usize) -> [Vec3<T>; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    pub fn tet_volume(&self, t: usize) -> T {
        tet_signed_volume(&self.tet_points(t))
    }

    /// Maximum tetrahedron diameter.
    pub fn mesh_size(&self) -> T {
        let mut h = T::zero();
        for t in 0..self.tets.len() {
            let p = self.tet_points(t);
            for a in 0..4 {
                for b in a + 1..4 {
                    h = h.max(norm(sub(p[a], p[b])));
                }
            }
        }
        h
    }
}
