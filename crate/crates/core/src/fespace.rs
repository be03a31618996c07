//! P1 bulk space and its trace spaces on the two subdomains and on the
//! discrete interface.

use crate::levelset::{LevelSetField, TetClass};
use crate::mesh::Mesh;
use crate::scalar::{dot, sub, Real, Vec3};

/// Gradients of the four barycentric basis functions of a tetrahedron.
pub fn p1_gradients<T: Real>(p: &[Vec3<T>; 4]) -> [Vec3<T>; 4] {
    let e1 = sub(p[1], p[0]);
    let e2 = sub(p[2], p[0]);
    let e3 = sub(p[3], p[0]);
    // Rows of the inverse of [e1 e2 e3] are the cross products over the determinant.
    let c23 = crate::scalar::cross(e2, e3);
    let c31 = crate::scalar::cross(e3, e1);
    let c12 = crate::scalar::cross(e1, e2);
    let det = dot(e1, c23);
    let inv = T::one() / det;
    let g1 = c23.map(|c| c * inv);
    let g2 = c31.map(|c| c * inv);
    let g3 = c12.map(|c| c * inv);
    let g0 = [-(g1[0] + g2[0] + g3[0]), -(g1[1] + g2[1] + g3[1]), -(g1[2] + g2[2] + g3[2])];
    [g0, g1, g2, g3]
}

/// Values and gradients of the P1 basis of tetrahedron `p` at `x`.
pub fn eval_p1<T: Real>(p: &[Vec3<T>; 4], x: Vec3<T>) -> ([T; 4], [Vec3<T>; 4]) {
    let grads = p1_gradients(p);
    let d = sub(x, p[0]);
    let l1 = dot(grads[1], d);
    let l2 = dot(grads[2], d);
    let l3 = dot(grads[3], d);
    ([T::one() - l1 - l2 - l3, l1, l2, l3], grads)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    Bulk1,
    Bulk2,
    Surface,
}

/// Active vertices of one trace space, in ascending global order.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub space: Space,
    pub active: Vec<usize>,
    pub global_to_local: Vec<Option<usize>>,
    /// Local indices of dofs on the box boundary (outer bulk space only).
    pub dirichlet: Vec<usize>,
}

impl DofMap {
    fn from_mask<T: Real>(space: Space, mask: &[bool], mesh: &Mesh<T>) -> Self {
        let active: Vec<usize> = (0..mask.len()).filter(|&v| mask[v]).collect();
        let mut global_to_local = vec![None; mask.len()];
        for (l, &g) in active.iter().enumerate() {
            global_to_local[g] = Some(l);
        }
        // Only the outer phase reaches the box boundary.
        let dirichlet = match space {
            Space::Bulk1 | Space::Surface => Vec::new(),
            Space::Bulk2 => active
                .iter()
                .enumerate()
                .filter(|(_, &g)| mesh.is_boundary_vertex(g))
                .map(|(l, _)| l)
                .collect(),
        };
        Self { space, active, global_to_local, dirichlet }
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn local(&self, global: usize) -> Option<usize> {
        self.global_to_local[global]
    }

    /// Local indices of the four vertices of a tet; panics if one is inactive.
    pub fn tet_dofs(&self, tet: &[usize; 4]) -> [usize; 4] {
        tet.map(|g| self.global_to_local[g].expect("vertex of an active tet must be active"))
    }
}

#[derive(Debug, Clone)]
pub struct DofMaps {
    pub bulk1: DofMap,
    pub bulk2: DofMap,
    pub surface: DofMap,
}

impl DofMaps {
    pub fn bulk(&self, tag: u8) -> &DofMap {
        if tag == 1 {
            &self.bulk1
        } else {
            &self.bulk2
        }
    }

    /// Size of the concatenated bulk index space (Bulk1 then Bulk2).
    pub fn num_bulk(&self) -> usize {
        self.bulk1.len() + self.bulk2.len()
    }

    /// Offset of bulk space `tag` inside the concatenated bulk vector.
    pub fn bulk_offset(&self, tag: u8) -> usize {
        if tag == 1 {
            0
        } else {
            self.bulk1.len()
        }
    }
}

/// Active sets: a vertex belongs to a trace space when its hat function's
/// support meets the subdomain (or interface), i.e. when it is a vertex of a
/// tetrahedron that intersects it.
pub fn build_dofmaps<T: Real>(mesh: &Mesh<T>, field: &LevelSetField<'_, T>) -> DofMaps {
    let n = mesh.num_vertices();
    let mut in1 = vec![false; n];
    let mut in2 = vec![false; n];
    let mut on_gamma = vec![false; n];
    for (t, tet) in mesh.tets.iter().enumerate() {
        let masks: &mut [&mut Vec<bool>] = match field.classify(t) {
            TetClass::Inside1 => &mut [&mut in1],
            TetClass::Inside2 => &mut [&mut in2],
            TetClass::Cut => &mut [&mut in1, &mut in2, &mut on_gamma],
        };
        for mask in masks.iter_mut() {
            for &v in tet {
                mask[v] = true;
            }
        }
    }
    DofMaps {
        bulk1: DofMap::from_mask(Space::Bulk1, &in1, mesh),
        bulk2: DofMap::from_mask(Space::Bulk2, &in2, mesh),
        surface: DofMap::from_mask(Space::Surface, &on_gamma, mesh),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelset::phi_sphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const REF: [Vec3<f64>; 4] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    fn random_tet(rng: &mut ChaCha8Rng) -> [Vec3<f64>; 4] {
        loop {
            let p: [Vec3<f64>; 4] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
            if crate::scalar::tet_signed_volume(&p).abs() > 0.05 {
                return p;
            }
        }
    }

    fn random_bary(rng: &mut ChaCha8Rng) -> [f64; 4] {
        let mut b: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..1.0));
        let s: f64 = b.iter().sum();
        b.iter_mut().for_each(|c| *c /= s);
        b
    }

    #[test]
    fn basis_at_vertices() {
        for j in 0..4 {
            let (vals, _) = eval_p1(&REF, REF[j]);
            for k in 0..4 {
                assert_eq!(vals[k], if j == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let step = 1e-6;
        let x = [0.2, 0.3, 0.1];
        let (_, grads) = eval_p1(&REF, x);
        for d in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[d] += step;
            xm[d] -= step;
            let (vp, _) = eval_p1(&REF, xp);
            let (vm, _) = eval_p1(&REF, xm);
            for j in 0..4 {
                let fd = (vp[j] - vm[j]) / (2.0 * step);
                assert!((fd - grads[j][d]).abs() < 1e-8);
            }
        }
        assert_eq!(grads[1], [1.0, 0.0, 0.0]);
        assert_eq!(grads[0], [-1.0, -1.0, -1.0]);
    }

    #[test]
    fn partition_of_unity_and_linear_reproduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = [0.3, -1.2, 2.5];
        let b = 0.7;
        let u = |x: Vec3<f64>| dot(a, x) + b;
        for _ in 0..10 {
            let p = random_tet(&mut rng);
            let nodal = p.map(u);
            for _ in 0..20 {
                let bary = random_bary(&mut rng);
                let mut x = [0.0; 3];
                for k in 0..4 {
                    x = crate::scalar::add(x, crate::scalar::scale(bary[k], p[k]));
                }
                let (vals, grads) = eval_p1(&p, x);
                assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for d in 0..3 {
                    assert!(grads.iter().map(|g| g[d]).sum::<f64>().abs() < 1e-12);
                }
                let interp: f64 = (0..4).map(|k| vals[k] * nodal[k]).sum();
                assert!((interp - u(x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_dofmaps_nest() {
        let mesh = Mesh::<f64>::box_level(0);
        let field = LevelSetField::interpolate_p1(phi_sphere, &mesh).unwrap();
        let maps = build_dofmaps(&mesh, &field);
        assert!(!maps.bulk1.is_empty() && !maps.bulk2.is_empty() && !maps.surface.is_empty());
        for &g in &maps.surface.active {
            assert!(maps.bulk1.local(g).is_some());
            assert!(maps.bulk2.local(g).is_some());
        }
        assert!(maps.bulk1.dirichlet.is_empty());
        assert_eq!(maps.bulk2.dirichlet.len(), mesh.boundary_vertices.len());
        assert!(maps.surface.dirichlet.is_empty());
    }

    #[test]
    fn all_negative_field() {
        let mesh = Mesh::<f64>::box_level(0);
        let field = LevelSetField::interpolate_p1(|_| -1.0, &mesh).unwrap();
        let maps = build_dofmaps(&mesh, &field);
        assert_eq!(maps.bulk1.len(), mesh.num_vertices());
        assert!(maps.bulk2.is_empty());
        assert!(maps.surface.is_empty());
    }

    #[test]
    fn bulk_counts_against_vertex_enumeration() {
        let mesh = Mesh::<f64>::box_level(1);
        let field = LevelSetField::interpolate_p1(phi_sphere, &mesh).unwrap();
        let maps = build_dofmaps(&mesh, &field);
        // Brute force: a vertex is doubled iff some tet containing it has mixed signs.
        let mut doubled = 0;
        for v in 0..mesh.num_vertices() {
            let touches_cut = mesh
                .tets
                .iter()
                .filter(|tet| tet.contains(&v))
                .any(|tet| {
                    let vals = tet.map(|w| field.nodal_values[w]);
                    vals.iter().any(|&x| x < 0.0) && vals.iter().any(|&x| x > 0.0)
                });
            if touches_cut {
                doubled += 1;
            }
        }
        assert!(doubled > 0);
        assert_eq!(maps.bulk1.len() + maps.bulk2.len(), mesh.num_vertices() + doubled);
        assert_eq!(maps.surface.len(), doubled);
    }
}
