//! Discretization errors, derived diagnostics and report output.

mod output;

pub use output::{write_csv, write_interface_vtk, write_bulk_vtk, CSV_HEADER};

use rayon::prelude::*;

use crate::assembly::LOAD_DEGREE;
use crate::cutgeom::{decompose_tet, sub_tet_points, triangle_points, QuadratureRule};
use crate::error::{FemError, Result};
use crate::fespace::{p1_gradients, DofMaps};
use crate::levelset::LevelSetField;
use crate::model::{ExactSolution, TransformedParams};
use crate::scalar::{dot, scale, sub, Real, Vec3};

/// Nodal coefficients of the discrete solution in original variables,
/// indexed by the local dofs of each trace space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution<T> {
    pub u1: Vec<T>,
    pub u2: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Real> DiscreteSolution<T> {
    /// Splits the solver vector `[Bulk1 | Bulk2 | Surface]` and undoes the
    /// variable transformation.
    pub fn from_transformed(x: &[T], dofs: &DofMaps, params: &TransformedParams<T>) -> Self {
        let (n1, n2) = (dofs.bulk1.len(), dofs.bulk2.len());
        let s1 = params.bulk_scale(1);
        let s2 = params.bulk_scale(2);
        Self {
            u1: x[..n1].iter().map(|&c| c / s1).collect(),
            u2: x[n1..n1 + n2].iter().map(|&c| c / s2).collect(),
            v: x[n1 + n2..].iter().map(|&c| c / params.surface_scale).collect(),
        }
    }

    /// Nodal interpolant of an exact solution.
    pub fn interpolate<E: ExactSolution<T> + ?Sized>(exact: &E, field: &LevelSetField<'_, T>, dofs: &DofMaps) -> Self {
        let at = |g: usize| field.mesh.vertices[g];
        Self {
            u1: dofs.bulk1.active.iter().map(|&g| exact.u(1, at(g))).collect(),
            u2: dofs.bulk2.active.iter().map(|&g| exact.u(2, at(g))).collect(),
            v: dofs.surface.active.iter().map(|&g| exact.v(at(g))).collect(),
        }
    }

    pub fn bulk(&self, tag: u8) -> &[T] {
        if tag == 1 {
            &self.u1
        } else {
            &self.u2
        }
    }

    /// `alpha * self`
    pub fn scaled(&self, alpha: T) -> Self {
        let s = |v: &Vec<T>| v.iter().map(|&c| alpha * c).collect();
        Self { u1: s(&self.u1), u2: s(&self.u2), v: s(&self.v) }
    }
}

/// Errors on one mesh: bulk over `Omega_1h` and `Omega_2h`, surface over `Gamma_h`.
/// H1 values are full norms (L2 part included); the surface one uses
/// tangential gradients only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LevelErrors {
    pub l2_bulk: f64,
    pub h1_bulk: f64,
    pub l2_surf: f64,
    pub h1_surf: f64,
}

impl LevelErrors {
    pub fn as_array(&self) -> [f64; 4] {
        [self.l2_bulk, self.h1_bulk, self.l2_surf, self.h1_surf]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub level: u32,
    pub h: f64,
    pub errors: LevelErrors,
    pub gcr_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub rows: Vec<ReportRow>,
}

impl ErrorReport {
    /// Orders between row `i - 1` and row `i`, in the `LevelErrors` field order.
    pub fn orders(&self, i: usize) -> Option<[f64; 4]> {
        if i == 0 || i >= self.rows.len() {
            return None;
        }
        let c = self.rows[i - 1].errors.as_array();
        let f = self.rows[i].errors.as_array();
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = convergence_order(c[k], f[k]).ok()?;
        }
        Some(out)
    }
}

/// `log2(e_coarse / e_fine)`, the observed order when `h` halves.
pub fn convergence_order(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0 && e_fine > 0.0) {
        return Err(FemError::NonPositiveError { coarse: e_coarse, fine: e_fine });
    }
    Ok((e_coarse / e_fine).log2())
}

fn nodal<T: Real>(coeffs: &[T], idx: &[usize; 4]) -> [T; 4] {
    idx.map(|l| coeffs[l])
}

fn combine<T: Real>(b: &[T; 4], c: &[T; 4]) -> T {
    (0..4).map(|k| b[k] * c[k]).sum()
}

fn gradient<T: Real>(grads: &[Vec3<T>; 4], c: &[T; 4]) -> Vec3<T> {
    let mut g = [T::zero(); 3];
    for k in 0..4 {
        for d in 0..3 {
            g[d] += c[k] * grads[k][d];
        }
    }
    g
}

fn tangential<T: Real>(n: Vec3<T>, g: Vec3<T>) -> Vec3<T> {
    sub(g, scale(dot(n, g), n))
}

/// L2 and H1 errors against `exact`, integrated over the discrete domains
/// with the degree-5 rules.
pub fn compute_errors<T: Real, E: ExactSolution<T> + ?Sized>(
    field: &LevelSetField<'_, T>,
    dofs: &DofMaps,
    sol: &DiscreteSolution<T>,
    exact: &E,
) -> LevelErrors {
    let mesh = field.mesh;
    let tet_rule: QuadratureRule<T> = QuadratureRule::tetrahedron(LOAD_DEGREE);
    let tri_rule: QuadratureRule<T> = QuadratureRule::triangle(LOAD_DEGREE);
    let partial: Vec<[T; 4]> = (0..mesh.num_tets())
        .into_par_iter()
        .map(|t| {
            let tet = &mesh.tets[t];
            let grads = p1_gradients(&mesh.tet_points(t));
            let d = decompose_tet(field, t);
            let mut acc = [T::zero(); 4];
            for sub_tet in &d.sub_tets {
                let c = nodal(sol.bulk(sub_tet.tag), &dofs.bulk(sub_tet.tag).tet_dofs(tet));
                let gh = gradient(&grads, &c);
                for (b, x, w) in sub_tet_points(sub_tet, &tet_rule) {
                    let e = exact.u(sub_tet.tag, x) - combine(&b, &c);
                    let ge = sub(exact.grad_u(sub_tet.tag, x), gh);
                    acc[0] += w * e * e;
                    acc[1] += w * dot(ge, ge);
                }
            }
            if !d.interface_triangles.is_empty() {
                let c = nodal(&sol.v, &dofs.surface.tet_dofs(tet));
                let gh = gradient(&grads, &c);
                for tri in &d.interface_triangles {
                    let pgh = tangential(tri.normal, gh);
                    for (b, x, w) in triangle_points(tri, &tri_rule) {
                        let e = exact.v(x) - combine(&b, &c);
                        let ge = sub(tangential(tri.normal, exact.grad_v(x)), pgh);
                        acc[2] += w * e * e;
                        acc[3] += w * dot(ge, ge);
                    }
                }
            }
            acc
        })
        .collect();
    let mut sum = [T::zero(); 4];
    for p in partial {
        for k in 0..4 {
            sum[k] += p[k];
        }
    }
    LevelErrors {
        l2_bulk: sum[0].sqrt().as_f64(),
        h1_bulk: (sum[0] + sum[1]).sqrt().as_f64(),
        l2_surf: sum[2].sqrt().as_f64(),
        h1_surf: (sum[2] + sum[3]).sqrt().as_f64(),
    }
}

/// `|Omega_{tag,h}|^{-1} int_{Omega_{tag,h}} u_{tag,h}`.
pub fn mean_bulk_concentration<T: Real>(
    field: &LevelSetField<'_, T>,
    dofs: &DofMaps,
    sol: &DiscreteSolution<T>,
    tag: u8,
) -> Result<T> {
    let mesh = field.mesh;
    let mut volume = T::zero();
    let mut integral = T::zero();
    let map = dofs.bulk(tag);
    let coeffs = sol.bulk(tag);
    for t in 0..mesh.num_tets() {
        let d = decompose_tet(field, t);
        for sub_tet in d.sub_tets.iter().filter(|s| s.tag == tag) {
            let c = nodal(coeffs, &map.tet_dofs(&mesh.tets[t]));
            let vol = sub_tet.volume();
            // P1 mean over a sub-tet is the average of its vertex values.
            let mean = sub_tet.bary.iter().map(|b| combine(b, &c)).sum::<T>() / T::lit(4.0);
            volume += vol;
            integral += vol * mean;
        }
    }
    if volume == T::zero() {
        return Err(FemError::EmptySubdomain { tag });
    }
    Ok(integral / volume)
}

/// `int_{Gamma_h} v_h`.
pub fn surface_integral<T: Real>(field: &LevelSetField<'_, T>, dofs: &DofMaps, sol: &DiscreteSolution<T>) -> T {
    let mesh = field.mesh;
    let mut total = T::zero();
    for t in field.cut_tets() {
        let c = nodal(&sol.v, &dofs.surface.tet_dofs(&mesh.tets[t]));
        for tri in decompose_tet(field, t).interface_triangles {
            let mean = tri.bary.iter().map(|b| combine(b, &c)).sum::<T>() / T::lit(3.0);
            total += tri.area() * mean;
        }
    }
    total
}
