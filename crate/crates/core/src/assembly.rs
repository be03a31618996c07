//! Assembly of the unfitted bulk-interface bilinear form and load vector.
//!
//! Unknown layout: bulk vector `[Bulk1 | Bulk2]`, surface vector on the
//! Surface dofs. All quantities are in transformed variables.

use rayon::prelude::*;

use crate::cutgeom::{decompose, sub_tet_points, triangle_points, CutDecomposition, QuadratureRule};
use crate::error::{FemError, Result};
use crate::fespace::{p1_gradients, DofMaps};
use crate::levelset::LevelSetField;
use crate::linalg::{CsrMatrix, LinearOperator, TripletBuilder};
use crate::model::{ProblemData, TransformedParams};
use crate::scalar::{dot, scale, sub, Real, Vec3};

/// Quadrature degree for bilinear-form terms.
pub const FORM_DEGREE: usize = 4;
/// Quadrature degree for load vectors and error integrals.
pub const LOAD_DEGREE: usize = 5;

/// Selects which terms of the form are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Terms {
    pub bulk_diffusion: bool,
    pub bulk_convection: bool,
    pub surface_diffusion: bool,
    pub surface_convection: bool,
    pub coupling: bool,
    pub load: bool,
}

impl Terms {
    pub const ALL: Terms = Terms {
        bulk_diffusion: true,
        bulk_convection: true,
        surface_diffusion: true,
        surface_convection: true,
        coupling: true,
        load: true,
    };

    pub const NONE: Terms = Terms {
        bulk_diffusion: false,
        bulk_convection: false,
        surface_diffusion: false,
        surface_convection: false,
        coupling: false,
        load: false,
    };
}

impl Default for Terms {
    fn default() -> Self {
        Self::ALL
    }
}

/// 2x2 block system `[A_bb A_bs; A_sb A_ss] [u; v] = [rhs_b; rhs_s]`.
#[derive(Debug, Clone)]
pub struct SystemBlocks<T> {
    pub a_bb: CsrMatrix<T>,
    pub a_bs: CsrMatrix<T>,
    pub a_sb: CsrMatrix<T>,
    pub a_ss: CsrMatrix<T>,
    pub rhs_b: Vec<T>,
    pub rhs_s: Vec<T>,
    pub dofs: DofMaps,
    /// Sub-tetrahedra flagged degenerate during decomposition.
    pub degenerate_cuts: usize,
}

impl<T: Real> SystemBlocks<T> {
    pub fn num_bulk(&self) -> usize {
        self.a_bb.nrows
    }

    pub fn num_surface(&self) -> usize {
        self.a_ss.nrows
    }

    /// Concatenated right-hand side `[rhs_b; rhs_s]`.
    pub fn rhs(&self) -> Vec<T> {
        self.rhs_b.iter().chain(&self.rhs_s).copied().collect()
    }
}

impl<T: Real> LinearOperator<T> for SystemBlocks<T> {
    fn dim(&self) -> usize {
        self.num_bulk() + self.num_surface()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let nb = self.num_bulk();
        let (xb, xs) = x.split_at(nb);
        let (yb, ys) = y.split_at_mut(nb);
        self.a_bb.matvec(xb, yb);
        self.a_bs.matvec_add(xs, yb);
        self.a_sb.matvec(xb, ys);
        self.a_ss.matvec_add(xs, ys);
    }
}

#[derive(Debug, Default)]
struct Local<T> {
    bb: Vec<(usize, usize, T)>,
    bs: Vec<(usize, usize, T)>,
    sb: Vec<(usize, usize, T)>,
    ss: Vec<(usize, usize, T)>,
    fb: Vec<(usize, T)>,
    fs: Vec<(usize, T)>,
    degenerate: usize,
}

struct Rules<T> {
    form_tet: QuadratureRule<T>,
    form_tri: QuadratureRule<T>,
    load_tet: QuadratureRule<T>,
    load_tri: QuadratureRule<T>,
}

/// Assembles every term of the form and the load vector.
pub fn assemble<T: Real, D: ProblemData<T> + ?Sized>(
    field: &LevelSetField<'_, T>,
    dofs: &DofMaps,
    params: &TransformedParams<T>,
    data: &D,
) -> Result<SystemBlocks<T>> {
    assemble_terms(field, dofs, params, data, Terms::ALL)
}

/// Assembles the selected terms. Element integrals run in parallel on the
/// current rayon pool; contributions are accumulated in ascending tet order,
/// so the result is independent of the thread count.
pub fn assemble_terms<T: Real, D: ProblemData<T> + ?Sized>(
    field: &LevelSetField<'_, T>,
    dofs: &DofMaps,
    params: &TransformedParams<T>,
    data: &D,
    terms: Terms,
) -> Result<SystemBlocks<T>> {
    if dofs.surface.is_empty() {
        return Err(FemError::EmptyInterface);
    }
    let mesh = field.mesh;
    let rules = Rules {
        form_tet: QuadratureRule::tetrahedron(FORM_DEGREE),
        form_tri: QuadratureRule::triangle(FORM_DEGREE),
        load_tet: QuadratureRule::tetrahedron(LOAD_DEGREE),
        load_tri: QuadratureRule::triangle(LOAD_DEGREE),
    };

    let locals: Vec<Local<T>> = (0..mesh.num_tets())
        .into_par_iter()
        .map(|t| element(field, dofs, params, data, terms, &rules, t))
        .collect();

    let nb = dofs.num_bulk();
    let ns = dofs.surface.len();
    let mut bb = TripletBuilder::new(nb, nb);
    let mut bs = TripletBuilder::new(nb, ns);
    let mut sb = TripletBuilder::new(ns, nb);
    let mut ss = TripletBuilder::new(ns, ns);
    let mut rhs_b = vec![T::zero(); nb];
    let mut rhs_s = vec![T::zero(); ns];
    let mut degenerate = 0;
    for (t, local) in locals.into_iter().enumerate() {
        let finite = local.bb.iter().chain(&local.bs).chain(&local.sb).chain(&local.ss).all(|e| e.2.is_finite())
            && local.fb.iter().chain(&local.fs).all(|e| e.1.is_finite());
        if !finite {
            return Err(FemError::NonFiniteEntry { tet: t });
        }
        for (r, c, v) in local.bb {
            bb.push(r, c, v);
        }
        for (r, c, v) in local.bs {
            bs.push(r, c, v);
        }
        for (r, c, v) in local.sb {
            sb.push(r, c, v);
        }
        for (r, c, v) in local.ss {
            ss.push(r, c, v);
        }
        for (r, v) in local.fb {
            rhs_b[r] += v;
        }
        for (r, v) in local.fs {
            rhs_s[r] += v;
        }
        degenerate += local.degenerate;
    }

    Ok(SystemBlocks {
        a_bb: bb.build(),
        a_bs: bs.build(),
        a_sb: sb.build(),
        a_ss: ss.build(),
        rhs_b,
        rhs_s,
        dofs: dofs.clone(),
        degenerate_cuts: degenerate,
    })
}

fn element<T: Real, D: ProblemData<T> + ?Sized>(
    field: &LevelSetField<'_, T>,
    dofs: &DofMaps,
    params: &TransformedParams<T>,
    data: &D,
    terms: Terms,
    rules: &Rules<T>,
    t: usize,
) -> Local<T> {
    let mesh = field.mesh;
    let tet = &mesh.tets[t];
    let points = mesh.tet_points(t);
    let grads = p1_gradients(&points);
    let decomposition: CutDecomposition<T> = decompose(&points, &field.tet_values(t), tet);
    let mut local = Local { degenerate: decomposition.degenerate, ..Local::default() };
    let half = T::lit(0.5);

    for tag in [1u8, 2] {
        let pieces: Vec<_> = decomposition.sub_tets.iter().filter(|s| s.tag == tag).collect();
        if pieces.is_empty() {
            continue;
        }
        let offset = dofs.bulk_offset(tag);
        let idx = dofs.bulk(tag).tet_dofs(tet).map(|l| l + offset);
        let nu = params.nu(tag);
        let mut a = [[T::zero(); 4]; 4];
        let mut f = [T::zero(); 4];
        for sub in pieces {
            if terms.bulk_diffusion {
                let vol = sub.volume();
                for j in 0..4 {
                    for k in 0..4 {
                        a[j][k] += nu * vol * dot(grads[j], grads[k]);
                    }
                }
            }
            if terms.bulk_convection {
                for (b, x, w) in sub_tet_points(sub, &rules.form_tet) {
                    let wv = params.bulk_velocity(tag, x);
                    let wg = grads.map(|g| dot(wv, g));
                    for j in 0..4 {
                        for k in 0..4 {
                            a[j][k] += w * half * (wg[k] * b[j] - wg[j] * b[k]);
                        }
                    }
                }
            }
            if terms.load {
                for (b, x, w) in sub_tet_points(sub, &rules.load_tet) {
                    let fx = data.f(tag, x);
                    for j in 0..4 {
                        f[j] += w * fx * b[j];
                    }
                }
            }
        }
        push_block(&mut local.bb, &idx, &idx, &a);
        if terms.load {
            local.fb.extend((0..4).map(|j| (idx[j], f[j])));
        }
    }

    if decomposition.interface_triangles.is_empty() {
        return local;
    }

    let sidx = dofs.surface.tet_dofs(tet);
    let mut s = [[T::zero(); 4]; 4];
    let mut mass = [[T::zero(); 4]; 4];
    let mut g = [T::zero(); 4];
    for tri in &decomposition.interface_triangles {
        let n = tri.normal;
        let pg: [Vec3<T>; 4] = grads.map(|gr| sub(gr, scale(dot(n, gr), n)));
        if terms.surface_diffusion {
            let area = tri.area();
            for j in 0..4 {
                for k in 0..4 {
                    s[j][k] += params.nu_gamma * area * dot(pg[j], pg[k]);
                }
            }
        }
        if terms.surface_convection || terms.coupling {
            for (b, x, w) in triangle_points(tri, &rules.form_tri) {
                let wg = if terms.surface_convection {
                    let wv = params.surface_velocity(x);
                    pg.map(|p| dot(wv, p))
                } else {
                    [T::zero(); 4]
                };
                for j in 0..4 {
                    for k in 0..4 {
                        s[j][k] += w * half * (wg[k] * b[j] - wg[j] * b[k]);
                        mass[j][k] += w * b[j] * b[k];
                    }
                }
            }
        }
        if terms.load {
            for (b, x, w) in triangle_points(tri, &rules.load_tri) {
                let gx = data.g(x);
                for j in 0..4 {
                    g[j] += w * gx * b[j];
                }
            }
        }
    }

    if terms.coupling {
        // sum_i (u_i - q_i v, eta_i - K zeta) on Gamma_h
        let k = params.k;
        for tag in [1u8, 2] {
            let offset = dofs.bulk_offset(tag);
            let bidx = dofs.bulk(tag).tet_dofs(tet).map(|l| l + offset);
            let q = params.q(tag);
            push_block(&mut local.bb, &bidx, &bidx, &mass);
            push_block(&mut local.bs, &bidx, &sidx, &mass.map(|row| row.map(|m| -q * m)));
            push_block(&mut local.sb, &sidx, &bidx, &mass.map(|row| row.map(|m| -k * m)));
        }
        let kq = k * (params.q1 + params.q2);
        for j in 0..4 {
            for c in 0..4 {
                s[j][c] += kq * mass[j][c];
            }
        }
    }
    push_block(&mut local.ss, &sidx, &sidx, &s);
    if terms.load {
        local.fs.extend((0..4).map(|j| (sidx[j], g[j])));
    }
    local
}

fn push_block<T: Real>(out: &mut Vec<(usize, usize, T)>, rows: &[usize; 4], cols: &[usize; 4], a: &[[T; 4]; 4]) {
    for j in 0..4 {
        for k in 0..4 {
            out.push((rows[j], cols[k], a[j][k]));
        }
    }
}

/// Nodal Dirichlet values on the bulk index space, in transformed variables;
/// `None` for unconstrained dofs.
pub fn dirichlet_values<T: Real, D: ProblemData<T> + ?Sized>(
    field: &LevelSetField<'_, T>,
    dofs: &DofMaps,
    params: &TransformedParams<T>,
    data: &D,
) -> Vec<Option<T>> {
    let mut values = vec![None; dofs.num_bulk()];
    for tag in [1u8, 2] {
        let map = dofs.bulk(tag);
        let offset = dofs.bulk_offset(tag);
        for &l in &map.dirichlet {
            let x = field.mesh.vertices[map.active[l]];
            values[offset + l] = Some(params.bulk_scale(tag) * data.dirichlet(tag, x));
        }
    }
    values
}

/// Imposes Dirichlet values by row replacement and column elimination: each
/// constrained row becomes an identity row with the value as right-hand
/// side; constrained columns are moved to the right-hand side of every other
/// row, surface rows included.
pub fn apply_dirichlet<T: Real>(mut blocks: SystemBlocks<T>, values: &[Option<T>]) -> SystemBlocks<T> {
    assert_eq!(values.len(), blocks.num_bulk());
    eliminate_columns(&mut blocks.a_bb, &mut blocks.rhs_b, values, true);
    eliminate_columns(&mut blocks.a_sb, &mut blocks.rhs_s, values, false);
    for (i, v) in values.iter().enumerate() {
        if let Some(val) = *v {
            let (s, e) = (blocks.a_bb.row_ptr[i], blocks.a_bb.row_ptr[i + 1]);
            for k in s..e {
                blocks.a_bb.values[k] = if blocks.a_bb.col_idx[k] == i { T::one() } else { T::zero() };
            }
            assert!(blocks.a_bb.col_idx[s..e].contains(&i), "constrained row without diagonal entry");
            let (s, e) = (blocks.a_bs.row_ptr[i], blocks.a_bs.row_ptr[i + 1]);
            blocks.a_bs.values[s..e].iter_mut().for_each(|v| *v = T::zero());
            blocks.rhs_b[i] = val;
        }
    }
    blocks
}

fn eliminate_columns<T: Real>(a: &mut CsrMatrix<T>, rhs: &mut [T], values: &[Option<T>], square: bool) {
    for i in 0..a.nrows {
        if square && values[i].is_some() {
            continue;
        }
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            if let Some(val) = values[a.col_idx[k]] {
                rhs[i] -= a.values[k] * val;
                a.values[k] = T::zero();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::build_dofmaps;
    use crate::levelset::phi_sphere;
    use crate::linalg::{gcr_solve, BlockSgsPreconditioner, GcrOptions};
    use crate::mesh::Mesh;
    use crate::model::{ManufacturedSolution, ProblemParams, Velocity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Zero;
    impl ProblemData<f64> for Zero {
        fn f(&self, _: u8, _: Vec3<f64>) -> f64 {
            0.0
        }
        fn g(&self, _: Vec3<f64>) -> f64 {
            0.0
        }
        fn dirichlet(&self, _: u8, _: Vec3<f64>) -> f64 {
            0.0
        }
    }

    fn setup(level: u32) -> Mesh<f64> {
        Mesh::box_level(level)
    }

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn quad_form(a: &CsrMatrix<f64>, x: &[f64]) -> (f64, f64) {
        let mut y = vec![0.0; a.nrows];
        a.matvec(x, &mut y);
        (crate::linalg::dot(x, &y), crate::linalg::norm2(&y))
    }

    #[test]
    fn empty_interface_rejected() {
        let mesh = setup(0);
        let field = LevelSetField::interpolate_p1(|_| -1.0, &mesh).unwrap();
        let dofs = build_dofmaps(&mesh, &field);
        let p = ProblemParams::convergence_study().transform().unwrap();
        assert!(matches!(assemble(&field, &dofs, &p, &Zero), Err(FemError::EmptyInterface)));
    }

    #[test]
    fn laplace_beltrami_annihilates_constants() {
        let mesh = setup(1);
        let field = LevelSetField::interpolate_p1(phi_sphere, &mesh).unwrap();
        let dofs = build_dofmaps(&mesh, &field);
        let mut params = ProblemParams::convergence_study();
        params.velocity = Velocity::Zero;
        params.k1d = 0.0;
        params.k2d = 0.0;
        let terms = Terms { surface_diffusion: true, ..Terms::NONE };
        let blocks = assemble_terms(&field, &dofs, &params.transform().unwrap(), &Zero, terms).unwrap();
        let ones = vec![1.0; blocks.num_surface()];
        let mut y = vec![0.0; ones.len()];
        blocks.a_ss.matvec(&ones, &mut y);
        assert!(y.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn convection_blocks_are_skew() {
        let mesh = setup(1);
        let field = LevelSetField::interpolate_p1(phi_sphere, &mesh).unwrap();
        let dofs = build_dofmaps(&mesh, &field);
        let params = ProblemParams::convergence_study().transform().unwrap();
        let terms = Terms { bulk_convection: true, surface_convection: true, ..Terms::NONE };
        let blocks = assemble_terms(&field, &dofs, &params, &Zero, terms).unwrap();
        assert!(blocks.a_bb.max_abs() > 0.0 && blocks.a_ss.max_abs() > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            for a in [&blocks.a_bb, &blocks.a_ss] {
                let x = random_vec(a.nrows, &mut rng);
                let (xcx, cx) = quad_form(a, &x);
                assert!(xcx.abs() <= 1e-10 * crate::linalg::norm2(&x) * cx);
            }
        }
    }

    #[test]
    fn coupling_blocks_match_interface_mass() {
        let mesh = setup(1);
        let field = LevelSetField::interpolate_p1(phi_sphere, &mesh).unwrap();
        let dofs = build_dofmaps(&mesh, &field);
        let params = ProblemParams::convergence_study().transform().unwrap();
        let terms = Terms { coupling: true, ..Terms::NONE };
        let blocks = assemble_terms(&field, &dofs, &params, &Zero, terms).unwrap();

        // Independent interface mass matrix in surface numbering using the
        // closed form int lambda_j lambda_k = area (1 + delta_jk) / 12 for
        // barycentric coordinates of the triangle itself; here the parent
        // basis is linear on the triangle, so integrate by its vertex values.
        let ns = dofs.surface.len();
        let mut mass = vec![vec![0.0; ns]; ns];
        for (t, tri) in crate::cutgeom::interface_triangles(&field) {
            let sidx = dofs.surface.tet_dofs(&mesh.tets[t]);
            for j in 0..4 {
                for k in 0..4 {
                    let mut m = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            let w = if a == b { 2.0 } else { 1.0 };
                            m += w * tri.bary[a][j] * tri.bary[b][k];
                        }
                    }
                    mass[sidx[j]][sidx[k]] += m * tri.area() / 12.0;
                }
            }
        }
        for tag in [1u8, 2] {
            let bmap = dofs.bulk(tag);
            let off = dofs.bulk_offset(tag);
            for (s_row, &g_row) in dofs.surface.active.iter().enumerate() {
                let b_row = off + bmap.local(g_row).unwrap();
                for (s_col, &g_col) in dofs.surface.active.iter().enumerate() {
                    let b_col = off + bmap.local(g_col).unwrap();
                    let m = mass[s_row][s_col];
                    assert!((blocks.a_bs.get(b_row, s_col) + params.q(tag) * m).abs() < 1e-13);
                    assert!((blocks.a_sb.get(s_row, b_col) + params.k * m).abs() < 1e-13);
                    assert!((blocks.a_bb.get(b_row, b_col) - m).abs() < 1e-13);
                }
            }
        }
        // constants: 1^T A_ss 1 = K (q1 + q2) |Gamma_h|
        let ones = vec![1.0; ns];
        let (val, _) = quad_form(&blocks.a_ss, &ones);
        let area = crate::cutgeom::interface_area(&field);
        assert!((val - params.k * (params.q1 + params.q2) * area).abs() < 1e-10);
    }

    #[test]
    fn symmetric_without_convection_when_q_matches_k() {
        let mesh = setup(1);
        let field = LevelSetField::interpolate_p1(phi_sphere, &mesh).unwrap();
        let dofs = build_dofmaps(&mesh, &field);
        let mut params = ProblemParams::convergence_study();
        params.velocity = Velocity::Zero;
        params.k = 0.5;
        // q1 = q2 = K = 0.5
        params.k1d = 0.5 * (params.k1a + params.k2a);
        params.k2d = params.k1d;
        let tp = params.transform().unwrap();
        let blocks = assemble(&field, &dofs, &tp, &Zero).unwrap();
        for a in [&blocks.a_bb, &blocks.a_ss] {
            let diff = a.add_scaled(-1.0, &a.transpose());
            assert!(diff.max_abs() <= 1e-10);
        }
        let diff = blocks.a_bs.add_scaled(-1.0, &blocks.a_sb.transpose());
        assert!(diff.max_abs() <= 1e-10);
    }

    #[test]
    fn assembly_is_thread_count_independent() {
        let mesh = setup(1);
        let field = LevelSetField::interpolate_p1(phi_sphere, &mesh).unwrap();
        let dofs = build_dofmaps(&mesh, &field);
        let params = ProblemParams::convergence_study();
        let data = ManufacturedSolution::new(params);
        let tp = params.transform().unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| assemble(&field, &dofs, &tp, &data).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.a_bb, b.a_bb);
        assert_eq!(a.a_ss, b.a_ss);
        assert_eq!(a.rhs_b, b.rhs_b);
        assert!(a.a_bb.is_well_formed() && a.a_bs.is_well_formed() && a.a_sb.is_well_formed());
    }

    #[test]
    fn dirichlet_rows_and_solution() {
        let mesh = setup(0);
        let field = LevelSetField::interpolate_p1(phi_sphere, &mesh).unwrap();
        let dofs = build_dofmaps(&mesh, &field);
        let params = ProblemParams::convergence_study();
        let data = ManufacturedSolution::new(params);
        let tp = params.transform().unwrap();
        let raw = assemble(&field, &dofs, &tp, &data).unwrap();

        let values = dirichlet_values(&field, &dofs, &tp, &data);
        let zero_values: Vec<Option<f64>> = values.iter().map(|v| v.map(|_| 0.0)).collect();
        let homog = apply_dirichlet(raw.clone(), &zero_values);
        for (i, v) in zero_values.iter().enumerate() {
            if v.is_none() {
                assert_eq!(homog.rhs_b[i], raw.rhs_b[i]);
            } else {
                assert_eq!(homog.rhs_b[i], 0.0);
            }
        }

        assert_eq!(values.iter().filter(|v| v.is_some()).count(), mesh.boundary_vertices.len());
        let sys = apply_dirichlet(raw, &values);
        let pre = BlockSgsPreconditioner::new(&sys.a_bb, &sys.a_ss);
        let (x, rep) = gcr_solve(&sys, &sys.rhs(), &pre, &GcrOptions::default()).unwrap();
        assert!(rep.converged);
        for (i, v) in values.iter().enumerate() {
            if let Some(val) = v {
                assert!((x[i] - val).abs() <= 1e-9 * val.abs().max(1.0));
            }
        }
    }
}
