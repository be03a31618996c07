//! Cut-cell geometry: splitting tetrahedra along the zero level of a P1
//! level-set function into tagged sub-tetrahedra and planar interface
//! triangles.

mod quadrature;

pub use quadrature::{quad_simplex, QuadratureRule};

use crate::fespace::p1_gradients;
use crate::levelset::{LevelSetField, TetClass};
use crate::scalar::{cross, dot, lerp, norm, scale, sub, tet_signed_volume, triangle_area, Real, Vec3};

/// Sub-tetrahedra smaller than this fraction of the parent are counted as
/// degenerate. They are kept.
pub const DEGENERATE_FRACTION: f64 = 1e-14;

/// Tag of the subdomain where the level set is negative.
pub const TAG_INNER: u8 = 1;
/// Tag of the subdomain where the level set is positive.
pub const TAG_OUTER: u8 = 2;

/// Piece of a parent tetrahedron. `bary` holds the parent barycentric
/// coordinates of each vertex so parent basis functions can be evaluated
/// without inverting a map.
#[derive(Debug, Clone, Copy)]
pub struct SubTet<T> {
    pub points: [Vec3<T>; 4],
    pub bary: [[T; 4]; 4],
    pub tag: u8,
}

impl<T: Real> SubTet<T> {
    pub fn volume(&self) -> T {
        tet_signed_volume(&self.points)
    }
}

/// Planar piece of the discrete interface inside one tetrahedron, with the
/// unit normal pointing from the negative into the positive subdomain.
/// Vertices are ordered counter-clockwise around `normal`.
#[derive(Debug, Clone, Copy)]
pub struct InterfaceTriangle<T> {
    pub points: [Vec3<T>; 3],
    pub bary: [[T; 4]; 3],
    pub normal: Vec3<T>,
}

impl<T: Real> InterfaceTriangle<T> {
    pub fn area(&self) -> T {
        triangle_area(&self.points)
    }
}

#[derive(Debug, Clone, Default)]
pub struct CutDecomposition<T> {
    pub sub_tets: Vec<SubTet<T>>,
    pub interface_triangles: Vec<InterfaceTriangle<T>>,
    /// Number of sub-tetrahedra below [`DEGENERATE_FRACTION`] of the parent volume.
    pub degenerate: usize,
}

impl<T: Real> CutDecomposition<T> {
    pub fn volume(&self, tag: u8) -> T {
        self.sub_tets.iter().filter(|s| s.tag == tag).map(SubTet::volume).sum()
    }

    pub fn interface_area(&self) -> T {
        self.interface_triangles.iter().map(InterfaceTriangle::area).sum()
    }
}

fn unit_bary<T: Real>(i: usize) -> [T; 4] {
    let mut b = [T::zero(); 4];
    b[i] = T::one();
    b
}

type Node<T> = (Vec3<T>, [T; 4]);

fn push_tet<T: Real>(out: &mut CutDecomposition<T>, v: [Node<T>; 4], tag: u8, parent_volume: T) {
    let mut points = v.map(|p| p.0);
    let mut bary = v.map(|p| p.1);
    if tet_signed_volume(&points) < T::zero() {
        points.swap(2, 3);
        bary.swap(2, 3);
    }
    let sub = SubTet { points, bary, tag };
    if sub.volume() < T::lit(DEGENERATE_FRACTION) * parent_volume {
        out.degenerate += 1;
    }
    out.sub_tets.push(sub);
}

/// Prism with bottom `a`, top `b`, and `a[k]` joined to `b[k]`, as three tets
/// whose quad-face diagonals all start at `a[0]` or `a[1]`.
fn push_prism<T: Real>(out: &mut CutDecomposition<T>, a: [Node<T>; 3], b: [Node<T>; 3], tag: u8, parent_volume: T) {
    push_tet(out, [a[0], a[1], a[2], b[2]], tag, parent_volume);
    push_tet(out, [a[0], a[1], b[1], b[2]], tag, parent_volume);
    push_tet(out, [a[0], b[0], b[1], b[2]], tag, parent_volume);
}

/// Splits the tetrahedron with vertex coordinates `points`, level-set values
/// `values` (none exactly zero) and global vertex ids `ids`.
///
/// Intersection points are computed from the edge's endpoint with the smaller
/// global id, so neighbouring tetrahedra produce bit-identical points on
/// shared edges.
pub fn decompose<T: Real>(points: &[Vec3<T>; 4], values: &[T; 4], ids: &[usize; 4]) -> CutDecomposition<T> {
    let parent_volume = tet_signed_volume(points).abs();
    let mut out = CutDecomposition::default();

    let vertex = |i: usize| (points[i], unit_bary::<T>(i));
    let edge_point = |i: usize, j: usize| {
        let (lo, hi) = if ids[i] < ids[j] { (i, j) } else { (j, i) };
        let t = values[lo] / (values[lo] - values[hi]);
        let mut b = [T::zero(); 4];
        b[lo] = T::one() - t;
        b[hi] = t;
        (lerp(points[lo], points[hi], t), b)
    };
    let edge_key = |i: usize, j: usize| if ids[i] < ids[j] { (ids[i], ids[j]) } else { (ids[j], ids[i]) };

    let tag_of = |v: T| if v < T::zero() { TAG_INNER } else { TAG_OUTER };
    match TetClass::from_values(values) {
        TetClass::Inside1 | TetClass::Inside2 => {
            push_tet(&mut out, [vertex(0), vertex(1), vertex(2), vertex(3)], tag_of(values[0]), parent_volume);
            return out;
        }
        TetClass::Cut => {}
    }

    let grads = p1_gradients(points);
    let mut grad_phi = [T::zero(); 3];
    for (g, &v) in grads.iter().zip(values) {
        grad_phi = crate::scalar::add(grad_phi, scale(v, *g));
    }
    let normal = scale(T::one() / norm(grad_phi), grad_phi);
    let push_triangle = |out: &mut CutDecomposition<T>, v: [(Vec3<T>, [T; 4]); 3]| {
        let mut pts = v.map(|p| p.0);
        let mut bary = v.map(|p| p.1);
        if dot(cross(sub(pts[1], pts[0]), sub(pts[2], pts[0])), normal) < T::zero() {
            pts.swap(1, 2);
            bary.swap(1, 2);
        }
        out.interface_triangles.push(InterfaceTriangle { points: pts, bary, normal });
    };

    let mut neg: Vec<usize> = (0..4).filter(|&i| values[i] < T::zero()).collect();
    let mut pos: Vec<usize> = (0..4).filter(|&i| values[i] >= T::zero()).collect();
    neg.sort_by_key(|&i| ids[i]);
    pos.sort_by_key(|&i| ids[i]);

    if neg.len() == 1 || pos.len() == 1 {
        let (single, others) = if neg.len() == 1 { (neg[0], &pos) } else { (pos[0], &neg) };
        let cuts = [0, 1, 2].map(|k| edge_point(single, others[k]));
        push_tet(&mut out, [vertex(single), cuts[0], cuts[1], cuts[2]], tag_of(values[single]), parent_volume);
        let base = [0, 1, 2].map(|k| vertex(others[k]));
        push_prism(&mut out, base, cuts, tag_of(values[others[0]]), parent_volume);
        push_triangle(&mut out, cuts);
    } else {
        let (n0, n1, p0, p1) = (neg[0], neg[1], pos[0], pos[1]);
        let c00 = edge_point(n0, p0);
        let c01 = edge_point(n0, p1);
        let c10 = edge_point(n1, p0);
        let c11 = edge_point(n1, p1);
        push_prism(&mut out, [vertex(n0), c00, c01], [vertex(n1), c10, c11], TAG_INNER, parent_volume);
        push_prism(&mut out, [vertex(p0), c00, c10], [vertex(p1), c01, c11], TAG_OUTER, parent_volume);

        // Quad c00 -> c01 -> c11 -> c10; split along the diagonal touching the
        // intersection point of the edge with the smallest global id pair.
        let keys = [edge_key(n0, p0), edge_key(n0, p1), edge_key(n1, p1), edge_key(n1, p0)];
        let first = (0..4).min_by_key(|&k| keys[k]).unwrap_or(0);
        if first % 2 == 0 {
            push_triangle(&mut out, [c00, c01, c11]);
            push_triangle(&mut out, [c00, c11, c10]);
        } else {
            push_triangle(&mut out, [c01, c11, c10]);
            push_triangle(&mut out, [c01, c10, c00]);
        }
    }
    out
}

/// Decomposition of tetrahedron `t` of the field's mesh.
pub fn decompose_tet<T: Real>(field: &LevelSetField<'_, T>, t: usize) -> CutDecomposition<T> {
    let mesh = field.mesh;
    decompose(&mesh.tet_points(t), &field.tet_values(t), &mesh.tets[t])
}

/// Total area of the discrete interface.
pub fn interface_area<T: Real>(field: &LevelSetField<'_, T>) -> T {
    field.cut_tets().into_iter().map(|t| decompose_tet(field, t).interface_area()).sum()
}

/// Volume of the discrete subdomain with the given tag.
pub fn subdomain_volume<T: Real>(field: &LevelSetField<'_, T>, tag: u8) -> T {
    let mesh = field.mesh;
    (0..mesh.num_tets())
        .map(|t| match field.classify(t) {
            TetClass::Inside1 if tag == TAG_INNER => mesh.tet_volume(t),
            TetClass::Inside2 if tag == TAG_OUTER => mesh.tet_volume(t),
            TetClass::Cut => decompose_tet(field, t).volume(tag),
            _ => T::zero(),
        })
        .sum()
}

/// All interface triangles, in ascending parent tetrahedron order.
pub fn interface_triangles<T: Real>(field: &LevelSetField<'_, T>) -> Vec<(usize, InterfaceTriangle<T>)> {
    field
        .cut_tets()
        .into_iter()
        .flat_map(|t| decompose_tet(field, t).interface_triangles.into_iter().map(move |tri| (t, tri)))
        .collect()
}

/// Maps a rule on the reference simplex onto a physical sub-tetrahedron,
/// returning `(parent barycentric coordinates, physical point, weight)`.
pub fn sub_tet_points<'a, T: Real>(
    sub: &'a SubTet<T>,
    rule: &'a QuadratureRule<T>,
) -> impl Iterator<Item = ([T; 4], Vec3<T>, T)> + 'a {
    let jac = sub.volume() * T::lit(6.0);
    (0..rule.len()).map(move |q| {
        let w = rule.points[q];
        combine(&w, &sub.points, &sub.bary, rule.weights[q] * jac)
    })
}

/// Same as [`sub_tet_points`] for an interface triangle.
pub fn triangle_points<'a, T: Real>(
    tri: &'a InterfaceTriangle<T>,
    rule: &'a QuadratureRule<T>,
) -> impl Iterator<Item = ([T; 4], Vec3<T>, T)> + 'a {
    let jac = tri.area() * T::lit(2.0);
    (0..rule.len()).map(move |q| {
        let w = rule.points[q];
        combine(&[w[0], w[1], w[2]], &tri.points, &tri.bary, rule.weights[q] * jac)
    })
}

fn combine<T: Real, const N: usize>(
    w: &[T; N],
    points: &[Vec3<T>; N],
    bary: &[[T; 4]; N],
    weight: T,
) -> ([T; 4], Vec3<T>, T) {
    let mut b = [T::zero(); 4];
    let mut x = [T::zero(); 3];
    for k in 0..N {
        for c in 0..4 {
            b[c] += w[k] * bary[k][c];
        }
        for d in 0..3 {
            x[d] += w[k] * points[k][d];
        }
    }
    (b, x, weight)
}
