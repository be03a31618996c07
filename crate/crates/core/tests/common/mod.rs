//! Independent oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tracefem::cutgeom::InterfaceTriangle;
use tracefem::Vec3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense Gaussian elimination with partial pivoting.
pub fn lu_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Diagonally dominated random nonsymmetric matrix.
pub fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| rng.gen_range(-1.0..1.0) + if i == j { 2.0 * n as f64 / 5.0 } else { 0.0 }).collect())
        .collect()
}

pub fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_sphere_point(rng: &mut ChaCha8Rng) -> Vec3<f64> {
    loop {
        let x: Vec3<f64> = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r > 0.1 && r <= 1.0 {
            return x.map(|c| c / r);
        }
    }
}

/// Number of triangle edges not shared by exactly two triangles, with
/// points identified by their exact bit patterns.
pub fn open_edges(tris: &[(usize, InterfaceTriangle<f64>)]) -> usize {
    let key = |p: &Vec3<f64>| p.map(f64::to_bits);
    let mut count: HashMap<([u64; 3], [u64; 3]), usize> = HashMap::new();
    for (_, t) in tris {
        for k in 0..3 {
            let (a, b) = (key(&t.points[k]), key(&t.points[(k + 1) % 3]));
            *count.entry(if a < b { (a, b) } else { (b, a) }).or_default() += 1;
        }
    }
    count.values().filter(|&&c| c != 2).count()
}

/// Second-order central-difference Laplacian and gradient.
pub fn fd_laplacian_gradient(f: impl Fn(Vec3<f64>) -> f64, x: Vec3<f64>, h: f64) -> (f64, Vec3<f64>) {
    let f0 = f(x);
    let mut lap = 0.0;
    let mut grad = [0.0; 3];
    for d in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[d] += h;
        xm[d] -= h;
        let (fp, fm) = (f(xp), f(xm));
        lap += (fp - 2.0 * f0 + fm) / (h * h);
        grad[d] = (fp - fm) / (2.0 * h);
    }
    (lap, grad)
}
