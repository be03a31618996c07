#![allow(clippy::excessive_precision)]

//! Positive-weight quadrature on the reference triangle and tetrahedron.

use crate::error::{FemError, Result};
use crate::scalar::{Real, Vec3};

/// Quadrature rule in barycentric coordinates. For triangles the fourth
/// coordinate is zero. Weights sum to the reference measure (1/2 or 1/6).
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    pub dim: usize,
    pub points: Vec<[T; 4]>,
    pub weights: Vec<T>,
    pub exactness_degree: usize,
}

/// Rule exact to `degree` on the reference `dim`-simplex, `dim` in {2, 3},
/// `degree` in 1..=5.
pub fn quad_simplex<T: Real>(dim: usize, degree: usize) -> Result<QuadratureRule<T>> {
    match (dim, degree) {
        (2, 1..=5) => Ok(QuadratureRule::triangle(degree)),
        (3, 1..=5) => Ok(QuadratureRule::tetrahedron(degree)),
        _ => Err(FemError::UnsupportedQuadrature { dim, degree }),
    }
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn reference_measure(&self) -> T {
        match self.dim {
            2 => T::lit(0.5),
            _ => T::one() / T::lit(6.0),
        }
    }

    /// Point `q` on the reference simplex (origin plus unit vectors).
    pub fn reference_point(&self, q: usize) -> Vec3<T> {
        let b = self.points[q];
        [b[1], b[2], b[3]]
    }

    /// Panics if `degree` is outside 1..=5; use [`quad_simplex`] for a checked call.
    pub fn triangle(degree: usize) -> Self {
        let l = T::lit;
        let mut rule = Self { dim: 2, points: Vec::new(), weights: Vec::new(), exactness_degree: degree };
        match degree {
            1 => {
                let c = T::one() / l(3.0);
                rule.push_tri(c, c, l(0.5));
            }
            2 => {
                let w = T::one() / l(6.0);
                let a = T::one() / l(6.0);
                rule.push_tri_orbit(a, w);
            }
            3 | 4 => {
                rule.push_tri_orbit(l(0.445_948_490_915_964_886_318_329_253_883), l(0.223_381_589_678_011_465_944_827_6) * l(0.5));
                rule.push_tri_orbit(l(0.091_576_213_509_770_743_459_571_463_402), l(0.109_951_743_655_321_867_666_657_7) * l(0.5));
                rule.exactness_degree = 4;
            }
            5 => {
                let s15 = l(15.0).sqrt();
                let c = T::one() / l(3.0);
                rule.push_tri(c, c, l(0.225) * l(0.5));
                rule.push_tri_orbit((l(6.0) - s15) / l(21.0), (l(155.0) - s15) / l(1200.0) * l(0.5));
                rule.push_tri_orbit((l(6.0) + s15) / l(21.0), (l(155.0) + s15) / l(1200.0) * l(0.5));
            }
            _ => panic!("no triangle rule of degree {degree}"),
        }
        rule
    }

    /// Panics if `degree` is outside 1..=5; use [`quad_simplex`] for a checked call.
    pub fn tetrahedron(degree: usize) -> Self {
        let l = T::lit;
        let sixth = T::one() / l(6.0);
        let mut rule = Self { dim: 3, points: Vec::new(), weights: Vec::new(), exactness_degree: degree };
        match degree {
            1 => {
                let q = l(0.25);
                rule.points.push([q; 4]);
                rule.weights.push(sixth);
            }
            2 => {
                let s5 = l(5.0).sqrt();
                rule.push_tet_vertex_orbit((l(5.0) - s5) / l(20.0), sixth / l(4.0));
            }
            3..=5 => {
                // 14-point degree-5 rule.
                rule.push_tet_vertex_orbit(l(0.310_885_919_263_300_609_8), l(0.112_687_925_718_015_850_8) * sixth);
                rule.push_tet_vertex_orbit(l(0.092_735_250_310_891_226_4), l(0.073_493_043_116_361_949_55) * sixth);
                let b = l(0.045_503_704_125_649_649_49);
                let w = l(0.042_546_020_777_081_466_44) * sixth;
                let h = l(0.5) - b;
                for i in 0..4 {
                    for j in i + 1..4 {
                        let mut p = [h; 4];
                        p[i] = b;
                        p[j] = b;
                        rule.points.push(p);
                        rule.weights.push(w);
                    }
                }
                rule.exactness_degree = 5;
            }
            _ => panic!("no tetrahedron rule of degree {degree}"),
        }
        rule
    }

    fn push_tri(&mut self, a: T, b: T, w: T) {
        self.points.push([T::one() - a - b, a, b, T::zero()]);
        self.weights.push(w);
    }

    /// Three points `(a, a, 1-2a)` and permutations.
    fn push_tri_orbit(&mut self, a: T, w: T) {
        let c = T::one() - a - a;
        for p in [[c, a, a], [a, c, a], [a, a, c]] {
            self.points.push([p[0], p[1], p[2], T::zero()]);
            self.weights.push(w);
        }
    }

    /// Four points `(a, a, a, 1-3a)` and permutations.
    fn push_tet_vertex_orbit(&mut self, a: T, w: T) {
        let c = T::one() - a - a - a;
        for i in 0..4 {
            let mut p = [a; 4];
            p[i] = c;
            self.points.push(p);
            self.weights.push(w);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Exact integral of x^a y^b z^c (z only for tets) over the reference simplex.
    fn monomial(dim: usize, e: [usize; 3]) -> f64 {
        factorial(e[0]) * factorial(e[1]) * factorial(e[2]) / factorial(e[0] + e[1] + e[2] + dim)
    }

    fn max_monomial_error(rule: &QuadratureRule<f64>, degree: usize) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..=degree {
            for b in 0..=degree - a {
                let cmax = if rule.dim == 3 { degree - a - b } else { 0 };
                for c in 0..=cmax {
                    let approx: f64 = (0..rule.len())
                        .map(|q| {
                            let x = rule.reference_point(q);
                            rule.weights[q] * x[0].powi(a as i32) * x[1].powi(b as i32) * x[2].powi(c as i32)
                        })
                        .sum();
                    worst = worst.max((approx - monomial(rule.dim, [a, b, c])).abs());
                }
            }
        }
        worst
    }

    #[test]
    fn all_rules_exact_to_their_degree() {
        for dim in [2, 3] {
            for degree in 1..=5 {
                let rule: QuadratureRule<f64> = quad_simplex(dim, degree).unwrap();
                assert!(rule.exactness_degree >= degree);
                assert!(rule.weights.iter().all(|&w| w > 0.0));
                let total: f64 = rule.weights.iter().sum();
                assert!((total - rule.reference_measure()).abs() < 1e-15);
                for p in &rule.points {
                    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
                    assert!(p.iter().all(|&b| b >= 0.0));
                }
                let err = max_monomial_error(&rule, rule.exactness_degree);
                assert!(err < 1e-15, "dim {dim} degree {degree}: {err:e}");
            }
        }
    }

    #[test]
    fn degree_two_is_not_degree_three() {
        let rule: QuadratureRule<f64> = quad_simplex(2, 2).unwrap();
        assert!(max_monomial_error(&rule, 3) > 1e-6);
    }

    #[test]
    fn centroid_rule() {
        let rule: QuadratureRule<f64> = quad_simplex(3, 1).unwrap();
        assert_eq!(rule.len(), 1);
        assert!((rule.weights[0] - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn triangle_quadratics() {
        let rule: QuadratureRule<f64> = quad_simplex(2, 2).unwrap();
        assert_eq!(rule.len(), 3);
        let x2: f64 = (0..3).map(|q| rule.weights[q] * rule.reference_point(q)[0].powi(2)).sum();
        let xy: f64 = (0..3)
            .map(|q| {
                let p = rule.reference_point(q);
                rule.weights[q] * p[0] * p[1]
            })
            .sum();
        assert!((x2 - 1.0 / 12.0).abs() < 1e-16);
        assert!((xy - 1.0 / 24.0).abs() < 1e-16);
    }

    #[test]
    fn unsupported_degree() {
        assert!(quad_simplex::<f64>(3, 6).is_err());
        assert!(quad_simplex::<f64>(3, 0).is_err());
        assert!(quad_simplex::<f64>(1, 2).is_err());
    }
}
