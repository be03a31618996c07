//! Physical parameters, the variable transformation that normalizes the
//! adsorption coefficients, and the problem data of the two experiments.

use crate::cutgeom::{decompose_tet, sub_tet_points, triangle_points, QuadratureRule, TAG_INNER};
use crate::error::{FemError, Result};
use crate::levelset::LevelSetField;
use crate::scalar::{dot, norm, Real, Vec3};

/// Prescribed divergence-free velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Velocity {
    /// Rigid rotation in the x-z plane, `w = (z, 0, -x) / 10`.
    #[default]
    Rotating,
    Zero,
}

impl Velocity {
    pub fn eval<T: Real>(&self, x: Vec3<T>) -> Vec3<T> {
        match self {
            Velocity::Rotating => {
                let c = T::lit(0.1);
                [c * x[2], T::zero(), -c * x[0]]
            }
            Velocity::Zero => [T::zero(); 3],
        }
    }
}

/// `w = (z, 0, -x) / 10`
pub fn velocity_field<T: Real>(x: Vec3<T>) -> Vec3<T> {
    Velocity::Rotating.eval(x)
}

/// Dimensionless coefficients of the stationary bulk-interface problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams<T> {
    pub nu1: T,
    pub nu2: T,
    pub nu_gamma: T,
    pub k1a: T,
    pub k2a: T,
    pub k1d: T,
    pub k2d: T,
    /// Scaling constant `K = L U / V`.
    pub k: T,
    pub velocity: Velocity,
}

impl<T: Real> ProblemParams<T> {
    /// Coefficients of the manufactured-solution convergence study.
    pub fn convergence_study() -> Self {
        let l = T::lit;
        Self {
            nu1: l(0.5),
            nu2: l(1.0),
            nu_gamma: l(1.0),
            k1a: l(0.5),
            k2a: l(2.0),
            k1d: l(2.0),
            k2d: l(1.0),
            k: l(1.0),
            velocity: Velocity::Rotating,
        }
    }

    /// Coefficients of the small-desorption study with `k1d = eps`.
    pub fn desorption_study(eps: T) -> Self {
        let one = T::one();
        Self {
            nu1: T::lit(0.5),
            nu2: one,
            nu_gamma: one,
            k1a: one,
            k2a: one,
            k1d: eps,
            k2d: one,
            k: one,
            velocity: Velocity::Rotating,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(FemError::InvalidParams(msg.to_string()));
        let finite = [self.nu1, self.nu2, self.nu_gamma, self.k1a, self.k2a, self.k1d, self.k2d, self.k];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all coefficients must be finite");
        }
        if !(self.nu1 > T::zero() && self.nu2 > T::zero() && self.nu_gamma > T::zero()) {
            return bad("diffusion coefficients must be positive");
        }
        if !(self.k1a > T::zero() && self.k2a > T::zero()) {
            return bad("adsorption coefficients must be positive");
        }
        let ka = self.k1a + self.k2a;
        for kd in [self.k1d, self.k2d] {
            if kd < T::zero() || kd > ka {
                return bad("desorption coefficients must lie in [0, k1a + k2a]");
            }
        }
        if self.k <= T::zero() {
            return bad("scaling constant K must be positive");
        }
        Ok(())
    }

    pub fn transform(&self) -> Result<TransformedParams<T>> {
        self.validate()?;
        let ka = self.k1a + self.k2a;
        Ok(TransformedParams {
            nu1: self.nu1 / self.k1a,
            nu2: self.nu2 / self.k2a,
            nu_gamma: self.nu_gamma / ka,
            q1: self.k1d / ka,
            q2: self.k2d / ka,
            r: self.k2a / self.k1a,
            k: self.k,
            bulk_velocity_scale: [T::one() / self.k1a, T::one() / self.k2a],
            surface_velocity_scale: T::one() / ka,
            bulk_scale: [self.k1a, self.k2a],
            surface_scale: ka,
            velocity: self.velocity,
        })
    }
}

/// Coefficients after substituting `u_i -> k_ia u_i`, `v -> (k1a + k2a) v`.
/// The Robin conditions then read `(-1)^i nu_i n.grad u_i = u_i - q_i v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedParams<T> {
    pub nu1: T,
    pub nu2: T,
    pub nu_gamma: T,
    pub q1: T,
    pub q2: T,
    pub r: T,
    pub k: T,
    pub bulk_velocity_scale: [T; 2],
    pub surface_velocity_scale: T,
    /// Factors mapping original bulk concentrations to transformed ones.
    pub bulk_scale: [T; 2],
    /// Factor mapping the original interface concentration to the transformed one.
    pub surface_scale: T,
    pub velocity: Velocity,
}

impl<T: Real> TransformedParams<T> {
    pub fn nu(&self, tag: u8) -> T {
        if tag == TAG_INNER {
            self.nu1
        } else {
            self.nu2
        }
    }

    pub fn q(&self, tag: u8) -> T {
        if tag == TAG_INNER {
            self.q1
        } else {
            self.q2
        }
    }

    pub fn bulk_velocity(&self, tag: u8, x: Vec3<T>) -> Vec3<T> {
        let s = self.bulk_velocity_scale[usize::from(tag != TAG_INNER)];
        self.velocity.eval(x).map(|c| c * s)
    }

    pub fn surface_velocity(&self, x: Vec3<T>) -> Vec3<T> {
        let s = self.surface_velocity_scale;
        self.velocity.eval(x).map(|c| c * s)
    }

    pub fn bulk_scale(&self, tag: u8) -> T {
        self.bulk_scale[usize::from(tag != TAG_INNER)]
    }
}

/// Source terms and Dirichlet data in original (untransformed) variables.
/// The transformation leaves `f_i` and `g` unchanged.
pub trait ProblemData<T: Real>: Sync {
    fn f(&self, tag: u8, x: Vec3<T>) -> T;
    fn g(&self, x: Vec3<T>) -> T;
    fn dirichlet(&self, tag: u8, x: Vec3<T>) -> T;
}

/// Closed-form solution used for error measurement.
pub trait ExactSolution<T: Real>: Sync {
    fn u(&self, tag: u8, x: Vec3<T>) -> T;
    fn grad_u(&self, tag: u8, x: Vec3<T>) -> Vec3<T>;
    fn v(&self, x: Vec3<T>) -> T;
    fn grad_v(&self, x: Vec3<T>) -> Vec3<T>;
}

/// `v = 3x^2 y - y^3`, `u2 = exp(1 - |x|^2) v`, `u1 = 2 u2`.
///
/// With the convergence-study coefficients this satisfies both Robin
/// conditions on the unit sphere and has zero flux jump there, so
/// `g = 12 nu_Gamma v + w.grad v` (the polynomial extension is evaluated
/// off the sphere).
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedSolution<T> {
    pub params: ProblemParams<T>,
}

impl<T: Real> ManufacturedSolution<T> {
    pub fn new(params: ProblemParams<T>) -> Self {
        Self { params }
    }

    fn ratio(tag: u8) -> T {
        if tag == TAG_INNER {
            T::lit(2.0)
        } else {
            T::one()
        }
    }

    fn envelope(x: Vec3<T>) -> T {
        (T::one() - dot(x, x)).exp()
    }

    pub fn laplacian_u(&self, tag: u8, x: Vec3<T>) -> T {
        // Using x.grad v = 3v and lap v = 0:
        // lap(e v) = e v (4|x|^2 - 6) - 4 e x.grad v = e v (4|x|^2 - 18).
        Self::ratio(tag) * Self::envelope(x) * self.v(x) * (T::lit(4.0) * dot(x, x) - T::lit(18.0))
    }

    /// `(f1, f2, g)` at `x`.
    pub fn source_terms(&self, x: Vec3<T>) -> (T, T, T) {
        (self.f(1, x), self.f(2, x), self.g(x))
    }

    /// Left minus right side of `(-1)^i nu_i n.grad u_i = k_ia u_i - k_id v`
    /// on the sphere through `x`, with `n = x / |x|`.
    pub fn robin_residual(&self, tag: u8, x: Vec3<T>) -> T {
        let p = &self.params;
        let n = x.map(|c| c / norm(x));
        let (sign, nu, ka, kd) = if tag == TAG_INNER {
            (-T::one(), p.nu1, p.k1a, p.k1d)
        } else {
            (T::one(), p.nu2, p.k2a, p.k2d)
        };
        sign * nu * dot(n, self.grad_u(tag, x)) - (ka * self.u(tag, x) - kd * self.v(x))
    }
}

impl<T: Real> ExactSolution<T> for ManufacturedSolution<T> {
    fn u(&self, tag: u8, x: Vec3<T>) -> T {
        Self::ratio(tag) * Self::envelope(x) * self.v(x)
    }

    fn grad_u(&self, tag: u8, x: Vec3<T>) -> Vec3<T> {
        let e = Self::ratio(tag) * Self::envelope(x);
        let v = self.v(x);
        let gv = self.grad_v(x);
        let two = T::lit(2.0);
        [e * (gv[0] - two * x[0] * v), e * (gv[1] - two * x[1] * v), e * (gv[2] - two * x[2] * v)]
    }

    fn v(&self, x: Vec3<T>) -> T {
        let (a, b) = (x[0], x[1]);
        T::lit(3.0) * a * a * b - b * b * b
    }

    fn grad_v(&self, x: Vec3<T>) -> Vec3<T> {
        let (a, b) = (x[0], x[1]);
        let three = T::lit(3.0);
        [T::lit(6.0) * a * b, three * (a * a - b * b), T::zero()]
    }
}

impl<T: Real> ProblemData<T> for ManufacturedSolution<T> {
    fn f(&self, tag: u8, x: Vec3<T>) -> T {
        let nu = if tag == TAG_INNER { self.params.nu1 } else { self.params.nu2 };
        let w = self.params.velocity.eval(x);
        -nu * self.laplacian_u(tag, x) + dot(w, self.grad_u(tag, x))
    }

    fn g(&self, x: Vec3<T>) -> T {
        let p = &self.params;
        let v = self.v(x);
        // -Lap_Gamma v = 12 v for this degree-3 harmonic; w is tangential.
        // Flux jump [nu n.grad u] = (2 nu1 - nu2) v on the sphere.
        T::lit(12.0) * p.nu_gamma * v
            + dot(p.velocity.eval(x), self.grad_v(x))
            + p.k * (T::lit(2.0) * p.nu1 - p.nu2) * v
    }

    fn dirichlet(&self, tag: u8, x: Vec3<T>) -> T {
        self.u(tag, x)
    }
}

/// Data of the desorption study: `f = 0`, `g = 1`, zero Dirichlet data.
#[derive(Debug, Clone, Copy, Default)]
pub struct DesorptionData;

impl<T: Real> ProblemData<T> for DesorptionData {
    fn f(&self, _tag: u8, _x: Vec3<T>) -> T {
        T::zero()
    }

    fn g(&self, _x: Vec3<T>) -> T {
        T::one()
    }

    fn dirichlet(&self, _tag: u8, _x: Vec3<T>) -> T {
        T::zero()
    }
}

/// `K (int_{Omega_1h} f1 + int_{Omega_2h} f2) + int_{Gamma_h} g`; the
/// compatibility defect relevant for pure Neumann problems.
pub fn check_consistency<T: Real, D: ProblemData<T> + ?Sized>(
    data: &D,
    k: T,
    field: &LevelSetField<'_, T>,
    tet_rule: &QuadratureRule<T>,
    tri_rule: &QuadratureRule<T>,
) -> T {
    let mut bulk = T::zero();
    let mut surf = T::zero();
    for t in 0..field.mesh.num_tets() {
        let d = decompose_tet(field, t);
        for sub in &d.sub_tets {
            bulk += sub_tet_points(sub, tet_rule).map(|(_, x, w)| w * data.f(sub.tag, x)).sum::<T>();
        }
        for tri in &d.interface_triangles {
            surf += triangle_points(tri, tri_rule).map(|(_, x, w)| w * data.g(x)).sum::<T>();
        }
    }
    k * bulk + surf
}
