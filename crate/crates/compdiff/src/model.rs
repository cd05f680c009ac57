//! Three-species competition model: growth functions, equilibria, Jacobians,
//! and stability classification of the spatially homogeneous system.
//!
//! The reaction for species i is u_i * f_i(u) with
//! f_1 = 1 - u_1 - a*u_2 - b*u_3,
//! f_2 = 1 - b*u_1 - u_2 - a*u_3,
//! f_3 = 1 - alpha*u_1 - b*u_2 - u_3,
//! the cyclic competition structure in rescaled variables. `alpha` defaults
//! to `a`; the asymmetric case alpha != a breaks the cyclic symmetry.

use alloc::vec::Vec;
use num_complex::Complex64;

/// Real parts within this distance of zero make an equilibrium
/// non-hyperbolic for classification purposes.
pub const HYPERBOLICITY_TOL: f64 = 1e-12;

/// Interior equilibria from near-singular competition systems are treated as
/// absent below this determinant magnitude.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelError {
    InvalidParams(&'static str),
}

impl core::fmt::Display for ModelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModelError::InvalidParams(what) => write!(f, "invalid model parameters: {what}"),
        }
    }
}

impl core::error::Error for ModelError {}

/// Species identifier for the three coupled fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    U1,
    U2,
    U3,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::U1, Species::U2, Species::U3];

    pub fn index(self) -> usize {
        match self {
            Species::U1 => 0,
            Species::U2 => 1,
            Species::U3 => 2,
        }
    }
}

/// Rescaled model parameters.
///
/// `a` and `b` are the two competition strengths of the cyclic coupling,
/// `alpha` overrides the (3,1) coupling (defaults to `a`), and `eps2`,
/// `eps3` are the mobilities of species 2 and 3 relative to species 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub eps2: f64,
    pub eps3: f64,
}

impl ModelParams {
    /// Symmetric coupling: alpha = a.
    pub fn new(a: f64, b: f64, eps2: f64, eps3: f64) -> Result<Self, ModelError> {
        Self::with_alpha(a, b, a, eps2, eps3)
    }

    pub fn with_alpha(
        a: f64,
        b: f64,
        alpha: f64,
        eps2: f64,
        eps3: f64,
    ) -> Result<Self, ModelError> {
        let p = ModelParams { a, b, alpha, eps2, eps3 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let finite = self.a.is_finite()
            && self.b.is_finite()
            && self.alpha.is_finite()
            && self.eps2.is_finite()
            && self.eps3.is_finite();
        if !finite {
            return Err(ModelError::InvalidParams("parameters must be finite"));
        }
        if !(self.a > 0.0 && self.b > 0.0 && self.alpha > 0.0) {
            return Err(ModelError::InvalidParams("a, b, alpha must be positive"));
        }
        if !(self.eps2 > 0.0 && self.eps2 <= 1.0 && self.eps3 > 0.0 && self.eps3 <= 1.0) {
            return Err(ModelError::InvalidParams("eps2, eps3 must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Diffusivity of a species (species 1 is the reference, 1.0).
    pub fn diffusivity(&self, s: Species) -> f64 {
        match s {
            Species::U1 => 1.0,
            Species::U2 => self.eps2,
            Species::U3 => self.eps3,
        }
    }
}

/// Growth factor f_i(u); the reaction is u_i * f_i(u).
pub fn growth_f(s: Species, u: [f64; 3], p: &ModelParams) -> f64 {
    let [u1, u2, u3] = u;
    match s {
        Species::U1 => 1.0 - u1 - p.a * u2 - p.b * u3,
        Species::U2 => 1.0 - p.b * u1 - u2 - p.a * u3,
        Species::U3 => 1.0 - p.alpha * u1 - p.b * u2 - u3,
    }
}

/// Right-hand side g_i(u) = u_i * f_i(u) of the homogeneous system.
pub fn reaction_rhs(u: [f64; 3], p: &ModelParams) -> [f64; 3] {
    [
        u[0] * growth_f(Species::U1, u, p),
        u[1] * growth_f(Species::U2, u, p),
        u[2] * growth_f(Species::U3, u, p),
    ]
}

/// Jacobian of g at u.
pub fn jacobian_at(u: [f64; 3], p: &ModelParams) -> [[f64; 3]; 3] {
    let [u1, u2, u3] = u;
    [
        [1.0 - 2.0 * u1 - p.a * u2 - p.b * u3, -p.a * u1, -p.b * u1],
        [-p.b * u2, 1.0 - p.b * u1 - 2.0 * u2 - p.a * u3, -p.a * u2],
        [-p.alpha * u3, -p.b * u3, 1.0 - p.alpha * u1 - p.b * u2 - 2.0 * u3],
    ]
}

/// Monic characteristic polynomial coefficients: det(lambda I - J) =
/// lambda^3 + p2 lambda^2 + p1 lambda + p0.
fn char_coeffs(j: [[f64; 3]; 3]) -> (f64, f64, f64) {
    let tr = j[0][0] + j[1][1] + j[2][2];
    let minors = j[0][0] * j[1][1] - j[0][1] * j[1][0] + j[0][0] * j[2][2] - j[0][2] * j[2][0]
        + j[1][1] * j[2][2]
        - j[1][2] * j[2][1];
    let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    (-tr, minors, -det)
}

/// |det(lambda I - J)| via the characteristic cubic, a residual for checking
/// candidate eigenvalues.
pub fn characteristic_residual(j: [[f64; 3]; 3], lambda: Complex64) -> f64 {
    let (p2, p1, p0) = char_coeffs(j);
    (((lambda + p2) * lambda + p1) * lambda + p0).norm()
}

/// Eigenvalues of a real 3x3 matrix as the roots of its characteristic
/// cubic, solved in closed form and polished by a short Newton pass.
///
/// Returned sorted by (real part, imaginary part) for determinism. Real
/// eigenvalues carry an exactly zero imaginary part; complex ones form an
/// exact conjugate pair.
pub fn eigenvalues_3x3(j: [[f64; 3]; 3]) -> [Complex64; 3] {
    let (p2, p1, p0) = char_coeffs(j);
    let mut roots = cubic_roots(p2, p1, p0);
    for root in roots.iter_mut() {
        if root.im == 0.0 {
            *root = Complex64::new(polish_real(root.re, p2, p1, p0), 0.0);
        }
    }
    // polish the pair through one member so it stays exactly conjugate
    if let Some(i) = (0..3).find(|&i| roots[i].im > 0.0) {
        let j = (0..3).find(|&j| roots[j].im < 0.0).expect("conjugate partner");
        roots[i] = polish_complex(roots[i], p2, p1, p0);
        roots[j] = roots[i].conj();
    }
    roots.sort_by(|x, y| (x.re, x.im).partial_cmp(&(y.re, y.im)).expect("finite eigenvalues"));
    roots
}

const SQRT3_OVER_2: f64 = 0.8660254037844386;
/// Discriminants below this fraction of their own magnitude scale are
/// rounding noise; the root pattern is then resolved as all-real.
const DISC_REL_TOL: f64 = 4e-13;
/// acos loses a half order of accuracy near +-1, so repeated roots take the
/// exact closed form inside this band instead.
const DOUBLE_ROOT_TOL: f64 = 4e-14;

/// Roots of lambda^3 + p2 lambda^2 + p1 lambda + p0, branched on the
/// discriminant sign so the output reality pattern matches a real cubic:
/// either three real roots or one real root plus a conjugate pair.
fn cubic_roots(p2: f64, p1: f64, p0: f64) -> [Complex64; 3] {
    // depress: lambda = t - p2/3, t^3 + a t + b = 0
    let a = p1 - p2 * p2 / 3.0;
    let b = 2.0 * p2 * p2 * p2 / 27.0 - p2 * p1 / 3.0 + p0;
    let shift = -p2 / 3.0;
    let b2_4 = 0.25 * b * b;
    let a3_27 = a * a * a / 27.0;
    let disc = b2_4 + a3_27;
    let scale = b2_4.max(a3_27.abs());

    if disc > DISC_REL_TOL * scale {
        // one real root and an exact conjugate pair; take the cube root of
        // the larger-magnitude half to avoid cancellation
        let sq = libm::sqrt(disc);
        let u = if b <= 0.0 { libm::cbrt(-0.5 * b + sq) } else { -libm::cbrt(0.5 * b + sq) };
        let v = if u == 0.0 { 0.0 } else { -a / (3.0 * u) };
        let re = -0.5 * (u + v) + shift;
        let im = SQRT3_OVER_2 * (u - v);
        [Complex64::new(u + v + shift, 0.0), Complex64::new(re, im), Complex64::new(re, -im)]
    } else {
        // three real roots; a <= 0 here up to roundoff
        let m = 2.0 * libm::sqrt((-a / 3.0).max(0.0));
        if m == 0.0 {
            // a and b both vanish: triple root
            return [Complex64::new(shift, 0.0); 3];
        }
        let arg = 3.0 * b / (a * m);
        let t = if arg.abs() >= 1.0 - DOUBLE_ROOT_TOL {
            // repeated root: closed form instead of the ill-conditioned acos
            let s = if arg >= 0.0 { m } else { -m };
            [s, -0.5 * s, -0.5 * s]
        } else {
            let theta = libm::acos(arg) / 3.0;
            let third = 2.0 * core::f64::consts::PI / 3.0;
            [m * libm::cos(theta), m * libm::cos(theta - third), m * libm::cos(theta - 2.0 * third)]
        };
        [
            Complex64::new(t[0] + shift, 0.0),
            Complex64::new(t[1] + shift, 0.0),
            Complex64::new(t[2] + shift, 0.0),
        ]
    }
}

// Newton steps are accepted only when they shrink the residual: at a
// repeated root f and df are both rounding noise and a raw step f/df can be
// O(1) garbage.

fn polish_real(x0: f64, p2: f64, p1: f64, p0: f64) -> f64 {
    let eval = |x: f64| ((x + p2) * x + p1) * x + p0;
    let mut x = x0;
    let mut fx = eval(x);
    for _ in 0..2 {
        let df = (3.0 * x + 2.0 * p2) * x + p1;
        if df == 0.0 || !df.is_finite() {
            break;
        }
        let cand = x - fx / df;
        let fc = eval(cand);
        if !(fc.abs() < fx.abs()) {
            break;
        }
        x = cand;
        fx = fc;
    }
    x
}

fn polish_complex(x0: Complex64, p2: f64, p1: f64, p0: f64) -> Complex64 {
    let eval = |x: Complex64| ((x + p2) * x + p1) * x + p0;
    let mut x = x0;
    let mut fx = eval(x);
    for _ in 0..2 {
        let df = (3.0 * x + 2.0 * p2) * x + p1;
        if df.norm_sqr() == 0.0 {
            break;
        }
        let cand = x - fx / df;
        let fc = eval(cand);
        if !(fc.norm_sqr() < fx.norm_sqr()) {
            break;
        }
        x = cand;
        fx = fc;
    }
    x
}

/// Local stability label of an equilibrium from its eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityKind {
    UnstableNode,
    Saddle,
    AsymptoticallyStable,
    NeutrallyStable,
    NonHyperbolic,
}

impl core::fmt::Display for StabilityKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let label = match self {
            StabilityKind::UnstableNode => "unstable node",
            StabilityKind::Saddle => "saddle",
            StabilityKind::AsymptoticallyStable => "asymptotically stable",
            StabilityKind::NeutrallyStable => "neutrally stable",
            StabilityKind::NonHyperbolic => "non-hyperbolic",
        };
        write!(f, "{label}")
    }
}

/// Classifies by the sign pattern of the eigenvalue real parts.
///
/// A real part within `HYPERBOLICITY_TOL` of zero counts as zero; such an
/// equilibrium is "neutrally stable" when no other real part is positive,
/// "non-hyperbolic" otherwise.
pub fn classify(eigenvalues: &[Complex64; 3]) -> StabilityKind {
    let any_zero = eigenvalues.iter().any(|l| l.re.abs() <= HYPERBOLICITY_TOL);
    let any_pos = eigenvalues.iter().any(|l| l.re > HYPERBOLICITY_TOL);
    let any_neg = eigenvalues.iter().any(|l| l.re < -HYPERBOLICITY_TOL);
    if any_zero {
        if any_pos {
            StabilityKind::NonHyperbolic
        } else {
            StabilityKind::NeutrallyStable
        }
    } else if any_pos && any_neg {
        StabilityKind::Saddle
    } else if any_pos {
        StabilityKind::UnstableNode
    } else {
        StabilityKind::AsymptoticallyStable
    }
}

/// An equilibrium of the homogeneous system with its spectrum and label.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub point: [f64; 3],
    pub eigenvalues: [Complex64; 3],
    pub kind: StabilityKind,
}

/// All equilibria with nonnegative coordinates, each with eigenvalues and
/// classification.
///
/// Deterministic order: the origin; the three single-species states
/// (0,0,1), (0,1,0), (1,0,0); the interior coexistence state when its
/// coordinates are all positive ((1,1,1)/(1+a+b) for alpha = a, otherwise
/// the solution of the 3x3 competition system); then the two-species states
/// on the u3 = 0, u1 = 0, u2 = 0 planes, each included only when both
/// nonzero coordinates are strictly positive.
pub fn equilibria(p: &ModelParams) -> Vec<Equilibrium> {
    let mut points: Vec<[f64; 3]> = Vec::with_capacity(8);
    points.push([0.0, 0.0, 0.0]);
    points.push([0.0, 0.0, 1.0]);
    points.push([0.0, 1.0, 0.0]);
    points.push([1.0, 0.0, 0.0]);
    if let Some(interior) = interior_equilibrium(p) {
        points.push(interior);
    }
    // u3 = 0 and u1 = 0 planes share the 2x2 system [[1,a],[b,1]] x = (1,1)
    let det_cyc = 1.0 - p.a * p.b;
    if det_cyc.abs() > SINGULAR_TOL {
        let first = (1.0 - p.a) / det_cyc;
        let second = (1.0 - p.b) / det_cyc;
        if first > 0.0 && second > 0.0 {
            points.push([first, second, 0.0]);
            points.push([0.0, first, second]);
        }
    }
    // u2 = 0 plane couples species 1 and 3 via [[1,b],[alpha,1]]
    let det_13 = 1.0 - p.alpha * p.b;
    if det_13.abs() > SINGULAR_TOL {
        let u1 = (1.0 - p.b) / det_13;
        let u3 = (1.0 - p.alpha) / det_13;
        if u1 > 0.0 && u3 > 0.0 {
            points.push([u1, 0.0, u3]);
        }
    }
    points
        .into_iter()
        .map(|point| {
            let eigenvalues = eigenvalues_3x3(jacobian_at(point, p));
            let kind = classify(&eigenvalues);
            Equilibrium { point, eigenvalues, kind }
        })
        .collect()
}

/// Coexistence state with all components positive, when it exists.
fn interior_equilibrium(p: &ModelParams) -> Option<[f64; 3]> {
    if p.alpha == p.a {
        let e = 1.0 / (1.0 + p.a + p.b);
        return Some([e, e, e]);
    }
    // Cramer's rule on the competition system (I + A) u = 1
    let m = [[1.0, p.a, p.b], [p.b, 1.0, p.a], [p.alpha, p.b, 1.0]];
    let det = det3(m);
    if det.abs() <= SINGULAR_TOL {
        return None;
    }
    let ones = [1.0, 1.0, 1.0];
    let u = [
        det3(replace_col(m, 0, ones)) / det,
        det3(replace_col(m, 1, ones)) / det,
        det3(replace_col(m, 2, ones)) / det,
    ];
    (u[0] > 0.0 && u[1] > 0.0 && u[2] > 0.0).then_some(u)
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn replace_col(mut m: [[f64; 3]; 3], col: usize, v: [f64; 3]) -> [[f64; 3]; 3] {
    for row in 0..3 {
        m[row][col] = v[row];
    }
    m
}
