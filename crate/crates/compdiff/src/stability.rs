//! Stability analysis of the scheme's scalar reduction.
//!
//! Dropping diffusion and the two competing species leaves a scalar logistic
//! step u^{n+1} = G(u^{n-1}, u^n; z) with z = dt * lambda. Linearizing G at
//! its fixed points u* = 0 and u* = 1 yields quadratic characteristic
//! polynomials in the root variable xi; the scheme is stable at a sample z
//! exactly when no root leaves the closed unit disk. Rasters of that verdict
//! over a complex-z window show u* = 0 stable across the left half-plane and
//! u* = 1 unstable on the negative real axis, mirroring the continuous
//! equilibria.

use alloc::vec::Vec;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StabilityError {
    /// The amplification map has a pole at this z (denominator vanishes).
    Pole { z: Complex64 },
    /// Raster grid needs at least 2 samples per axis and ordered ranges.
    InvalidGrid(&'static str),
}

impl core::fmt::Display for StabilityError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StabilityError::Pole { z } => write!(f, "amplification map pole at z = {z}"),
            StabilityError::InvalidGrid(what) => write!(f, "invalid raster grid: {what}"),
        }
    }
}

impl core::error::Error for StabilityError {}

/// Fixed point of the scalar reduced map: extinction (u* = 0) or carrying
/// capacity (u* = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPoint {
    Zero,
    One,
}

impl FixedPoint {
    /// Numeric tag used by the CLI (0 or 1, matching the fixed-point value).
    pub fn tag(self) -> u8 {
        match self {
            FixedPoint::Zero => 0,
            FixedPoint::One => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(FixedPoint::Zero),
            1 => Some(FixedPoint::One),
            _ => None,
        }
    }
}

/// One-step scalar map u^{n+1} = G(u^{n-1}, u^n; z) of the reduced logistic
/// scheme, for real z.
///
/// G = u^n * (1 + z/2 * w) / (1 - z/2 * w) with
/// w = 1 + u^{n-1}/2 - 3 u^n / 2. Both u* = 0 and u* = 1 are fixed points
/// for every z away from the pole.
pub fn g_map(u_prev: f64, u_curr: f64, z: f64) -> Result<f64, StabilityError> {
    let w = 1.0 + 0.5 * u_prev - 1.5 * u_curr;
    let denom = 1.0 - 0.5 * z * w;
    if denom == 0.0 {
        return Err(StabilityError::Pole { z: Complex64::new(z, 0.0) });
    }
    Ok(u_curr * (1.0 + 0.5 * z * w) / denom)
}

/// Evaluates the characteristic polynomial of the linearized scheme at xi.
///
/// At u* = 0: xi^2 - ((2+z)/(2-z)) xi (pole at z = 2).
/// At u* = 1: xi^2 - (1 - 3z/2) xi - z/2.
pub fn char_poly(
    fixed_point: FixedPoint,
    z: Complex64,
    xi: Complex64,
) -> Result<Complex64, StabilityError> {
    match fixed_point {
        FixedPoint::Zero => {
            let denom = Complex64::new(2.0, 0.0) - z;
            if denom.norm_sqr() == 0.0 {
                return Err(StabilityError::Pole { z });
            }
            let growth = (Complex64::new(2.0, 0.0) + z) / denom;
            Ok((xi - growth) * xi)
        }
        FixedPoint::One => {
            let b = Complex64::new(1.0, 0.0) - 1.5 * z;
            Ok((xi - b) * xi - 0.5 * z)
        }
    }
}

/// Roots of the characteristic polynomial at z, sorted by descending
/// modulus (ties by real then imaginary part).
///
/// u* = 0 factors exactly as {0, (2+z)/(2-z)}. u* = 1 uses the
/// cancellation-safe quadratic formula: the root of larger magnitude from
/// the discriminant, the other from the product of roots.
pub fn char_roots(fixed_point: FixedPoint, z: Complex64) -> Result<[Complex64; 2], StabilityError> {
    let zero = Complex64::new(0.0, 0.0);
    let mut roots = match fixed_point {
        FixedPoint::Zero => {
            let denom = Complex64::new(2.0, 0.0) - z;
            if denom.norm_sqr() == 0.0 {
                return Err(StabilityError::Pole { z });
            }
            [(Complex64::new(2.0, 0.0) + z) / denom, zero]
        }
        FixedPoint::One => {
            // xi^2 - b xi - z/2 with b = 1 - 3z/2; product of roots is -z/2
            let b = Complex64::new(1.0, 0.0) - 1.5 * z;
            let disc = b * b + 2.0 * z;
            let s = disc.sqrt();
            // add s with the sign that avoids cancellation against b
            let t = if (b.conj() * s).re >= 0.0 { (b + s) * 0.5 } else { (b - s) * 0.5 };
            if t.norm_sqr() == 0.0 {
                // b = 0 and disc = 0 cannot happen simultaneously, but a
                // degenerate z could underflow both; fall back to the sum
                [b, zero]
            } else {
                [t, -0.5 * z / t]
            }
        }
    };
    roots.sort_by(|x, y| {
        (y.norm(), x.re, x.im).partial_cmp(&(x.norm(), y.re, y.im)).expect("finite roots")
    });
    Ok(roots)
}

/// Stability verdict at one complex sample z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilitySample {
    pub z: Complex64,
    pub fixed_point: FixedPoint,
    pub roots: [Complex64; 2],
    pub max_modulus: f64,
    /// max_modulus <= 1; roots exactly on the unit circle count as stable
    /// (the marginal set has measure zero and the convention is fixed here).
    pub stable: bool,
}

/// Classifies one z sample by the root moduli of the linearized scheme.
pub fn sample(fixed_point: FixedPoint, z: Complex64) -> Result<StabilitySample, StabilityError> {
    let roots = char_roots(fixed_point, z)?;
    let max_modulus = roots[0].norm().max(roots[1].norm());
    Ok(StabilitySample { z, fixed_point, roots, max_modulus, stable: max_modulus <= 1.0 })
}

/// Raster of stability verdicts over a rectangle in the complex z plane.
///
/// Samples are stored row-major with the imaginary axis outer and ascending:
/// index `iy * n + ix` holds z = (re_min + ix*dre, im_min + iy*dim), with
/// both endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRaster {
    pub fixed_point: FixedPoint,
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    /// Samples per axis; the grid is n x n.
    pub n: usize,
    pub samples: Vec<StabilitySample>,
}

impl RegionRaster {
    pub fn at(&self, ix: usize, iy: usize) -> &StabilitySample {
        &self.samples[iy * self.n + ix]
    }
}

/// Samples the n-by-n grid spanning the given ranges (endpoints included).
///
/// Fails if any grid point lands exactly on the u* = 0 pole z = 2; the
/// default window [-10, 2] x [-6, 6] at even n never does.
pub fn region_raster(
    fixed_point: FixedPoint,
    re_range: (f64, f64),
    im_range: (f64, f64),
    n: usize,
) -> Result<RegionRaster, StabilityError> {
    if n < 2 {
        return Err(StabilityError::InvalidGrid("need at least 2 samples per axis"));
    }
    let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
    if !ok(re_range) || !ok(im_range) {
        return Err(StabilityError::InvalidGrid("ranges must be finite with min < max"));
    }
    let step = |(lo, hi): (f64, f64), i: usize| lo + i as f64 * (hi - lo) / (n - 1) as f64;
    let mut samples = Vec::with_capacity(n * n);
    for iy in 0..n {
        let im = step(im_range, iy);
        for ix in 0..n {
            let re = step(re_range, ix);
            samples.push(sample(fixed_point, Complex64::new(re, im))?);
        }
    }
    Ok(RegionRaster { fixed_point, re_range, im_range, n, samples })
}
