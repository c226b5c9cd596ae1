//! Standard normal special functions and the truncated second-moment factor
//! `upsilon(t) = 2 z φ(z) + t` with `z = Φ⁻¹(1 − t/2)`.
//!
//! `Φ` is evaluated through the complementary error function (`libm::erfc`,
//! accurate to about one ulp), so both tails keep full relative precision.
//! The quantile uses Acklam's rational approximation followed by one Newton
//! step against that `Φ`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::domain(format!("probability {value} outside [0, 1]")))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Probability(0.0)
        } else {
            Probability(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Which standard normal function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalFn {
    Pdf,
    Cdf,
    Quantile,
}

/// Dispatching front end over [`pdf`], [`cdf`] and [`quantile`].
pub fn std_normal(kind: NormalFn, x: f64) -> Result<f64> {
    match kind {
        NormalFn::Pdf => Ok(pdf(x)),
        NormalFn::Cdf => Ok(cdf(x)),
        NormalFn::Quantile => quantile(x),
    }
}

#[inline]
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail `1 − Φ(x)`, without cancellation for large `x`.
#[inline]
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Two-sided tail mass `P(|Z| ≥ z)` for `z ≥ 0`.
#[inline]
pub fn two_sided_tail(z: f64) -> f64 {
    if z <= 0.0 {
        1.0
    } else {
        libm::erfc(z * std::f64::consts::FRAC_1_SQRT_2)
    }
}

/// `Φ⁻¹(p)` for `p ∈ (0, 1)`.
pub fn quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("quantile argument {p} outside (0, 1)")));
    }
    Ok(quantile_unchecked(p))
}

/// `Φ⁻¹(1 − q)` for `q ∈ (0, 1)`, accurate for tiny `q`.
pub fn upper_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("upper quantile argument {q} outside (0, 1)")));
    }
    Ok(-quantile_unchecked(q))
}

fn quantile_unchecked(p: f64) -> f64 {
    if p > 0.5 {
        // Refine against the upper tail so that p near 1 keeps its precision.
        let q = 1.0 - p;
        let x = -acklam(q);
        return x + (sf(x) - q) / pdf(x);
    }
    let x = acklam(p);
    x - (cdf(x) - p) / pdf(x)
}

/// Acklam's rational approximation of the lower-half quantile
/// (relative error about 1.15e-9).
fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `Υ(t) = 2 z φ(z) + t` with `z = Φ⁻¹(1 − t/2)`: the share of the prior's
/// explained variance captured when publishing the top `t` of `|X|`.
///
/// Defined by continuity at the endpoints, `Υ(0) = 0` and `Υ(1) = 1`.
pub fn upsilon(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("upsilon argument {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if t == 1.0 {
        return Ok(1.0);
    }
    let z = -quantile_unchecked(0.5 * t);
    Ok(2.0 * z * pdf(z) + t)
}

/// `Υ'(t) = Φ⁻¹(1 − t/2)²` on the open interval `(0, 1)`.
pub fn upsilon_prime(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::domain(format!(
            "upsilon derivative argument {t} outside (0, 1)"
        )));
    }
    let z = -quantile_unchecked(0.5 * t);
    Ok(z * z)
}
