//! Standard normal distribution function and critical values.
//!
//! `Φ(z) = erfc(-z/√2) / 2` with `erfc` from libm (a port of the FreeBSD
//! msun routines, accurate to about one ulp), so both tails keep full
//! relative precision. Quantiles start from Acklam's rational approximation
//! (relative error below 1.2e-9) and are polished with Halley steps, then
//! bracketed and bisected if the residual is still not at machine precision.

use crate::error::{invalid, Result};

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * libm::exp(-0.5 * z * z)
}

/// Φ(z).
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// 1 - Φ(z), computed without cancellation.
#[inline]
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Φ⁻¹(p) for p in (0, 1).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", "quantile level must lie in (0, 1)"));
    }
    let mut z = acklam(p);

    // Halley iterations on f(z) = Φ(z) - p, evaluated in the tail that keeps
    // precision.
    for _ in 0..3 {
        let err = if z < 0.0 {
            normal_cdf(z) - p
        } else {
            (1.0 - p) - normal_sf(z)
        };
        let pdf = normal_pdf(z);
        if pdf == 0.0 {
            break;
        }
        let u = err / pdf;
        z -= u / (1.0 + 0.5 * z * u);
    }

    if residual(z, p) > 4.0 * f64::EPSILON * p.min(1.0 - p) {
        z = bisect(p, z);
    }
    Ok(z)
}

/// Z_α solving 1 - Φ(z) = α.
pub fn z_critical(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", "must lie in (0, 1)"));
    }
    if alpha == 0.5 {
        return Ok(0.0);
    }
    Ok(-normal_quantile(alpha)?)
}

fn residual(z: f64, p: f64) -> f64 {
    if p < 0.5 {
        libm::fabs(normal_cdf(z) - p)
    } else {
        libm::fabs(normal_sf(z) - (1.0 - p))
    }
}

fn bisect(p: f64, guess: f64) -> f64 {
    let (mut lo, mut hi) = (guess - 1e-6, guess + 1e-6);
    while normal_cdf(lo) > p {
        lo -= 1.0;
    }
    while normal_cdf(hi) < p {
        hi += 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = if p < 0.5 {
            normal_cdf(mid) < p
        } else {
            normal_sf(mid) > 1.0 - p
        };
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

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

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail(libm::sqrt(-2.0 * libm::log(p)))
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail(libm::sqrt(-2.0 * libm::log(1.0 - p)))
    }
}
