use serde::{Deserialize, Serialize};

use super::ScoringParams;
use crate::scalar::Scalar;

/// A point in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon<S> {
    pub lat: S,
    pub lon: S,
}

impl<S: Scalar> LatLon<S> {
    pub fn new(lat: S, lon: S) -> Self {
        LatLon { lat, lon }
    }

    pub fn from_f64(lat: f64, lon: f64) -> Self {
        LatLon::new(S::lit(lat), S::lit(lon))
    }
}

/// Great-circle distance by the haversine formula:
/// `2R·asin(√(sin²(Δφ/2) + cosφ₁·cosφ₂·sin²(Δλ/2)))`.
pub fn haversine_km<S: Scalar>(a: LatLon<S>, b: LatLon<S>, radius_km: S) -> S {
    let two = S::lit(2.0);
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let half_dphi = (b.lat - a.lat).to_radians() / two;
    let half_dlambda = (b.lon - a.lon).to_radians() / two;
    let h = half_dphi.sin().powi(2) + phi1.cos() * phi2.cos() * half_dlambda.sin().powi(2);
    // Rounding can push h a hair above 1 for antipodal points.
    two * radius_km * h.min(S::one()).sqrt().asin()
}

/// Arc-cotangent on the continuous branch with range (0, π).
pub fn arccot<S: Scalar>(x: S) -> S {
    if x > S::zero() {
        // Same branch; avoids cancellation in π/2 − atan(x) for large x.
        x.recip().atan()
    } else {
        S::FRAC_PI_2() - x.atan()
    }
}

/// Closeness weight of a distance: `arccot((d − p)/s) / arccot(−p/s)` with
/// inflexion point `p` and steepness `s`. Equals 1 at `d = 0` and decreases
/// strictly towards 0.
pub fn km_weight<S: Scalar>(distance_km: S, params: &ScoringParams<S>) -> S {
    let p = params.inflexion_km;
    let s = params.steepness_km;
    arccot((distance_km - p) / s) / arccot(-p / s)
}
