use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Rotation angle.
///
/// Benchmark generators produce angles of the form `num * pi / 2^k`; those are
/// kept as an exact dyadic multiple of pi so that structurally equal circuits
/// compare equal. Anything else is carried as plain radians.
///
/// JSON form: `{"pi": [num, k]}` or `{"rad": x}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum Angle {
    #[serde(rename = "pi")]
    Pi(i64, u32),
    #[serde(rename = "rad")]
    Radians(f64),
}

impl Angle {
    pub const ZERO: Angle = Angle::Pi(0, 0);

    /// `num * pi / 2^log2_den`, reduced.
    pub fn pi_frac(num: i64, log2_den: u32) -> Self {
        let (mut n, mut k) = (num, log2_den);
        if n == 0 {
            return Angle::ZERO;
        }
        while k > 0 && n % 2 == 0 {
            n /= 2;
            k -= 1;
        }
        Angle::Pi(n, k)
    }

    pub fn radians(x: f64) -> Self {
        Angle::Radians(x)
    }

    fn normalized(self) -> Self {
        match self {
            Angle::Pi(n, k) => Angle::pi_frac(n, k),
            r => r,
        }
    }

    pub fn to_radians(self) -> f64 {
        match self {
            Angle::Pi(n, k) => n as f64 * PI / 2f64.powi(k as i32),
            Angle::Radians(x) => x,
        }
    }

    pub fn value<T: Real>(self) -> T {
        T::of(self.to_radians())
    }

    pub fn is_finite(self) -> bool {
        match self {
            Angle::Pi(..) => true,
            Angle::Radians(x) => x.is_finite(),
        }
    }

    pub fn is_zero(self) -> bool {
        match self.normalized() {
            Angle::Pi(n, _) => n == 0,
            Angle::Radians(x) => x == 0.0,
        }
    }

    pub fn half(self) -> Self {
        match self {
            Angle::Pi(n, k) => Angle::pi_frac(n, k + 1),
            Angle::Radians(x) => Angle::Radians(x / 2.0),
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Angle::Pi(..))
    }
}

impl Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        match self {
            Angle::Pi(n, k) => Angle::Pi(-n, k),
            Angle::Radians(x) => Angle::Radians(-x),
        }
    }
}

impl Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        if let (Angle::Pi(a, ka), Angle::Pi(b, kb)) = (self, rhs) {
            let k = ka.max(kb);
            let lhs = a.checked_mul(1i64.checked_shl(k - ka).unwrap_or(0));
            let rhs_n = b.checked_mul(1i64.checked_shl(k - kb).unwrap_or(0));
            if let (Some(x), Some(y)) = (lhs, rhs_n) {
                if k < 62 {
                    if let Some(sum) = x.checked_add(y) {
                        return Angle::pi_frac(sum, k);
                    }
                }
            }
        }
        Angle::Radians(self.to_radians() + rhs.to_radians())
    }
}

impl PartialEq for Angle {
    fn eq(&self, other: &Self) -> bool {
        match (self.normalized(), other.normalized()) {
            (Angle::Pi(a, ka), Angle::Pi(b, kb)) => a == b && ka == kb,
            (x, y) => x.to_radians() == y.to_radians(),
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.normalized() {
            Angle::Pi(0, _) => write!(f, "0"),
            Angle::Pi(n, 0) => write!(f, "{n}pi"),
            Angle::Pi(n, k) => write!(f, "{n}pi/{}", 1u128 << k),
            Angle::Radians(x) => write!(f, "{x}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_dyadic_fractions() {
        assert_eq!(Angle::pi_frac(4, 3), Angle::Pi(1, 1));
        assert_eq!(Angle::pi_frac(2, 2), Angle::pi_frac(1, 1));
        assert_eq!(Angle::Pi(6, 2), Angle::Pi(3, 1));
    }

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Angle::pi_frac(1, 2) + Angle::pi_frac(1, 2);
        assert_eq!(a, Angle::pi_frac(1, 1));
        assert!(a.is_exact());
        assert_eq!(Angle::pi_frac(1, 3).half(), Angle::pi_frac(1, 4));
        assert!((-Angle::pi_frac(1, 1) + Angle::pi_frac(1, 1)).is_zero());
    }

    #[test]
    fn mixed_addition_falls_back_to_radians() {
        let a = Angle::pi_frac(1, 0) + Angle::radians(0.5);
        assert!(!a.is_exact());
        assert!((a.to_radians() - (PI + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn json_forms() {
        let s = serde_json::to_string(&Angle::pi_frac(3, 2)).unwrap();
        assert_eq!(s, r#"{"pi":[3,2]}"#);
        let r: Angle = serde_json::from_str(r#"{"rad":0.25}"#).unwrap();
        assert_eq!(r, Angle::radians(0.25));
    }
}
