//! Exact rational Strichartz exponent bookkeeping.

use std::fmt;

use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::format_rational;

/// A Lebesgue exponent in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    Finite(Rational64),
    Infinite,
}

impl Exponent {
    pub fn finite(num: i64, den: i64) -> Self {
        Exponent::Finite(Rational64::new(num, den))
    }

    /// `1/x`, with `1/∞ = 0`.
    pub fn recip(self) -> Rational64 {
        match self {
            Exponent::Finite(x) => x.recip(),
            Exponent::Infinite => Rational64::zero(),
        }
    }

    /// Hölder conjugate `x′ = x/(x−1)`, with `∞′ = 1` and `1′ = ∞`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinite => Exponent::Finite(Rational64::one()),
            Exponent::Finite(x) if x.is_one() => Exponent::Infinite,
            Exponent::Finite(x) => Exponent::Finite(x / (x - 1)),
        }
    }

    pub fn value(self) -> Option<Rational64> {
        match self {
            Exponent::Finite(x) => Some(x),
            Exponent::Infinite => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Exponent::Finite(x) => x.to_f64().unwrap_or(f64::NAN),
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(x) => f.write_str(&format_rational(x)),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The positive root of `2dσ² + (d−2)σ − 2`, kept as the quadratic plus a float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaC {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub value: f64,
}

impl SigmaC {
    /// `aσ² + bσ + c` at `σ`.
    pub fn residual(&self, sigma: f64) -> f64 {
        (self.a as f64 * sigma + self.b as f64) * sigma + self.c as f64
    }

    /// The root as an exact rational when the discriminant is a perfect square.
    pub fn exact(&self) -> Option<Rational64> {
        let disc = self.b * self.b - 4 * self.a * self.c;
        let root = (disc as f64).sqrt().round() as i64;
        (root * root == disc).then(|| Rational64::new(-self.b + root, 2 * self.a))
    }
}

/// Lower threshold `σ_c(d) = (2 − d + √(d² + 12d + 4)) / (4d)`.
pub fn sigma_c(d: u32) -> Result<SigmaC> {
    if d < 1 {
        return Err(Error::InvalidParams("dimension must be at least 1".into()));
    }
    let df = d as f64;
    let value = (2.0 - df + (df * df + 12.0 * df + 4.0).sqrt()) / (4.0 * df);
    Ok(SigmaC { a: 2 * d as i64, b: d as i64 - 2, c: -2, value })
}

/// Exponents of the scattering argument for one `(d, n, σ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentSet {
    pub d: u32,
    pub n: u32,
    #[serde(serialize_with = "crate::model::rational_str::serialize")]
    pub sigma: Rational64,
    pub q_tilde: Exponent,
    pub p_tilde: Exponent,
    pub p: Exponent,
    pub q: Exponent,
    pub r: Exponent,
    pub p0: Exponent,
    pub q0: Exponent,
    #[serde(serialize_with = "crate::model::rational_str::serialize")]
    pub s: Rational64,
    #[serde(serialize_with = "crate::model::rational_str::serialize")]
    pub delta: Rational64,
    pub sigma_c: SigmaC,
}

fn rat(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

/// `x = num/den` as an exponent, rejecting non-positive denominators.
fn ratio_exp(num: Rational64, den: Rational64, name: &str) -> Result<Exponent> {
    if den <= Rational64::zero() {
        return Err(Error::InvalidParams(format!("exponent {name} is not positive (denominator {den})")));
    }
    Ok(Exponent::Finite(num / den))
}

/// True when `2/(d−n) ≤ σ < 2/(d−2)` (no upper bound for d = 2).
pub fn in_strichartz_window(d: u32, n: u32, sigma: Rational64) -> bool {
    if n == 0 || n >= d {
        return false;
    }
    let lower = Rational64::new(2, (d - n) as i64);
    let below = d <= 2 || sigma < Rational64::new(2, d as i64 - 2);
    sigma >= lower && below
}

pub fn exponent_set(d: u32, n: u32, sigma: Rational64) -> Result<ExponentSet> {
    if !in_strichartz_window(d, n, sigma) {
        return Err(Error::InvalidParams(format!(
            "sigma = {} is outside the window 2/(d-n) <= sigma < 2/(d-2) for d = {d}, n = {n}",
            format_rational(&sigma)
        )));
    }
    let (di, ni) = (rat(d as i64), rat(n as i64));
    let k = di - ni;
    let s2 = sigma * sigma;
    let top = rat(4) * sigma * (sigma + 1);
    let q_tilde = ratio_exp(top, rat(2) * di * s2 + sigma * (di - 2) - 2, "q~")?;
    let p_tilde = ratio_exp(top, rat(2) * di * s2 + sigma * (di - 2 - ni) - rat(2) * (ni * s2 + 1), "p~")?;
    let p = ratio_exp(top, rat(2) * sigma + 2 - k * sigma, "p")?;
    let q = ratio_exp(top, rat(2) * sigma + 2 - di * sigma, "q")?;
    let r = Exponent::Finite(rat(2) * sigma + 2);
    let p0 = ratio_exp(rat(4) * sigma + 4, k * sigma, "p0")?;
    let q0 = ratio_exp(rat(4) * sigma + 4, di * sigma, "q0")?;
    let half = Rational64::new(1, 2);
    let s = half * (di / 2 - sigma.recip());
    let delta = k * (half - r.recip());
    let set = ExponentSet { d, n, sigma, q_tilde, p_tilde, p, q, r, p0, q0, s, delta, sigma_c: sigma_c(d)? };
    let report = set.identities();
    if !report.all() {
        return Err(Error::InvalidParams(format!("exponent identities fail: {report:?}")));
    }
    Ok(set)
}

/// Each algebraic identity of an [`ExponentSet`], decided exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    /// `q = (2σ+1) q̃′`.
    pub dual_q: bool,
    /// `p = (2σ+1) p̃′`.
    pub dual_p: bool,
    /// `r = (2σ+1) r′`.
    pub dual_r: bool,
    /// `1/p₀′ = 1/p₀ + 2σ/p`.
    pub holder_p: bool,
    /// `1/q₀′ = 1/q₀ + 2σ/q`.
    pub holder_q: bool,
    /// `0 < s < 1/2`, required when `σ > 2/d`.
    pub sobolev_index: bool,
    /// `p ≥ p₀`.
    pub p_above_p0: bool,
}

impl IdentityReport {
    pub fn all(&self) -> bool {
        self.dual_q
            && self.dual_p
            && self.dual_r
            && self.holder_p
            && self.holder_q
            && self.sobolev_index
            && self.p_above_p0
    }
}

/// `(2σ+1) · x′ == y`.
fn dual_matches(sigma: Rational64, x: Exponent, y: Exponent) -> bool {
    match (x.conjugate(), y) {
        (Exponent::Finite(xc), Exponent::Finite(y)) => (rat(2) * sigma + 1) * xc == y,
        (Exponent::Infinite, Exponent::Infinite) => true,
        _ => false,
    }
}

impl ExponentSet {
    pub fn identities(&self) -> IdentityReport {
        let sigma = self.sigma;
        let two_s = rat(2) * sigma;
        let sob = if sigma > Rational64::new(2, self.d as i64) {
            self.s > Rational64::zero() && self.s < Rational64::new(1, 2)
        } else {
            true
        };
        let p_ge = match (self.p, self.p0) {
            (Exponent::Infinite, _) => true,
            (Exponent::Finite(_), Exponent::Infinite) => false,
            (Exponent::Finite(p), Exponent::Finite(p0)) => p >= p0,
        };
        IdentityReport {
            dual_q: dual_matches(sigma, self.q_tilde, self.q),
            dual_p: dual_matches(sigma, self.p_tilde, self.p),
            dual_r: dual_matches(sigma, self.r, self.r),
            holder_p: self.p0.conjugate().recip() == self.p0.recip() + two_s * self.p.recip(),
            holder_q: self.q0.conjugate().recip() == self.q0.recip() + two_s * self.q.recip(),
            sobolev_index: sob,
            p_above_p0: p_ge,
        }
    }

    pub fn admissible(&self) -> bool {
        check_admissible(self.q0, self.r, self.d) && check_time_window(self.p0, self.r, self.d, self.n)
    }

    pub fn acceptable(&self) -> AcceptabilityReport {
        check_acceptable(self.p, self.p_tilde, self.r, self.d, self.n)
    }
}

/// `2/q = d(1/2 − 1/r)` with `2 ≤ r < 2d/(d−2)`.
pub fn check_admissible(q: Exponent, r: Exponent, d: u32) -> bool {
    let di = rat(d as i64);
    let half = Rational64::new(1, 2);
    let r_ok = match r {
        Exponent::Finite(r) => r >= rat(2) && (d <= 2 || r < rat(2) * di / (di - 2)),
        Exponent::Infinite => false,
    };
    r_ok && rat(2) * q.recip() == di * (half - r.recip())
}

/// `2/p = (d−n)(1/2 − 1/r)`.
pub fn check_time_window(p: Exponent, r: Exponent, d: u32, n: u32) -> bool {
    rat(2) * p.recip() == rat((d - n) as i64) * (Rational64::new(1, 2) - r.recip())
}

/// The three conditions on `(p, p̃, r)`; the middle one is a pair of inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AcceptabilityReport {
    /// `2/p + 2/p̃ = (d−n)(1 − 2/r)`.
    pub scaling_identity: bool,
    /// `1/p + (d−n)/r < (d−n)/2`.
    pub acceptable_p: bool,
    /// `1/p̃ + (d−n)/r < (d−n)/2`.
    pub acceptable_p_tilde: bool,
    /// `1/p + 1/p̃ < 1`.
    pub sum_below_one: bool,
}

impl AcceptabilityReport {
    pub fn all(&self) -> bool {
        self.scaling_identity && self.acceptable_p && self.acceptable_p_tilde && self.sum_below_one
    }
}

pub fn check_acceptable(p: Exponent, p_tilde: Exponent, r: Exponent, d: u32, n: u32) -> AcceptabilityReport {
    let k = rat((d - n) as i64);
    let (ip, ipt, ir) = (p.recip(), p_tilde.recip(), r.recip());
    AcceptabilityReport {
        scaling_identity: rat(2) * ip + rat(2) * ipt == k * (rat(1) - rat(2) * ir),
        acceptable_p: ip + k * ir < k / 2,
        acceptable_p_tilde: ipt + k * ir < k / 2,
        sum_below_one: ip + ipt < rat(1),
    }
}

/// `count` equally spaced rationals covering the window `[2/(d−n), 2/(d−2))`; for d = 2 the
/// window is cut at `2/(d−n) + 6`.
pub fn window_sweep(d: u32, n: u32, count: usize) -> Vec<Rational64> {
    if n == 0 || n >= d || count == 0 {
        return Vec::new();
    }
    let lo = Rational64::new(2, (d - n) as i64);
    let hi = if d > 2 { Rational64::new(2, d as i64 - 2) } else { lo + 6 };
    if hi <= lo {
        return Vec::new();
    }
    (0..count).map(|j| lo + (hi - lo) * Rational64::new(j as i64, count as i64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: i64, d: i64) -> Exponent {
        Exponent::finite(n, d)
    }

    #[test]
    fn three_one_three_halves() {
        let s = exponent_set(3, 1, Rational64::new(3, 2)).unwrap();
        assert_eq!(s.r, e(5, 1));
        assert_eq!(s.q0, e(20, 9));
        assert_eq!(s.p0, e(10, 3));
        assert_eq!(s.q, e(30, 1));
        assert_eq!(s.p, e(15, 2));
        assert_eq!(s.q_tilde, e(15, 13));
        assert_eq!(s.p_tilde, e(15, 7));
        assert_eq!(s.s, Rational64::new(5, 12));
        assert_eq!(s.delta, Rational64::new(3, 5));
    }

    #[test]
    fn two_one_three() {
        let s = exponent_set(2, 1, Rational64::from_integer(3)).unwrap();
        assert_eq!(s.r, e(8, 1));
        assert_eq!(s.q0, e(8, 3));
        assert_eq!(s.p0, e(16, 3));
        assert_eq!(s.q, e(24, 1));
        assert_eq!(s.p, e(48, 5));
        assert_eq!(s.q_tilde, e(24, 17));
        assert_eq!(s.p_tilde, e(48, 13));
        assert_eq!(s.s, Rational64::new(1, 3));
        assert_eq!(s.delta, Rational64::new(3, 8));
        assert!(s.admissible());
        assert!(s.acceptable().all());
    }

    #[test]
    fn admissibility_edge_cases() {
        assert!(!check_admissible(e(2, 1), e(2, 1), 3));
        for d in 2..=5 {
            assert!(check_admissible(Exponent::Infinite, e(2, 1), d));
        }
    }

    #[test]
    fn conjugates() {
        assert_eq!(Exponent::Infinite.conjugate(), e(1, 1));
        assert_eq!(e(1, 1).conjugate(), Exponent::Infinite);
        assert_eq!(e(5, 1).conjugate(), e(5, 4));
    }

    #[test]
    fn sigma_c_values() {
        let c3 = sigma_c(3).unwrap();
        assert_eq!(c3.exact(), Some(Rational64::new(1, 2)));
        let c2 = sigma_c(2).unwrap();
        assert!((c2.value - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(c2.exact(), None);
        for d in 2..=5 {
            let c = sigma_c(d).unwrap();
            assert!(c.residual(c.value).abs() < 1e-12);
            assert!(c.value < 2.0 / d as f64);
        }
    }

    #[test]
    fn broken_pair_fails_scaling() {
        let s = exponent_set(3, 1, Rational64::new(3, 2)).unwrap();
        let half = Exponent::Finite(s.p_tilde.value().unwrap() / 2);
        assert!(!check_acceptable(s.p, half, s.r, 3, 1).scaling_identity);
    }

    #[test]
    fn out_of_window_rejected() {
        assert!(exponent_set(3, 1, Rational64::new(1, 2)).is_err());
        assert!(exponent_set(3, 1, Rational64::from_integer(2)).is_err());
        assert!(window_sweep(3, 2, 50).is_empty());
    }

    #[test]
    fn json_uses_fraction_strings() {
        let s = exponent_set(2, 1, Rational64::from_integer(3)).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["p"], "48/5");
        assert_eq!(v["sigma"], "3/1");
    }
}
