//! Model constants for `i u_t = H u + λ|u|^{2σ} u` and their validity windows.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Sign of the nonlinearity: `-1` focusing, `+1` defocusing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Focusing,
    Defocusing,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Focusing => -1.0,
            Sign::Defocusing => 1.0,
        }
    }

    pub fn from_int(v: i64) -> Result<Self> {
        match v {
            -1 => Ok(Sign::Focusing),
            1 => Ok(Sign::Defocusing),
            other => Err(Error::InvalidParams(format!("lambda must be -1 or 1, got {other}"))),
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Sign::Focusing => -1,
            Sign::Defocusing => 1,
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i64(self.as_int())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Sign::from_int(v).map_err(serde::de::Error::custom)
    }
}

/// Parses `"num/den"` (or a bare integer) into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::InvalidParams(format!("cannot parse rational {s:?}"));
    let r = match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Rational64::new(n, d)
        }
        None => Rational64::from_integer(s.parse().map_err(|_| bad())?),
    };
    Ok(r)
}

pub fn format_rational(r: &Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub mod rational_str {
    //! serde helpers storing a rational as `"num/den"`.
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational64, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Dimension `d`, confined dimensions `n`, exponent `σ` and sign `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    pub d: u32,
    pub n: u32,
    pub sigma: Rational64,
    pub lambda: Sign,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    d: u32,
    n: u32,
    #[serde(with = "rational_str")]
    sigma: Rational64,
    lambda: Sign,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        ModelParams::new(r.d, r.n, r.sigma, r.lambda)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams { d: p.d, n: p.n, sigma: p.sigma, lambda: p.lambda }
    }
}

/// Validity flags of a parameter set, each decided by exact rational comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// λ = −1, n = 1, σ ≥ 1/2 and 2/(d−1) < σ < 2/(d−2).
    pub theorem_window: bool,
    /// 2/(d−n) ≤ σ < 2/(d−2).
    pub strichartz_window: bool,
    /// 2/(d−n) < σ < 2/(d−2).
    pub profile_window: bool,
}

impl ModelParams {
    pub fn new(d: u32, n: u32, sigma: Rational64, lambda: Sign) -> Result<Self> {
        if !(2..=5).contains(&d) {
            return Err(Error::InvalidParams(format!("d must lie in [2, 5], got {d}")));
        }
        if n < 1 || n > d - 1 {
            return Err(Error::InvalidParams(format!("n must lie in [1, d-1], got n={n}, d={d}")));
        }
        if !sigma.is_positive() {
            return Err(Error::InvalidParams(format!("sigma must be positive, got {sigma}")));
        }
        Ok(ModelParams { d, n, sigma, lambda })
    }

    /// Number of free (z) directions.
    pub fn free_dims(&self) -> u32 {
        self.d - self.n
    }

    pub fn sigma_f64(&self) -> f64 {
        self.sigma.to_f64().expect("finite rational")
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda.value()
    }

    /// Exponent `2σ + 2` of the potential-energy norm.
    pub fn power(&self) -> f64 {
        2.0 * self.sigma_f64() + 2.0
    }

    /// Energy-subcritical upper bound `2/(d−2)`; `None` for d = 2.
    pub fn upper_bound(&self) -> Option<Rational64> {
        (self.d > 2).then(|| Rational64::new(2, self.d as i64 - 2))
    }

    fn below_upper(&self) -> bool {
        self.upper_bound().map_or(true, |ub| self.sigma < ub)
    }

    pub fn validate(&self) -> ValidityReport {
        let s = self.sigma;
        let half = Rational64::new(1, 2);
        let lower_free = Rational64::new(2, self.free_dims() as i64);
        let theorem_window = self.lambda == Sign::Focusing
            && self.n == 1
            && s >= half
            && s > Rational64::new(2, self.d as i64 - 1)
            && self.below_upper();
        let strichartz_window = s >= lower_free && self.below_upper();
        let profile_window = s > lower_free && self.below_upper();
        ValidityReport { theorem_window, strichartz_window, profile_window }
    }

    pub fn require_focusing(&self) -> Result<()> {
        if self.lambda != Sign::Focusing {
            return Err(Error::InvalidParams("operation requires the focusing case lambda = -1".into()));
        }
        Ok(())
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d={} n={} sigma={} lambda={}",
            self.d,
            self.n,
            format_rational(&self.sigma),
            self.lambda.as_int()
        )
    }
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let v: i64 = s.trim().parse().map_err(|_| Error::InvalidParams(format!("bad lambda {s:?}")))?;
        Sign::from_int(v)
    }
}
