//! Exact half-integers stored as doubled integers.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// An element of ½ℤ. The wrapped value is twice the number represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Half(i64);

impl Half {
    pub const ZERO: Half = Half(0);

    pub const fn from_int(n: i64) -> Self {
        Half(2 * n)
    }

    pub const fn from_doubled(twice: i64) -> Self {
        Half(twice)
    }

    pub const fn doubled(self) -> i64 {
        self.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// The integer value, if integral.
    pub fn to_int(self) -> Option<i64> {
        self.is_integer().then_some(self.0 / 2)
    }

    pub fn num_den(self) -> (i64, i64) {
        if self.is_integer() {
            (self.0 / 2, 1)
        } else {
            (self.0, 2)
        }
    }
}

impl From<i64> for Half {
    fn from(n: i64) -> Self {
        Half::from_int(n)
    }
}

impl Add for Half {
    type Output = Half;
    fn add(self, o: Half) -> Half {
        Half(self.0 + o.0)
    }
}

impl AddAssign for Half {
    fn add_assign(&mut self, o: Half) {
        self.0 += o.0;
    }
}

impl Sub for Half {
    type Output = Half;
    fn sub(self, o: Half) -> Half {
        Half(self.0 - o.0)
    }
}

impl Neg for Half {
    type Output = Half;
    fn neg(self) -> Half {
        Half(-self.0)
    }
}

impl Mul<i64> for Half {
    type Output = Half;
    fn mul(self, k: i64) -> Half {
        Half(self.0 * k)
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.num_den() {
            (n, 1) => write!(f, "{n}"),
            (n, d) => write!(f, "{n}/{d}"),
        }
    }
}

/// Accepts `n` or `n/2`, the same forms `Display` writes.
impl std::str::FromStr for Half {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("`{s}` is not an integer or a half-integer n/2");
        match s.trim().split_once('/') {
            None => s.trim().parse().map(Half::from_int).map_err(|_| bad()),
            Some((n, d)) if d.trim() == "2" => n.trim().parse().map(Half::from_doubled).map_err(|_| bad()),
            Some(_) => Err(bad()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HalfRepr {
    num: i64,
    den: i64,
}

impl Serialize for Half {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (num, den) = self.num_den();
        HalfRepr { num, den }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Half {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            Int(i64),
            Frac(HalfRepr),
        }
        match Either::deserialize(d)? {
            Either::Int(n) => Ok(Half::from_int(n)),
            Either::Frac(HalfRepr { num, den: 1 }) => Ok(Half::from_int(num)),
            Either::Frac(HalfRepr { num, den: 2 }) => Ok(Half::from_doubled(num)),
            Either::Frac(HalfRepr { den, .. }) => {
                Err(serde::de::Error::custom(format!("half-integer denominator must be 1 or 2, got {den}")))
            }
        }
    }
}
