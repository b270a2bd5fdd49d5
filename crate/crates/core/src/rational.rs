//! Exact rationals for perturbation sizes and gap thresholds.
//!
//! In scenario files a rational is written as an integer, a string `"p/q"`,
//! or a pair `[p, q]`. It is always written back as a string.

use num_rational::Ratio;
use serde::{de, Deserialize, Deserializer, Serializer};

pub type Rational = Ratio<i64>;

pub fn parse(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: i64 = p.parse().map_err(|_| format!("bad numerator in `{s}`"))?;
    let q: i64 = q.parse().map_err(|_| format!("bad denominator in `{s}`"))?;
    if q == 0 {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(Rational::new(p, q))
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    if r.is_integer() {
        s.serialize_str(&r.numer().to_string())
    } else {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Text(String),
        Pair([i64; 2]),
    }
    match Repr::deserialize(d)? {
        Repr::Int(n) => Ok(Rational::from_integer(n)),
        Repr::Text(t) => parse(&t).map_err(de::Error::custom),
        Repr::Pair([p, q]) if q != 0 => Ok(Rational::new(p, q)),
        Repr::Pair(_) => Err(de::Error::custom("zero denominator")),
    }
}
