//! Exact rational scalars and points.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Arbitrary precision rational, always kept in lowest terms.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `2^-k` as an exact rational.
pub fn pow2_inv(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k as usize)
}

/// `4^-k` as an exact rational.
pub fn pow4_inv(k: u32) -> Rational {
    pow2_inv(2 * k)
}

/// Renders a rational as `"num/den"` (or `"num"` for integers).
pub fn to_fraction_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"num/den"` or `"num"`.
pub fn parse_fraction(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}

/// Rounds toward zero to `digits` decimal places and renders the result.
pub fn to_decimal_string(r: &Rational, digits: usize) -> String {
    let neg = r.is_negative();
    let a = r.abs();
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (a.numer() * &scale).div_floor(a.denom());
    let (int_part, frac_part) = scaled.div_rem(&scale);
    let sign = if neg && !scaled.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int_part}");
    }
    format!(
        "{sign}{int_part}.{:0>width$}",
        frac_part.to_string(),
        width = digits
    )
}

/// Nearest `f64`, robust for numerators and denominators beyond the `f64` range.
pub fn to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let (m, e) = mantissa_exp(r);
    m * 2f64.powi(e)
}

/// Natural logarithm of a positive rational without passing through `f64` overflow.
pub fn ln(r: &Rational) -> f64 {
    assert!(r.is_positive(), "ln of a non-positive rational");
    let (m, e) = mantissa_exp(r);
    m.ln() + e as f64 * std::f64::consts::LN_2
}

// r = m * 2^e with m in [0.5, 2) for positive r
fn mantissa_exp(r: &Rational) -> (f64, i32) {
    let n = r.numer();
    let d = r.denom();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let nn = (n >> shift_n as usize).to_f64().unwrap_or(0.0);
    let dd = (d >> shift_d as usize).to_f64().unwrap_or(1.0);
    (nn / dd, (shift_n - shift_d) as i32)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(Rational::zero(), Rational::zero())
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Self::new(int(x), int(y))
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [to_f64(&self.x), to_f64(&self.y)]
    }

    pub fn sub(&self, o: &Point) -> Point {
        Point::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn add(&self, o: &Point) -> Point {
        Point::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn dist2(&self, o: &Point) -> Rational {
        let dx = &self.x - &o.x;
        let dy = &self.y - &o.y;
        &dx * &dx + &dy * &dy
    }

    /// `|dx| + |dy|`
    pub fn l1(&self, o: &Point) -> Rational {
        (&self.x - &o.x).abs() + (&self.y - &o.y).abs()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {})",
            to_fraction_string(&self.x),
            to_fraction_string(&self.y)
        )
    }
}

/// Exact point in JSON form: both coordinates as `"num/den"` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRepr {
    pub x: String,
    pub y: String,
}

impl From<&Point> for PointRepr {
    fn from(p: &Point) -> Self {
        Self {
            x: to_fraction_string(&p.x),
            y: to_fraction_string(&p.y),
        }
    }
}

/// `∫ y dx` along the straight segment `a → b`.
pub fn segment_y_dx(a: &Point, b: &Point) -> Rational {
    (&a.y + &b.y) * (&b.x - &a.x) / int(2)
}

/// Signed shoelace area of a closed polygon (counter-clockwise positive).
pub fn shoelace_area(poly: &[Point]) -> Rational {
    let n = poly.len();
    let mut acc = Rational::zero();
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        acc += &a.x * &b.y - &b.x * &a.y;
    }
    acc / int(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_strings_round_trip() {
        let r = ratio(-15, 16);
        assert_eq!(to_fraction_string(&r), "-15/16");
        assert_eq!(parse_fraction("-15/16"), Some(r));
        assert_eq!(parse_fraction("3"), Some(int(3)));
        assert_eq!(parse_fraction("1/0"), None);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal_string(&ratio(1, 3), 4), "0.3333");
        assert_eq!(to_decimal_string(&ratio(-9, 16), 4), "-0.5625");
        assert_eq!(to_decimal_string(&int(2), 2), "2.00");
    }

    #[test]
    fn huge_rationals_convert() {
        let tiny = pow2_inv(3000);
        assert_eq!(to_f64(&tiny), 0.0);
        let r = Rational::new(BigInt::from(3) << 2000usize, BigInt::one() << 2001usize);
        assert!((to_f64(&r) - 1.5).abs() < 1e-15);
        assert!((ln(&tiny) + 3000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn shoelace_unit_square() {
        let sq = [
            Point::from_ints(0, 0),
            Point::from_ints(1, 0),
            Point::from_ints(1, 1),
            Point::from_ints(0, 1),
        ];
        assert_eq!(shoelace_area(&sq), int(1));
    }
}
