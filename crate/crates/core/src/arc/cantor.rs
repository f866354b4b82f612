//! Points of the Cantor part of the arc, named by address plus tail.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::address::Address;
use super::template::Rect;
use super::tree::{locate, Templates};
use crate::error::{domain, Error, Result};
use crate::exact::{pow2_inv, ratio, Point, Rational};

/// How the digits continue past the stored prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tail {
    /// `w000...`, the point `A_w`.
    Zeros,
    /// `w333...`, the point `B_w`.
    Threes,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CantorPoint {
    pub address: Address,
    pub tail: Tail,
}

impl CantorPoint {
    pub fn new(address: Address, tail: Tail) -> Self {
        Self { address, tail }
    }

    /// `A = (0, 0)`
    pub fn start() -> Self {
        Self::new(Address::root(), Tail::Zeros)
    }

    /// `B = (1, 0)`
    pub fn end() -> Self {
        Self::new(Address::root(), Tail::Threes)
    }

    pub fn is_resolved(&self) -> bool {
        self.tail != Tail::Unresolved
    }

    /// Digit `k` (0-based) of the infinite address.
    pub fn digit(&self, k: usize) -> Option<u8> {
        match self.address.digits().get(k) {
            Some(&d) => Some(d),
            None => match self.tail {
                Tail::Zeros => Some(0),
                Tail::Threes => Some(3),
                Tail::Unresolved => None,
            },
        }
    }

    /// Shortest address with the same point (trailing tail digits dropped).
    pub fn canonical(&self) -> CantorPoint {
        let fill = match self.tail {
            Tail::Zeros => 0,
            Tail::Threes => 3,
            Tail::Unresolved => return self.clone(),
        };
        let mut d = self.address.digits().to_vec();
        while d.last() == Some(&fill) {
            d.pop();
        }
        CantorPoint::new(Address::new(d).expect("digits already valid"), self.tail)
    }

    /// True if this is the start point `A` of the whole arc.
    pub fn is_arc_start(&self) -> bool {
        self.tail == Tail::Zeros && self.address.digits().iter().all(|&d| d == 0)
    }

    /// True if this is the end point `B` of the whole arc.
    pub fn is_arc_end(&self) -> bool {
        self.tail == Tail::Threes && self.address.digits().iter().all(|&d| d == 3)
    }
}

impl fmt::Display for CantorPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = match self.tail {
            Tail::Zeros => "0*",
            Tail::Threes => "3*",
            Tail::Unresolved => "?",
        };
        write!(f, "{}{}", self.address, t)
    }
}

/// Parses `"0312"` (unresolved), `"0312.A"`/`"0312:0*"` (zeros tail) or `"0312.B"`/`"0312:3*"`.
impl FromStr for CantorPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (addr, tail) = match s.rsplit_once(['.', ':']) {
            Some((a, t)) => {
                let tail = match t {
                    "A" | "a" | "0*" => Tail::Zeros,
                    "B" | "b" | "3*" => Tail::Threes,
                    _ => return Err(domain(format!("unknown tail {t:?}"))),
                };
                (a, tail)
            }
            None => (s, Tail::Unresolved),
        };
        Ok(CantorPoint::new(addr.parse()?, tail))
    }
}

/// Either an exact point or the square known to contain it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolved {
    Exact(Point),
    Approximate(Rect),
}

pub fn coord_of(templates: &Templates, p: &CantorPoint) -> Resolved {
    let node = locate(templates, &p.address);
    match p.tail {
        Tail::Zeros => Resolved::Exact(node.entry),
        Tail::Threes => Resolved::Exact(node.exit),
        Tail::Unresolved => Resolved::Approximate(node.bounds()),
    }
}

pub fn exact_coord(templates: &Templates, p: &CantorPoint) -> Result<Point> {
    match coord_of(templates, p) {
        Resolved::Exact(x) => Ok(x),
        Resolved::Approximate(_) => Err(Error::ApproximatePoint(p.to_string())),
    }
}

/// Depth of the smallest common square of two distinct resolved points.
pub fn common_depth(p: &CantorPoint, q: &CantorPoint) -> Result<usize> {
    if !p.is_resolved() || !q.is_resolved() {
        return Err(Error::ApproximatePoint(format!("{p} / {q}")));
    }
    let limit = p.address.depth().max(q.address.depth()) + 1;
    for k in 0..limit {
        if p.digit(k) != q.digit(k) {
            return Ok(k);
        }
    }
    Err(Error::UndefinedSeparation)
}

/// `1 / (2^{m+1} (m+1)(m+2))`, the minimal gap between two children of a depth-`m` square.
pub fn separation_for_depth(m: usize) -> Rational {
    let mm = m as i64;
    pow2_inv(m as u32 + 1) * ratio(1, (mm + 1) * (mm + 2))
}

/// Common-square depth `m` and the guaranteed lower bound on `|p - q|`.
pub fn separation_bound(p: &CantorPoint, q: &CantorPoint) -> Result<(usize, Rational)> {
    let m = common_depth(p, q)?;
    Ok((m, separation_for_depth(m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::template::{alpha, side_len};
    use crate::exact::int;

    fn cp(s: &str) -> CantorPoint {
        s.parse().unwrap()
    }

    #[test]
    fn tails_resolve_to_anchors() {
        let t = Templates::new(6);
        assert_eq!(exact_coord(&t, &cp(".A")).unwrap(), Point::origin());
        assert_eq!(exact_coord(&t, &cp("0000.A")).unwrap(), Point::origin());
        assert_eq!(
            exact_coord(&t, &cp("3333.B")).unwrap(),
            Point::from_ints(1, 0)
        );
        assert!(matches!(coord_of(&t, &cp("")), Resolved::Approximate(_)));
        assert!(exact_coord(&t, &cp("12")).is_err());
    }

    #[test]
    fn resolved_point_lies_in_every_prefix_square() {
        let t = Templates::new(6);
        let p = cp("1320.B");
        let x = exact_coord(&t, &p).unwrap();
        for k in 0..=p.address.depth() {
            assert!(locate(&t, &p.address.prefix(k)).bounds().contains(&x));
        }
    }

    #[test]
    fn separation_examples() {
        let (m, b) = separation_bound(&CantorPoint::start(), &CantorPoint::end()).unwrap();
        assert_eq!((m, b), (0, crate::exact::ratio(1, 4)));
        let (m, b) = separation_bound(&cp("00.A"), &cp("01.A")).unwrap();
        assert_eq!((m, b.clone()), (1, crate::exact::ratio(1, 24)));
        assert_eq!(b, alpha(2) * side_len(1));
        assert!(matches!(
            separation_bound(&cp("01.A"), &cp("0100.A")),
            Err(Error::UndefinedSeparation)
        ));
    }

    #[test]
    fn separation_closed_form_matches_gap() {
        for m in 0..25 {
            assert_eq!(
                separation_for_depth(m),
                alpha(m + 1) * side_len(m),
                "m = {m}"
            );
        }
        assert!(separation_for_depth(0) <= int(1));
    }

    #[test]
    fn canonical_drops_tail_digits() {
        assert_eq!(cp("1200.A").canonical(), cp("12.A"));
        assert_eq!(cp("3333.B").canonical(), cp(".B"));
        assert!(cp("000.A").is_arc_start());
        assert!(cp("33.B").is_arc_end());
    }
}
