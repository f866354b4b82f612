use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// A word over `{0,1,2,3}` naming a square of the construction.
///
/// The empty address is the unit square. Appending digit `j` names the
/// `j`-th child, and lexicographic order on equal-length addresses is the
/// order in which the arc visits the squares.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Address(Vec<u8>);

impl Address {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn new(digits: Vec<u8>) -> Result<Self> {
        if let Some(d) = digits.iter().find(|&&d| d > 3) {
            return Err(domain(format!("address digit {d} is not in 0..=3")));
        }
        Ok(Self(digits))
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, j: u8) -> Self {
        assert!(j < 4);
        let mut d = self.0.clone();
        d.push(j);
        Self(d)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(Self(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn prefix(&self, len: usize) -> Self {
        Self(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn common_prefix_len(&self, other: &Address) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Base-4 value of the digits; the position of the square among its depth.
    pub fn index(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &d| acc * 4 + d as u64)
    }

    pub fn from_index(depth: usize, mut index: u64) -> Self {
        let mut digits = vec![0u8; depth];
        for slot in digits.iter_mut().rev() {
            *slot = (index % 4) as u8;
            index /= 4;
        }
        Self(digits)
    }

    /// Pads with `fill` up to `depth` digits.
    pub fn padded(&self, depth: usize, fill: u8) -> Self {
        let mut d = self.0.clone();
        while d.len() < depth {
            d.push(fill);
        }
        Self(d)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for Address {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let digits = s
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .filter(|d| *d < 4)
                    .map(|d| d as u8)
                    .ok_or_else(|| domain(format!("invalid address character {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(digits))
    }
}

impl TryFrom<String> for Address {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Address> for String {
    fn from(a: Address) -> String {
        a.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let a: Address = "3102".parse().unwrap();
        assert_eq!(a.index(), 3 * 64 + 16 + 2);
        assert_eq!(Address::from_index(4, a.index()), a);
    }

    #[test]
    fn rejects_bad_digits() {
        assert!("0124".parse::<Address>().is_err());
        assert!(Address::new(vec![0, 5]).is_err());
    }

    #[test]
    fn order_is_arc_order() {
        let a: Address = "0333".parse().unwrap();
        let b: Address = "1000".parse().unwrap();
        assert!(a < b);
        assert_eq!(a.common_prefix_len(&b), 0);
        assert_eq!(a.parent().unwrap().to_string(), "033");
    }
}
