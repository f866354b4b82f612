//! The one-step template set: four corner squares and three connectors.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exact::{int, ratio, Point, Rational};

/// Gap parameter of refinement step `k` (`k >= 1`): `1/(k+1)^2`.
pub fn alpha(k: usize) -> Rational {
    assert!(k >= 1, "alpha is indexed from 1");
    let d = (k as i64 + 1) * (k as i64 + 1);
    ratio(1, d)
}

/// Side of a depth-`n` square, `prod_{i<=n} (1 - alpha_i)/2`, in closed form.
pub fn side_len(n: usize) -> Rational {
    let n = n as i64;
    Rational::new(
        (n + 2).into(),
        (num_bigint::BigInt::one() << (n + 1) as usize) * (n + 1),
    )
}

/// Orthogonal matrix with entries in `{-1, 0, 1}` (a signed permutation).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frame(pub [[i8; 2]; 2]);

impl Frame {
    pub const IDENTITY: Frame = Frame([[1, 0], [0, 1]]);
    /// `(x, y) -> (y, x)`
    pub const SWAP: Frame = Frame([[0, 1], [1, 0]]);
    /// `(x, y) -> (-y, -x)`
    pub const ANTI_SWAP: Frame = Frame([[0, -1], [-1, 0]]);

    /// The frame taking the template onto child `j` of the template.
    pub fn for_digit(j: u8) -> Frame {
        match j {
            0 => Frame::SWAP,
            1 | 2 => Frame::IDENTITY,
            3 => Frame::ANTI_SWAP,
            _ => panic!("digit {j} out of range"),
        }
    }

    pub fn compose(&self, rhs: &Frame) -> Frame {
        let a = &self.0;
        let b = &rhs.0;
        let mut m = [[0i8; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Frame(m)
    }

    pub fn transpose(&self) -> Frame {
        let m = &self.0;
        Frame([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn det(&self) -> i8 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn is_orthogonal(&self) -> bool {
        self.transpose().compose(self) == Frame::IDENTITY
    }

    pub fn apply(&self, p: &Point) -> Point {
        let m = &self.0;
        let c = |k: i8, v: &Rational| -> Rational {
            match k {
                0 => Rational::zero(),
                1 => v.clone(),
                _ => -v.clone(),
            }
        };
        Point::new(
            c(m[0][0], &p.x) + c(m[0][1], &p.y),
            c(m[1][0], &p.x) + c(m[1][1], &p.y),
        )
    }

    pub fn apply_f64(&self, p: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [
            m[0][0] as f64 * p[0] + m[0][1] as f64 * p[1],
            m[1][0] as f64 * p[0] + m[1][1] as f64 * p[1],
        ]
    }
}

/// Closed axis-aligned box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn from_corners(a: &Point, b: &Point) -> Rect {
        Rect {
            min: Point::new(a.x.clone().min(b.x.clone()), a.y.clone().min(b.y.clone())),
            max: Point::new(a.x.clone().max(b.x.clone()), a.y.clone().max(b.y.clone())),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.min.x <= p.x && p.x <= self.max.x && self.min.y <= p.y && p.y <= self.max.y
    }

    pub fn contains_rect(&self, r: &Rect) -> bool {
        self.contains(&r.min) && self.contains(&r.max)
    }

    pub fn width(&self) -> Rational {
        &self.max.x - &self.min.x
    }

    pub fn height(&self) -> Rational {
        &self.max.y - &self.min.y
    }

    pub fn area(&self) -> Rational {
        self.width() * self.height()
    }

    /// Exact squared Euclidean distance between two boxes.
    pub fn dist2(&self, o: &Rect) -> Rational {
        let gap = |lo1: &Rational, hi1: &Rational, lo2: &Rational, hi2: &Rational| {
            if hi1 < lo2 {
                lo2 - hi1
            } else if hi2 < lo1 {
                lo1 - hi2
            } else {
                Rational::zero()
            }
        };
        let dx = gap(&self.min.x, &self.max.x, &o.min.x, &o.max.x);
        let dy = gap(&self.min.y, &self.max.y, &o.min.y, &o.max.y);
        &dx * &dx + &dy * &dy
    }

    pub fn to_f64(&self) -> [f64; 4] {
        let a = self.min.to_f64();
        let b = self.max.to_f64();
        [a[0], a[1], b[0], b[1]]
    }
}

/// Exact description of the template set for one gap parameter.
#[derive(Clone, Debug)]
pub struct Template {
    pub alpha: Rational,
    /// `(1 - alpha)/2`
    pub side: Rational,
    pub squares: [Rect; 4],
    pub entries: [Point; 4],
    pub exits: [Point; 4],
    /// `[B_j, A_{j+1}]` for `j = 0, 1, 2`.
    pub connectors: [(Point, Point); 3],
}

impl Template {
    pub fn new(alpha: Rational) -> Result<Self> {
        if !alpha.is_positive() || alpha >= int(1) {
            return Err(domain(format!("alpha = {alpha} is not in (0, 1)")));
        }
        let one = int(1);
        let s = (&one - &alpha) / int(2);
        let t = &one - &s; // (1 + alpha)/2
        let z = Rational::zero();
        let p = |x: &Rational, y: &Rational| Point::new(x.clone(), y.clone());
        let sq = |x0: &Rational, y0: &Rational| Rect {
            min: p(x0, y0),
            max: p(&(x0 + &s), &(y0 + &s)),
        };
        let squares = [sq(&z, &z), sq(&z, &t), sq(&t, &t), sq(&t, &z)];
        let entries = [p(&z, &z), p(&z, &t), p(&t, &t), p(&one, &s)];
        let exits = [p(&z, &s), p(&s, &t), p(&one, &t), p(&one, &z)];
        let connectors = [
            (exits[0].clone(), entries[1].clone()),
            (exits[1].clone(), entries[2].clone()),
            (exits[2].clone(), entries[3].clone()),
        ];
        Ok(Self {
            alpha,
            side: s,
            squares,
            entries,
            exits,
            connectors,
        })
    }

    /// Template-coordinate image of `p` under the child-`j` similarity.
    pub fn child_map(&self, j: u8, p: &Point) -> Point {
        let f = Frame::for_digit(j).apply(p);
        let e = &self.entries[j as usize];
        Point::new(&e.x + &self.side * &f.x, &e.y + &self.side * &f.y)
    }
}
