//! The approximating curves `J_n` and the area law for `E_n`.

use num_traits::{Signed, Zero};

use super::template::{alpha, side_len};
use super::tree::ArcTree;
use crate::error::{domain, Result};
use crate::exact::{int, ratio, segment_y_dx, Point, Rational};

/// Ordered vertices joined by straight segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolylineCurve {
    pub vertices: Vec<Point>,
}

impl PolylineCurve {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(domain("a polyline needs at least two vertices"));
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(domain("consecutive polyline vertices coincide"));
        }
        Ok(Self { vertices })
    }

    pub fn start(&self) -> &Point {
        &self.vertices[0]
    }

    pub fn end(&self) -> &Point {
        self.vertices.last().expect("non-empty")
    }

    pub fn segments(&self) -> impl Iterator<Item = (&Point, &Point)> {
        self.vertices.windows(2).map(|w| (&w[0], &w[1]))
    }

    pub fn is_axis_parallel(&self) -> bool {
        self.segments().all(|(a, b)| a.x == b.x || a.y == b.y)
    }

    /// `∫ y dx` from the start to every vertex.
    pub fn prefix_y_dx(&self) -> Vec<Rational> {
        let mut acc = Rational::zero();
        let mut out = Vec::with_capacity(self.vertices.len());
        out.push(acc.clone());
        for (a, b) in self.segments() {
            acc += segment_y_dx(a, b);
            out.push(acc.clone());
        }
        out
    }

    /// Index of the first segment containing `p`, if any.
    pub fn find_segment(&self, p: &Point) -> Option<usize> {
        self.segments().position(|(a, b)| on_axis_segment(a, b, p))
    }

    /// `∫ y dx` along the polyline from its start to `p`.
    pub fn y_dx_to(&self, p: &Point) -> Result<Rational> {
        let i = self
            .find_segment(p)
            .ok_or_else(|| domain(format!("{p} is not on the curve")))?;
        let mut acc = Rational::zero();
        for (a, b) in self.segments().take(i) {
            acc += segment_y_dx(a, b);
        }
        Ok(acc + segment_y_dx(&self.vertices[i], p))
    }

    /// Sub-polyline between two points on the curve, `p` first along the curve.
    pub fn sub_path(&self, p: &Point, q: &Point) -> Result<Vec<Point>> {
        let i = self
            .find_segment(p)
            .ok_or_else(|| domain(format!("{p} is not on the curve")))?;
        let j = self
            .find_segment(q)
            .ok_or_else(|| domain(format!("{q} is not on the curve")))?;
        let mut out = vec![p.clone()];
        for v in &self.vertices[i + 1..=j] {
            if out.last() != Some(v) {
                out.push(v.clone());
            }
        }
        if out.last() != Some(q) {
            out.push(q.clone());
        }
        Ok(out)
    }

    /// Exact pairwise test over all non-adjacent segment pairs. Quadratic.
    pub fn is_simple(&self) -> bool {
        let segs: Vec<_> = self.segments().collect();
        for i in 0..segs.len() {
            for j in i + 1..segs.len() {
                let (a, b) = segs[i];
                let (c, d) = segs[j];
                if j == i + 1 {
                    // adjacent: may only share the joint vertex and must not fold back
                    if overlap_len(a, b, c, d).is_positive() {
                        return false;
                    }
                    continue;
                }
                if axis_segments_meet(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }
}

pub fn on_axis_segment(a: &Point, b: &Point, p: &Point) -> bool {
    let in_range = |lo: &Rational, hi: &Rational, v: &Rational| {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        lo <= v && v <= hi
    };
    if a.x == b.x {
        p.x == a.x && in_range(&a.y, &b.y, &p.y)
    } else if a.y == b.y {
        p.y == a.y && in_range(&a.x, &b.x, &p.x)
    } else {
        // general segment: collinear and within the bounding box
        let cross = (&b.x - &a.x) * (&p.y - &a.y) - (&b.y - &a.y) * (&p.x - &a.x);
        cross.is_zero() && in_range(&a.x, &b.x, &p.x) && in_range(&a.y, &b.y, &p.y)
    }
}

fn interval(a: &Rational, b: &Rational) -> (Rational, Rational) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

fn axis_segments_meet(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let (x1, x2) = interval(&a.x, &b.x);
    let (y1, y2) = interval(&a.y, &b.y);
    let (x3, x4) = interval(&c.x, &d.x);
    let (y3, y4) = interval(&c.y, &d.y);
    x1 <= x4 && x3 <= x2 && y1 <= y4 && y3 <= y2
}

fn overlap_len(a: &Point, b: &Point, c: &Point, d: &Point) -> Rational {
    let (x1, x2) = interval(&a.x, &b.x);
    let (y1, y2) = interval(&a.y, &b.y);
    let (x3, x4) = interval(&c.x, &d.x);
    let (y3, y4) = interval(&c.y, &d.y);
    let ox = x2.min(x4) - x1.max(x3);
    let oy = y2.min(y4) - y1.max(y3);
    if ox.is_negative() || oy.is_negative() {
        return Rational::zero();
    }
    ox + oy
}

/// The curve `J_n` from `A = (0,0)` to `B = (1,0)` through a tree of depth `n`.
pub fn build_j(tree: &ArcTree) -> PolylineCurve {
    let mut vertices: Vec<Point> = Vec::new();
    for leaf in tree.leaves() {
        for v in leaf.leaf_path() {
            if vertices.last() != Some(&v) {
                vertices.push(v);
            }
        }
    }
    PolylineCurve::new(vertices).expect("J_n has distinct consecutive vertices")
}

/// `Area(E_n) = ((n + 2) / (2 (n + 1)))^2`.
pub fn area_en(n: usize) -> Rational {
    let n = n as i64;
    let r = ratio(n + 2, 2 * (n + 1));
    &r * &r
}

/// `Area(E_n)` as the recursive product `prod (1 - alpha_k)^2`.
pub fn area_en_product(n: usize) -> Rational {
    (1..=n).fold(int(1), |acc, k| {
        let f = int(1) - alpha(k);
        acc * &f * &f
    })
}

/// `Area(E_n)` as the sum over the `4^n` squares of a materialized tree,
/// after checking that every connector is degenerate (zero area).
pub fn area_en_by_squares(tree: &ArcTree) -> Result<Rational> {
    for d in 0..tree.depth() {
        let t = tree.templates.for_depth(d);
        for node in &tree.levels[d] {
            for j in 0..3 {
                let (a, b) = node.connector(&t, j);
                if !(a.x == b.x || a.y == b.y) {
                    return Err(domain("connector is not axis-parallel"));
                }
            }
        }
    }
    let leaves = tree.leaves();
    let total = leaves
        .iter()
        .fold(Rational::zero(), |acc, n| acc + &n.side * &n.side);
    debug_assert_eq!(
        total,
        int(leaves.len() as i64) * side_len(tree.depth()) * side_len(tree.depth())
    );
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_small_cases() {
        assert_eq!(area_en(1), ratio(9, 16));
        assert_eq!(area_en(2), ratio(4, 9));
        assert_eq!(area_en_product(2), ratio(4, 9));
    }

    #[test]
    fn area_closed_form_matches_product() {
        for n in 1..=40 {
            assert_eq!(area_en(n), area_en_product(n), "n = {n}");
            assert!(area_en(n) > ratio(1, 4));
        }
    }

    #[test]
    fn area_by_squares() {
        for n in 1..=5 {
            let tree = ArcTree::build(n).unwrap();
            assert_eq!(area_en_by_squares(&tree).unwrap(), area_en(n));
        }
    }

    #[test]
    fn j1_visits_anchors_in_order() {
        let tree = ArcTree::build(1).unwrap();
        let j = build_j(&tree);
        assert_eq!(j.start(), &Point::origin());
        assert_eq!(j.end(), &Point::from_ints(1, 0));
        let mut pos = 0;
        for leaf in tree.leaves() {
            for anchor in [&leaf.entry, &leaf.exit] {
                let k = j.vertices[pos..]
                    .iter()
                    .position(|v| v == anchor)
                    .expect("anchor on J_1");
                pos += k;
            }
        }
        assert!(j.is_axis_parallel());
        assert!(j.is_simple());
    }

    #[test]
    fn j2_visits_a20_before_b20() {
        let tree = ArcTree::build(2).unwrap();
        let j = build_j(&tree);
        let q20 = tree.node(&"20".parse().unwrap()).unwrap();
        let ia = j.vertices.iter().position(|v| *v == q20.entry).unwrap();
        let ib = j.vertices.iter().position(|v| *v == q20.exit).unwrap();
        assert!(ia < ib);
        assert_eq!(q20.entry, tree.node(&"2".parse().unwrap()).unwrap().entry);
    }

    #[test]
    fn curves_are_simple_and_axis_parallel() {
        for n in 1..=3 {
            let j = build_j(&ArcTree::build(n).unwrap());
            assert!(j.is_axis_parallel(), "n = {n}");
            assert!(j.is_simple(), "n = {n}");
        }
    }

    #[test]
    fn refinement_keeps_curve_outside_depth_n_squares() {
        // every vertex of J_n lying outside the interiors of the depth-n squares
        // is also a point of J_{n+1}
        for n in 1..=3 {
            let coarse_tree = ArcTree::build(n).unwrap();
            let coarse = build_j(&coarse_tree);
            let fine = build_j(&ArcTree::build(n + 1).unwrap());
            let mut checked = 0;
            for (a, b) in coarse.segments() {
                let mid = Point::new((&a.x + &b.x) / int(2), (&a.y + &b.y) / int(2));
                let in_leaf = coarse_tree
                    .leaves()
                    .iter()
                    .any(|l| l.bounds().contains(&mid));
                if !in_leaf {
                    assert!(fine.find_segment(&mid).is_some());
                    checked += 1;
                }
            }
            assert_eq!(checked, 3 * ((1 << (2 * n)) - 1) / 3);
        }
    }

    #[test]
    fn polyline_rejects_repeated_vertices() {
        assert!(PolylineCurve::new(vec![Point::origin(), Point::origin()]).is_err());
        assert!(PolylineCurve::new(vec![Point::origin()]).is_err());
    }
}
