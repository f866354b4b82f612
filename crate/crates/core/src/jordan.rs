//! The closed curve built from four isometric copies of the arc, and the
//! function on it whose jets feed the extension.

use std::io::Write;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arc::export::Svg;
use crate::arc::{area_en, build_j, ArcTree, CantorPoint, Frame, Tail};
use crate::error::{Error, Result};
use crate::exact::{int, ratio, to_f64, to_fraction_string, Point, Rational};
use crate::functions::{g_certificate, h_cantor, AnchorRecord, ArcFunctions, CertifiedValue, Jet1};

/// One copy `p -> linear * p + translation` of the arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveCopySpec {
    pub index: u8,
    pub linear: Frame,
    pub translation: [i64; 2],
}

/// Rotation `(x, y) -> (-y, x)`; the generator of the copies.
pub const ROTATION: Frame = Frame([[0, -1], [1, 0]]);
const NEG_ROTATION: Frame = Frame([[0, 1], [-1, 0]]);
const NEG_IDENTITY: Frame = Frame([[-1, 0], [0, -1]]);

impl CurveCopySpec {
    /// `E + e_y`, `-R E + e_x + e_y`, `-E + e_x`, `R E`, in chain order.
    pub fn all() -> [CurveCopySpec; 4] {
        [
            CurveCopySpec {
                index: 1,
                linear: Frame::IDENTITY,
                translation: [0, 1],
            },
            CurveCopySpec {
                index: 2,
                linear: NEG_ROTATION,
                translation: [1, 1],
            },
            CurveCopySpec {
                index: 3,
                linear: NEG_IDENTITY,
                translation: [1, 0],
            },
            CurveCopySpec {
                index: 4,
                linear: ROTATION,
                translation: [0, 0],
            },
        ]
    }

    pub fn apply(&self, p: &Point) -> Point {
        let q = self.linear.apply(p);
        Point::new(
            q.x + int(self.translation[0]),
            q.y + int(self.translation[1]),
        )
    }

    pub fn apply_f64(&self, p: [f64; 2]) -> [f64; 2] {
        let q = self.linear.apply_f64(p);
        [
            q[0] + self.translation[0] as f64,
            q[1] + self.translation[1] as f64,
        ]
    }

    pub fn inverse_f64(&self, p: [f64; 2]) -> [f64; 2] {
        let q = [
            p[0] - self.translation[0] as f64,
            p[1] - self.translation[1] as f64,
        ];
        self.linear.transpose().apply_f64(q)
    }

    pub fn initial(&self) -> Point {
        self.apply(&Point::origin())
    }

    pub fn terminal(&self) -> Point {
        self.apply(&Point::from_ints(1, 0))
    }

    /// `∫ Y dX` along the image of the arc from the image of `A` to the image of `p`,
    /// given `g = ∫ y dx` along the arc itself from `A` to `p`.
    pub fn transported_integral(&self, p: &Point, g: &Rational) -> Rational {
        let [[a, b], [c, d]] = self.linear.0.map(|r| r.map(|v| v as i64));
        let rx = int(a) * &p.x + int(b) * &p.y;
        let half = ratio(1, 2);
        int(self.translation[1]) * rx
            + int(c * a) * &half * &p.x * &p.x
            + int(c * b) * (&p.x * &p.y - g)
            + int(d * a) * g
            + int(d * b) * &half * &p.y * &p.y
    }
}

/// Index of the copy whose initial point is the given copy's terminal point.
pub fn chain_successor(copies: &[CurveCopySpec; 4], i: usize) -> Option<usize> {
    let end = copies[i].terminal();
    copies.iter().position(|c| c.initial() == end)
}

/// Checks that the copies form one closed chain through all four.
pub fn check_chain(copies: &[CurveCopySpec; 4]) -> Result<()> {
    let mut i = 0;
    for step in 0..4 {
        let next = chain_successor(copies, i).ok_or_else(|| {
            Error::Construction(format!(
                "copy {} ends at {} where no copy starts",
                copies[i].index,
                copies[i].terminal()
            ))
        })?;
        if step < 3 && next == 0 {
            return Err(Error::Construction("copies close up early".into()));
        }
        i = next;
    }
    if i != 0 {
        return Err(Error::Construction("copies do not close up".into()));
    }
    Ok(())
}

/// One jet on the closed curve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetSample {
    pub jet: Jet1,
    pub err: Rational,
    pub copy: u8,
    pub point: CantorPoint,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct JetRepr {
    pub x: String,
    pub y: String,
    pub f: String,
    pub fx: String,
    pub fy: String,
    pub err: String,
    pub copy: u8,
    pub address: String,
}

impl From<&JetSample> for JetRepr {
    fn from(s: &JetSample) -> Self {
        Self {
            x: to_fraction_string(&s.jet.at.x),
            y: to_fraction_string(&s.jet.at.y),
            f: to_fraction_string(&s.jet.f),
            fx: to_fraction_string(&s.jet.fx),
            fy: to_fraction_string(&s.jet.fy),
            err: to_fraction_string(&s.err),
            copy: s.copy,
            address: s.point.to_string(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct JetField {
    pub depth: usize,
    pub samples: Vec<JetSample>,
}

impl JetField {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let jets: Vec<JetRepr> = self.samples.iter().map(JetRepr::from).collect();
        serde_json::json!({ "depth": self.depth, "jets": jets })
    }

    /// `fx = y` and `fy = 0` at every sample.
    pub fn jets_are_exact(&self) -> bool {
        self.samples
            .iter()
            .all(|s| s.jet.fx == s.jet.at.y && s.jet.fy.is_zero())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "copy,address,x,y,f,fx,fy,err")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{:e}",
                s.copy,
                s.point,
                to_f64(&s.jet.at.x),
                to_f64(&s.jet.at.y),
                to_f64(&s.jet.f),
                to_f64(&s.jet.fx),
                to_f64(&s.jet.fy),
                to_f64(&s.err)
            )?;
        }
        Ok(())
    }
}

/// The depth-`n` approximation of the closed curve with its functions `F^i`.
pub struct JordanCurve {
    pub copies: [CurveCopySpec; 4],
    funcs: ArcFunctions,
    table: Vec<AnchorRecord>,
    tree: ArcTree,
    constants: [Rational; 4],
}

impl JordanCurve {
    pub fn build(depth: usize) -> Result<Self> {
        let copies = CurveCopySpec::all();
        check_chain(&copies)?;
        let funcs = ArcFunctions::new(depth)?;
        let table = funcs.anchor_table();
        let tree = ArcTree::build(depth)?;
        let b = Point::from_ints(1, 0);
        let mut constants: [Rational; 4] = Default::default();
        for (k, c) in copies.iter().enumerate() {
            // transported H runs from 0 to 1, so one condition fixes C_i
            let h_span = h_cantor(&CantorPoint::end())? - h_cantor(&CantorPoint::start())?;
            if h_span.is_zero() {
                return Err(Error::Construction(format!(
                    "copy {} has a degenerate H",
                    c.index
                )));
            }
            constants[k] = -c.transported_integral(&b, funcs.g_end()) / h_span;
        }
        Ok(Self {
            copies,
            funcs,
            table,
            tree,
            constants,
        })
    }

    pub fn depth(&self) -> usize {
        self.funcs.depth()
    }

    pub fn functions(&self) -> &ArcFunctions {
        &self.funcs
    }

    pub fn tree(&self) -> &ArcTree {
        &self.tree
    }

    pub fn anchors(&self) -> &[AnchorRecord] {
        &self.table
    }

    /// `C_i` with `F^i` vanishing at both ends of copy `i` (0-based slot).
    pub fn constant(&self, slot: usize) -> &Rational {
        &self.constants[slot]
    }

    /// Area of the depth-`n` complex: four disjoint isometric images of `E_n`.
    pub fn area(&self) -> Rational {
        int(4) * area_en(self.depth())
    }

    /// Area summed over the images of all leaf squares, after checking that the
    /// bounding boxes of different copies meet in at most one point.
    pub fn area_by_squares(&self) -> Result<Rational> {
        let boxes: Vec<[Rational; 4]> = self
            .copies
            .iter()
            .map(|c| {
                let a = c.apply(&Point::origin());
                let b = c.apply(&Point::from_ints(1, 1));
                [
                    a.x.clone().min(b.x.clone()),
                    a.y.clone().min(b.y.clone()),
                    a.x.max(b.x),
                    a.y.max(b.y),
                ]
            })
            .collect();
        for i in 0..4 {
            for j in i + 1..4 {
                let (p, q) = (&boxes[i], &boxes[j]);
                let w = p[2].clone().min(q[2].clone()) - p[0].clone().max(q[0].clone());
                let h = p[3].clone().min(q[3].clone()) - p[1].clone().max(q[1].clone());
                let (w0, h0) = (w >= int(0), h >= int(0));
                if w0 && h0 && (w > int(0) || h > int(0)) {
                    return Err(Error::Construction(format!(
                        "copies {} and {} overlap",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let per_copy = self
            .tree
            .leaves()
            .iter()
            .fold(Rational::zero(), |acc, n| acc + &n.side * &n.side);
        Ok(int(4) * per_copy)
    }

    /// Certified `G^i` at a resolved anchor of depth at most `n`.
    pub fn g_copy(&self, slot: usize, p: &CantorPoint) -> Result<CertifiedValue> {
        let g = self.funcs.g_at(p)?;
        let x = crate::arc::exact_coord(self.funcs.templates(), p)?;
        let value = self.copies[slot].transported_integral(&x, &g.value);
        // the coefficient of G in the transported integral is det = ±1
        Ok(CertifiedValue { value, ..g })
    }

    /// Certified `F^i = G^i + C_i H^i`; exact zero at both ends of the copy.
    pub fn f_copy(&self, slot: usize, p: &CantorPoint) -> Result<CertifiedValue> {
        let g = self.g_copy(slot, p)?;
        let h = h_cantor(p)?;
        let value = g.value + &self.constants[slot] * &h;
        let error_bound = if p.is_arc_start() || p.is_arc_end() {
            Rational::zero()
        } else {
            g_certificate(self.depth()) * (int(1) + h)
        };
        Ok(CertifiedValue {
            value,
            error_bound,
            depth_used: self.depth(),
        })
    }

    /// Jet `(F^i, Y, 0)` at the image of an anchor, with the value's certificate.
    pub fn jet_copy(&self, slot: usize, p: &CantorPoint) -> Result<JetSample> {
        let x = crate::arc::exact_coord(self.funcs.templates(), p)?;
        let at = self.copies[slot].apply(&x);
        let f = self.f_copy(slot, p)?;
        Ok(JetSample {
            jet: Jet1 {
                fx: at.y.clone(),
                fy: Rational::zero(),
                at,
                f: f.value,
            },
            err: f.error_bound,
            copy: self.copies[slot].index,
            point: p.clone(),
        })
    }

    fn jet_from_record(&self, slot: usize, rec: &AnchorRecord, exit: bool) -> JetSample {
        let (x, g, tail) = if exit {
            (&rec.exit, &rec.g_exit, Tail::Threes)
        } else {
            (&rec.entry, &rec.g_entry, Tail::Zeros)
        };
        let point = CantorPoint::new(rec.address.clone(), tail);
        let c = &self.copies[slot];
        let h = h_cantor(&point).expect("resolved anchor");
        let f = c.transported_integral(x, g) + &self.constants[slot] * &h;
        let err = if point.is_arc_start() || point.is_arc_end() {
            Rational::zero()
        } else {
            g_certificate(self.depth()) * (int(1) + h)
        };
        let at = c.apply(x);
        JetSample {
            jet: Jet1 {
                fx: at.y.clone(),
                fy: Rational::zero(),
                at,
                f,
            },
            err,
            copy: c.index,
            point,
        }
    }

    /// `k` anchors per copy, evenly spaced in arc order starting at the copy's
    /// initial point, with shared endpoints kept once. `k = None` takes every
    /// depth-`n` anchor.
    pub fn sample_jet_field(&self, k: Option<usize>) -> JetField {
        let total = 2 * self.table.len();
        let picks: Vec<usize> = match k {
            None => (0..total).collect(),
            Some(k) if k >= total => (0..total).collect(),
            Some(k) => (0..k).map(|i| i * (total - 1) / k.max(1)).collect(),
        };
        let mut samples: Vec<JetSample> = (0..4)
            .into_par_iter()
            .flat_map_iter(|slot| {
                picks
                    .iter()
                    .map(|&i| self.jet_from_record(slot, &self.table[i / 2], i % 2 == 1))
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut seen = std::collections::HashSet::new();
        samples.retain(|s| seen.insert(s.jet.at.clone()));
        JetField {
            depth: self.depth(),
            samples,
        }
    }

    /// Vertices of the closed depth-`n` polyline, starting and ending at `(0, 1)`.
    pub fn polyline(&self) -> Vec<Point> {
        let j = build_j(&self.tree);
        let mut out: Vec<Point> = Vec::new();
        let mut slot = 0;
        for _ in 0..4 {
            for v in &j.vertices {
                let w = self.copies[slot].apply(v);
                if out.last() != Some(&w) {
                    out.push(w);
                }
            }
            slot = chain_successor(&self.copies, slot).expect("chain checked at build");
        }
        out
    }

    pub fn svg(&self) -> String {
        let mut svg = Svg::new([-1.0, -1.0, 3.0, 3.0]);
        for c in &self.copies {
            for leaf in self.tree.leaves() {
                let b = leaf.bounds();
                let p = c.apply(&b.min).to_f64();
                let q = c.apply(&b.max).to_f64();
                svg.rect(
                    [
                        p[0].min(q[0]),
                        p[1].min(q[1]),
                        p[0].max(q[0]),
                        p[1].max(q[1]),
                    ],
                    "#202020",
                );
            }
        }
        let pts: Vec<[f64; 2]> = self.polyline().iter().map(|v| v.to_f64()).collect();
        svg.polyline(&pts, "#d02020", 3.0 / 2048.0);
        svg.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::segment_y_dx;

    #[test]
    fn chain_closes() {
        let c = CurveCopySpec::all();
        check_chain(&c).unwrap();
        assert_eq!(c[3].initial(), Point::origin());
        assert_eq!(c[0].initial(), Point::from_ints(0, 1));
        assert_eq!(c[0].terminal(), Point::from_ints(1, 1));
        assert_eq!(c[1].terminal(), Point::from_ints(1, 0));
        assert_eq!(c[2].terminal(), Point::origin());
        assert_eq!(c[3].terminal(), Point::from_ints(0, 1));
    }

    #[test]
    fn column_reading_of_the_rotation_does_not_close() {
        let mut c = CurveCopySpec::all();
        // (x, y) -> (y, -x) instead, sends e_x to (0, -1)
        c[1].linear = ROTATION;
        c[3].linear = NEG_ROTATION;
        assert_eq!(c[3].apply(&Point::from_ints(1, 0)), Point::from_ints(0, -1));
        assert!(check_chain(&c).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        for c in CurveCopySpec::all() {
            let p = [0.3, -0.7];
            let q = c.inverse_f64(c.apply_f64(p));
            assert!((q[0] - p[0]).abs() < 1e-15 && (q[1] - p[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn transported_integral_matches_polyline() {
        let jc = JordanCurve::build(3).unwrap();
        let j = build_j(jc.tree());
        let g = j.prefix_y_dx();
        for c in &jc.copies {
            let image: Vec<Point> = j.vertices.iter().map(|v| c.apply(v)).collect();
            let mut acc = Rational::zero();
            for (i, v) in j.vertices.iter().enumerate() {
                if i > 0 {
                    acc += segment_y_dx(&image[i - 1], &image[i]);
                }
                assert_eq!(c.transported_integral(v, &g[i]), acc, "copy {}", c.index);
            }
        }
    }

    #[test]
    fn copy_three_flips_heights() {
        // a horizontal run at height y becomes a run at height -y traversed right to left
        let c = CurveCopySpec::all()[2];
        let p = Point::new(ratio(1, 4), ratio(5, 8));
        let q = Point::new(ratio(1, 2), ratio(5, 8));
        let (pp, qq) = (c.apply(&p), c.apply(&q));
        assert_eq!(pp.y, ratio(-5, 8));
        assert_eq!(segment_y_dx(&pp, &qq), ratio(-5, 8) * (&qq.x - &pp.x));
        assert_eq!(&qq.x - &pp.x, ratio(-1, 4));
    }

    #[test]
    fn endpoint_values_vanish() {
        let jc = JordanCurve::build(5).unwrap();
        for slot in 0..4 {
            for p in [CantorPoint::start(), CantorPoint::end()] {
                let f = jc.f_copy(slot, &p).unwrap();
                assert_eq!(f.value, int(0));
                assert_eq!(f.error_bound, int(0));
            }
        }
    }

    #[test]
    fn area_is_four_copies() {
        let jc = JordanCurve::build(3).unwrap();
        assert_eq!(jc.area_by_squares().unwrap(), jc.area());
        assert_eq!(jc.area(), int(4) * ratio(25, 64));
    }

    #[test]
    fn corner_samples() {
        let jc = JordanCurve::build(2).unwrap();
        let f = jc.sample_jet_field(Some(1));
        assert_eq!(f.len(), 4);
        assert!(f.samples.iter().all(|s| s.jet.f.is_zero()));
        let mut corners: Vec<_> = f.samples.iter().map(|s| s.jet.at.clone()).collect();
        corners.sort();
        let mut want = vec![
            Point::origin(),
            Point::from_ints(0, 1),
            Point::from_ints(1, 1),
            Point::from_ints(1, 0),
        ];
        want.sort();
        assert_eq!(corners, want);
    }

    #[test]
    fn full_field_is_exact_and_deduplicated() {
        let jc = JordanCurve::build(2).unwrap();
        let f = jc.sample_jet_field(None);
        // 32 anchors per copy, 4 shared corners
        assert_eq!(f.len(), 4 * 32 - 4);
        assert!(f.jets_are_exact());
        let json = f.to_json();
        assert_eq!(json["jets"].as_array().unwrap().len(), f.len());
        for s in f.samples.iter().take(20) {
            let direct = jc.jet_copy((s.copy - 1) as usize, &s.point).unwrap();
            assert_eq!(direct.jet, s.jet);
        }
    }

    #[test]
    fn closed_polyline() {
        let jc = JordanCurve::build(2).unwrap();
        let p = jc.polyline();
        assert_eq!(p.first(), p.last());
        assert!(jc.svg().contains("<polyline"));
    }
}
