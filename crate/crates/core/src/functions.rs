//! The functions `G_n`, `G`, `H` and `F = G + C H` on the arc, with certified
//! truncation error for the limit values.

use std::io::Write;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arc::curve::on_axis_segment;
use crate::arc::{area_en, side_len, Address, CantorPoint, PathKind, SquareNode, Tail, Templates};
use crate::error::{domain, Error, Result};
use crate::exact::{int, pow4_inv, ratio, segment_y_dx, to_decimal_string, Point, Rational};

pub const DEFAULT_EVAL_DEPTH: usize = 12;

/// A value together with a bound on its distance from the limit it approximates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedValue {
    pub value: Rational,
    pub error_bound: Rational,
    pub depth_used: usize,
}

impl CertifiedValue {
    pub fn exact(value: Rational, depth_used: usize) -> Self {
        Self {
            value,
            error_bound: Rational::zero(),
            depth_used,
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        (&self.value - x).abs() <= self.error_bound
    }
}

/// First-order jet `(f, f_x, f_y)` at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet1 {
    pub at: Point,
    pub f: Rational,
    pub fx: Rational,
    pub fy: Rational,
}

/// Truncation certificate for `G` at depth `n`: `3 l_n + (Area(E_n) - 1/4)`.
pub fn g_certificate(n: usize) -> Rational {
    int(3) * side_len(n) + area_en(n) - ratio(1, 4)
}

/// A point of the arc: either in the Cantor part or on one of the connector
/// segments `[B_{wj}, A_{w(j+1)}]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArcPoint {
    Cantor(CantorPoint),
    Connector {
        parent: Address,
        gap: u8,
        point: Point,
    },
}

/// `H` on the Cantor part: `sum i_k / 4^k`.
pub fn h_cantor(p: &CantorPoint) -> Result<Rational> {
    let tail = match p.tail {
        Tail::Zeros => Rational::zero(),
        Tail::Threes => pow4_inv(p.address.depth() as u32),
        Tail::Unresolved => return Err(Error::ApproximatePoint(p.to_string())),
    };
    let head = p
        .address
        .digits()
        .iter()
        .enumerate()
        .fold(Rational::zero(), |acc, (k, &d)| {
            acc + int(d as i64) * pow4_inv(k as u32 + 1)
        });
    Ok(head + tail)
}

/// `H` anywhere on the arc; constant on each connector.
pub fn h_at(templates: &Templates, p: &ArcPoint) -> Result<Rational> {
    match p {
        ArcPoint::Cantor(c) => h_cantor(c),
        ArcPoint::Connector { parent, gap, point } => {
            if *gap > 2 {
                return Err(domain(format!("connector index {gap} out of range")));
            }
            let node = crate::arc::locate(templates, parent);
            let t = templates.for_depth(node.depth());
            let (a, b) = node.connector(&t, *gap as usize);
            if !on_axis_segment(&a, &b, point) {
                return Err(domain(format!(
                    "{point} is not on connector {gap} of {parent}"
                )));
            }
            h_cantor(&CantorPoint::new(parent.child(*gap), Tail::Threes))
        }
    }
}

/// Exact evaluation of `G_n` on the curve `J_n` for a fixed depth `n`.
#[derive(Clone, Debug)]
pub struct ArcFunctions {
    depth: usize,
    templates: Templates,
    /// `∫ y dx` of the normalized path of a depth-`d` square, indexed `[d][kind]`.
    path_integrals: Vec<[Rational; 2]>,
    g_end: Rational,
}

/// One depth-`n` square with the values of `G_n` at its anchors.
#[derive(Clone, Debug)]
pub struct AnchorRecord {
    pub address: Address,
    pub entry: Point,
    pub exit: Point,
    pub g_entry: Rational,
    pub g_exit: Rational,
}

fn kind_index(k: PathKind) -> usize {
    match k {
        PathKind::Short => 0,
        PathKind::Long => 1,
    }
}

impl ArcFunctions {
    pub fn new(depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(domain("evaluation depth must be at least 1"));
        }
        let templates = Templates::new(depth);
        let mut path_integrals = vec![[Rational::zero(), Rational::zero()]; depth + 1];
        path_integrals[depth] = [int(0), int(1)];
        for d in (0..depth).rev() {
            let t = templates.for_depth(d);
            let s = &t.side;
            let s2 = s * s;
            let next = path_integrals[d + 1].clone();
            let lift = (int(1) - s) * s; // y-offset times x-extent for children 1 and 2
            let bridge = (int(1) - s) * &t.alpha; // horizontal connector
            for kind in [PathKind::Short, PathKind::Long] {
                let flipped = 1 - kind_index(kind);
                let same = kind_index(kind);
                // children 0 and 3 are reflected (det = -1), 1 and 2 are translated
                path_integrals[d][kind_index(kind)] = -&s2 * &next[flipped] * int(2)
                    + &lift * int(2)
                    + &s2 * &next[same] * int(2)
                    + &bridge;
            }
        }
        let mut out = Self {
            depth,
            templates,
            path_integrals,
            g_end: Rational::zero(),
        };
        out.g_end = out.node_integral(&SquareNode::root());
        Ok(out)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn templates(&self) -> &Templates {
        &self.templates
    }

    /// `∫ y dx` along `J_n ∩ Q_w` from `A_w` to `B_w`.
    pub fn node_integral(&self, node: &SquareNode) -> Rational {
        let d = node.depth();
        assert!(d <= self.depth, "node deeper than the evaluation depth");
        let f = &node.frame.0;
        let a = f[0][0] as i64;
        let c = f[1][0] as i64;
        let det = node.frame.det() as i64;
        let k = &self.path_integrals[d][kind_index(node.kind())];
        let l2 = &node.side * &node.side;
        &node.entry.y * (&node.exit.x - &node.entry.x) + l2 * (ratio(a * c, 2) + int(det) * k)
    }

    /// `G_n(B)`
    pub fn g_end(&self) -> &Rational {
        &self.g_end
    }

    /// `C = -G_n(B)`, making `F_n(B) = 0`.
    pub fn constant_c(&self) -> Rational {
        -self.g_end.clone()
    }

    /// Exact `G_n` at the anchor named by a resolved Cantor point of depth `<= n`.
    pub fn g_anchor(&self, p: &CantorPoint) -> Result<Rational> {
        let p = p.canonical();
        if !p.is_resolved() {
            return Err(Error::ApproximatePoint(p.to_string()));
        }
        if p.address.depth() > self.depth {
            return Err(domain(format!(
                "anchor {p} is deeper than the evaluation depth {}",
                self.depth
            )));
        }
        let mut node = SquareNode::root();
        let mut total = Rational::zero();
        for &digit in p.address.digits() {
            let t = self.templates.for_depth(node.depth());
            for j in 0..digit {
                let child = node.child(&t, j);
                total += self.node_integral(&child);
                let (a, b) = node.connector(&t, j as usize);
                total += segment_y_dx(&a, &b);
            }
            node = node.child(&t, digit);
        }
        if p.tail == Tail::Threes {
            total += self.node_integral(&node);
        }
        Ok(total)
    }

    /// `G_n(p) = ∫ y dx` along `J_n` from `A` to `p`, for any point `p` of `J_n`.
    pub fn g_on_curve(&self, p: &Point) -> Result<Rational> {
        let off_curve = || domain(format!("{p} is not on J_{}", self.depth));
        let mut node = SquareNode::root();
        if !node.bounds().contains(p) {
            return Err(off_curve());
        }
        let mut total = Rational::zero();
        'descend: while node.depth() < self.depth {
            let t = self.templates.for_depth(node.depth());
            for j in 0..4u8 {
                let child = node.child(&t, j);
                if child.bounds().contains(p) {
                    node = child;
                    continue 'descend;
                }
                total += self.node_integral(&child);
                if j < 3 {
                    let (a, b) = node.connector(&t, j as usize);
                    if on_axis_segment(&a, &b, p) {
                        return Ok(total + segment_y_dx(&a, p));
                    }
                    total += segment_y_dx(&a, &b);
                }
            }
            return Err(off_curve());
        }
        let path = node.leaf_path();
        for w in path.windows(2) {
            if on_axis_segment(&w[0], &w[1], p) {
                return Ok(total + segment_y_dx(&w[0], p));
            }
            total += segment_y_dx(&w[0], &w[1]);
        }
        Err(off_curve())
    }

    /// The depth-`n` anchor used to approximate `p`, and whether it is `p` itself.
    fn approximating_anchor(&self, p: &CantorPoint) -> Result<(CantorPoint, bool)> {
        let c = p.canonical();
        if !c.is_resolved() {
            return Err(Error::ApproximatePoint(p.to_string()));
        }
        if c.address.depth() <= self.depth {
            Ok((c, true))
        } else {
            Ok((
                CantorPoint::new(c.address.prefix(self.depth), c.tail),
                false,
            ))
        }
    }

    /// Certified approximation of the limit function `G` at a resolved Cantor point.
    pub fn g_at(&self, p: &CantorPoint) -> Result<CertifiedValue> {
        let (anchor, _) = self.approximating_anchor(p)?;
        let value = self.g_anchor(&anchor)?;
        let error_bound = if p.is_arc_start() {
            Rational::zero()
        } else {
            g_certificate(self.depth)
        };
        Ok(CertifiedValue {
            value,
            error_bound,
            depth_used: self.depth,
        })
    }

    /// `G` at a point of the arc (Cantor part or connector).
    pub fn g_at_arc(&self, p: &ArcPoint) -> Result<CertifiedValue> {
        match p {
            ArcPoint::Cantor(c) => self.g_at(c),
            ArcPoint::Connector { parent, point, .. } => {
                if parent.depth() >= self.depth {
                    return Err(domain("connector is not resolved at this depth"));
                }
                h_at(&self.templates, p)?;
                Ok(CertifiedValue {
                    value: self.g_on_curve(point)?,
                    error_bound: g_certificate(self.depth),
                    depth_used: self.depth,
                })
            }
        }
    }

    /// Certified `F = G + C H` with `C = -G(B)`.
    ///
    /// `F(A) = 0` and `F(B) = 0` hold by construction and carry a zero bound.
    /// Elsewhere the bound is `cert * (1 + H(p))`, covering the uncertainty of
    /// both `G(p)` and `C`.
    pub fn f_at(&self, p: &ArcPoint) -> Result<CertifiedValue> {
        let g = self.g_at_arc(p)?;
        let h = h_at(&self.templates, p)?;
        let value = &g.value + self.constant_c() * &h;
        let at_endpoint = matches!(p, ArcPoint::Cantor(c) if c.is_arc_start() || c.is_arc_end());
        let error_bound = if at_endpoint {
            Rational::zero()
        } else {
            g_certificate(self.depth) * (int(1) + &h)
        };
        Ok(CertifiedValue {
            value,
            error_bound,
            depth_used: self.depth,
        })
    }

    /// `(F(p), y_p, 0)`
    pub fn jet_at(&self, p: &ArcPoint) -> Result<Jet1> {
        let f = self.f_at(p)?.value;
        let at = match p {
            ArcPoint::Cantor(c) => {
                crate::arc::exact_coord(&self.templates, &self.approximating_anchor(c)?.0)?
            }
            ArcPoint::Connector { point, .. } => point.clone(),
        };
        Ok(Jet1 {
            fx: at.y.clone(),
            fy: Rational::zero(),
            at,
            f,
        })
    }

    /// All depth-`n` squares in arc order with `G_n` at both anchors.
    pub fn anchor_table(&self) -> Vec<AnchorRecord> {
        let split = self.depth.min(3);
        let roots: Vec<SquareNode> = (0..4u64.pow(split as u32))
            .map(|i| crate::arc::locate(&self.templates, &Address::from_index(split, i)))
            .collect();
        roots
            .par_iter()
            .flat_map_iter(|root| {
                let start = self
                    .g_anchor(&CantorPoint::new(root.address.clone(), Tail::Zeros))
                    .expect("root anchor within depth");
                let mut out = Vec::new();
                let mut g = start;
                self.walk(root, &mut g, &mut out);
                out
            })
            .collect()
    }

    fn walk(&self, node: &SquareNode, g: &mut Rational, out: &mut Vec<AnchorRecord>) {
        if node.depth() == self.depth {
            let g_entry = g.clone();
            *g += self.node_integral(node);
            out.push(AnchorRecord {
                address: node.address.clone(),
                entry: node.entry.clone(),
                exit: node.exit.clone(),
                g_entry,
                g_exit: g.clone(),
            });
            return;
        }
        let t = self.templates.for_depth(node.depth());
        for j in 0..4u8 {
            self.walk(&node.child(&t, j), g, out);
            if j < 3 {
                let (a, b) = node.connector(&t, j as usize);
                *g += segment_y_dx(&a, &b);
            }
        }
    }

    /// CSV rows `(address, x, y, G, H, F, error_bound)` for resolved Cantor points.
    pub fn write_csv<W: Write>(
        &self,
        points: &[CantorPoint],
        digits: usize,
        mut w: W,
    ) -> Result<()> {
        writeln!(w, "address,x,y,G,H,F,error_bound")?;
        for p in points {
            let arc_point = ArcPoint::Cantor(p.clone());
            let g = self.g_at(p)?;
            let h = h_cantor(p)?;
            let f = self.f_at(&arc_point)?;
            let jet = self.jet_at(&arc_point)?;
            let dec = |r: &Rational| to_decimal_string(r, digits);
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                p,
                dec(&jet.at.x),
                dec(&jet.at.y),
                dec(&g.value),
                dec(&h),
                dec(&f.value),
                dec(&f.error_bound.clone().max(g.error_bound.clone()))
            )?;
        }
        Ok(())
    }
}

/// Serializable summary of one evaluation, rationals as `"num/den"`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EvalRecord {
    pub point: String,
    pub x: String,
    pub y: String,
    pub g: String,
    pub h: String,
    pub f: String,
    pub error_bound: String,
    pub depth: usize,
}
