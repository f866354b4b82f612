//! Constructive Whitney-type extension of the jet field on the closed curve:
//! a quadtree of cells whose size is comparable to their distance from the
//! jet points, one nearest jet per cell, and a smooth partition of unity.
//!
//! `ComplexIndex` measures distance to the solid depth-`n` complex instead; the
//! mesh uses it to keep far vertices away from the curve.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arc::ArcTree;
use crate::error::{domain, Error, Result};
use crate::exact::to_f64;
use crate::jordan::{CurveCopySpec, JetField};

/// Default leaf ratio: a cell is a leaf once its diameter is at most this
/// fraction of its distance to the set.
pub const DEFAULT_THETA: f64 = 0.25;
/// Bump supports are the cells scaled by this factor about their centers.
pub const INFLATION: f64 = 9.0 / 8.0;
/// Jet depth used when none is given.
pub const DEFAULT_JET_DEPTH: usize = 5;
/// Finite differences at or below this size are rounding, not signal.
pub const FLOAT_FLOOR: f64 = 1e-9;
/// `[-2.5, 3.5]^2`: contains the curve and a disc of radius 2.5 around `(1/2, 1/2)`.
pub const DEFAULT_BOX: [f64; 3] = [-2.5, -2.5, 6.0];

/// Box-to-box Euclidean distance, boxes as `[x0, y0, x1, y1]`.
pub fn box_dist(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let dx = (b[0] - a[2]).max(a[0] - b[2]).max(0.0);
    let dy = (b[1] - a[3]).max(a[1] - b[3]).max(0.0);
    dx.hypot(dy)
}

fn transform_box(c: &CurveCopySpec, b: &[f64; 4], inverse: bool) -> [f64; 4] {
    let map = |p| {
        if inverse {
            c.inverse_f64(p)
        } else {
            c.apply_f64(p)
        }
    };
    let p = map([b[0], b[1]]);
    let q = map([b[2], b[3]]);
    [
        p[0].min(q[0]),
        p[1].min(q[1]),
        p[0].max(q[0]),
        p[1].max(q[1]),
    ]
}

/// Square tree of the arc in `f64`, used as a bounding-volume hierarchy for
/// distances to the four-copy complex (solid leaf squares plus connectors).
#[derive(Clone, Debug)]
pub struct ComplexIndex {
    copies: [CurveCopySpec; 4],
    boxes: Vec<Vec<[f64; 4]>>,
    connectors: Vec<Vec<[[f64; 4]; 3]>>,
}

impl ComplexIndex {
    pub fn new(tree: &ArcTree) -> Self {
        let boxes = tree
            .levels
            .iter()
            .map(|level| level.iter().map(|n| n.bounds().to_f64()).collect())
            .collect();
        let connectors = (0..tree.depth())
            .map(|d| {
                let t = tree.templates.for_depth(d);
                tree.levels[d]
                    .iter()
                    .map(|n| {
                        [0, 1, 2].map(|j| {
                            let (a, b) = n.connector(&t, j);
                            let (a, b) = (a.to_f64(), b.to_f64());
                            [
                                a[0].min(b[0]),
                                a[1].min(b[1]),
                                a[0].max(b[0]),
                                a[1].max(b[1]),
                            ]
                        })
                    })
                    .collect()
            })
            .collect();
        Self {
            copies: CurveCopySpec::all(),
            boxes,
            connectors,
        }
    }

    pub fn depth(&self) -> usize {
        self.boxes.len() - 1
    }

    fn dist_in_template(&self, q: &[f64; 4], d: usize, i: usize, best: &mut f64) {
        let b = &self.boxes[d][i];
        if box_dist(q, b) >= *best {
            return;
        }
        if d == self.depth() {
            *best = best.min(box_dist(q, b));
            return;
        }
        for c in &self.connectors[d][i] {
            *best = best.min(box_dist(q, c));
        }
        let mut kids: Vec<(f64, usize)> = (4 * i..4 * i + 4)
            .map(|k| (box_dist(q, &self.boxes[d + 1][k]), k))
            .collect();
        kids.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (dist, k) in kids {
            if dist < *best {
                self.dist_in_template(q, d + 1, k, best);
            }
        }
    }

    /// Distance from a box to the complex.
    pub fn dist_box(&self, b: &[f64; 4]) -> f64 {
        let mut best = f64::INFINITY;
        for c in &self.copies {
            let q = transform_box(c, b, true);
            self.dist_in_template(&q, 0, 0, &mut best);
        }
        best
    }

    pub fn dist_point(&self, p: [f64; 2]) -> f64 {
        self.dist_box(&[p[0], p[1], p[0], p[1]])
    }

    /// Leaf squares of all four copies, in plane coordinates.
    pub fn leaf_boxes(&self) -> Vec<[f64; 4]> {
        self.copies
            .iter()
            .flat_map(|c| {
                self.boxes[self.depth()]
                    .iter()
                    .map(move |b| transform_box(c, b, false))
            })
            .collect()
    }
}

/// A jet in `f64` for evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloatJet {
    pub at: [f64; 2],
    pub f: f64,
    pub fx: f64,
    pub fy: f64,
}

impl FloatJet {
    pub fn taylor(&self, p: [f64; 2]) -> f64 {
        self.f + self.fx * (p[0] - self.at[0]) + self.fy * (p[1] - self.at[1])
    }
}

/// Uniform bucket grid for nearest-jet queries.
struct JetGrid {
    origin: [f64; 2],
    cell: f64,
    dims: [usize; 2],
    buckets: Vec<Vec<u32>>,
}

impl JetGrid {
    fn new(jets: &[FloatJet], bbox: [f64; 3]) -> Self {
        let per_side = ((jets.len() as f64).sqrt().ceil() as usize).clamp(1, 4096);
        let cell = bbox[2] / per_side as f64;
        let mut buckets = vec![Vec::new(); per_side * per_side];
        let mut g = Self {
            origin: [bbox[0], bbox[1]],
            cell,
            dims: [per_side, per_side],
            buckets: Vec::new(),
        };
        for (k, j) in jets.iter().enumerate() {
            let (i, l) = g.bucket(j.at);
            buckets[l * per_side + i].push(k as u32);
        }
        g.buckets = buckets;
        g
    }

    fn bucket(&self, p: [f64; 2]) -> (usize, usize) {
        let f =
            |v: f64, o: f64, n: usize| (((v - o) / self.cell).floor().max(0.0) as usize).min(n - 1);
        (
            f(p[0], self.origin[0], self.dims[0]),
            f(p[1], self.origin[1], self.dims[1]),
        )
    }

    /// Distance from a box to the nearest jet.
    fn dist_box(&self, jets: &[FloatJet], b: &[f64; 4]) -> f64 {
        let (i0, j0) = self.bucket([b[0], b[1]]);
        let (i1, j1) = self.bucket([b[2], b[3]]);
        let mut best = f64::INFINITY;
        let max_ring = self.dims[0].max(self.dims[1]);
        for ring in 0..=max_ring {
            let reach = (ring as f64 - 1.0).max(0.0) * self.cell;
            if reach > best {
                break;
            }
            let r = ring as isize;
            let (lo_i, hi_i, lo_j, hi_j) = (
                i0 as isize - r,
                i1 as isize + r,
                j0 as isize - r,
                j1 as isize + r,
            );
            for j in lo_j..=hi_j {
                for i in lo_i..=hi_i {
                    let on_ring = ring == 0 || j == lo_j || j == hi_j || i == lo_i || i == hi_i;
                    if !on_ring
                        || i < 0
                        || j < 0
                        || i >= self.dims[0] as isize
                        || j >= self.dims[1] as isize
                    {
                        continue;
                    }
                    for &k in &self.buckets[j as usize * self.dims[0] + i as usize] {
                        let q = jets[k as usize].at;
                        best = best.min(box_dist(b, &[q[0], q[1], q[0], q[1]]));
                    }
                }
            }
        }
        best
    }

    /// Nearest jet; ties go to the smaller index.
    fn nearest(&self, jets: &[FloatJet], p: [f64; 2]) -> usize {
        let (ci, cj) = self.bucket(p);
        let mut best = (f64::INFINITY, usize::MAX);
        let max_ring = self.dims[0].max(self.dims[1]);
        for ring in 0..=max_ring {
            // every point outside the examined rings is at least this far away
            let reach = (ring as f64 - 1.0).max(0.0) * self.cell;
            if best.1 != usize::MAX && reach * reach > best.0 {
                break;
            }
            let (r, ci, cj) = (ring as isize, ci as isize, cj as isize);
            for j in cj - r..=cj + r {
                for i in ci - r..=ci + r {
                    if (j - cj).abs() != r && (i - ci).abs() != r {
                        continue;
                    }
                    if i < 0 || j < 0 || i >= self.dims[0] as isize || j >= self.dims[1] as isize {
                        continue;
                    }
                    for &k in &self.buckets[j as usize * self.dims[0] + i as usize] {
                        let q = jets[k as usize].at;
                        let d2 = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
                        if d2 < best.0 || (d2 == best.0 && (k as usize) < best.1) {
                            best = (d2, k as usize);
                        }
                    }
                }
            }
        }
        best.1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CellKind {
    Leaf { jet: u32 },
    Split { first: u32 },
    Pending,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub center: [f64; 2],
    pub half: f64,
    pub dist: f64,
    pub kind: CellKind,
}

impl Cell {
    pub fn bounds(&self) -> [f64; 4] {
        let [x, y] = self.center;
        [x - self.half, y - self.half, x + self.half, y + self.half]
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.half * std::f64::consts::SQRT_2
    }

    fn children(&self) -> [Cell; 4] {
        let h = self.half / 2.0;
        let [x, y] = self.center;
        [[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]].map(|[sx, sy]| Cell {
            center: [x + sx * h, y + sy * h],
            half: h,
            dist: f64::NAN,
            kind: CellKind::Pending,
        })
    }
}

/// Quadtree cover of the box with per-leaf nearest jets.
#[derive(Clone, Debug)]
pub struct WhitneyCover {
    /// `[x0, y0, side]`
    pub bbox: [f64; 3],
    pub theta: f64,
    pub h_min: f64,
    pub cells: Vec<Cell>,
}

struct Builder<'a> {
    grid: &'a JetGrid,
    jets: &'a [FloatJet],
    theta: f64,
    h_min: f64,
}

impl Builder<'_> {
    fn settle(&self, cell: &mut Cell) -> bool {
        cell.dist = self.grid.dist_box(self.jets, &cell.bounds());
        let leaf = cell.diameter() <= self.theta * cell.dist || 2.0 * cell.half <= self.h_min;
        if leaf {
            cell.kind = CellKind::Leaf {
                jet: self.grid.nearest(self.jets, cell.center) as u32,
            };
        }
        leaf
    }

    fn expand(&self, idx: usize, out: &mut Vec<Cell>) {
        let mut cell = out[idx];
        if self.settle(&mut cell) {
            out[idx] = cell;
            return;
        }
        let first = out.len();
        cell.kind = CellKind::Split {
            first: first as u32,
        };
        out[idx] = cell;
        out.extend(cell.children());
        for k in 0..4 {
            self.expand(first + k, out);
        }
    }
}

impl WhitneyCover {
    pub fn build(jets: &[FloatJet], bbox: [f64; 3], theta: f64, h_min: f64) -> Result<Self> {
        if !(h_min > 0.0) {
            return Err(domain(format!(
                "resolution floor must be positive, got {h_min}"
            )));
        }
        if !(theta > 0.0) {
            return Err(domain(format!("leaf ratio must be positive, got {theta}")));
        }
        if jets.is_empty() {
            return Err(Error::EmptySample);
        }
        let grid = JetGrid::new(jets, bbox);
        let builder = Builder {
            grid: &grid,
            jets,
            theta,
            h_min,
        };
        let half = bbox[2] / 2.0;
        let mut cells = vec![Cell {
            center: [bbox[0] + half, bbox[1] + half],
            half,
            dist: f64::NAN,
            kind: CellKind::Pending,
        }];
        // a few levels serially, then independent subtrees in parallel
        let mut frontier = vec![0usize];
        for _ in 0..4 {
            let mut next = Vec::new();
            for idx in frontier {
                let mut cell = cells[idx];
                if builder.settle(&mut cell) {
                    cells[idx] = cell;
                    continue;
                }
                let first = cells.len();
                cell.kind = CellKind::Split {
                    first: first as u32,
                };
                cells[idx] = cell;
                cells.extend(cell.children());
                next.extend(first..first + 4);
            }
            frontier = next;
        }
        let subtrees: Vec<Vec<Cell>> = frontier
            .par_iter()
            .map(|&idx| {
                let mut local = vec![cells[idx]];
                builder.expand(0, &mut local);
                local
            })
            .collect();
        for (&idx, local) in frontier.iter().zip(subtrees) {
            let base = cells.len();
            let remap = |c: Cell| match c.kind {
                CellKind::Split { first } => Cell {
                    kind: CellKind::Split {
                        first: (base + first as usize - 1) as u32,
                    },
                    ..c
                },
                _ => c,
            };
            cells[idx] = remap(local[0]);
            cells.extend(local[1..].iter().map(|&c| remap(c)));
        }
        Ok(Self {
            bbox,
            theta,
            h_min,
            cells,
        })
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Cell> {
        self.cells
            .iter()
            .filter(|c| matches!(c.kind, CellKind::Leaf { .. }))
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let [x0, y0, s] = self.bbox;
        (x0..=x0 + s).contains(&p[0]) && (y0..=y0 + s).contains(&p[1])
    }

    /// Calls `f` on every leaf whose inflated cell contains `p`.
    pub fn for_each_support<F: FnMut(&Cell)>(&self, p: [f64; 2], mut f: F) {
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let c = &self.cells[i];
            let r = c.half * INFLATION;
            if (p[0] - c.center[0]).abs() >= r || (p[1] - c.center[1]).abs() >= r {
                continue;
            }
            match c.kind {
                CellKind::Leaf { .. } => f(c),
                CellKind::Split { first } => stack.extend(first as usize..first as usize + 4),
                CellKind::Pending => unreachable!("cover fully built"),
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let leaves: Vec<serde_json::Value> = self
            .leaves()
            .map(|c| {
                let jet = match c.kind {
                    CellKind::Leaf { jet } => jet,
                    _ => unreachable!(),
                };
                serde_json::json!({ "center": c.center, "half": c.half, "dist": c.dist, "jet": jet })
            })
            .collect();
        serde_json::json!({
            "bbox": self.bbox,
            "theta": self.theta,
            "h_min": self.h_min,
            "cells": self.cells.len(),
            "leaves": leaves,
        })
    }
}

/// `exp(-1 / (1 - t^2))` on `(-1, 1)`, zero outside.
pub fn bump(t: f64) -> f64 {
    let u = 1.0 - t * t;
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

fn key(p: [f64; 2]) -> (u64, u64) {
    // +0.0 and -0.0 name the same point
    ((p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits())
}

/// The extension: exact on the jet points, a partition-of-unity blend of
/// first-order Taylor polynomials elsewhere.
#[derive(Clone, Debug)]
pub struct ExtensionFn {
    pub cover: WhitneyCover,
    pub jets: Vec<FloatJet>,
    /// Certified value error of each jet.
    pub jet_err: Vec<f64>,
    exact: HashMap<(u64, u64), usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionParams {
    pub theta: f64,
    pub h_min: f64,
    pub bbox: [f64; 3],
}

impl ExtensionParams {
    /// Central-difference step matched to the floor: the stencil stays inside
    /// the cells owned by the jet it is centered on.
    pub fn fd_step(&self) -> f64 {
        self.h_min / 4.0
    }

    pub fn halved(&self) -> Self {
        Self {
            h_min: self.h_min / 2.0,
            ..*self
        }
    }
}

impl Default for ExtensionParams {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            h_min: 1.0 / 1024.0,
            bbox: DEFAULT_BOX,
        }
    }
}

/// Jets in `f64`, ordered by copy then address.
pub fn float_jets(field: &JetField) -> (Vec<FloatJet>, Vec<f64>) {
    let mut order: Vec<usize> = (0..field.samples.len()).collect();
    order.sort_by(|&a, &b| {
        let (s, t) = (&field.samples[a], &field.samples[b]);
        (s.copy, &s.point).cmp(&(t.copy, &t.point))
    });
    order
        .iter()
        .map(|&k| {
            let s = &field.samples[k];
            (
                FloatJet {
                    at: s.jet.at.to_f64(),
                    f: to_f64(&s.jet.f),
                    fx: to_f64(&s.jet.fx),
                    fy: to_f64(&s.jet.fy),
                },
                to_f64(&s.err),
            )
        })
        .unzip()
}

impl ExtensionFn {
    pub fn build(field: &JetField, params: ExtensionParams) -> Result<Self> {
        let (jets, jet_err) = float_jets(field);
        let cover = WhitneyCover::build(&jets, params.bbox, params.theta, params.h_min)?;
        for j in &jets {
            if !cover.contains(j.at) {
                return Err(domain(format!(
                    "jet at {:?} lies outside the cover box",
                    j.at
                )));
            }
        }
        let exact = jets
            .iter()
            .enumerate()
            .map(|(k, j)| (key(j.at), k))
            .collect();
        Ok(Self {
            cover,
            jets,
            jet_err,
            exact,
        })
    }

    pub fn evaluate(&self, p: [f64; 2]) -> Result<f64> {
        if !self.cover.contains(p) {
            return Err(domain(format!("{p:?} is outside the extension box")));
        }
        if let Some(&k) = self.exact.get(&key(p)) {
            return Ok(self.jets[k].f);
        }
        Ok(self.blend(p))
    }

    fn blend(&self, p: [f64; 2]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        self.cover.for_each_support(p, |c| {
            let r = c.half * INFLATION;
            let w = bump((p[0] - c.center[0]) / r) * bump((p[1] - c.center[1]) / r);
            if let CellKind::Leaf { jet } = c.kind {
                num += w * self.jets[jet as usize].taylor(p);
                den += w;
            }
        });
        num / den
    }

    /// Central-difference gradient with step `h`.
    pub fn gradient(&self, p: [f64; 2], h: f64) -> Result<[f64; 2]> {
        let fx = (self.evaluate([p[0] + h, p[1]])? - self.evaluate([p[0] - h, p[1]])?) / (2.0 * h);
        let fy = (self.evaluate([p[0], p[1] + h])? - self.evaluate([p[0], p[1] - h])?) / (2.0 * h);
        Ok([fx, fy])
    }

    /// Values on a regular grid over the box, row-major from the bottom-left.
    pub fn raster(&self, step: f64) -> Result<(usize, usize, Vec<f32>)> {
        if !(step > 0.0) {
            return Err(domain("raster step must be positive"));
        }
        let [x0, y0, s] = self.cover.bbox;
        let n = (s / step).floor() as usize + 1;
        let values: Vec<f32> = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let p = [x0 + (k % n) as f64 * step, y0 + (k / n) as f64 * step];
                self.evaluate([p[0].min(x0 + s), p[1].min(y0 + s)])
                    .unwrap_or(f64::NAN) as f32
            })
            .collect();
        Ok((n, n, values))
    }

    pub fn write_raster_csv<W: Write>(&self, step: f64, mut w: W) -> Result<()> {
        let (nx, _, v) = self.raster(step)?;
        let [x0, y0, _] = self.cover.bbox;
        writeln!(w, "x,y,value")?;
        for (k, z) in v.iter().enumerate() {
            writeln!(
                w,
                "{},{},{}",
                x0 + (k % nx) as f64 * step,
                y0 + (k / nx) as f64 * step,
                z
            )?;
        }
        Ok(())
    }

    /// Little-endian `f32` values plus a JSON header describing the grid.
    pub fn write_raster_binary<W: Write>(&self, step: f64, mut w: W) -> Result<serde_json::Value> {
        let (nx, ny, v) = self.raster(step)?;
        for z in &v {
            w.write_all(&z.to_le_bytes())?;
        }
        Ok(
            serde_json::json!({ "dims": [nx, ny], "bbox": self.cover.bbox, "h": step, "dtype": "f32le", "order": "row-major, y up" }),
        )
    }
}

/// Jets of a deeper field that the shallower training field does not contain,
/// each with its value bound `3 l_n + err(q) + max training err`.
pub fn held_out(deep: &JetField, train: &ExtensionFn, train_depth: usize) -> Vec<(FloatJet, f64)> {
    let l_n = to_f64(&crate::arc::side_len(train_depth));
    let train_err = train.jet_err.iter().cloned().fold(0.0, f64::max);
    let (jets, errs) = float_jets(deep);
    jets.into_iter()
        .zip(errs)
        .filter(|(j, _)| !train.exact.contains_key(&key(j.at)))
        .map(|(j, e)| (j, 3.0 * l_n + e + train_err))
        .collect()
}

/// Whether a sequence of errors improves under refinement: each entry is at
/// most twice the previous one, or below the float floor.
pub fn improves_monotonically(errs: &[f64]) -> bool {
    errs.windows(2)
        .all(|w| w[1] <= 2.0 * w[0] || w[1] <= FLOAT_FLOOR)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub value_max: f64,
    pub value_rms: f64,
    /// Largest `residual - bound` over held-out points; at most 0 when every bound holds.
    pub value_excess: f64,
    pub held_out: usize,
    pub gradient_max: f64,
    pub gradient_rms: f64,
    pub gradient_points: usize,
    pub step: f64,
}

fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Value residuals on held-out jets against their own bounds, and gradient
/// residuals `|grad - (y, 0)|` at the training jets, by central differences
/// with step `h`.
pub fn residual_report(
    ext: &ExtensionFn,
    held_out: &[(FloatJet, f64)],
    gradient_at: &[FloatJet],
    h: f64,
) -> Result<ResidualReport> {
    let values: Vec<(f64, f64)> = held_out
        .par_iter()
        .map(|(j, bound)| Ok(((ext.evaluate(j.at)? - j.f).abs(), *bound)))
        .collect::<Result<_>>()?;
    let grads: Vec<f64> = gradient_at
        .par_iter()
        .map(|j| {
            let g = ext.gradient(j.at, h)?;
            Ok((g[0] - j.fx).hypot(g[1] - j.fy))
        })
        .collect::<Result<_>>()?;
    let v: Vec<f64> = values.iter().map(|x| x.0).collect();
    Ok(ResidualReport {
        value_max: v.iter().cloned().fold(0.0, f64::max),
        value_rms: rms(&v),
        value_excess: values
            .iter()
            .map(|(r, b)| r - b)
            .fold(f64::NEG_INFINITY, f64::max),
        held_out: values.len(),
        gradient_max: grads.iter().cloned().fold(0.0, f64::max),
        gradient_rms: rms(&grads),
        gradient_points: grads.len(),
        step: h,
    })
}
