//! The 2-sphere: graph of the extension over a disc, closed below by a cap,
//! plus the contact-tangency check for the form `dz - y dx`.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::error::{domain, Error, Result};
use crate::whitney::{ComplexIndex, ExtensionFn};

pub const DISC_CENTER: [f64; 2] = [0.5, 0.5];
/// The curve comes within 0.02 of `x = -1` and `x = 2`, beyond radius `1.5`.
pub const DEFAULT_RADIUS: f64 = 2.5;
pub const DEFAULT_MESH_STEP: f64 = 1.0 / 32.0;
/// Far vertices are those at least this far from the complex.
pub const FAR_DISTANCE: f64 = 0.1;
pub const FAR_THRESHOLD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    pub radius: f64,
    pub step: f64,
    /// Width of the annulus over which the graph flattens out.
    pub blend_width: f64,
    /// Radius of the half-torus that turns the rim under.
    pub rim_radius: f64,
}

impl Default for MeshParams {
    fn default() -> Self {
        Self {
            radius: DEFAULT_RADIUS,
            step: DEFAULT_MESH_STEP,
            blend_width: 0.5,
            rim_radius: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    /// Vertices over jet points.
    pub curve: Vec<u32>,
    /// Vertices `0..graph_len` lie on the graph of the extension.
    pub graph_len: usize,
    /// Accumulated contact scaling; 1 for a freshly built mesh.
    pub scale: f64,
    pub params: MeshParams,
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn ring(radius: f64, count: usize) -> impl Iterator<Item = [f64; 2]> {
    (0..count).map(move |k| {
        let a = 2.0 * PI * k as f64 / count as f64;
        [
            DISC_CENTER[0] + radius * a.cos(),
            DISC_CENTER[1] + radius * a.sin(),
        ]
    })
}

/// Triangles between two rings of equal length, both counter-clockwise seen
/// from outside, `inner` before `outer` in the sweep from top to bottom.
fn stitch(inner: &[u32], outer: &[u32], out: &mut Vec<[u32; 3]>) {
    let n = inner.len();
    for i in 0..n {
        let j = (i + 1) % n;
        out.push([inner[i], outer[i], outer[j]]);
        out.push([inner[i], outer[j], inner[j]]);
    }
}

pub fn build_sphere(ext: &ExtensionFn, params: MeshParams) -> Result<SurfaceMesh> {
    let MeshParams {
        radius,
        step,
        blend_width,
        rim_radius,
    } = params;
    if !(step > 0.0 && radius > 0.0 && blend_width > 0.0 && rim_radius > 0.0) {
        return Err(domain("mesh parameters must be positive"));
    }
    let dist = |p: [f64; 2]| (p[0] - DISC_CENTER[0]).hypot(p[1] - DISC_CENTER[1]);
    let outer = radius + blend_width;
    for q in [[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]] {
        let p = [DISC_CENTER[0] + outer * q[0], DISC_CENTER[1] + outer * q[1]];
        if !ext.cover.contains(p) {
            return Err(domain(format!(
                "blend annulus reaches {p:?}, outside the extension box"
            )));
        }
    }
    let jets: Vec<[f64; 2]> = ext.jets.iter().map(|j| j.at).collect();
    if let Some(p) = jets.iter().find(|p| dist(**p) >= radius - step) {
        return Err(domain(format!(
            "curve point {p:?} is not inside the disc of radius {radius}"
        )));
    }

    // planar points: jets first, then the boundary ring, then the grid
    let ring_len = ((2.0 * PI * radius / step).ceil() as usize).max(8);
    let inner_limit = radius * (PI / ring_len as f64).cos() - step / 4.0;
    let bucket = |p: [f64; 2]| ((p[0] / step).floor() as i64, (p[1] / step).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (k, p) in jets.iter().enumerate() {
        buckets.entry(bucket(*p)).or_default().push(k);
    }
    // grid points this close to a jet would only make slivers
    let near_jet = |p: [f64; 2]| {
        let (i, j) = bucket(p);
        (-1..=1).any(|di| {
            (-1..=1).any(|dj| {
                buckets.get(&(i + di, j + dj)).is_some_and(|ks| {
                    ks.iter()
                        .any(|&k| (jets[k][0] - p[0]).hypot(jets[k][1] - p[1]) < step / 4.0)
                })
            })
        })
    };
    let mut planar: Vec<[f64; 2]> = jets.clone();
    planar.extend(ring(radius, ring_len));
    let span = (radius / step).ceil() as i64;
    let grid: Vec<[f64; 2]> = (-span..=span)
        .flat_map(|i| {
            (-span..=span).map(move |j| {
                [
                    DISC_CENTER[0] + i as f64 * step,
                    DISC_CENTER[1] + j as f64 * step,
                ]
            })
        })
        .filter(|p| dist(*p) < inner_limit)
        .collect();
    let near: Vec<bool> = grid.par_iter().map(|p| near_jet(*p)).collect();
    planar.extend(grid.iter().zip(near).filter(|(_, n)| !n).map(|(p, _)| *p));

    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    let mut handle_to_vertex: HashMap<usize, u32> = HashMap::new();
    let mut kept: Vec<[f64; 2]> = Vec::with_capacity(planar.len());
    for p in &planar {
        let h = tri
            .insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::Construction(format!("triangulation rejected {p:?}: {e:?}")))?;
        if let std::collections::hash_map::Entry::Vacant(v) = handle_to_vertex.entry(h.index()) {
            v.insert(kept.len() as u32);
            kept.push(*p);
        }
    }
    if kept.len() < jets.len() + ring_len {
        return Err(Error::Construction("duplicate curve points".into()));
    }
    let mut triangles: Vec<[u32; 3]> = tri
        .inner_faces()
        .map(|f| f.vertices().map(|v| handle_to_vertex[&v.fix().index()]))
        .collect();

    let mut vertices: Vec<[f64; 3]> = kept
        .par_iter()
        .map(|p| Ok([p[0], p[1], ext.evaluate(*p)?]))
        .collect::<Result<_>>()?;
    let graph_len = vertices.len();
    let boundary: Vec<u32> = (jets.len()..jets.len() + ring_len)
        .map(|k| k as u32)
        .collect();

    // the cap: flatten over the annulus, roll under, close with a flat disc
    let z_low = vertices.iter().map(|v| v[2]).fold(f64::INFINITY, f64::min);
    let z_rim = z_low - 1.0;
    let mut rings: Vec<Vec<u32>> = vec![boundary];
    let mut push_ring = |vertices: &mut Vec<[f64; 3]>, pts: Vec<[f64; 3]>| {
        let start = vertices.len() as u32;
        vertices.extend(pts);
        rings.push((start..start + ring_len as u32).collect());
    };
    let blend_rings = ((blend_width / step).ceil() as usize).max(2);
    for k in 1..=blend_rings {
        let t = k as f64 / blend_rings as f64;
        let r = radius + t * blend_width;
        let b = smoothstep(t);
        let pts = ring(r, ring_len)
            .map(|p| {
                let z = if b < 1.0 {
                    (1.0 - b) * ext.evaluate(p)? + b * z_rim
                } else {
                    z_rim
                };
                Ok([p[0], p[1], z])
            })
            .collect::<Result<Vec<_>>>()?;
        push_ring(&mut vertices, pts);
    }
    let rim_rings = ((PI * rim_radius / step).ceil() as usize).max(4);
    for k in 1..=rim_rings {
        let phi = PI * k as f64 / rim_rings as f64;
        let r = outer + rim_radius * phi.sin();
        let z = z_rim - rim_radius + rim_radius * phi.cos();
        let pts = ring(r, ring_len).map(|p| [p[0], p[1], z]).collect();
        push_ring(&mut vertices, pts);
    }
    let z_bottom = z_rim - 2.0 * rim_radius;
    let floor_rings = ((outer / step).ceil() as usize).max(2);
    for k in 1..floor_rings {
        let r = outer * (1.0 - k as f64 / floor_rings as f64);
        let pts = ring(r, ring_len).map(|p| [p[0], p[1], z_bottom]).collect();
        push_ring(&mut vertices, pts);
    }
    for w in rings.windows(2) {
        stitch(&w[0], &w[1], &mut triangles);
    }
    let center = vertices.len() as u32;
    vertices.push([DISC_CENTER[0], DISC_CENTER[1], z_bottom]);
    let last = rings.last().expect("rings exist");
    for i in 0..ring_len {
        triangles.push([last[i], center, last[(i + 1) % ring_len]]);
    }

    let mesh = SurfaceMesh {
        vertices,
        triangles,
        curve: (0..jets.len() as u32).collect(),
        graph_len,
        scale: 1.0,
        params,
    };
    let topo = mesh.topology();
    if !topo.is_sphere() {
        return Err(Error::Construction(format!(
            "mesh is not a closed oriented sphere: {topo:?}"
        )));
    }
    Ok(mesh)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler: i64,
    /// Undirected edges not shared by exactly two faces.
    pub open_edges: usize,
    /// Directed edges used twice, i.e. neighbours with opposite orientation.
    pub flipped_edges: usize,
}

impl Topology {
    pub fn is_sphere(&self) -> bool {
        self.euler == 2 && self.open_edges == 0 && self.flipped_edges == 0
    }
}

impl SurfaceMesh {
    pub fn topology(&self) -> Topology {
        let mut directed: HashMap<(u32, u32), u32> =
            HashMap::with_capacity(3 * self.triangles.len());
        for t in &self.triangles {
            for k in 0..3 {
                *directed.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        let mut undirected: HashMap<(u32, u32), u32> = HashMap::with_capacity(directed.len());
        for (&(a, b), &n) in &directed {
            *undirected.entry((a.min(b), a.max(b))).or_insert(0) += n;
        }
        let used: HashSet<u32> = self.triangles.iter().flatten().copied().collect();
        let (v, e, f) = (used.len(), undirected.len(), self.triangles.len());
        Topology {
            vertices: v,
            edges: e,
            faces: f,
            euler: v as i64 - e as i64 + f as i64,
            open_edges: undirected.values().filter(|&&n| n != 2).count(),
            flipped_edges: directed.values().filter(|&&n| n > 1).count(),
        }
    }

    /// Signed enclosed volume; positive when faces point outward.
    pub fn volume(&self) -> f64 {
        self.triangles
            .par_iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0]))
                    / 6.0
            })
            .sum()
    }

    pub fn write_obj<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {} {} {}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }

    pub fn write_ply<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "ply\nformat ascii 1.0")?;
        writeln!(
            w,
            "element vertex {}\nproperty double x\nproperty double y\nproperty double z",
            self.vertices.len()
        )?;
        writeln!(
            w,
            "element face {}\nproperty list uchar int vertex_indices\nend_header",
            self.triangles.len()
        )?;
        for v in &self.vertices {
            writeln!(w, "{} {} {}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    /// Sidecar for the OBJ/PLY files: which vertices sit over the curve.
    pub fn sidecar(&self) -> serde_json::Value {
        let topo = self.topology();
        serde_json::json!({
            "curve_vertices": self.curve,
            "graph_vertices": self.graph_len,
            "scale": self.scale,
            "params": self.params,
            "topology": topo,
        })
    }

    fn unscale(&self, p: [f64; 2]) -> [f64; 2] {
        [p[0] / self.scale, p[1] / self.scale]
    }
}

/// `(x, y, z) -> (cx, cy, c^2 z)`.
pub fn contact_scale(mesh: &SurfaceMesh, c: f64) -> Result<SurfaceMesh> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(domain(format!("scale must be positive, got {c}")));
    }
    Ok(SurfaceMesh {
        vertices: mesh
            .vertices
            .iter()
            .map(|v| [c * v[0], c * v[1], c * c * v[2]])
            .collect(),
        scale: mesh.scale * c,
        ..mesh.clone()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactCheckRecord {
    pub vertex: u32,
    pub p: [f64; 2],
    pub t1: [f64; 3],
    pub t2: [f64; 3],
    pub omega1: f64,
    pub omega2: f64,
}

impl ContactCheckRecord {
    pub fn residual(&self) -> f64 {
        self.omega1.hypot(self.omega2)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContactSummary {
    pub count: usize,
    pub max: f64,
    pub rms: f64,
    pub step: f64,
    /// Largest angle between an area-weighted face normal and the contact
    /// plane normal, a check on the mesh rather than the extension.
    pub face_normal_max_angle: f64,
}

/// Central-difference tangent plane of the graph at `p`, with the extension
/// carried through the accumulated scaling `F_c(X, Y) = c^2 F(X / c, Y / c)`.
fn record(
    mesh: &SurfaceMesh,
    ext: &ExtensionFn,
    vertex: u32,
    h: f64,
) -> Result<ContactCheckRecord> {
    let v = mesh.vertices[vertex as usize];
    let p = [v[0], v[1]];
    let c = mesh.scale;
    let lim = c * mesh.params.radius;
    let d = (p[0] - c * DISC_CENTER[0]).hypot(p[1] - c * DISC_CENTER[1]);
    if d + h >= lim {
        return Err(Error::Stencil(format!("{p:?} with step {h}")));
    }
    let f = |q: [f64; 2]| ext.evaluate(mesh.unscale(q)).map(|z| c * c * z);
    let dx = (f([p[0] + h, p[1]])? - f([p[0] - h, p[1]])?) / (2.0 * h);
    let dy = (f([p[0], p[1] + h])? - f([p[0], p[1] - h])?) / (2.0 * h);
    Ok(ContactCheckRecord {
        vertex,
        p,
        t1: [1.0, 0.0, dx],
        t2: [0.0, 1.0, dy],
        omega1: dx - p[1],
        omega2: dy,
    })
}

fn face_normal_angle(mesh: &SurfaceMesh, incident: &HashMap<u32, Vec<u32>>, vertex: u32) -> f64 {
    let mut n = [0.0; 3];
    for &t in incident.get(&vertex).map(|v| v.as_slice()).unwrap_or(&[]) {
        let [a, b, c] = mesh.triangles[t as usize].map(|i| mesh.vertices[i as usize]);
        let (u, w) = (
            [b[0] - a[0], b[1] - a[1], b[2] - a[2]],
            [c[0] - a[0], c[1] - a[1], c[2] - a[2]],
        );
        n[0] += u[1] * w[2] - u[2] * w[1];
        n[1] += u[2] * w[0] - u[0] * w[2];
        n[2] += u[0] * w[1] - u[1] * w[0];
    }
    let y = mesh.vertices[vertex as usize][1];
    let m = [-y, 0.0, 1.0];
    let dot = n[0] * m[0] + n[1] * m[1] + n[2] * m[2];
    let norm =
        (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() * (m[0] * m[0] + m[2] * m[2]).sqrt();
    (dot / norm).clamp(-1.0, 1.0).acos()
}

/// Contact pairings at every curve vertex with central-difference step `h`
/// in the mesh's own (possibly scaled) coordinates.
pub fn check_contact(
    mesh: &SurfaceMesh,
    ext: &ExtensionFn,
    h: f64,
) -> Result<(Vec<ContactCheckRecord>, ContactSummary)> {
    if !(h > 0.0) {
        return Err(domain("difference step must be positive"));
    }
    let records: Vec<ContactCheckRecord> = mesh
        .curve
        .par_iter()
        .map(|&v| record(mesh, ext, v, h))
        .collect::<Result<_>>()?;
    let curve: HashSet<u32> = mesh.curve.iter().copied().collect();
    let mut incident: HashMap<u32, Vec<u32>> = HashMap::new();
    for (k, t) in mesh.triangles.iter().enumerate() {
        for &v in t {
            if curve.contains(&v) {
                incident.entry(v).or_default().push(k as u32);
            }
        }
    }
    let face_normal_max_angle = mesh
        .curve
        .par_iter()
        .map(|&v| face_normal_angle(mesh, &incident, v))
        .reduce(|| 0.0, f64::max);
    let res: Vec<f64> = records.iter().map(|r| r.residual()).collect();
    let summary = ContactSummary {
        count: res.len(),
        max: res.iter().cloned().fold(0.0, f64::max),
        rms: if res.is_empty() {
            0.0
        } else {
            (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt()
        },
        step: h,
        face_normal_max_angle,
    };
    Ok((records, summary))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FarReport {
    pub samples: usize,
    pub above: usize,
    pub fraction_above: f64,
    pub threshold: f64,
    pub min_distance: f64,
    /// 5% quantile of the sampled residuals.
    pub q05: f64,
    pub seed: u64,
}

/// Residuals at random graph vertices at least `FAR_DISTANCE` from the complex.
pub fn check_far(
    mesh: &SurfaceMesh,
    ext: &ExtensionFn,
    index: &ComplexIndex,
    samples: usize,
    h: f64,
    seed: u64,
) -> Result<FarReport> {
    let c = mesh.scale;
    let candidates: Vec<u32> = (0..mesh.graph_len as u32)
        .into_par_iter()
        .filter(|&v| {
            let p = mesh.unscale([mesh.vertices[v as usize][0], mesh.vertices[v as usize][1]]);
            let r = (p[0] - DISC_CENTER[0]).hypot(p[1] - DISC_CENTER[1]);
            r + h / c < mesh.params.radius && index.dist_point(p) >= FAR_DISTANCE
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<u32> = (0..samples)
        .map(|_| candidates[rng.random_range(0..candidates.len())])
        .collect();
    let mut res: Vec<f64> = picks
        .par_iter()
        .map(|&v| record(mesh, ext, v, h).map(|r| r.residual()))
        .collect::<Result<_>>()?;
    res.sort_by(f64::total_cmp);
    let threshold = FAR_THRESHOLD * c;
    let above = res.iter().filter(|&&r| r > threshold).count();
    Ok(FarReport {
        samples,
        above,
        fraction_above: above as f64 / samples.max(1) as f64,
        threshold,
        min_distance: FAR_DISTANCE,
        q05: res[(res.len() as f64 * 0.05) as usize],
        seed,
    })
}

pub fn write_contact_csv<W: Write>(records: &[ContactCheckRecord], mut w: W) -> Result<()> {
    writeln!(w, "vertex,x,y,dx,dy,omega1,omega2,residual")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.vertex,
            r.p[0],
            r.p[1],
            r.t1[2],
            r.t2[2],
            r.omega1,
            r.omega2,
            r.residual()
        )?;
    }
    Ok(())
}
