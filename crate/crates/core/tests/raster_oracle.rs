//! Independent check of the curve topology: rasterize `E_n`, flood-fill the
//! component below the arc, and compare its boundary with `J_n`.

use whitney_arc::arc::{build_j, ArcTree, PolylineCurve};

const RES: usize = 1 << 12;

struct Raster {
    nx: usize,
    ny: usize,
    solid: Vec<bool>,
}

impl Raster {
    // covers (0,1) x (-1,1)
    fn new() -> Self {
        Self {
            nx: RES,
            ny: 2 * RES,
            solid: vec![false; 2 * RES * RES],
        }
    }

    fn px(&self, x: f64) -> isize {
        (x * RES as f64).floor() as isize
    }

    fn py(&self, y: f64) -> isize {
        ((y + 1.0) * RES as f64).floor() as isize
    }

    fn fill_box(&mut self, r: [f64; 4]) {
        let (i0, i1) = (
            self.px(r[0]).max(0),
            self.px(r[2]).min(self.nx as isize - 1),
        );
        let (j0, j1) = (
            self.py(r[1]).max(0),
            self.py(r[3]).min(self.ny as isize - 1),
        );
        for j in j0..=j1 {
            for i in i0..=i1 {
                self.solid[j as usize * self.nx + i as usize] = true;
            }
        }
    }

    fn flood_from(&self, i: usize, j: usize) -> Vec<bool> {
        let mut inside = vec![false; self.solid.len()];
        let mut stack = vec![(i, j)];
        inside[j * self.nx + i] = true;
        while let Some((i, j)) = stack.pop() {
            let mut push = |a: usize, b: usize| {
                let k = b * self.nx + a;
                if !self.solid[k] && !inside[k] {
                    inside[k] = true;
                    stack.push((a, b));
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < self.nx {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < self.ny {
                push(i, j + 1);
            }
        }
        inside
    }
}

fn dist_to_polyline(p: [f64; 2], pts: &[[f64; 2]]) -> f64 {
    pts.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1]))
                .clamp(0.0, 1.0);
            let q = [a[0] + t * d[0], a[1] + t * d[1]];
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

fn check_depth(n: usize) {
    let tree = ArcTree::build(n).unwrap();
    let curve: PolylineCurve = build_j(&tree);
    let mut raster = Raster::new();
    for leaf in tree.leaves() {
        raster.fill_box(leaf.bounds().to_f64());
    }
    for d in 0..n {
        let t = tree.templates.for_depth(d);
        for node in &tree.levels[d] {
            for j in 0..3 {
                let (a, b) = node.connector(&t, j);
                let (a, b) = (a.to_f64(), b.to_f64());
                raster.fill_box([
                    a[0].min(b[0]),
                    a[1].min(b[1]),
                    a[0].max(b[0]),
                    a[1].max(b[1]),
                ]);
            }
        }
    }
    let omega = raster.flood_from(RES / 2, RES / 8);
    let pts: Vec<[f64; 2]> = curve.vertices.iter().map(|v| v.to_f64()).collect();
    let px = 1.0 / RES as f64;

    // every point of J_n borders the flooded component
    for w in pts.windows(2) {
        let steps = 256;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let p = [
                w[0][0] + t * (w[1][0] - w[0][0]),
                w[0][1] + t * (w[1][1] - w[0][1]),
            ];
            let (ci, cj) = (raster.px(p[0]), raster.py(p[1]));
            let near = (-2..=2).any(|di: isize| {
                (-2..=2).any(|dj: isize| {
                    let (i, j) = (ci + di, cj + dj);
                    i >= 0
                        && j >= 0
                        && (i as usize) < raster.nx
                        && (j as usize) < raster.ny
                        && omega[j as usize * raster.nx + i as usize]
                })
            });
            assert!(
                near,
                "n = {n}: J point {p:?} does not border the lower component"
            );
        }
    }

    // every boundary pixel of the flooded component inside the unit square lies on J_n
    let mut boundary = 0usize;
    for j in 0..raster.ny {
        for i in 0..raster.nx {
            let k = j * raster.nx + i;
            if !omega[k] {
                continue;
            }
            let touches = (i > 0 && raster.solid[k - 1])
                || (i + 1 < raster.nx && raster.solid[k + 1])
                || (j > 0 && raster.solid[k - raster.nx])
                || (j + 1 < raster.ny && raster.solid[k + raster.nx]);
            if touches {
                boundary += 1;
                let c = [(i as f64 + 0.5) * px, (j as f64 + 0.5) * px - 1.0];
                let d = dist_to_polyline(c, &pts);
                assert!(
                    d <= 2.5 * px,
                    "n = {n}: boundary pixel at {c:?} is {d} from J"
                );
            }
        }
    }
    assert!(
        boundary > RES,
        "n = {n}: flooded region has a suspiciously short boundary"
    );
}

#[test]
fn curve_matches_flood_fill_depth_1() {
    check_depth(1);
}

#[test]
fn curve_matches_flood_fill_depth_2() {
    check_depth(2);
}

#[test]
fn curve_matches_flood_fill_depth_3() {
    check_depth(3);
}
