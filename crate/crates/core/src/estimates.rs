//! Brute-force and sampling checks of the quantitative estimates on the arc:
//! the local area lemma, the separation bound, the `C^{2-}` modulus, the
//! Green identity and the Cauchy property of `G_n`.

use std::io::Write;
use std::time::Instant;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arc::{
    area_en, area_en_by_squares, area_en_product, build_j, exact_coord, locate, separation_bound,
    side_len, Address, ArcTree, CantorPoint, PolylineCurve, Tail, Templates,
};
use crate::error::{Error, Result};
use crate::exact::{
    int, ln, segment_y_dx, shoelace_area, to_f64, to_fraction_string, Point, Rational,
};
use crate::functions::{g_certificate, h_cantor, ArcFunctions};

pub const DEFAULT_SEED: u64 = 0x5eed_2026;
/// Smallest square depth for which the area lemma is claimed.
pub const LEMMA_MIN_DEPTH: usize = 6;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MEntry {
    pub epsilon: f64,
    /// Least `M` with `residual <= M delta^(2 - eps)` over the sample.
    pub fitted: f64,
    /// Slope of `ln residual` against `ln delta` (nonzero residuals only).
    pub slope: f64,
    pub nonzero: usize,
    /// `sup_{m >= 6} (3/2) l_m^2 / sep(m)^(2 - eps)`, if finite.
    pub closed_form: f64,
    pub closed_form_holds: bool,
    /// Fitted `M` finite, slope within the slack, closed form dominating.
    pub passes: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub check: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub count: usize,
    pub violations: usize,
    pub witness: Option<Value>,
    #[serde(rename = "M_table", default, skip_serializing_if = "Vec::is_empty")]
    pub m_table: Vec<MEntry>,
    /// Largest residual-to-bound ratio observed, where meaningful.
    pub max_ratio: Option<f64>,
    pub exploratory: bool,
    pub runtime_ms: u128,
}

impl VerificationReport {
    fn new(check: &str, params: Value, seed: Option<u64>) -> Self {
        Self {
            check: check.to_string(),
            params,
            seed,
            count: 0,
            violations: 0,
            witness: None,
            m_table: Vec::new(),
            max_ratio: None,
            exploratory: false,
            runtime_ms: 0,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn point_json(p: &Point) -> Value {
    json!([to_fraction_string(&p.x), to_fraction_string(&p.y)])
}

fn fmax(a: Option<f64>, b: f64) -> Option<f64> {
    Some(a.map_or(b, |a| a.max(b)))
}

/// The area lemma at depth `n`: for every depth-`m` square and every pair of
/// depth-`n` anchors inside it, `|G_n(q) - G_n(p) - chord| < Area(Q_w)`.
///
/// `m < 6` is outside the lemma's hypothesis and only runs with `exploratory`.
pub fn check_lemma1(n: usize, m: usize, exploratory: bool) -> Result<VerificationReport> {
    if m >= n {
        return Err(Error::Hypothesis(format!(
            "need m < n, got m = {m}, n = {n}"
        )));
    }
    if m < LEMMA_MIN_DEPTH && !exploratory {
        return Err(Error::Hypothesis(format!(
            "the lemma needs m >= {LEMMA_MIN_DEPTH}, got {m}"
        )));
    }
    let started = Instant::now();
    let funcs = ArcFunctions::new(n)?;
    let table = funcs.anchor_table();
    let block = 1usize << (2 * (n - m));
    let area = side_len(m) * side_len(m);

    struct Outcome {
        count: usize,
        violations: usize,
        worst: Rational,
        witness: Option<(usize, usize, usize)>,
    }
    let outcomes: Vec<Outcome> = table
        .par_chunks(block)
        .enumerate()
        .map(|(square, leaves)| {
            let anchors: Vec<(&Point, &Rational)> = leaves
                .iter()
                .flat_map(|r| [(&r.entry, &r.g_entry), (&r.exit, &r.g_exit)])
                .collect();
            let mut out = Outcome {
                count: 0,
                violations: 0,
                worst: Rational::zero(),
                witness: None,
            };
            for (i, (p, gp)) in anchors.iter().enumerate() {
                for (j, (q, gq)) in anchors.iter().enumerate() {
                    let residual = (*gq - *gp - segment_y_dx(p, q)).abs();
                    out.count += 1;
                    if residual >= area {
                        out.violations += 1;
                        out.witness.get_or_insert((square, i, j));
                    }
                    if residual > out.worst {
                        out.worst = residual;
                    }
                }
            }
            out
        })
        .collect();

    let mut report = VerificationReport::new("lemma1", json!({ "n": n, "m": m }), None);
    report.exploratory = m < LEMMA_MIN_DEPTH;
    let mut worst = Rational::zero();
    for o in &outcomes {
        report.count += o.count;
        report.violations += o.violations;
        if o.worst > worst {
            worst = o.worst.clone();
        }
        if report.witness.is_none() {
            if let Some((square, i, j)) = o.witness {
                let leaf = |k: usize| &table[square * block + k / 2];
                let tail = |k: usize| if k.is_multiple_of(2) { "A" } else { "B" };
                report.witness = Some(json!({
                    "square": Address::from_index(m, square as u64).to_string(),
                    "p": format!("{}.{}", leaf(i).address, tail(i)),
                    "q": format!("{}.{}", leaf(j).address, tail(j)),
                }));
            }
        }
    }
    report.max_ratio = Some(to_f64(&(worst / area)));
    report.runtime_ms = started.elapsed().as_millis();
    Ok(report)
}

/// A uniformly random anchor of the given depth.
pub fn random_anchor<R: Rng>(rng: &mut R, depth: usize) -> CantorPoint {
    let digits = (0..depth).map(|_| rng.random_range(0..4u8)).collect();
    let tail = if rng.random_bool(0.5) {
        Tail::Zeros
    } else {
        Tail::Threes
    };
    CantorPoint::new(Address::new(digits).expect("digits in range"), tail)
}

/// Random anchor pairs at depth `n`: `|p - q| >= 1 / (2^{m+1} (m+1)(m+2))`.
pub fn check_separation(n: usize, pairs: usize, seed: u64) -> Result<VerificationReport> {
    let started = Instant::now();
    let templates = Templates::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample: Vec<(CantorPoint, CantorPoint)> = (0..pairs)
        .map(|_| (random_anchor(&mut rng, n), random_anchor(&mut rng, n)))
        .collect();

    let results: Vec<Result<Option<(bool, f64)>>> = sample
        .par_iter()
        .map(|(p, q)| {
            let (_, bound) = match separation_bound(p, q) {
                Ok(x) => x,
                Err(Error::UndefinedSeparation) => return Ok(None),
                Err(e) => return Err(e),
            };
            let d2 = exact_coord(&templates, p)?.dist2(&exact_coord(&templates, q)?);
            let b2 = &bound * &bound;
            Ok(Some((d2 >= b2, to_f64(&(b2 / d2)).sqrt())))
        })
        .collect();

    let mut report =
        VerificationReport::new("separation", json!({ "n": n, "pairs": pairs }), Some(seed));
    for (i, r) in results.into_iter().enumerate() {
        let Some((ok, ratio)) = r? else { continue };
        report.count += 1;
        report.max_ratio = fmax(report.max_ratio, ratio);
        if !ok {
            report.violations += 1;
            report.witness.get_or_insert_with(
                || json!({ "p": sample[i].0.to_string(), "q": sample[i].1.to_string() }),
            );
        }
    }
    report.runtime_ms = started.elapsed().as_millis();
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcFn {
    G,
    H,
    F,
}

impl std::str::FromStr for ArcFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "G" | "g" => Ok(ArcFn::G),
            "H" | "h" => Ok(ArcFn::H),
            "F" | "f" => Ok(ArcFn::F),
            _ => Err(crate::error::domain(format!("unknown function {s:?}"))),
        }
    }
}

/// One Taylor-remainder sample for the `C^{2-}` condition.
#[derive(Clone, Debug)]
pub struct ModulusSample {
    pub p: CantorPoint,
    pub q: CantorPoint,
    /// Depth of the smallest common square.
    pub m: usize,
    pub delta: Rational,
    pub residual: Rational,
}

impl ModulusSample {
    pub fn ln_delta(&self) -> f64 {
        ln(&self.delta)
    }

    pub fn ln_residual(&self) -> Option<f64> {
        (!self.residual.is_zero()).then(|| ln(&self.residual))
    }
}

/// Pairs with a uniformly random common-prefix length, diverging digits at
/// that position, and random digits below it down to `depth`.
pub fn sample_pairs(depth: usize, count: usize, seed: u64) -> Vec<(CantorPoint, CantorPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.random_range(0..depth);
            let prefix: Vec<u8> = (0..m).map(|_| rng.random_range(0..4u8)).collect();
            let a = rng.random_range(0..4u8);
            let b = (a + rng.random_range(1..4u8)) % 4;
            let mut make = |first: u8| {
                let mut d = prefix.clone();
                d.push(first);
                d.extend((m + 1..depth).map(|_| rng.random_range(0..4u8)));
                let tail = if rng.random_bool(0.5) {
                    Tail::Zeros
                } else {
                    Tail::Threes
                };
                CantorPoint::new(Address::new(d).expect("digits in range"), tail)
            };
            let p = make(a);
            let q = make(b);
            (p, q)
        })
        .collect()
}

/// Exact samples of `|f(q) - f(p) - f_x(p) dx - f_y(p) dy|` with the prescribed jets.
pub fn modulus_samples(
    funcs: &ArcFunctions,
    which: ArcFn,
    pairs: &[(CantorPoint, CantorPoint)],
) -> Result<Vec<ModulusSample>> {
    let c = funcs.constant_c();
    pairs
        .par_iter()
        .map(|(p, q)| {
            let (m, _) = separation_bound(p, q)?;
            let xp = exact_coord(funcs.templates(), p)?;
            let xq = exact_coord(funcs.templates(), q)?;
            let dx = &xq.x - &xp.x;
            let delta = xp.l1(&xq);
            let taylor = |gp: Rational, gq: Rational| gq - gp - &xp.y * &dx;
            let residual = match which {
                ArcFn::H => h_cantor(q)? - h_cantor(p)?,
                ArcFn::G => taylor(funcs.g_anchor(p)?, funcs.g_anchor(q)?),
                ArcFn::F => taylor(
                    funcs.g_anchor(p)? + &c * h_cantor(p)?,
                    funcs.g_anchor(q)? + &c * h_cantor(q)?,
                ),
            }
            .abs();
            Ok(ModulusSample {
                p: p.clone(),
                q: q.clone(),
                m,
                delta,
                residual,
            })
        })
        .collect()
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), (x, y)| {
        (num + (x - mx) * (y - my), den + (x - mx) * (x - mx))
    });
    num / den
}

/// `ln((3/2) l_m^2) - (2 - eps) ln sep(m)` in closed form.
fn closed_form_log_ratio(m: usize, eps: f64) -> f64 {
    let mf = m as f64;
    let ln2 = std::f64::consts::LN_2;
    let ln_bound = (1.5f64).ln() - (2.0 * mf + 2.0) * ln2 + 2.0 * ((mf + 2.0) / (mf + 1.0)).ln();
    let ln_sep = -(mf + 1.0) * ln2 - ((mf + 1.0) * (mf + 2.0)).ln();
    ln_bound - (2.0 - eps) * ln_sep
}

/// `sup_{m >= 6}` of the closed-form ratio. The ratio is unimodal in `m`, so
/// scanning past its peak is enough.
pub fn closed_form_m(eps: f64) -> f64 {
    let peak = ((4.0 - eps) / (eps * std::f64::consts::LN_2)).ceil() as usize + 8;
    (LEMMA_MIN_DEPTH..=peak.max(64))
        .map(|m| closed_form_log_ratio(m, eps))
        .fold(f64::NEG_INFINITY, f64::max)
        .exp()
}

/// `(3/2) l_m^2 <= M sep(m)^(2 - eps)` for `6 <= m <= max_m`, in logs with a
/// relative slack of `1e-12`.
pub fn closed_form_holds(eps: f64, m_const: f64, max_m: usize) -> bool {
    (LEMMA_MIN_DEPTH..=max_m).all(|m| closed_form_log_ratio(m, eps) <= m_const.ln() + 1e-12)
}

pub fn m_entry(samples: &[ModulusSample], eps: f64) -> MEntry {
    let logs: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|s| s.ln_residual().map(|r| (s.ln_delta(), r)))
        .collect();
    let fitted = logs
        .iter()
        .map(|(d, r)| r - (2.0 - eps) * d)
        .fold(f64::NEG_INFINITY, f64::max)
        .exp();
    let closed = closed_form_m(eps);
    MEntry {
        epsilon: eps,
        fitted,
        slope: if logs.len() >= 2 {
            fit_slope(&logs)
        } else {
            f64::NAN
        },
        nonzero: logs.len(),
        closed_form: closed,
        closed_form_holds: closed_form_holds(eps, closed, 30),
        passes: false,
    }
}

/// The `C^{2-}` condition for `G`, `H` or `F` on random Cantor pairs.
///
/// Violations count (for `H`) pairs breaking `|H(q) - H(p)| <= 4^-m`, and
/// (for every function) `epsilon` values whose fitted `M` is not finite or whose
/// log-log slope falls below `2 - eps - slope_slack`.
pub fn check_holder(
    which: ArcFn,
    epsilons: &[f64],
    pairs: usize,
    depth: usize,
    seed: u64,
    slope_slack: f64,
) -> Result<(VerificationReport, Vec<ModulusSample>)> {
    if pairs == 0 {
        return Err(Error::EmptySample);
    }
    for &e in epsilons {
        if !(e > 0.0 && e <= 1.0) {
            return Err(crate::error::domain(format!("epsilon {e} outside (0, 1]")));
        }
    }
    let started = Instant::now();
    let funcs = ArcFunctions::new(depth)?;
    let sample = sample_pairs(depth, pairs, seed);
    let samples = modulus_samples(&funcs, which, &sample)?;
    let mut report = VerificationReport::new(
        "holder",
        json!({ "fn": format!("{which:?}"), "epsilons": epsilons, "pairs": pairs, "depth": depth, "slope_slack": slope_slack }),
        Some(seed),
    );
    report.count = samples.len();
    let mut bound_violations = 0usize;
    if which == ArcFn::H {
        for s in &samples {
            let bound = crate::exact::pow4_inv(s.m as u32);
            report.max_ratio = fmax(report.max_ratio, to_f64(&(&s.residual / &bound)));
            if s.residual > bound {
                bound_violations += 1;
                report.violations += 1;
                report.witness.get_or_insert_with(
                    || json!({ "p": s.p.to_string(), "q": s.q.to_string(), "m": s.m }),
                );
            }
        }
    }
    for &eps in epsilons {
        let mut entry = m_entry(&samples, eps);
        entry.passes = entry.fitted.is_finite()
            && entry.slope >= 2.0 - eps - slope_slack
            && entry.closed_form_holds;
        if !entry.passes {
            report.violations += 1;
            report.witness.get_or_insert_with(
                || json!({ "epsilon": eps, "slope": entry.slope, "fitted": entry.fitted }),
            );
        }
        report.m_table.push(entry);
    }
    if which == ArcFn::H {
        report.params["h_bound_violations"] = json!(bound_violations);
    }
    report.runtime_ms = started.elapsed().as_millis();
    Ok((report, samples))
}

pub fn write_samples_csv<W: Write>(samples: &[ModulusSample], mut w: W) -> Result<()> {
    writeln!(w, "p,q,m,delta,residual,ln_delta,ln_residual")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{:e},{:e},{},{}",
            s.p,
            s.q,
            s.m,
            to_f64(&s.delta),
            to_f64(&s.residual),
            s.ln_delta(),
            s.ln_residual().map_or(String::new(), |v| v.to_string())
        )?;
    }
    Ok(())
}

/// Closed form, recursive product and square sum of `Area(E_n)` for `n <= max_depth`
/// (the square sum only up to `square_depth`).
///
/// With `infimum = Some((depth, tol))` the smallest area over `1..=depth` must
/// also lie within `tol` of `1/4`; a miss counts as a violation.
pub fn check_area(
    max_depth: usize,
    square_depth: usize,
    infimum: Option<(usize, f64)>,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut report = VerificationReport::new(
        "area",
        json!({ "max_depth": max_depth, "square_depth": square_depth }),
        None,
    );
    let mut values = Vec::new();
    let tree = ArcTree::build(square_depth.min(max_depth).max(1))?;
    for n in 1..=max_depth {
        let closed = area_en(n);
        let nn = n as i64;
        let oracle = {
            let r = crate::exact::ratio(nn + 2, 2 * (nn + 1));
            &r * &r
        };
        let mut ok = closed == oracle && area_en_product(n) == closed;
        if n <= square_depth {
            let sub = ArcTree {
                templates: tree.templates.clone(),
                levels: tree.levels[..=n].to_vec(),
            };
            ok &= area_en_by_squares(&sub)? == closed;
        }
        report.count += 1;
        if !ok {
            report.violations += 1;
            report.witness.get_or_insert_with(|| json!({ "n": n }));
        }
        values.push(json!({ "n": n, "area": to_fraction_string(&closed) }));
    }
    report.params["values"] = Value::Array(values);
    if let Some((depth, tol)) = infimum {
        let inf = (1..=depth.max(1))
            .map(area_en)
            .min()
            .expect("nonempty range");
        let gap = to_f64(&(&inf - crate::exact::ratio(1, 4)));
        report.count += 1;
        if !(0.0..tol).contains(&gap) {
            report.violations += 1;
            report.witness.get_or_insert_with(
                || json!({ "infimum_depth": depth, "gap": gap, "tolerance": tol }),
            );
        }
        report.params["infimum"] =
            json!({ "depth": depth, "value": to_fraction_string(&inf), "gap": gap });
    }
    report.runtime_ms = started.elapsed().as_millis();
    Ok(report)
}

/// `G` at two depths differs by at most the certificate of the shallower one,
/// on random anchors of depth `fine`. Checks `F` the same way with its own bound.
pub fn check_cauchy(
    coarse: usize,
    fine: usize,
    count: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let lo = ArcFunctions::new(coarse)?;
    let hi = ArcFunctions::new(fine)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<CantorPoint> = (0..count).map(|_| random_anchor(&mut rng, fine)).collect();
    let cert = g_certificate(coarse);
    let checks: Vec<Result<(bool, f64)>> = points
        .par_iter()
        .map(|p| {
            let ap = crate::functions::ArcPoint::Cantor(p.clone());
            let g_lo = lo.g_at(p)?;
            let g_hi = hi.g_at(p)?;
            let f_lo = lo.f_at(&ap)?;
            let f_hi = hi.f_at(&ap)?;
            let dg = (&g_lo.value - &g_hi.value).abs();
            let df = (&f_lo.value - &f_hi.value).abs();
            let ok = dg <= g_lo.error_bound && df <= f_lo.error_bound;
            Ok((ok, to_f64(&(dg / &cert))))
        })
        .collect();
    let mut report = VerificationReport::new(
        "cauchy",
        json!({ "coarse": coarse, "fine": fine, "count": count, "certificate": to_fraction_string(&cert) }),
        Some(seed),
    );
    for (i, c) in checks.into_iter().enumerate() {
        let (ok, r) = c?;
        report.count += 1;
        report.max_ratio = fmax(report.max_ratio, r);
        if !ok {
            report.violations += 1;
            report
                .witness
                .get_or_insert_with(|| json!({ "p": points[i].to_string() }));
        }
    }
    report.runtime_ms = started.elapsed().as_millis();
    Ok(report)
}

fn orient(a: &Point, b: &Point, c: &Point) -> Rational {
    (&b.x - &a.x) * (&c.y - &a.y) - (&b.y - &a.y) * (&c.x - &a.x)
}

/// True if the closed segments `[p, q]` and `[c, d]` share a point other than `p` or `q`.
fn chord_hits(p: &Point, q: &Point, c: &Point, d: &Point) -> bool {
    let (o1, o2) = (orient(p, q, c), orient(p, q, d));
    let (o3, o4) = (orient(c, d, p), orient(c, d, q));
    let opposite = |a: &Rational, b: &Rational| {
        (a.is_positive() && b.is_positive()) || (a.is_negative() && b.is_negative())
    };
    if opposite(&o1, &o2) || opposite(&o3, &o4) {
        return false;
    }
    let pq = q.sub(p);
    if o1.is_zero() && o2.is_zero() {
        // collinear: compare projections on the chord direction
        let t = |x: &Point| {
            let v = x.sub(p);
            (&v.x * &pq.x + &v.y * &pq.y) / (&pq.x * &pq.x + &pq.y * &pq.y)
        };
        let (tc, td) = (t(c), t(d));
        let lo = tc.clone().min(td.clone()).max(int(0));
        let hi = tc.max(td).min(int(1));
        if lo > hi {
            return false;
        }
        return lo != hi || !(lo.is_zero() || lo == int(1));
    }
    let cd = d.sub(c);
    let denom = &pq.x * &cd.y - &pq.y * &cd.x;
    let cp = c.sub(p);
    let t = (&cp.x * &cd.y - &cp.y * &cd.x) / denom;
    !(t.is_zero() || t == int(1))
}

/// Whether `[p, q]` meets the curve only at its endpoints.
pub fn chord_is_admissible(curve: &PolylineCurve, p: &Point, q: &Point) -> bool {
    if p == q {
        return false;
    }
    let bb = |a: &Point, b: &Point| {
        let (a, b) = (a.to_f64(), b.to_f64());
        [
            a[0].min(b[0]),
            a[1].min(b[1]),
            a[0].max(b[0]),
            a[1].max(b[1]),
        ]
    };
    let cb = bb(p, q);
    let slack = 1e-12;
    curve.segments().all(|(c, d)| {
        let sb = bb(c, d);
        let disjoint = sb[0] > cb[2] + slack
            || sb[2] < cb[0] - slack
            || sb[1] > cb[3] + slack
            || sb[3] < cb[1] - slack;
        disjoint || !chord_hits(p, q, c, d)
    })
}

/// `G_n(q) - G_n(p) - chord` against the signed area enclosed by the curve
/// from `p` to `q` and the chord back, on random admissible chords.
pub fn check_green(max_depth: usize, count: usize, seed: u64) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let curves: Vec<(ArcFunctions, PolylineCurve)> = (1..=max_depth)
        .map(|n| Ok((ArcFunctions::new(n)?, build_j(&ArcTree::build(n)?))))
        .collect::<Result<_>>()?;

    let mut chords = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while chords.len() < count {
        attempts += 1;
        if attempts > 200 * count.max(1) {
            return Err(Error::Construction(
                "could not find enough admissible chords".into(),
            ));
        }
        let n = rng.random_range(1..=max_depth);
        let curve = &curves[n - 1].1;
        let len = curve.vertices.len();
        // nearby vertices give chords that usually stay clear of the curve
        let i = rng.random_range(0..len - 1);
        let span = rng.random_range(1..=len.clamp(2, 64) - 1);
        let j = (i + span).min(len - 1);
        let (p, q) = (&curve.vertices[i], &curve.vertices[j]);
        if j > i + 1 && chord_is_admissible(curve, p, q) {
            chords.push((n, i, j));
        }
    }

    let results: Vec<(bool, Rational)> = chords
        .par_iter()
        .map(|&(n, i, j)| {
            let (funcs, curve) = &curves[n - 1];
            let (p, q) = (&curve.vertices[i], &curve.vertices[j]);
            let lhs = funcs.g_on_curve(q).expect("vertex on curve")
                - funcs.g_on_curve(p).expect("vertex on curve")
                - segment_y_dx(p, q);
            // the loop runs along the curve then back over the chord; `y dx` around
            // a counter-clockwise loop is minus its area
            let area = -shoelace_area(&curve.vertices[i..=j]);
            (lhs == area, area)
        })
        .collect();

    let mut report = VerificationReport::new(
        "green",
        json!({ "max_depth": max_depth, "count": count, "attempts": attempts }),
        Some(seed),
    );
    let mut nonzero = 0usize;
    for (k, (ok, area)) in results.iter().enumerate() {
        report.count += 1;
        nonzero += usize::from(!area.is_zero());
        if !ok {
            report.violations += 1;
            let (n, i, j) = chords[k];
            let curve = &curves[n - 1].1;
            report.witness.get_or_insert_with(|| {
                json!({ "n": n, "p": point_json(&curve.vertices[i]), "q": point_json(&curve.vertices[j]) })
            });
        }
    }
    report.params["nonzero_area"] = json!(nonzero);
    report.runtime_ms = started.elapsed().as_millis();
    Ok(report)
}

/// Locates an anchor by replaying the isometry chain; exposed for witnesses.
pub fn anchor_point(templates: &Templates, p: &CantorPoint) -> Result<Point> {
    let node = locate(templates, &p.address);
    match p.tail {
        Tail::Zeros => Ok(node.entry),
        Tail::Threes => Ok(node.exit),
        Tail::Unresolved => Err(Error::ApproximatePoint(p.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn lemma_rejects_shallow_squares_unless_exploratory() {
        assert!(matches!(
            check_lemma1(6, 3, false),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            check_lemma1(6, 6, false),
            Err(Error::Hypothesis(_))
        ));
        let r = check_lemma1(4, 2, true).unwrap();
        assert!(r.exploratory);
        assert_eq!(r.count, 16 * 32 * 32);
    }

    #[test]
    fn lemma_one_refinement_step() {
        let r = check_lemma1(7, 6, false).unwrap();
        assert_eq!(r.violations, 0, "{:?}", r.witness);
        assert_eq!(r.count, 4096 * 64);
        assert!(r.max_ratio.unwrap() < 1.0);
    }

    #[test]
    fn lemma_area_bound_at_depth_six() {
        // Area(Q_w) at m = 6 is 2^-14 (8/7)^2
        assert_eq!(side_len(6) * side_len(6), ratio(64, 49 * 16384));
    }

    #[test]
    fn separation_has_no_violations() {
        let r = check_separation(10, 2000, DEFAULT_SEED).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.count > 1900);
        assert!(r.max_ratio.unwrap() <= 1.0);
    }

    #[test]
    fn h_increment_bounded_by_quarter_power() {
        let (r, _) = check_holder(ArcFn::H, &[0.5], 500, 10, 7, 0.05).unwrap();
        assert!(r.max_ratio.unwrap() <= 1.0);
        assert_eq!(r.params["h_bound_violations"], 0);
    }

    #[test]
    fn horizontal_step_has_zero_g_residual() {
        // B_1 -> A_2 runs along the connector at height 5/8
        let f = ArcFunctions::new(4).unwrap();
        let pairs = vec![("1.B".parse().unwrap(), "2.A".parse().unwrap())];
        let s = modulus_samples(&f, ArcFn::G, &pairs).unwrap();
        assert_eq!(s[0].residual, int(0));
        assert_eq!(s[0].delta, ratio(1, 4));
    }

    #[test]
    fn closed_form_constant_dominates() {
        for eps in [0.5, 0.25, 0.1] {
            let m = closed_form_m(eps);
            assert!(m.is_finite() && m > 0.0);
            assert!(closed_form_holds(eps, m, 30));
            assert!(closed_form_holds(eps, m, 400));
        }
        assert!(closed_form_m(0.5) < closed_form_m(0.25));
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert!(matches!(
            check_holder(ArcFn::G, &[0.5], 0, 8, 1, 0.05),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        assert!((fit_slope(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn chord_admissibility() {
        let tree = ArcTree::build(1).unwrap();
        let j = build_j(&tree);
        let b0 = Point::new(int(0), ratio(3, 8));
        let b1 = Point::new(ratio(3, 8), ratio(5, 8));
        // overlaps the connector [B_0, A_1]
        assert!(!chord_is_admissible(&j, &b0, &Point::new(int(0), int(1))));
        // overlaps the first sides of Q_0
        assert!(!chord_is_admissible(
            &j,
            &Point::origin(),
            &Point::new(ratio(1, 2), int(0))
        ));
        // passes through vertices of J_1 on the bottom edge
        assert!(!chord_is_admissible(
            &j,
            &Point::origin(),
            &Point::from_ints(1, 0)
        ));
        assert!(chord_is_admissible(&j, &b0, &b1));
        assert!(chord_is_admissible(
            &j,
            &Point::new(ratio(3, 8), int(0)),
            &Point::new(ratio(5, 8), int(0))
        ));
    }

    #[test]
    fn green_identity_small() {
        let r = check_green(3, 200, 11).unwrap();
        assert_eq!(r.violations, 0, "{:?}", r.witness);
        assert!(r.params["nonzero_area"].as_u64().unwrap() > 100);
    }

    #[test]
    fn area_report() {
        let r = check_area(8, 4, None).unwrap();
        assert!(r.passed());
        assert_eq!(r.count, 8);
        assert_eq!(r.params["values"][0]["area"], "9/16");
        assert_eq!(r.params["values"][1]["area"], "4/9");
        // Area(E_30) = (16/31)^2, still about 0.0164 above the limit
        let r = check_area(2, 0, Some((30, 1e-3))).unwrap();
        assert_eq!(r.violations, 1);
        assert_eq!(r.params["infimum"]["value"], "256/961");
        let r = check_area(2, 0, Some((30, 0.02))).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn cauchy_small() {
        let r = check_cauchy(4, 8, 200, 3).unwrap();
        assert!(r.passed(), "{:?}", r.witness);
    }
}
