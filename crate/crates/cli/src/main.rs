mod config;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use whitney_arc::arc::{build_j, render_arc, ArcTree, CantorPoint};
use whitney_arc::estimates::{self, ArcFn, VerificationReport, DEFAULT_SEED};
use whitney_arc::exact::{to_decimal_string, to_fraction_string};
use whitney_arc::functions::{
    h_cantor, ArcFunctions, ArcPoint, CertifiedValue, DEFAULT_EVAL_DEPTH,
};
use whitney_arc::jordan::{check_chain, JordanCurve};
use whitney_arc::surface::{self, MeshParams};
use whitney_arc::whitney::{self, ComplexIndex, ExtensionFn, ExtensionParams};
use whitney_arc::Error;

use config::{FileConfig, RunConfig};

/// Rayon worker count; unset means one per core.
const THREADS_ENV: &str = "WHITNEY_ARC_THREADS";

#[derive(Parser)]
#[command(
    name = "whitney-arc",
    version,
    about = "Fractal arc, Whitney extension and contact-tangent sphere"
)]
struct Cli {
    #[command(flatten)]
    knobs: Knobs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Default)]
struct Knobs {
    /// Flat TOML file with any of the options below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Construction depth n.
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    eval_depth: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Sampling budget.
    #[arg(long, global = true)]
    pairs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    h_min: Option<f64>,
    #[arg(long, global = true)]
    radius: Option<f64>,
    #[arg(long, global = true)]
    mesh_step: Option<f64>,
    /// Contact scaling factor c.
    #[arg(long, global = true)]
    scale: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Knobs {
    fn as_file(&self) -> FileConfig {
        FileConfig {
            command: None,
            depth: self.depth,
            eval_depth: self.eval_depth,
            epsilons: self.epsilons.clone(),
            pairs: self.pairs,
            seed: self.seed,
            h_min: self.h_min,
            radius: self.radius,
            mesh_step: self.mesh_step,
            scale: self.scale,
            out: self.out.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// The arc E_n and the curve J_n.
    #[command(subcommand)]
    Arc(ArcCmd),
    /// Point evaluation of G, H, F.
    #[command(subcommand)]
    Fn(FnCmd),
    /// Exact and sampled checks; exit 1 on any violation.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// The closed curve and its jet field.
    #[command(subcommand)]
    Curve(CurveCmd),
    /// The Whitney extension.
    #[command(subcommand)]
    Extend(ExtendCmd),
    /// The sphere mesh and the contact check.
    #[command(subcommand)]
    Mesh(MeshCmd),
    /// Every check in one summary.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand)]
enum ArcCmd {
    /// Square tree as JSON.
    Build,
    /// SVG of E_n and J_n.
    Render {
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FnCmd {
    /// Exact value and certificate of G, H or F at an anchor.
    Eval {
        #[arg(long)]
        address: String,
        /// Anchor: A (zeros tail) or B (threes tail).
        #[arg(long, default_value = "B")]
        tail: String,
        #[arg(long = "fn", default_value = "F")]
        function: ArcFn,
        /// Decimal digits for the approximate rendering.
        #[arg(long, default_value_t = 20)]
        digits: usize,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Exhaustive area lemma at depth n.
    Lemma1 {
        /// Square depths m to check.
        #[arg(long, value_delimiter = ',', default_value = "6,7")]
        m: Vec<usize>,
        /// Allow m below the lemma's hypothesis.
        #[arg(long)]
        exploratory: bool,
    },
    /// Seeded anchor pairs against the separation bound.
    Separation,
    /// Sampled modulus of continuity, fitted M and slope per epsilon.
    Holder {
        #[arg(long = "fn", value_delimiter = ',', default_value = "G,H,F")]
        functions: Vec<ArcFn>,
        #[arg(long, default_value_t = 0.05)]
        slope_slack: f64,
    },
    /// Exact areas and, optionally, their infimum.
    Area {
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        /// Also require inf_{n <= D} Area(E_n) within the tolerance of 1/4.
        #[arg(long)]
        infimum_depth: Option<usize>,
        #[arg(long, default_value_t = 1e-3)]
        infimum_tol: f64,
    },
}

#[derive(Subcommand)]
enum CurveCmd {
    /// Jet field, chain closure and polyline.
    Build {
        /// Anchors per copy; all of them when omitted.
        #[arg(long)]
        per_copy: Option<usize>,
    },
}

#[derive(Subcommand)]
enum ExtendCmd {
    /// Build the extension and report its residuals.
    Build {
        /// Also dump every cover leaf (large).
        #[arg(long)]
        cover_json: bool,
    },
    /// Raster of the extension over its box.
    Sample {
        #[arg(long, default_value_t = 1.0 / 64.0)]
        step: f64,
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Triangulated sphere with OBJ, PLY and sidecar.
    Build,
    /// Contact residual on the curve and at far vertices.
    CheckContact {
        /// Far-vertex samples.
        #[arg(long, default_value_t = 2000)]
        far_samples: usize,
    },
    /// Apply (x, y, z) -> (cx, cy, c^2 z) and re-check contact.
    Scale,
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Every check at its acceptance settings.
    All {
        /// Smaller budgets for a quick look.
        #[arg(long)]
        quick: bool,
    },
}

/// Library errors become exit codes: bad input is a usage error.
fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Domain(_)
        | Error::Hypothesis(_)
        | Error::Stencil(_)
        | Error::ApproximatePoint(_)
        | Error::UndefinedSeparation => 2,
        _ => 3,
    }
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type Outcome = Result<bool, Failure>;

struct Ctx {
    cfg: RunConfig,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, Failure> {
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    /// Writes `<stem>.json` with the config, its hash and the result. Runtime
    /// sits in one top-level field so summaries are otherwise reproducible.
    fn summary(&self, stem: &str, mut result: Value, runtime_ms: u128) -> Result<PathBuf, Failure> {
        strip_runtime(&mut result);
        let doc = json!({
            "command": self.cfg.command,
            "config": self.cfg,
            "config_sha256": self.cfg.sha256(),
            "result": result,
            "runtime_ms": runtime_ms,
        });
        let path = self.path(&format!("{stem}.json"));
        fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
        fs::write(
            self.path(&format!("{stem}.config.toml")),
            self.cfg.to_toml(),
        )?;
        Ok(path)
    }

    fn params(&self) -> ExtensionParams {
        ExtensionParams {
            h_min: self.cfg.h_min,
            ..Default::default()
        }
    }

    fn mesh_params(&self) -> MeshParams {
        MeshParams {
            radius: self.cfg.radius,
            step: self.cfg.mesh_step,
            ..Default::default()
        }
    }
}

fn strip_runtime(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("runtime_ms");
            m.values_mut().for_each(strip_runtime);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_runtime),
        _ => {}
    }
}

fn command_name(cmd: &Cmd) -> String {
    let (a, b) = match cmd {
        Cmd::Arc(ArcCmd::Build) => ("arc", "build"),
        Cmd::Arc(ArcCmd::Render { .. }) => ("arc", "render"),
        Cmd::Fn(FnCmd::Eval { .. }) => ("fn", "eval"),
        Cmd::Verify(VerifyCmd::Lemma1 { .. }) => ("verify", "lemma1"),
        Cmd::Verify(VerifyCmd::Separation) => ("verify", "separation"),
        Cmd::Verify(VerifyCmd::Holder { .. }) => ("verify", "holder"),
        Cmd::Verify(VerifyCmd::Area { .. }) => ("verify", "area"),
        Cmd::Curve(CurveCmd::Build { .. }) => ("curve", "build"),
        Cmd::Extend(ExtendCmd::Build { .. }) => ("extend", "build"),
        Cmd::Extend(ExtendCmd::Sample { .. }) => ("extend", "sample"),
        Cmd::Mesh(MeshCmd::Build) => ("mesh", "build"),
        Cmd::Mesh(MeshCmd::CheckContact { .. }) => ("mesh", "check-contact"),
        Cmd::Mesh(MeshCmd::Scale) => ("mesh", "scale"),
        Cmd::Report(ReportCmd::All { .. }) => ("report", "all"),
    };
    format!("{a} {b}")
}

/// Depth default per command family.
fn default_depth(cmd: &Cmd) -> usize {
    match cmd {
        Cmd::Arc(_) => 3,
        Cmd::Fn(_) => DEFAULT_EVAL_DEPTH,
        Cmd::Verify(VerifyCmd::Lemma1 { .. }) => 8,
        Cmd::Verify(VerifyCmd::Separation) => 10,
        Cmd::Verify(_) => DEFAULT_EVAL_DEPTH,
        Cmd::Curve(_) | Cmd::Extend(_) | Cmd::Mesh(_) | Cmd::Report(_) => {
            whitney::DEFAULT_JET_DEPTH
        }
    }
}

fn default_pairs(cmd: &Cmd) -> usize {
    match cmd {
        Cmd::Verify(VerifyCmd::Separation) => 100_000,
        _ => 10_000,
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, Failure> {
    let file = match &cli.knobs.config {
        Some(p) => FileConfig::load(p).map_err(Failure::Usage)?,
        None => FileConfig::default(),
    };
    let f = file.overlay(cli.knobs.as_file());
    Ok(RunConfig {
        command: command_name(&cli.cmd),
        depth: f.depth.unwrap_or_else(|| default_depth(&cli.cmd)),
        eval_depth: f.eval_depth.unwrap_or(DEFAULT_EVAL_DEPTH),
        epsilons: f.epsilons.unwrap_or_else(|| vec![0.5, 0.25, 0.1]),
        pairs: f.pairs.unwrap_or_else(|| default_pairs(&cli.cmd)),
        seed: f.seed.unwrap_or(DEFAULT_SEED),
        h_min: f.h_min.unwrap_or(ExtensionParams::default().h_min),
        radius: f.radius.unwrap_or(surface::DEFAULT_RADIUS),
        mesh_step: f.mesh_step.unwrap_or(surface::DEFAULT_MESH_STEP),
        scale: f.scale.unwrap_or(0.5),
        out: f.out.unwrap_or_else(|| PathBuf::from("out")),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var(THREADS_ENV) {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got {n:?}");
                return ExitCode::from(2);
            }
        }
    }
    let outcome = resolve(&cli).and_then(|cfg| {
        fs::create_dir_all(&cfg.out)?;
        run(&Ctx { cfg }, &cli.cmd)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

fn run(ctx: &Ctx, cmd: &Cmd) -> Outcome {
    match cmd {
        Cmd::Arc(c) => arc(ctx, c),
        Cmd::Fn(FnCmd::Eval {
            address,
            tail,
            function,
            digits,
        }) => fn_eval(ctx, address, tail, *function, *digits),
        Cmd::Verify(c) => verify(ctx, c),
        Cmd::Curve(CurveCmd::Build { per_copy }) => curve_build(ctx, *per_copy),
        Cmd::Extend(c) => extend(ctx, c),
        Cmd::Mesh(c) => mesh(ctx, c),
        Cmd::Report(ReportCmd::All { quick }) => report_all(ctx, *quick),
    }
}

fn arc(ctx: &Ctx, cmd: &ArcCmd) -> Outcome {
    let t = Instant::now();
    let tree = ArcTree::build(ctx.cfg.depth)?;
    match cmd {
        ArcCmd::Build => {
            fs::write(
                ctx.path("tree.json"),
                serde_json::to_string(&tree.to_json())?,
            )?;
            let area = whitney_arc::arc::area_en(ctx.cfg.depth);
            let s = ctx.summary(
                "arc_build",
                json!({ "nodes": tree.levels.iter().map(Vec::len).sum::<usize>(), "area": to_fraction_string(&area), "tree": "tree.json" }),
                t.elapsed().as_millis(),
            )?;
            println!("{}", s.display());
        }
        ArcCmd::Render { svg } => {
            let path = svg.clone().unwrap_or_else(|| ctx.path("arc.svg"));
            fs::write(&path, render_arc(&tree, Some(&build_j(&tree))))?;
            ctx.summary(
                "arc_render",
                json!({ "svg": path }),
                t.elapsed().as_millis(),
            )?;
            println!("{}", path.display());
        }
    }
    Ok(true)
}

fn fn_eval(ctx: &Ctx, address: &str, tail: &str, which: ArcFn, digits: usize) -> Outcome {
    let t = Instant::now();
    let point: CantorPoint = format!("{address}.{tail}").parse()?;
    let value = match which {
        ArcFn::H => CertifiedValue::exact(h_cantor(&point)?, ctx.cfg.depth),
        ArcFn::G => ArcFunctions::new(ctx.cfg.depth)?.g_at(&point)?,
        ArcFn::F => ArcFunctions::new(ctx.cfg.depth)?.f_at(&ArcPoint::Cantor(point.clone()))?,
    };
    println!("{}", to_fraction_string(&value.value));
    println!("~ {}", to_decimal_string(&value.value, digits));
    println!(
        "error bound {}",
        to_decimal_string(&value.error_bound, digits)
    );
    ctx.summary(
        "fn_eval",
        json!({
            "point": point.to_string(),
            "fn": format!("{which:?}"),
            "value": to_fraction_string(&value.value),
            "error_bound": to_fraction_string(&value.error_bound),
            "depth_used": value.depth_used,
        }),
        t.elapsed().as_millis(),
    )?;
    Ok(true)
}

/// Summary plus, on failure, a witness file whose path is printed.
fn conclude(ctx: &Ctx, stem: &str, reports: &[VerificationReport], runtime_ms: u128) -> Outcome {
    let passed = reports.iter().all(VerificationReport::passed);
    let path = ctx.summary(stem, serde_json::to_value(reports)?, runtime_ms)?;
    for r in reports {
        println!(
            "{} {}: {} checked, {} violations",
            if r.passed() { "PASS" } else { "FAIL" },
            r.check,
            r.count,
            r.violations
        );
    }
    println!("summary {}", path.display());
    if !passed {
        let witnesses: Vec<&Value> = reports.iter().filter_map(|r| r.witness.as_ref()).collect();
        let w = ctx.path(&format!("{stem}_witness.json"));
        fs::write(&w, serde_json::to_string_pretty(&witnesses)?)?;
        eprintln!("violations found; witness {}", w.display());
    }
    Ok(passed)
}

fn verify(ctx: &Ctx, cmd: &VerifyCmd) -> Outcome {
    let t = Instant::now();
    let c = &ctx.cfg;
    match cmd {
        VerifyCmd::Lemma1 { m, exploratory } => {
            let reports = m
                .iter()
                .map(|&m| estimates::check_lemma1(c.depth, m, *exploratory))
                .collect::<Result<Vec<_>, _>>()?;
            conclude(ctx, "verify_lemma1", &reports, t.elapsed().as_millis())
        }
        VerifyCmd::Separation => {
            let r = estimates::check_separation(c.depth, c.pairs, c.seed)?;
            conclude(ctx, "verify_separation", &[r], t.elapsed().as_millis())
        }
        VerifyCmd::Holder {
            functions,
            slope_slack,
        } => {
            let mut reports = Vec::new();
            for &f in functions {
                let (r, samples) = estimates::check_holder(
                    f,
                    &c.epsilons,
                    c.pairs,
                    c.eval_depth,
                    c.seed,
                    *slope_slack,
                )?;
                estimates::write_samples_csv(&samples, ctx.create(&format!("holder_{f:?}.csv"))?)?;
                for e in &r.m_table {
                    println!(
                        "{f:?} eps={} M_fit={:.4e} slope={:.3} M_closed={:.4e} {}",
                        e.epsilon,
                        e.fitted,
                        e.slope,
                        e.closed_form,
                        if e.passes { "ok" } else { "miss" }
                    );
                }
                reports.push(r);
            }
            conclude(ctx, "verify_holder", &reports, t.elapsed().as_millis())
        }
        VerifyCmd::Area {
            max_depth,
            infimum_depth,
            infimum_tol,
        } => {
            let r = estimates::check_area(
                *max_depth,
                (*max_depth).min(6),
                infimum_depth.map(|d| (d, *infimum_tol)),
            )?;
            for v in r.params["values"].as_array().into_iter().flatten() {
                println!(
                    "n={} Area(E_n)={}",
                    v["n"],
                    v["area"].as_str().unwrap_or_default()
                );
            }
            conclude(ctx, "verify_area", &[r], t.elapsed().as_millis())
        }
    }
}

fn curve_build(ctx: &Ctx, per_copy: Option<usize>) -> Outcome {
    let t = Instant::now();
    let jc = JordanCurve::build(ctx.cfg.depth)?;
    let field = jc.sample_jet_field(per_copy);
    field.write_csv(ctx.create("jets.csv")?)?;
    fs::write(
        ctx.path("jets.json"),
        serde_json::to_string(&field.to_json())?,
    )?;
    fs::write(ctx.path("curve.svg"), jc.svg())?;
    let constants: Vec<String> = (0..4).map(|k| to_fraction_string(jc.constant(k))).collect();
    let s = ctx.summary(
        "curve_build",
        json!({
            "jets": field.len(),
            "jets_exact": field.jets_are_exact(),
            "area": to_fraction_string(&jc.area()),
            "constants": constants,
            "chain_closes": check_chain(&jc.copies).is_ok(),
        }),
        t.elapsed().as_millis(),
    )?;
    println!("{} jets, summary {}", field.len(), s.display());
    Ok(true)
}

fn build_extension(ctx: &Ctx) -> Result<(JordanCurve, ExtensionFn), Failure> {
    let jc = JordanCurve::build(ctx.cfg.depth)?;
    let ext = ExtensionFn::build(&jc.sample_jet_field(None), ctx.params())?;
    Ok((jc, ext))
}

fn extend(ctx: &Ctx, cmd: &ExtendCmd) -> Outcome {
    let t = Instant::now();
    let (_, ext) = build_extension(ctx)?;
    match cmd {
        ExtendCmd::Build { cover_json } => {
            let deep = JordanCurve::build(ctx.cfg.depth + 2)?.sample_jet_field(None);
            let held = whitney::held_out(&deep, &ext, ctx.cfg.depth);
            let rep = whitney::residual_report(&ext, &held, &ext.jets, ctx.params().fd_step())?;
            if *cover_json {
                fs::write(
                    ctx.path("cover.json"),
                    serde_json::to_string(&ext.cover.to_json())?,
                )?;
            }
            let s = ctx.summary(
                "extend_build",
                json!({ "jets": ext.jets.len(), "cells": ext.cover.cells.len(), "leaves": ext.cover.leaf_count(), "residuals": rep }),
                t.elapsed().as_millis(),
            )?;
            println!("{rep:?}\nsummary {}", s.display());
        }
        ExtendCmd::Sample { step, csv } => {
            let header = if *csv {
                ext.write_raster_csv(*step, ctx.create("raster.csv")?)?;
                json!({ "file": "raster.csv" })
            } else {
                let mut h = ext.write_raster_binary(*step, ctx.create("raster.f32")?)?;
                h["file"] = json!("raster.f32");
                h
            };
            let s = ctx.summary("extend_sample", header, t.elapsed().as_millis())?;
            println!("summary {}", s.display());
        }
    }
    Ok(true)
}

fn write_mesh(ctx: &Ctx, mesh: &surface::SurfaceMesh, stem: &str) -> Result<(), Failure> {
    mesh.write_obj(ctx.create(&format!("{stem}.obj"))?)?;
    mesh.write_ply(ctx.create(&format!("{stem}.ply"))?)?;
    fs::write(
        ctx.path(&format!("{stem}_sidecar.json")),
        serde_json::to_string(&mesh.sidecar())?,
    )?;
    Ok(())
}

fn mesh(ctx: &Ctx, cmd: &MeshCmd) -> Outcome {
    let t = Instant::now();
    let (jc, ext) = build_extension(ctx)?;
    let mesh = surface::build_sphere(&ext, ctx.mesh_params())?;
    let h = ctx.params().fd_step();
    match cmd {
        MeshCmd::Build => {
            write_mesh(ctx, &mesh, "mesh")?;
            let s = ctx.summary(
                "mesh_build",
                json!({ "topology": mesh.topology(), "volume": mesh.volume(), "curve_vertices": mesh.curve.len() }),
                t.elapsed().as_millis(),
            )?;
            println!("{:?}\nsummary {}", mesh.topology(), s.display());
        }
        MeshCmd::CheckContact { far_samples } => {
            let (records, summary) = surface::check_contact(&mesh, &ext, h)?;
            surface::write_contact_csv(&records, ctx.create("contact.csv")?)?;
            let index = ComplexIndex::new(jc.tree());
            let far = surface::check_far(&mesh, &ext, &index, *far_samples, h, ctx.cfg.seed)?;
            let s = ctx.summary(
                "mesh_check_contact",
                json!({ "curve": summary, "far": far }),
                t.elapsed().as_millis(),
            )?;
            println!("{summary:?}\n{far:?}\nsummary {}", s.display());
        }
        MeshCmd::Scale => {
            let c = ctx.cfg.scale;
            let scaled = surface::contact_scale(&mesh, c)?;
            write_mesh(ctx, &scaled, "mesh_scaled")?;
            let (_, before) = surface::check_contact(&mesh, &ext, h)?;
            let (_, after) = surface::check_contact(&scaled, &ext, c * h)?;
            let s = ctx.summary(
                "mesh_scale",
                json!({ "c": c, "before": before, "after": after, "covariance_gap": (after.max - c * before.max).abs() }),
                t.elapsed().as_millis(),
            )?;
            println!(
                "max {} -> {} (c = {c})\nsummary {}",
                before.max,
                after.max,
                s.display()
            );
        }
    }
    Ok(true)
}

fn report_all(ctx: &Ctx, quick: bool) -> Outcome {
    let t = Instant::now();
    let c = &ctx.cfg;
    let (pairs, sep_pairs, lemma_n) = if quick {
        (1000, 2000, 7)
    } else {
        (c.pairs, 100_000, 8)
    };
    let mut sections = serde_json::Map::new();
    let mut put = |name: &str, v: Value| {
        println!("{name}: done");
        sections.insert(name.to_string(), v);
    };
    put(
        "area",
        serde_json::to_value(estimates::check_area(8, 6, Some((30, 1e-3)))?)?,
    );
    let lemma: Vec<_> = (6..lemma_n)
        .map(|m| estimates::check_lemma1(lemma_n, m, false))
        .collect::<Result<_, _>>()?;
    put("lemma1", serde_json::to_value(lemma)?);
    put(
        "separation",
        serde_json::to_value(estimates::check_separation(10, sep_pairs, c.seed)?)?,
    );
    let holder: Vec<_> = [ArcFn::G, ArcFn::H, ArcFn::F]
        .into_iter()
        .map(|f| {
            estimates::check_holder(f, &c.epsilons, pairs, c.eval_depth, c.seed, 0.05).map(|r| r.0)
        })
        .collect::<Result<_, _>>()?;
    put("holder", serde_json::to_value(holder)?);
    put(
        "cauchy",
        serde_json::to_value(estimates::check_cauchy(8, 12, 1000, c.seed)?)?,
    );
    put(
        "green",
        serde_json::to_value(estimates::check_green(6, 1000, c.seed)?)?,
    );
    let (jc, ext) = build_extension(ctx)?;
    let field = jc.sample_jet_field(None);
    put(
        "curve",
        json!({ "chain_closes": check_chain(&jc.copies).is_ok(), "jets": field.len(), "jets_exact": field.jets_are_exact() }),
    );
    let deep = JordanCurve::build(c.depth + 2)?.sample_jet_field(None);
    let held = whitney::held_out(&deep, &ext, c.depth);
    put(
        "extension",
        serde_json::to_value(whitney::residual_report(
            &ext,
            &held,
            &ext.jets,
            ctx.params().fd_step(),
        )?)?,
    );
    let mesh = surface::build_sphere(&ext, ctx.mesh_params())?;
    let h = ctx.params().fd_step();
    let (_, contact) = surface::check_contact(&mesh, &ext, h)?;
    let far = surface::check_far(&mesh, &ext, &ComplexIndex::new(jc.tree()), 2000, h, c.seed)?;
    put(
        "mesh",
        json!({ "topology": mesh.topology(), "contact": contact, "far": far }),
    );
    let s = ctx.summary(
        "report_all",
        Value::Object(sections),
        t.elapsed().as_millis(),
    )?;
    println!("summary {}", s.display());
    Ok(true)
}
