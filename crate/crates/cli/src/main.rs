mod config;

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use symmlab::comparisons::*;
use symmlab::manifold::io::{field_to_string, mesh_to_string, read_field, read_mesh};
use symmlab::manifold::{
    make_circle, make_icosphere, make_interval, make_planar_domain, make_radial_model,
    make_warped_product, GridMask,
};
use symmlab::rearrangement::{mesh_profile_bins, polya_szego_check_with_bins, rearrange};
use symmlab::spectrum::{lambda1_closed, lambda1_dirichlet, SolverMethod};
use symmlab::{DiscreteManifold, ModelSpace, SolverOptions};

use config::{is_false, load, merge, CliResult, Failure, FAILED};

#[derive(Parser)]
#[command(
    name = "symmlab",
    version,
    about = "Spectral comparison and symmetrization on discrete manifolds"
)]
struct Cli {
    /// JSON file with option defaults; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh file.
    Mesh(MeshArgs),
    /// First eigenvalue of a mesh.
    Eig(EigArgs),
    /// Spherical rearrangement of a field.
    Rearrange(RearrangeArgs),
    /// Run one comparison check.
    Compare(CompareArgs),
    /// Run every check and write a summary.
    Suite(SuiteArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Gen {
    Circle,
    Interval,
    Icosphere,
    Disc,
    Product,
    Radial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Target {
    Sphere,
    Euclid,
    Hyperbolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Auto,
    Dense,
    Direct,
    Lobpcg,
}

impl From<Method> for SolverMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Auto => SolverMethod::Auto,
            Method::Dense => SolverMethod::Dense,
            Method::Direct => SolverMethod::Direct,
            Method::Lobpcg => SolverMethod::Lobpcg,
        }
    }
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MeshArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gen: Option<Gen>,
    /// Circle or interval length.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
    /// Circle or interval vertex count.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Icosphere subdivision level.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<usize>,
    /// Disc radius.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    /// Disc grid spacing.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    spacing: Option<f64>,
    /// Product base mesh file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    base: Option<PathBuf>,
    /// Product fiber mesh file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    fiber: Option<PathBuf>,
    /// Warping function, `const:c` or `sin:a` (meaning `1 + a sin s`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<RhoSpec>,
    /// Model space of a radial chain.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<Target>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    bins: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    r_max: Option<f64>,
    #[arg(short, long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EigArgs {
    #[serde(skip_serializing_if = "Option::is_none")]
    mesh: Option<PathBuf>,
    /// Zero boundary values instead of the closed problem.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    dirichlet: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<Method>,
    /// Also write the eigenfield, one value per line.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    field_out: Option<PathBuf>,
    #[arg(short, long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RearrangeArgs {
    #[serde(skip_serializing_if = "Option::is_none")]
    mesh: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<Target>,
    /// Radial bins of the energy comparison; defaults to about √(vertices).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    bins: Option<usize>,
    /// Profile CSV; without it the profile goes to stdout and the summary
    /// to stderr.
    #[arg(short, long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CompareArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    theorem: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    base_len: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    base_n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<RhoSpec>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    spacing: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    bins: Option<usize>,
    /// Number of seeded fields or field pairs of the property sweeps.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    iters: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    slack: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Allows the unasserted hyperbolic-domain comparison.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    experimental: bool,
    #[arg(short, long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SuiteArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    slack: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    experimental: bool,
    /// Directory for `summary.csv` and one JSON report per check.
    #[arg(short, long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    init_threads()?;
    let file = |section: &str| cli.config.as_deref().map(|p| load(p, section)).transpose();
    match &cli.command {
        Command::Mesh(a) => cmd_mesh(merge(file("mesh")?, a)?),
        Command::Eig(a) => cmd_eig(merge(file("eig")?, a)?),
        Command::Rearrange(a) => cmd_rearrange(merge(file("rearrange")?, a)?),
        Command::Compare(a) => cmd_compare(merge(file("compare")?, a)?),
        Command::Suite(a) => cmd_suite(merge(file("suite")?, a)?),
    }
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("SYMMLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Failure::usage(format!(
            "SYMMLAB_THREADS must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn required<'a, T>(v: &'a Option<T>, what: &str) -> CliResult<&'a T> {
    v.as_ref()
        .ok_or_else(|| Failure::usage(format!("missing {what}")))
}

fn open_mesh(path: &Path) -> CliResult<DiscreteManifold> {
    let f = fs::File::open(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    read_mesh(io::BufReader::new(f)).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn config_value(a: &impl Serialize) -> Value {
    serde_json::to_value(a).expect("serializable")
}

fn model_space(target: Target, dim: usize, volume: f64) -> CliResult<ModelSpace> {
    Ok(match target {
        Target::Sphere => ModelSpace::sphere(dim, volume)?,
        Target::Euclid => ModelSpace::euclidean(dim)?,
        Target::Hyperbolic => ModelSpace::hyperbolic(dim)?,
    })
}

fn cmd_mesh(a: MeshArgs) -> CliResult<i32> {
    let gen = *required(&a.gen, "--gen")?;
    let m = match gen {
        Gen::Circle => make_circle(a.length.unwrap_or(2.0 * PI), a.n.unwrap_or(128))?,
        Gen::Interval => make_interval(a.length.unwrap_or(1.0), a.n.unwrap_or(65))?,
        Gen::Icosphere => make_icosphere(a.level.unwrap_or(3))?,
        Gen::Disc => {
            let (r, h) = (a.radius.unwrap_or(1.0), a.spacing.unwrap_or(0.05));
            make_planar_domain(&GridMask::disc([0.0, 0.0], r, h), h)?
        }
        Gen::Product => {
            let base = open_mesh(required(&a.base, "--base")?)?;
            let fiber = open_mesh(required(&a.fiber, "--fiber")?)?;
            let rho = a.rho.unwrap_or(RhoSpec::Const(1.0));
            // Mesh files carry no coordinates; the base parameter is the
            // cumulative measure along the vertex order.
            let mut s = 0.0;
            let values: Vec<f64> = base
                .measures()
                .iter()
                .map(|mu| {
                    let v = rho.eval(s);
                    s += mu;
                    v
                })
                .collect();
            if values.iter().any(|r| !(*r > 0.0)) {
                return Err(Failure::usage(format!(
                    "warping function {rho} is not positive on the base"
                )));
            }
            make_warped_product(&base, &fiber, &values)?
        }
        Gen::Radial => {
            let target = a.target.unwrap_or(Target::Sphere);
            let dim = a.dim.unwrap_or(2);
            let space = match target {
                Target::Sphere => ModelSpace::unit_sphere(dim)?,
                t => model_space(t, dim, 0.0)?,
            };
            let r_max = a.r_max.unwrap_or_else(|| space.max_radius().unwrap_or(1.0));
            make_radial_model(space, a.bins.unwrap_or(128), r_max)?
        }
    };
    let text = format!(
        "# symmlab mesh {}\n{}",
        serde_json::to_string(&config_value(&a)).unwrap(),
        mesh_to_string(&m)
    );
    emit(a.out.as_deref(), &text)?;
    let summary = format!(
        "vertices {} edges {} total_measure {}",
        m.vertex_count(),
        m.edges().len(),
        m.total_measure()
    );
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(0)
}

fn cmd_eig(a: EigArgs) -> CliResult<i32> {
    let m = open_mesh(required(&a.mesh, "mesh file")?)?;
    let defaults = SolverOptions::default();
    let opts = SolverOptions {
        tol: a.tol.unwrap_or(defaults.tol),
        seed: a.seed.unwrap_or(defaults.seed),
        method: a.method.map(Into::into).unwrap_or(defaults.method),
        ..defaults
    };
    log::info!("solving on {} vertices", m.vertex_count());
    let r = if a.dirichlet {
        lambda1_dirichlet(&m, &opts)?
    } else {
        lambda1_closed(&m, &opts)?
    };
    if let Some(p) = &a.field_out {
        fs::write(p, field_to_string(&r.eigenfield))?;
    }
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "config": config_value(&a),
        "vertices": m.vertex_count(),
        "dirichlet": a.dirichlet,
        "lambda1": r.lambda1,
        "iterations": r.iterations,
        "residual": r.residual,
        "seed": r.seed,
        "method": r.method,
    });
    emit(a.out.as_deref(), &to_json(&out))?;
    Ok(0)
}

fn cmd_rearrange(a: RearrangeArgs) -> CliResult<i32> {
    let m = open_mesh(required(&a.mesh, "mesh file")?)?;
    let fpath = required(&a.field, "field file")?;
    let f =
        fs::File::open(fpath).map_err(|e| Failure::usage(format!("{}: {e}", fpath.display())))?;
    let field = read_field(io::BufReader::new(f))
        .map_err(|e| Failure::usage(format!("{}: {e}", fpath.display())))?;
    let space = model_space(
        a.target.unwrap_or(Target::Sphere),
        m.dim(),
        m.total_measure(),
    )?;
    let profile = rearrange(&m, &field, space)?;
    let bins = a
        .bins
        .unwrap_or_else(|| mesh_profile_bins(m.vertex_count()));
    let ps = polya_szego_check_with_bins(&m, &field, space, bins)?;
    let moment: f64 = profile.layers().iter().map(|l| l.measure * l.value).sum();
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "config": config_value(&a),
        "target": space.kind_name(),
        "layers": profile.layers().len(),
        "bins": bins,
        "measure_residual": (profile.total() - m.total_measure()).abs(),
        "mean_residual": (moment - m.integrate(&field, 1.0)?).abs(),
        "lhs": ps.lhs,
        "rhs": ps.rhs,
        "factor": ps.factor,
    });
    let csv = format!(
        "# symmlab rearrange {}\n{}",
        serde_json::to_string(&config_value(&a)).unwrap(),
        profile.to_csv()
    );
    match &a.out {
        Some(p) => {
            fs::write(p, csv)?;
            print!("{}", to_json(&summary));
        }
        None => {
            print!("{csv}");
            eprint!("{}", to_json(&summary));
        }
    }
    Ok(0)
}

fn cmd_compare(a: CompareArgs) -> CliResult<i32> {
    let id = required(&a.theorem, "--theorem")?.as_str();
    let cfg = CheckConfig {
        slack: a.slack,
        solver: SolverOptions {
            seed: a.seed.unwrap_or(1),
            tol: a.tol.unwrap_or(SolverOptions::default().tol),
            ..Default::default()
        },
    };
    let seed = a.seed.unwrap_or(1);
    let (report, params) = match id {
        "lichnerowicz" => {
            let level = a.level.unwrap_or(4);
            (check_lichnerowicz(level, &cfg), json!({ "level": level }))
        }
        "product" => {
            let d = ProductParams::default();
            let p = ProductParams {
                base_len: a.base_len.unwrap_or(d.base_len),
                base_n: a.base_n.unwrap_or(d.base_n),
                fiber: a
                    .level
                    .map(|level| FiberSpec::Icosphere { level })
                    .unwrap_or(d.fiber),
            };
            (check_product_formula(&p, &cfg), config_value(&p))
        }
        "warped-lambda1" => {
            let d = WarpedParams::default();
            let p = WarpedParams {
                base_len: a.base_len.unwrap_or(d.base_len),
                base_n: a.base_n.unwrap_or(d.base_n),
                rho: a.rho.unwrap_or(d.rho),
                level: a.level.unwrap_or(d.level),
                model_bins: a.bins.unwrap_or(d.model_bins),
            };
            (check_warped_lambda1(&p, &cfg), config_value(&p))
        }
        "faber-krahn" | "hyperbolic-domain" => {
            if id == "hyperbolic-domain" && !a.experimental {
                return Err(Failure::usage("hyperbolic-domain requires --experimental"));
            }
            let d = FaberKrahnParams::default();
            let preset = match &a.preset {
                Some(s) => s
                    .parse::<FkPreset>()
                    .map_err(|e| Failure::usage(e.to_string()))?,
                None => d.preset,
            };
            let p = FaberKrahnParams {
                preset,
                spacing: a.spacing.unwrap_or(d.spacing),
                base_n: a.base_n.unwrap_or(d.base_n),
                bins: a.bins.unwrap_or(d.bins),
            };
            let r = if id == "faber-krahn" {
                check_fiberwise_faber_krahn(&p, &cfg)
            } else {
                check_hyperbolic_domain(&p, &cfg)
            };
            (r, config_value(&p))
        }
        "spherical-domain" => {
            let d = SphericalDomainParams::default();
            let preset = match &a.preset {
                Some(s) => s
                    .parse::<SdPreset>()
                    .map_err(|e| Failure::usage(e.to_string()))?,
                None => d.preset,
            };
            let p = SphericalDomainParams {
                preset,
                level: a.level.unwrap_or(d.level),
                base_n: a.base_n.unwrap_or(d.base_n),
                bins: a.bins.unwrap_or(d.bins),
            };
            (check_spherical_domain(&p, &cfg), config_value(&p))
        }
        "yamabe-warped" => {
            let d = YamabeParams::default();
            let p = YamabeParams {
                base_len: a.base_len.unwrap_or(d.base_len),
                base_n: a.base_n.unwrap_or(d.base_n),
                rho: a.rho.unwrap_or(d.rho),
                level: a.level.unwrap_or(d.level),
                model_bins: a.bins.unwrap_or(d.model_bins),
                iters: a.iters.unwrap_or(d.iters),
                seed,
                ..d
            };
            (check_yamabe_warped(&p, &cfg), config_value(&p))
        }
        "yamabe-constant" => {
            let (n, level, tol) = (
                a.base_n.unwrap_or(64),
                a.level.unwrap_or(3),
                a.tol.unwrap_or(1e-6),
            );
            (
                check_yamabe_constant(n, level, tol),
                json!({ "base_n": n, "level": level, "abs_tol": tol }),
            )
        }
        "dirichlet-disc" => {
            let h = a.spacing.unwrap_or(0.02);
            (check_dirichlet_disc(h, &cfg), json!({ "spacing": h }))
        }
        "polya-szego" => {
            let (level, count) = (a.level.unwrap_or(4), a.count.unwrap_or(100));
            (
                check_polya_szego(level, count, seed, &cfg),
                json!({ "level": level, "count": count }),
            )
        }
        "layer-cake" => {
            let (level, count, tol) = (
                a.level.unwrap_or(4),
                a.count.unwrap_or(100),
                a.tol.unwrap_or(1e-10),
            );
            (
                check_layer_cake(level, count, seed, tol),
                json!({ "level": level, "count": count, "tol": tol }),
            )
        }
        "sup-contraction" => {
            let (level, count, tol) = (
                a.level.unwrap_or(3),
                a.count.unwrap_or(200),
                a.tol.unwrap_or(1e-12),
            );
            (
                check_sup_contraction(level, count, seed, tol),
                json!({ "level": level, "count": count, "tol": tol }),
            )
        }
        "fiberwise-contraction" => {
            let (n, level, count) = (
                a.base_n.unwrap_or(64),
                a.level.unwrap_or(3),
                a.count.unwrap_or(50),
            );
            (
                check_fiberwise_contraction(n, level, count, seed, &cfg),
                json!({ "base_n": n, "level": level, "count": count }),
            )
        }
        "reference" => (check_reference(), json!({})),
        other => return Err(Failure::usage(format!("unknown theorem id {other:?}"))),
    };
    let report = report?
        .with_diag("config", config_value(&a))
        .with_diag("params", params);
    emit(a.out.as_deref(), &to_json(&report))?;
    Ok(if report.verdict() { 0 } else { FAILED })
}

fn cmd_suite(a: SuiteArgs) -> CliResult<i32> {
    let d = SuiteConfig::default();
    let cfg = SuiteConfig {
        level: a.level.unwrap_or(d.level),
        slack: a.slack.or(d.slack),
        experimental: a.experimental,
        seed: a.seed.unwrap_or(d.seed),
    };
    let reports = run_suite(&cfg)?;
    let echo = config_value(&cfg);
    let reports: Vec<_> = reports
        .into_iter()
        .map(|r| r.with_diag("config", echo.clone()))
        .collect();
    let csv = summary_csv(&reports);
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.csv"), &csv)?;
        for r in &reports {
            fs::write(dir.join(format!("{}.json", r.theorem_id)), to_json(r))?;
        }
    }
    print!("{csv}");
    let failed: Vec<_> = reports
        .iter()
        .filter(|r| !r.verdict())
        .map(|r| r.theorem_id.as_str())
        .collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("failed: {}", failed.join(", "));
        Ok(FAILED)
    }
}
