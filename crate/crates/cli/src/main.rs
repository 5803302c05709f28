use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cmlab_core::cmfields::ImagQuadOrder;
use cmlab_core::embeddings::{gross_point_counts, optimal_embedding_classes, counts_of, MAX_ABS_DISC};
use cmlab_core::equidist::{run_experiment, simultaneous_report, validate_config, ExperimentConfig, Target};
use cmlab_core::lattices::{brandt_matrix, eichler_order, maximal_order, right_ideal_classes, ClassSet};
use cmlab_core::localmod::{self, check_patch, classify_cm, dual_graph_patch, RamifiedChoice, Witt};
use cmlab_core::qalg::QuaternionAlgebra;
use cmlab_core::specialfiber::{build_model, validate};
use cmlab_core::{arith, render, Error};

#[derive(Parser, Debug)]
#[command(name = "cmlab", version, about = "Quaternion class sets, Gross points and special-fiber experiments")]
struct Cli {
    /// Validate parameters and exit without computing.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Flat `key = value` file supplying defaults for unset flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format: json, csv, dot or plot (depending on the command).
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ramification of a quaternion algebra.
    Algebra(AlgebraArgs),
    /// Right ideal classes of a maximal or Eichler order.
    Classset(OrderArgs),
    /// Brandt matrix B(n).
    Brandt(BrandtArgs),
    /// Gross point counts per ideal class.
    Embeddings(EmbeddingArgs),
    /// Special fiber model and its dual graph.
    Model(ModelArgs),
    /// Admissibility and type of the CM-reduction bimodule.
    Bimodule(BimoduleArgs),
    /// Ball in the Bruhat-Tits tree read as a dual-graph patch.
    Tree(TreeArgs),
    /// Equidistribution experiment along the conductor tower.
    Equidist(EquidistArgs),
    /// Simultaneous reduction at several primes.
    Simul(SimulArgs),
}

#[derive(Args, Debug)]
struct AlgebraArgs {
    /// Prime discriminant of the definite algebra.
    #[arg(long)]
    q: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<i64>,
}

#[derive(Args, Debug)]
struct OrderArgs {
    /// Prime discriminant q of the definite algebra.
    #[arg(long)]
    disc: Option<u64>,
    /// 1 for the maximal order, or a prime for the Eichler order of that level.
    #[arg(long)]
    level: Option<u64>,
}

#[derive(Args, Debug)]
struct BrandtArgs {
    #[command(flatten)]
    order: OrderArgs,
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Args, Debug)]
struct EmbeddingArgs {
    #[command(flatten)]
    order: OrderArgs,
    #[arg(long = "dK", allow_hyphen_values = true)]
    d_k: Option<i64>,
    /// Conductor of the quadratic order.
    #[arg(long)]
    c: Option<u64>,
    /// Count all unit-conjugacy classes of optimal embeddings instead of Gross points.
    #[arg(long)]
    unoriented: bool,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long = "dK", allow_hyphen_values = true)]
    d_k: Option<i64>,
}

#[derive(Args, Debug)]
struct BimoduleArgs {
    #[arg(long)]
    p: Option<u64>,
    /// sqrt-p or sqrt-pu.
    #[arg(long)]
    choice: Option<String>,
    #[arg(long)]
    precision: Option<u32>,
}

#[derive(Args, Debug)]
struct TreeArgs {
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    radius: Option<u32>,
}

#[derive(Args, Debug)]
struct EquidistArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    c0: Option<u64>,
    #[arg(long)]
    nmax: Option<u32>,
    /// singular or components.
    #[arg(long)]
    target: Option<String>,
}

#[derive(Args, Debug)]
struct SimulArgs {
    /// Comma-separated reduction primes.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long = "dK", allow_hyphen_values = true)]
    d_k: Option<i64>,
    #[arg(long)]
    c0: Option<u64>,
    #[arg(long)]
    nmax: Option<u32>,
    #[arg(long)]
    target: Option<String>,
}

enum Failure {
    Validation(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

type Out<T> = std::result::Result<T, Failure>;

fn invalid<T>(msg: impl Into<String>) -> Out<T> {
    Err(Failure::Validation(msg.into()))
}

/// Flag value, else config-file value, else default.
struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&PathBuf>) -> Out<Self> {
        let mut file = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
            for (no, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return invalid(format!("{}:{}: expected key = value", path.display(), no + 1));
                };
                file.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Settings { file })
    }

    fn opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Out<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| Failure::Validation(format!("bad value for {key}: {v:?}"))),
        }
    }

    fn req<T: FromStr>(&self, flag: Option<T>, key: &str) -> Out<T> {
        self.opt(flag, key)?.ok_or_else(|| Failure::Validation(format!("missing --{key}")))
    }

    fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Out<T> {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }
}

enum Format {
    Json,
    Csv,
    Dot,
    Plot,
}

fn format_of(s: &Settings, cli: &Cli, allowed: &[&str]) -> Out<Format> {
    let f = s.or(cli.format.clone(), "format", "json".to_string())?;
    if !allowed.contains(&f.as_str()) {
        return invalid(format!("format {f:?} not available here (use one of {})", allowed.join(", ")));
    }
    Ok(match f.as_str() {
        "csv" => Format::Csv,
        "dot" => Format::Dot,
        "plot" => Format::Plot,
        _ => Format::Json,
    })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn rat_json(r: &num_rational::BigRational) -> Value {
    json!({ "exact": render::fraction(r), "decimal": render::decimal(r) })
}

fn check_order_params(q: u64, level: u64) -> Out<()> {
    if !arith::is_prime(q) {
        return invalid(format!("disc {q} must be prime"));
    }
    if level != 1 && (!arith::is_prime(level) || level == q) {
        return invalid(format!("level {level} must be 1 or a prime different from {q}"));
    }
    Ok(())
}

fn class_set(q: u64, level: u64) -> Out<ClassSet> {
    let o = maximal_order(&QuaternionAlgebra::definite_of_prime_discriminant(q)?)?;
    let order = if level == 1 { o } else { eichler_order(&o, level)? };
    Ok(right_ideal_classes(&order)?)
}

fn parse_target(s: &str) -> Out<Target> {
    Ok(Target::from_str(s)?)
}

fn run(cli: &Cli) -> Out<Option<String>> {
    let s = Settings::load(cli.config.as_ref())?;
    if let Some(jobs) = s.opt(cli.jobs, "jobs")? {
        if jobs == 0 {
            return invalid("--jobs must be positive");
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let dry = cli.dry_run || s.opt(None::<bool>, "dry-run")?.unwrap_or(false);
    let done = |name: &str| -> Out<Option<String>> { Ok(Some(pretty(&json!({ "command": name, "dry_run": true, "valid": true })))) };

    match &cli.command {
        Command::Algebra(a) => {
            format_of(&s, cli, &["json"])?;
            let alg = match (s.opt(a.q, "q")?, s.opt(a.a, "a")?, s.opt(a.b, "b")?) {
                (Some(q), None, None) => {
                    if !arith::is_prime(q) {
                        return invalid(format!("q = {q} must be prime"));
                    }
                    if dry {
                        return done("algebra");
                    }
                    QuaternionAlgebra::definite_of_prime_discriminant(q)?
                }
                (None, Some(x), Some(y)) => {
                    if x == 0 || y == 0 {
                        return invalid("a and b must be nonzero");
                    }
                    if dry {
                        return done("algebra");
                    }
                    QuaternionAlgebra::from_ints(x, y)?
                }
                _ => return invalid("give either --q or both --a and --b"),
            };
            Ok(Some(pretty(&json!({
                "a": render::fraction(alg.a()),
                "b": render::fraction(alg.b()),
                "ramification": alg.ramification(),
                "discriminant": alg.discriminant(),
                "definite": alg.is_definite(),
                "matrix_algebra": alg.is_matrix_algebra(),
            }))))
        }
        Command::Classset(o) => {
            format_of(&s, cli, &["json"])?;
            let q = s.req(o.disc, "disc")?;
            let level = s.or(o.level, "level", 1)?;
            check_order_params(q, level)?;
            if dry {
                return done("classset");
            }
            let cs = class_set(q, level)?;
            let mut v = serde_json::to_value(cs.to_json()).expect("json");
            v["mass"] = rat_json(&cs.mass());
            v["weights"] = json!(cs.weights());
            Ok(Some(pretty(&v)))
        }
        Command::Brandt(b) => {
            let fmt = format_of(&s, cli, &["json", "csv"])?;
            let q = s.req(b.order.disc, "disc")?;
            let level = s.or(b.order.level, "level", 1)?;
            let n = s.req(b.n, "n")?;
            check_order_params(q, level)?;
            if n == 0 || arith::gcd_i128(n as i128, (q * level) as i128) != 1 {
                return invalid(format!("n = {n} must be positive and coprime to {}", q * level));
            }
            if dry {
                return done("brandt");
            }
            let cs = class_set(q, level)?;
            let m = brandt_matrix(&cs, n)?;
            Ok(Some(match fmt {
                Format::Csv => {
                    let mut out = String::new();
                    let header: Vec<String> = (0..m.len()).map(|j| format!("class_{j}")).collect();
                    out.push_str(&header.join(","));
                    out.push('\n');
                    for row in &m {
                        out.push_str(&row.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
                        out.push('\n');
                    }
                    out
                }
                _ => pretty(&json!({ "disc": q, "level": level, "n": n, "weights": cs.weights(), "matrix": m })),
            }))
        }
        Command::Embeddings(e) => {
            format_of(&s, cli, &["json"])?;
            let q = s.req(e.order.disc, "disc")?;
            let level = s.or(e.order.level, "level", 1)?;
            let d_k = s.req(e.d_k, "dK")?;
            let c = s.or(e.c, "c", 1)?;
            check_order_params(q, level)?;
            let cm = ImagQuadOrder::new(d_k, c)?;
            if cm.discriminant().abs() > MAX_ABS_DISC {
                return invalid(format!("|D| = {} exceeds {MAX_ABS_DISC}", cm.discriminant().abs()));
            }
            if dry {
                return done("embeddings");
            }
            let cs = class_set(q, level)?;
            let counts = if e.unoriented {
                counts_of(&optimal_embedding_classes(&cs, &cm)?, cs.len(), &cm)
            } else {
                gross_point_counts(&cs, &cm)?
            };
            let mut v = serde_json::to_value(&counts).expect("json");
            v["h"] = json!(cm.class_number());
            v["oriented"] = json!(!e.unoriented);
            v["weights"] = json!(cs.weights());
            Ok(Some(pretty(&v)))
        }
        Command::Model(m) => {
            let fmt = format_of(&s, cli, &["json", "dot"])?;
            let (p, q, d_k) = (s.req(m.p, "p")?, s.req(m.q, "q")?, s.req(m.d_k, "dK")?);
            validate(p, q, d_k)?;
            if p == 2 {
                return Err(Error::WildRamification.into());
            }
            if dry {
                return done("model");
            }
            let model = build_model(p, q, d_k)?;
            Ok(Some(match fmt {
                Format::Dot => model.dual_graph_dot(),
                _ => {
                    let ms = model.measures();
                    let mut v = serde_json::to_value(model.summary()).expect("json");
                    v["dual_graph"] = model.dual_graph_json();
                    v["measures"] = json!({
                        "singular_w": ms.ram.to_json(),
                        "singular_inverse_w": ms.ram_inv.to_json(),
                        "components_w": ms.components.to_json(),
                        "components_inverse_w": ms.components_inv.to_json(),
                    });
                    pretty(&v)
                }
            }))
        }
        Command::Bimodule(b) => {
            format_of(&s, cli, &["json"])?;
            let p = s.req(b.p, "p")?;
            let choice = match s.or(b.choice.clone(), "choice", "sqrt-p".to_string())?.as_str() {
                "sqrt-p" => RamifiedChoice::SqrtP,
                "sqrt-pu" => RamifiedChoice::SqrtPU,
                other => return invalid(format!("unknown choice {other:?} (sqrt-p or sqrt-pu)")),
            };
            let k = s.or(b.precision, "precision", localmod::precision())?;
            Witt::new(p, k + 2)?;
            if dry {
                return done("bimodule");
            }
            let r = classify_cm(p, k, choice)?;
            Ok(Some(pretty(&serde_json::to_value(r).expect("json"))))
        }
        Command::Tree(t) => {
            let fmt = format_of(&s, cli, &["json", "dot"])?;
            let (p, radius) = (s.req(t.p, "p")?, s.req(t.radius, "radius")?);
            check_patch(p, radius)?;
            if dry {
                return done("tree");
            }
            let patch = dual_graph_patch(p, radius)?;
            Ok(Some(match fmt {
                Format::Dot => patch.to_dot(),
                _ => pretty(&serde_json::to_value(&patch).expect("json")),
            }))
        }
        Command::Equidist(e) => {
            let fmt = format_of(&s, cli, &["json", "csv", "plot"])?;
            let config = ExperimentConfig {
                p: s.req(e.model.p, "p")?,
                q: s.req(e.model.q, "q")?,
                d_k: s.req(e.model.d_k, "dK")?,
                c0: s.or(e.c0, "c0", 1)?,
                n_max: s.or(e.nmax, "nmax", cmlab_core::equidist::DEFAULT_N_MAX)?,
                target: parse_target(&s.or(e.target.clone(), "target", "singular".to_string())?)?,
            };
            if config.p == 2 {
                return Err(Error::WildRamification.into());
            }
            validate_config(&config)?;
            if dry {
                return done("equidist");
            }
            let r = run_experiment(&config)?;
            Ok(Some(match fmt {
                Format::Csv => r.to_csv(),
                Format::Plot => r.plot_data(),
                _ => pretty(&r.to_json()),
            }))
        }
        Command::Simul(a) => {
            let fmt = format_of(&s, cli, &["json", "csv"])?;
            let primes: Vec<u64> = s
                .req(a.p.clone(), "p")?
                .split(',')
                .map(|x| x.trim().parse().map_err(|_| Failure::Validation(format!("bad prime {x:?}"))))
                .collect::<Out<_>>()?;
            let q = s.req(a.q, "q")?;
            let d_k = s.req(a.d_k, "dK")?;
            let c0 = s.or(a.c0, "c0", 1)?;
            let n_max = s.or(a.nmax, "nmax", cmlab_core::equidist::DEFAULT_N_MAX)?;
            let target = parse_target(&s.or(a.target.clone(), "target", "singular".to_string())?)?;
            let configs: Vec<ExperimentConfig> =
                primes.iter().map(|&p| ExperimentConfig { p, q, d_k, c0, n_max, target }).collect();
            for (i, c) in configs.iter().enumerate() {
                if c.p == 2 {
                    return Err(Error::WildRamification.into());
                }
                if configs[..i].iter().any(|d| d.p == c.p) {
                    return invalid(format!("reduction prime {} repeated", c.p));
                }
                validate_config(c)?;
            }
            if dry {
                return done("simul");
            }
            let r = simultaneous_report(&configs)?;
            Ok(Some(match fmt {
                Format::Csv => r.to_csv(),
                _ => pretty(&r.to_json()),
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| {
        let Some(text) = text else { return Ok(()) };
        match &cli.output {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
            None => {
                use std::io::Write;
                std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
