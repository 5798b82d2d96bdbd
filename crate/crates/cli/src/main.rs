use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sforge_cli::ops::{execute, OPERATIONS};
use sforge_cli::scenario::steps_csv;
use sforge_cli::{render, run_scenario, CliError, Format};

#[derive(Parser)]
#[command(name = "sforge", version, about = "Exact tools for sunflower-free set families")]
struct Cli {
    /// Root seed for every randomized step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (falls back to SFORGE_THREADS, then all cores).
    #[arg(long, global = true, env = "SFORGE_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Core family operations (info, link, restrict, shadow, ...).
    Family(OpArgs),
    /// Sunflower detection, maximum free families, phi.
    Sunflower(OpArgs),
    /// Spreadness checks, restrictions and the spread lemma.
    Spread(OpArgs),
    /// Build domains and check their assumptions.
    Domains(OpArgs),
    /// Fourier tools, noise stability, globalness.
    Boolean(OpArgs),
    /// approx, simplify, cover, reduce, cluster, peel, delta.
    Pipeline(OpArgs),
    /// eval, example23, fstar, product.
    Bounds(OpArgs),
    /// Construction, optimum and bounds for one domain.
    Verify(VerifyArgs),
    /// Run a scenario file.
    Run { path: PathBuf },
    /// List every operation name.
    Ops,
}

#[derive(Args)]
struct OpArgs {
    op: String,
    /// JSON parameter object, or @path to read it from a file.
    #[arg(long)]
    params: Option<String>,
    /// Family file (JSON or hex), passed as the `family` parameter.
    #[arg(long)]
    family: Option<PathBuf>,
    /// Domain as JSON or shorthand such as binomial:8:3.
    #[arg(long)]
    domain: Option<String>,
    /// Formula name for `bounds eval`.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    domain: String,
    #[arg(long)]
    s: usize,
    #[arg(long)]
    t: u32,
    /// exact:<c>, atmost:<c> or any; defaults to exact:t-1.
    #[arg(long)]
    core: Option<String>,
    #[arg(long)]
    budget: Option<u64>,
}

fn read_params(raw: Option<&str>) -> Result<Map<String, Value>, CliError> {
    let Some(raw) = raw else { return Ok(Map::new()) };
    let text = match raw.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{path}: {e}")))?,
        None => raw.to_string(),
    };
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::Usage("--params must be a JSON object".into())),
        Err(e) => Err(CliError::Core(sforge::Error::parse(format!("--params: {e}")))),
    }
}

fn op_params(group: &str, a: &OpArgs) -> Result<(String, Value), CliError> {
    let mut m = read_params(a.params.as_deref())?;
    if let Some(path) = &a.family {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let f = sforge::io::parse_family(&text)?;
        m.insert("family".into(), json!({ "n": f.n(), "sets": f.sets_1based() }));
    }
    if let Some(d) = &a.domain {
        m.insert("domain".into(), Value::String(d.clone()));
    }
    let value = if group == "bounds" && a.op == "eval" {
        let name = a.name.clone().or_else(|| m.get("name").and_then(Value::as_str).map(String::from));
        let name = name.ok_or_else(|| CliError::Usage("bounds eval needs --name".into()))?;
        m.remove("name");
        json!({ "name": name, "params": Value::Object(m) })
    } else {
        Value::Object(m)
    };
    Ok((format!("{group}.{}", a.op), value))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let seed = cli.seed.unwrap_or(0);
    let (op, params) = match &cli.cmd {
        Cmd::Ops => {
            emit(&(OPERATIONS.join("\n") + "\n"), cli.out.as_ref())?;
            return Ok(0);
        }
        Cmd::Run { path } => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let run = run_scenario(&text, cli.seed)?;
            let fmt = match run.output.as_ref().and_then(|o| o.format.as_deref()) {
                Some("csv") => Format::Csv,
                Some("json") => Format::Json,
                Some(other) => return Err(CliError::Usage(format!("unknown output format {other:?}"))),
                None => format,
            };
            let text = match fmt {
                Format::Json => render(&run.report, Format::Json),
                Format::Csv => steps_csv(&run.report),
            };
            let out = cli.out.clone().or_else(|| run.output.as_ref().and_then(|o| o.path.clone()).map(PathBuf::from));
            emit(&text, out.as_ref())?;
            return Ok(run.exit_code);
        }
        Cmd::Verify(v) => {
            let mut m = Map::new();
            m.insert("domain".into(), Value::String(v.domain.clone()));
            m.insert("s".into(), json!(v.s));
            m.insert("t".into(), json!(v.t));
            if let Some(c) = &v.core {
                m.insert("core".into(), Value::String(c.clone()));
            }
            if let Some(b) = v.budget {
                m.insert("budget".into(), json!(b));
            }
            ("verify".to_string(), Value::Object(m))
        }
        Cmd::Family(a) => op_params("family", a)?,
        Cmd::Sunflower(a) => op_params("sunflower", a)?,
        Cmd::Spread(a) => op_params("spread", a)?,
        Cmd::Domains(a) => op_params("domains", a)?,
        Cmd::Boolean(a) => op_params("boolean", a)?,
        Cmd::Pipeline(a) => op_params("pipeline", a)?,
        Cmd::Bounds(a) => op_params("bounds", a)?,
    };
    let handles = Default::default();
    let out = execute(&op, &params, &handles, sforge_cli::scenario::step_seed(seed, 0))?;
    let report = json!({ "op": op, "seed": seed, "result": out.report });
    let text = match format {
        Format::Json => render(&report, Format::Json),
        Format::Csv => render(&out.report, Format::Csv),
    };
    emit(&text, cli.out.as_ref())?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("sforge: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("sforge: {e}");
            let text = render(&json!({ "error": e.to_json() }), Format::Json);
            let _ = emit(&text, cli.out.as_ref());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
