use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aggbasis::catalog;
use aggbasis::compiler::{compile_grid, dualize_expr};
use aggbasis::connectives::{self, Negation};
use aggbasis::dsl;
use aggbasis::verify::{self, Mutation, SuiteConfig};
use aggbasis::{BasisExpr, Program};
use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

mod number;

use number::fmt_num;

#[derive(Parser, Debug)]
#[command(
    name = "aggbasis",
    version,
    about = "Compile aggregation functions into the sup/inf/median/step basis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a catalog function on the grid I_k^n and write the expression as JSON.
    Compile {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        k: u64,
        /// Expression output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the compile report JSON here (it always goes to stderr).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate an expression file (JSON or DSL text) or a --dsl string at a point.
    Eval {
        #[arg(long)]
        dsl: Option<String>,
        /// EXPR_PATH followed by the coordinates, or only the coordinates with --dsl.
        #[arg(allow_hyphen_values = true)]
        args: Vec<String>,
    },
    /// Run the lemma suite, or measure an expression against a catalog function.
    Verify {
        #[arg(long, value_enum, conflicts_with_all = ["expr", "function"])]
        suite: Option<Suite>,
        #[arg(long, value_enum, default_value_t = MutationArg::None, requires = "suite")]
        mutation: MutationArg,
        #[arg(long, requires = "function")]
        expr: Option<PathBuf>,
        #[arg(long = "fn", requires = "expr")]
        function: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
        /// Grid to check exactness on (inferred from the expression when omitted).
        #[arg(long)]
        k: Option<u64>,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Tabulate f and a compiled expression along one axis as CSV.
    Plotdata {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        expr: PathBuf,
        #[arg(long)]
        axis: usize,
        /// Values of the other coordinates, in order, comma separated.
        #[arg(long, default_value = "")]
        fixed: String,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the dual expression 1 - e(1 - x) of an expression file.
    Dual {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the implication built from a catalog conjunction as CSV.
    Implication {
        #[arg(long)]
        conj: String,
        #[arg(long, value_enum, default_value_t = Form::Conj)]
        form: Form,
        #[arg(long, default_value = "zadeh")]
        negation: String,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    Lemmas,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MutationArg {
    None,
    ChiZero,
    SupportZeros,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Form {
    /// N(conj(x, N(y)))
    Conj,
    /// disj(N(x), y) with disj the N-dual of conj
    Disj,
}

/// Why a command did not succeed.
enum Failure {
    /// A check ran and failed (exit 1).
    Check,
    /// Bad arguments or unusable input (exit 2).
    Usage(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Compile {
            function,
            arity,
            k,
            out,
            report,
        } => cmd_compile(&function, arity, k, out.as_deref(), report.as_deref()),
        Command::Eval { dsl, args } => cmd_eval(dsl.as_deref(), &args),
        Command::Verify {
            suite,
            mutation,
            expr,
            function,
            samples,
            seed,
            k,
            json,
        } => match (suite, expr, function) {
            (Some(Suite::Lemmas), _, _) => cmd_verify_suite(mutation, seed, json),
            (None, Some(expr), Some(function)) => cmd_verify_expr(&expr, &function, samples, seed, k, json),
            _ => Err(anyhow!("verify needs --suite lemmas, or --expr PATH together with --fn NAME").into()),
        },
        Command::Plotdata {
            function,
            expr,
            axis,
            fixed,
            steps,
            out,
        } => cmd_plotdata(&function, &expr, axis, &fixed, steps, out.as_deref()),
        Command::Dual { path, out } => cmd_dual(&path, out.as_deref()),
        Command::Implication {
            conj,
            form,
            negation,
            steps,
            out,
        } => cmd_implication(&conj, form, &negation, steps, out.as_deref()),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Reads an expression file: JSON when it starts with `{`, DSL text otherwise.
fn read_expr(path: &Path) -> anyhow::Result<BasisExpr> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = if text.trim_start().starts_with('{') {
        dsl::from_json_str(&text).map_err(anyhow::Error::from)
    } else {
        dsl::parse(&text, None).map_err(anyhow::Error::from)
    };
    parsed.with_context(|| format!("in {}", path.display()))
}

fn parse_unit(text: &str) -> anyhow::Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| anyhow!("`{text}` is not a number"))?;
    if !(0.0..=1.0).contains(&v) {
        bail!("{text} lies outside [0,1]");
    }
    Ok(v)
}

fn cmd_compile(function: &str, arity: usize, k: u64, out: Option<&Path>, report: Option<&Path>) -> Outcome {
    let f = catalog::get(function, arity)?;
    let (expr, stats) = compile_grid(&f, k)?;
    let mut doc = dsl::to_json_string(&expr);
    doc.push('\n');
    write_output(out, &doc)?;
    let stats = serde_json::to_string(&stats)?;
    eprintln!("{stats}");
    if let Some(path) = report {
        fs::write(path, format!("{stats}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_eval(dsl_text: Option<&str>, args: &[String]) -> Outcome {
    let (expr, values) = match dsl_text {
        Some(text) => (dsl::parse(text, Some(args.len()))?, args),
        None => {
            let (path, values) = args
                .split_first()
                .ok_or_else(|| anyhow!("eval needs an expression file or --dsl"))?;
            (read_expr(Path::new(path))?, values)
        }
    };
    let x = values
        .iter()
        .map(|v| parse_unit(v))
        .collect::<anyhow::Result<Vec<f64>>>()?;
    if x.len() != expr.arity() {
        return Err(anyhow!("expression has arity {}, got {} values", expr.arity(), x.len()).into());
    }
    println!("{}", fmt_num(expr.eval_slice(&x)?));
    Ok(())
}

fn cmd_verify_suite(mutation: MutationArg, seed: u64, json: bool) -> Outcome {
    let cfg = SuiteConfig {
        seed,
        mutation: match mutation {
            MutationArg::None => Mutation::None,
            MutationArg::ChiZero => Mutation::ChiZeroAtZero,
            MutationArg::SupportZeros => Mutation::SupportIncludesZeros,
        },
        ..SuiteConfig::default()
    };
    let report = verify::lemma_suite_with(&cfg);
    if json {
        println!("{}", serde_json::to_string_pretty(&report.to_json())?);
    } else {
        print!("{}", report.to_text());
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn cmd_verify_expr(
    path: &Path,
    function: &str,
    samples: usize,
    seed: u64,
    k: Option<u64>,
    json: bool,
) -> Outcome {
    let expr = read_expr(path)?;
    let f = catalog::get(function, expr.arity())?;
    let stats = verify::approx_error(&f, &expr, k, samples, seed)?;
    let report = stats.to_report(format!("{} against {}", path.display(), function));
    if json {
        let doc = serde_json::json!({ "approx_error": stats, "report": report.to_json() });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        print!("{}", report.to_text());
        println!("max_gap {}", fmt_num(stats.max_gap));
        println!("mean_gap {}", fmt_num(stats.mean_gap));
        match stats.resolution {
            Some(k) => println!("grid_exactness {} (k = {k})", stats.grid_exactness),
            None => println!("grid_exactness not checked (no grid resolution)"),
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn csv_writer(out: Option<&Path>) -> anyhow::Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(io::BufWriter::new(
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout()),
    };
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink))
}

fn cmd_plotdata(
    function: &str,
    expr_path: &Path,
    axis: usize,
    fixed: &str,
    steps: usize,
    out: Option<&Path>,
) -> Outcome {
    if steps == 0 {
        return Err(anyhow!("--steps must be at least 1").into());
    }
    let expr = read_expr(expr_path)?;
    let n = expr.arity();
    let f = catalog::get(function, n)?;
    if axis >= n {
        return Err(anyhow!("--axis {axis} is out of range for arity {n}").into());
    }
    let fixed: Vec<f64> = if fixed.trim().is_empty() {
        Vec::new()
    } else {
        fixed.split(',').map(parse_unit).collect::<anyhow::Result<_>>()?
    };
    if fixed.len() + 1 != n {
        return Err(anyhow!(
            "--fixed needs {} values for arity {n}, got {}",
            n - 1,
            fixed.len()
        )
        .into());
    }
    let program = Program::new(&expr);
    let mut scratch = Vec::new();
    let mut w = csv_writer(out)?;
    w.write_record(["x", "f", "approx"])?;
    let mut x = fixed;
    x.insert(axis, 0.0);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        x[axis] = t;
        let (fx, ex) = (f.call(&x), program.eval_into(&x, &mut scratch));
        w.write_record([fmt_num(t), fmt_num(fx), fmt_num(ex)])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_dual(path: &Path, out: Option<&Path>) -> Outcome {
    let expr = read_expr(path)?;
    let mut doc = dsl::to_json_string(&dualize_expr(&expr));
    doc.push('\n');
    write_output(out, &doc)?;
    Ok(())
}

fn cmd_implication(conj: &str, form: Form, negation: &str, steps: usize, out: Option<&Path>) -> Outcome {
    if steps == 0 {
        return Err(anyhow!("--steps must be at least 1").into());
    }
    let c = catalog::get(conj, 2)?;
    let n = Negation::by_name(negation)?;
    let imp = match form {
        Form::Conj => connectives::implication_from(&c, &n)?,
        Form::Disj => connectives::implication_from_disjunction(&connectives::dual_under(&c, &n), &n)?,
    };
    let mut w = csv_writer(out)?;
    w.write_record(["x", "y", "i"])?;
    for a in 0..=steps {
        for b in 0..=steps {
            let (x, y) = (a as f64 / steps as f64, b as f64 / steps as f64);
            w.write_record([fmt_num(x), fmt_num(y), fmt_num(imp.apply(x, y))])?;
        }
    }
    w.flush()?;
    let contract = connectives::check_implication(&imp, steps);
    if contract.passed() {
        Ok(())
    } else {
        eprint!("{}", contract.to_text());
        Err(Failure::Check)
    }
}
