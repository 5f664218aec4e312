use std::fs;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use braidforge::abelian::abelian_invariants;
use braidforge::presentation::{catalog, Family, FamilySpec, Presentation, StructuredPresentation};
use braidforge::rewriting::{derived_presentation, DerivedPresentation};
use braidforge::tietze::{
    builtin_script, replay_script, simplify, ScriptContext, TietzeError, TietzeScript, TietzeState,
};
use braidforge::verify::{is_interior, run_all, Kernel, Settings, SuiteReport};
use braidforge::words::{Generator, Word};
use clap::{Parser, Subcommand, ValueEnum};

/// Presentations, Reidemeister-Schreier rewriting, Tietze simplification and
/// abelianization for braid-like groups.
#[derive(Debug, Parser)]
#[command(name = "braidforge", version)]
struct Cli {
    /// Print extra progress information to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a catalog presentation.
    Catalog {
        /// braid, sym, wb, fvb, fwb, fvb3p or fwb3p.
        #[arg(long)]
        family: String,
        /// Strand count. Not needed for fvb3p and fwb3p.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Rewrite the relators of a family onto its commutator subgroup.
    Derive {
        /// wb (graded, needs --window), fvb or fwb (index 4).
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        /// Conjugator window K for wb.
        #[arg(long)]
        window: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the abelian invariants of a presentation file.
    Abelianize { file: PathBuf },
    /// Simplify a presentation with a Tietze script or the greedy simplifier.
    Simplify {
        file: PathBuf,
        /// Script file, or the name of a shipped script (lemma-2.3.tz, ...).
        #[arg(long)]
        script: Option<String>,
        /// Move budget for the greedy simplifier.
        #[arg(long, default_value_t = 500)]
        budget: usize,
        /// Strand count for script placeholders, if the file does not record it.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the executed or generated script.
        #[arg(long)]
        script_out: Option<PathBuf>,
    },
    /// Run the verification suite.
    Verify {
        /// Only scenarios whose id starts with this string.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Conjugator window K for graded scenarios.
        #[arg(long, default_value_t = 3)]
        window: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    /// Bad flags or unreadable input.
    Usage(String),
    /// A check or move failed.
    Check(String),
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn color_enabled() -> bool {
    std::env::var("BRAIDFORGE_COLOR").is_ok_and(|v| !matches!(v.as_str(), "" | "0" | "never" | "false"))
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_family(name: &str) -> Result<Family, Failure> {
    Family::from_short_name(name).ok_or_else(|| usage(format!("unknown family {name:?}")))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Text or structured presentation. Extra sections of derived files are ignored.
fn load_presentation(path: &Path) -> Result<Presentation, Failure> {
    let text = read(path)?;
    let located = |e: &dyn std::fmt::Display| usage(format!("{}: {e}", path.display()));
    if text.trim_start().starts_with('{') {
        let s: StructuredPresentation = serde_json::from_str(&text).map_err(|e| located(&e))?;
        let gens: Vec<Generator> = s.generators.iter().map(|g| Generator::new(g)).collect();
        let words = s
            .relators
            .iter()
            .map(|r| Word::parse(&r.word))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| located(&e))?;
        return Presentation::from_words(s.name, gens, words).map_err(|e| located(&e));
    }
    Presentation::parse(&text).map_err(|e| located(&e))
}

fn cmd_catalog(family: &str, n: Option<usize>, out: Option<&Path>, format: Format) -> CmdResult {
    let family = parse_family(family)?;
    let n = match (n, family.fixed_strands()) {
        (Some(n), Some(fixed)) if n != fixed => {
            return Err(usage(format!(
                "{} has {fixed} strands, got --n {n}",
                family.short_name()
            )))
        }
        (_, Some(fixed)) => fixed,
        (Some(n), None) => n,
        (None, None) => return Err(usage("--n is required for this family")),
    };
    let p = catalog(FamilySpec::new(family, n)).map_err(|e| usage(e.to_string()))?;
    let text = match format {
        Format::Text => p.to_text(),
        Format::Structured => to_json(&p.to_structured()),
    };
    emit(out, &text)
}

fn derived_json(d: &DerivedPresentation) -> String {
    let base = d.base.to_structured();
    let provenance: Vec<Vec<String>> = d
        .origins
        .iter()
        .map(|list| list.iter().map(|o| o.describe()).collect())
        .collect();
    let value = serde_json::json!({
        "schema": base.schema,
        "name": base.name,
        "generators": base.generators,
        "relators": base.relators,
        "params": {
            "window": d.window,
            "radius": d.radius,
            "strands": d.strands,
            "conjugates": d.conjugates,
            "generator_slots": d.generator_count_with_trivial(),
        },
        "trivial": d.trivial.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "provenance": provenance,
    });
    to_json(&value)
}

fn cmd_derive(
    family: &str,
    n: usize,
    window: Option<i64>,
    out: Option<&Path>,
    format: Format,
    verbose: bool,
) -> CmdResult {
    let family = parse_family(family)?;
    let window = match family {
        Family::WeldedBraid => match window {
            Some(k) if k >= 0 => k,
            Some(k) => return Err(usage(format!("window must be >= 0, got {k}"))),
            None => return Err(usage("--window is required for wb")),
        },
        Family::FlatVirtualBraid | Family::FlatWeldedBraid => {
            if window.is_some() {
                return Err(usage("--window only applies to wb"));
            }
            0
        }
        _ => {
            return Err(usage(format!(
                "derive supports wb, fvb and fwb, not {}",
                family.short_name()
            )))
        }
    };
    catalog(FamilySpec::new(family, n)).map_err(|e| usage(e.to_string()))?;
    if family != Family::WeldedBraid && n < 3 {
        return Err(usage(format!("{} needs n >= 3", family.short_name())));
    }
    let kernel = Kernel::new(family, n, window);
    let d = derived_presentation(&kernel.rewriter());
    if verbose {
        eprintln!(
            "derived {} generators ({} slots), {} relators from {} conjugates",
            d.base.generators().len(),
            d.generator_count_with_trivial(),
            d.base.relators().len(),
            d.conjugates
        );
    }
    let text = match format {
        Format::Text => d.to_text(),
        Format::Structured => derived_json(&d),
    };
    emit(out, &text)
}

fn cmd_abelianize(file: &Path) -> CmdResult {
    let p = load_presentation(file)?;
    println!("{}", abelian_invariants(&p));
    Ok(())
}

fn load_script(name: &str) -> Result<String, Failure> {
    let path = Path::new(name);
    if path.is_file() {
        return read(path);
    }
    if let Some(text) = path.file_name().and_then(|f| f.to_str()).and_then(builtin_script) {
        return Ok(text.to_owned());
    }
    Err(usage(format!("script {name:?} not found")))
}

fn cmd_simplify(
    file: &Path,
    script: Option<&str>,
    budget: usize,
    n: Option<usize>,
    out: Option<&Path>,
    script_out: Option<&Path>,
) -> CmdResult {
    let text = read(file)?;
    let (state, window, script_text) = if text.trim_start().starts_with('{') {
        let p = load_presentation(file)?;
        (TietzeState::new(&p), None, None)
    } else {
        let d = DerivedPresentation::parse(&text).map_err(|e| usage(format!("{}: {e}", file.display())))?;
        let window = d.window;
        match script {
            None => (TietzeState::new(&d.base), window, None),
            Some(name) => {
                let body = load_script(name)?;
                let strands = n.or(d.strands).or_else(|| {
                    d.base
                        .generators()
                        .iter()
                        .filter_map(|g| g.strand_index())
                        .max()
                        .map(|i| i + 1)
                });
                let mut ctx =
                    ScriptContext::for_window(strands.unwrap_or(0), d.window.unwrap_or(0), d.radius.unwrap_or(0));
                if strands.is_none() {
                    ctx = ScriptContext::new();
                }
                let parsed = TietzeScript::parse(&body, &ctx).map_err(|e| usage(format!("{name}: {e}")))?;
                (TietzeState::from_derived(&d), window, Some(parsed))
            }
        }
    };
    if script.is_some() && script_text.is_none() {
        return Err(usage("scripts apply to text presentation files"));
    }
    let before = state.presentation();
    let (result, executed, applied) = match script_text {
        Some(s) => {
            let replay = replay_script(state, &s, false).map_err(|e| match e {
                TietzeError::MoveInvalid { .. } => Failure::Check(e.to_string()),
                other => usage(other.to_string()),
            })?;
            let applied = replay.applied;
            (replay.presentation(), s, applied)
        }
        None => {
            let (p, s) = simplify(&before, budget);
            let applied = s.steps.len();
            (p, s, applied)
        }
    };
    emit(out, &result.to_text())?;
    if let Some(path) = script_out {
        fs::write(path, executed.to_text()).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut summary = format!(
        "{} moves applied; generators {} -> {}, relators {} -> {}",
        applied,
        before.generators().len(),
        result.generators().len(),
        before.relators().len(),
        result.relators().len()
    );
    if let Some(k) = window {
        let interior = result.generators().iter().filter(|&&g| is_interior(g, k)).count();
        summary.push_str(&format!("; interior generators {interior}"));
    }
    eprintln!("{summary}");
    Ok(())
}

fn cmd_verify(filter: Option<&str>, format: Format, window: i64, out: Option<&Path>) -> CmdResult {
    let settings = Settings { window };
    let reports = run_all(filter, &settings);
    if reports.is_empty() {
        eprintln!("warning: no scenario matches {:?}", filter.unwrap_or(""));
    }
    let suite = SuiteReport::new(reports);
    let text = match format {
        Format::Text => suite.to_text(color_enabled() && out.is_none()),
        Format::Structured => {
            let mut s = suite.to_json();
            s.push('\n');
            s
        }
    };
    emit(out, &text)?;
    if suite.passed {
        Ok(())
    } else {
        Err(Failure::Check("verification failed".into()))
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Catalog { family, n, out, format } => cmd_catalog(&family, n, out.as_deref(), format),
        Command::Derive {
            family,
            n,
            window,
            out,
            format,
        } => cmd_derive(&family, n, window, out.as_deref(), format, cli.verbose),
        Command::Abelianize { file } => cmd_abelianize(&file),
        Command::Simplify {
            file,
            script,
            budget,
            n,
            out,
            script_out,
        } => cmd_simplify(
            &file,
            script.as_deref(),
            budget,
            n,
            out.as_deref(),
            script_out.as_deref(),
        ),
        Command::Verify {
            filter,
            format,
            window,
            out,
        } => cmd_verify(filter.as_deref(), format, window, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Check(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Usage(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: internal invariant violated");
            ExitCode::from(3)
        }
    }
}
