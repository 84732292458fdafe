//! The three subcommands behind the `depgraph` binary, callable without a
//! process so they can be tested directly.
//!
//! Exit codes: [`EXIT_OK`] on success, [`EXIT_FATAL`] when nothing useful
//! could be produced, [`EXIT_PARTIAL`] when extraction finished but some
//! files could not be analysed.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use depgraph::config::ProjectConfig;
use depgraph::frontend::Severity;
use depgraph::macroeval::{load_comparison, render_report, run_comparison, ReportStyle};
use depgraph::microeval::{load_suite, render_recall_table, run_suite, Mode};
use depgraph::model::write_edges_csv_string;
use depgraph::{extract_project, EdgeKind, ExtractOptions, NormalizationProfile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FATAL: u8 = 1;
pub const EXIT_PARTIAL: u8 = 2;

#[derive(Debug, Clone, Default)]
pub struct ExtractArgs {
    pub root: PathBuf,
    /// Key-value project config.
    pub config: Option<PathBuf>,
    /// Destination CSV; stdout when absent.
    pub out: Option<PathBuf>,
    pub include_external: bool,
    /// Edge kinds to keep; all when absent.
    pub kinds: Option<Vec<EdgeKind>>,
}

/// Which recall columns to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MicroMode {
    Initial,
    Cleaned,
    #[default]
    Both,
}

impl std::str::FromStr for MicroMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "initial" => Ok(MicroMode::Initial),
            "cleaned" => Ok(MicroMode::Cleaned),
            "both" => Ok(MicroMode::Both),
            other => Err(format!(
                "unknown mode `{other}`, expected initial, cleaned or both"
            )),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MicroArgs {
    pub suite: PathBuf,
    pub mode: MicroMode,
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct MacroArgs {
    /// TOML comparison config.
    pub config: PathBuf,
    /// JSON report destination, overriding the config's `json_out`.
    pub out: Option<PathBuf>,
}

fn finish(result: anyhow::Result<u8>, err: &mut dyn Write) -> u8 {
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FATAL
        }
    }
}

/// Extracts the project under `args.root` to CSV and prints a summary:
/// node and edge counts and a per-kind breakdown. The summary goes to
/// `out` when the CSV goes to a file, to `err` otherwise.
pub fn cmd_extract(args: &ExtractArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = run_extract(args, out, err);
    finish(result, err)
}

fn run_extract(args: &ExtractArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<u8> {
    if !args.root.is_dir() {
        bail!("project root {} is not a directory", args.root.display());
    }
    let config = match &args.config {
        Some(path) => ProjectConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => ProjectConfig::default(),
    };
    let mut options = ExtractOptions {
        config,
        include_external: args.include_external,
        ..ExtractOptions::default()
    };
    if let Some(kinds) = &args.kinds {
        options.kinds = kinds.iter().copied().collect();
    }
    let extraction = extract_project(&args.root, &options)?;
    let csv = write_edges_csv_string(&extraction.graph);

    let mut failed_files = BTreeSet::new();
    for d in &extraction.diagnostics {
        writeln!(err, "{d}")?;
        if d.severity == Severity::Error {
            failed_files.insert(d.file.clone());
        }
    }

    let summary: &mut dyn Write = match &args.out {
        Some(path) => {
            write_file(path, csv.as_bytes())?;
            out
        }
        None => {
            out.write_all(csv.as_bytes())?;
            err
        }
    };
    let graph = &extraction.graph;
    writeln!(
        summary,
        "{} modules, {} nodes, {} edges",
        extraction.modules,
        graph.node_count(),
        graph.edge_count()
    )?;
    for (kind, count) in graph.count_by_kind() {
        writeln!(summary, "  {kind}: {count}")?;
    }
    if !failed_files.is_empty() {
        writeln!(err, "{} file(s) could not be analysed", failed_files.len())?;
        return Ok(EXIT_PARTIAL);
    }
    Ok(EXIT_OK)
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Runs a ground-truth suite and prints the per-category recall table.
pub fn cmd_micro(args: &MicroArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = run_micro(args, out);
    finish(result, err)
}

fn run_micro(args: &MicroArgs, out: &mut dyn Write) -> anyhow::Result<u8> {
    let suite = load_suite(&args.suite)?;
    let profile = match &args.profile {
        Some(path) => {
            NormalizationProfile::load(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => NormalizationProfile::default(),
    };
    let table = match args.mode {
        MicroMode::Initial => render_recall_table(&run_suite(&suite, Mode::Initial, &profile)?, None),
        MicroMode::Cleaned => render_recall_table(&run_suite(&suite, Mode::Cleaned, &profile)?, None),
        MicroMode::Both => {
            let initial = run_suite(&suite, Mode::Initial, &profile)?;
            let cleaned = run_suite(&suite, Mode::Cleaned, &profile)?;
            render_recall_table(&initial, Some(&cleaned))
        }
    };
    out.write_all(table.as_bytes())?;
    Ok(EXIT_OK)
}

/// Compares several tools' edge lists, prints the markdown report and
/// writes the JSON one when a destination is known.
pub fn cmd_macro(args: &MacroArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = run_macro(args, out, err);
    finish(result, err)
}

fn run_macro(args: &MacroArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<u8> {
    let config = load_comparison(&args.config)?;
    let report = run_comparison(&config)?;
    out.write_all(render_report(&report, ReportStyle::Markdown).as_bytes())?;
    if let Some(path) = args.out.as_ref().or(config.json_out.as_ref()) {
        write_file(path, render_report(&report, ReportStyle::Json).as_bytes())?;
        writeln!(err, "wrote {}", path.display())?;
    }
    Ok(EXIT_OK)
}
