use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use depgraph::EdgeKind;
use depgraph_cli::{cmd_extract, cmd_macro, cmd_micro, ExtractArgs, MacroArgs, MicroArgs, MicroMode};

/// Static dependency graphs for Python projects, and the tools to evaluate them.
#[derive(Parser)]
#[command(name = "depgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the dependency graph of a source tree to CSV.
    ///
    /// Exit status: 0 ok, 1 fatal error, 2 some files could not be analysed.
    Extract {
        #[arg(long)]
        root: PathBuf,
        /// Key-value project config (extension, exclude, builtins_file).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep edges to names outside the project.
        #[arg(long)]
        include_external: bool,
        /// Comma-separated edge kinds to keep.
        #[arg(long, value_delimiter = ',')]
        kinds: Option<Vec<EdgeKind>>,
    },
    /// Score the extractor against a ground-truth suite.
    Micro {
        /// Suite manifest.
        #[arg(long)]
        suite: PathBuf,
        /// initial, cleaned or both.
        #[arg(long, default_value = "both")]
        mode: MicroMode,
        /// Key-value normalization profile.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Compare the edge lists of several tools.
    Macro {
        /// TOML comparison config.
        #[arg(long)]
        config: PathBuf,
        /// JSON report destination; overrides `json_out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = match cli.command {
        Command::Extract {
            root,
            config,
            out: csv,
            include_external,
            kinds,
        } => cmd_extract(
            &ExtractArgs {
                root,
                config,
                out: csv,
                include_external,
                kinds,
            },
            &mut out,
            &mut err,
        ),
        Command::Micro { suite, mode, profile } => {
            cmd_micro(&MicroArgs { suite, mode, profile }, &mut out, &mut err)
        }
        Command::Macro { config, out: json } => {
            cmd_macro(&MacroArgs { config, out: json }, &mut out, &mut err)
        }
    };
    ExitCode::from(code)
}
