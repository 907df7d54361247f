use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sgml_cli::commands::{self, Context};
use sgml_cli::pipeline::check_multiplier;
use sgml_cli::CliError;
use sgml_core::ied::ProtectionDefaults;
use sgml_core::multisub::CollisionPolicy;
use sgml_core::validate::DocumentKind;

#[derive(Debug, Parser)]
#[command(name = "sgml", version, about = "Compile SG-ML substation models into cyber range configurations")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Write the JSON report of the run to FILE.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Treat warnings as failures.
    #[arg(long, global = true)]
    strict: bool,
    /// What to do when merged documents share IED or subnetwork names.
    #[arg(long, global = true, default_value_t = CollisionPolicy::Prefix, value_name = "error|prefix")]
    collision_policy: CollisionPolicy,
    /// Instantaneous over-current pickup, as a multiple of nominal current,
    /// for settings that leave it out.
    #[arg(long, global = true, value_name = "F")]
    ptoc50_multiplier: Option<f64>,
    /// Reverse power pickup in p.u. for settings that leave it out.
    #[arg(long, global = true, value_name = "F")]
    pdop_epsilon: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check proprietary XML, SCL or PLCopen files.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Read every file as this kind (parameters, mapping, thresholds, scada).
        #[arg(long)]
        kind: Option<DocumentKind>,
    },
    /// Build the electrical graph of an SSD or SCD.
    Topology {
        scl: PathBuf,
        /// Parameter file; emits the power system model as well.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Merge substation configuration descriptions.
    MergeScd {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Merge specification descriptions, grafting the bays of any SEDs.
    MergeSsd {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Generate the virtual IED bundle for one IED.
    Ied {
        /// ICD, CID or SCD holding the IED.
        #[arg(long)]
        scl: PathBuf,
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long)]
        settings: Option<PathBuf>,
        /// IED name, when there is no settings file.
        #[arg(long = "ied")]
        name: Option<String>,
    },
    /// Convert a SCADA project to JSON.
    Scada { file: PathBuf },
    /// Extract structured text programs from a PLCopen project.
    Plc { file: PathBuf },
    /// Run every stage over an input directory.
    Pipeline { input: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut protection = ProtectionDefaults::default();
    if let Some(m) = cli.ptoc50_multiplier {
        check_multiplier(m)?;
        protection.ptoc50_multiplier = m;
    }
    if let Some(e) = cli.pdop_epsilon {
        protection.pdop_epsilon = e;
    }
    let ctx = Context {
        out: cli.out,
        report: cli.report,
        strict: cli.strict,
        collision_policy: cli.collision_policy,
        protection,
    };
    match cli.command {
        Command::Validate { files, kind } => commands::validate(&ctx, &files, kind),
        Command::Topology { scl, params } => commands::topology(&ctx, &scl, params.as_deref()),
        Command::MergeScd { files } => commands::merge_scd_files(&ctx, &files),
        Command::MergeSsd { files } => commands::merge_ssd_files(&ctx, &files),
        Command::Ied {
            scl,
            mapping,
            settings,
            name,
        } => commands::ied(&ctx, &scl, mapping.as_deref(), settings.as_deref(), name.as_deref()),
        Command::Scada { file } => commands::scada(&ctx, &file),
        Command::Plc { file } => commands::plc(&ctx, &file),
        Command::Pipeline { input } => commands::pipeline(&ctx, &input),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sgml: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
