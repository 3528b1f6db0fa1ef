mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Group, Report};
use config::{Format, Overrides, SweepConfig};

/// Parameter sweeps over quantum-group representations and weighted
/// Fourier algebras.
#[derive(Parser, Debug)]
#[command(name = "qbeurling", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Comma-separated deformation parameters in (-1, 1) \ {0}.
    #[arg(long, global = true, value_name = "LIST", allow_hyphen_values = true)]
    q: Option<String>,
    /// Largest label s of A_s, e.g. 3 or 5/2.
    #[arg(long, global = true)]
    s_max: Option<String>,
    /// Largest representation label t (at most 12).
    #[arg(long, global = true)]
    t_max: Option<String>,
    /// Comma-separated exponential weight bases, each >= 1.
    #[arg(long, global = true, value_name = "LIST")]
    beta: Option<String>,
    /// poly:ALPHA or exp:BETA.
    #[arg(long, global = true)]
    weight: Option<String>,
    /// Relation and membership tolerance.
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<String>,
    /// Largest t1, t2 for fusion-verify (at most 3).
    #[arg(long, global = true)]
    fusion_t_max: Option<String>,
    /// Residual bound for fusion-verify.
    #[arg(long, global = true)]
    fusion_tol: Option<String>,
    /// Perturbs the first A_s before checking it.
    #[arg(long, global = true, hide = true)]
    inject_corruption: bool,
}

impl GlobalOpts {
    fn overrides(&self) -> Overrides {
        let mut o = Overrides::default();
        let strings = [
            ("q", &self.q),
            ("s-max", &self.s_max),
            ("t-max", &self.t_max),
            ("beta", &self.beta),
            ("weight", &self.weight),
            ("tol", &self.tol),
            ("seed", &self.seed),
            ("jobs", &self.jobs),
            ("fusion-t-max", &self.fusion_t_max),
            ("fusion-tol", &self.fusion_tol),
        ];
        for (key, value) in strings {
            if let Some(v) = value {
                o.set(key, v.as_str());
            }
        }
        if let Some(f) = self.format {
            o.set("format", f.to_string());
        }
        if let Some(p) = &self.out {
            o.set("out", p.to_string_lossy());
        }
        o
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the AN_q, SL_q(2,C) and SU_q(2) relations on A_s and Iwasawa products.
    CheckRelations,
    /// Norms of v^(t)(A_s) against the lower bound and the A_1/2 upper proxy.
    NormTable,
    /// Closed-form boundedness of A_s on A(SU_q(2), w_beta) against the cb-norm trend.
    Boundedness,
    /// Character-spectrum membership for sampled or supplied candidates.
    CharSpec {
        #[arg(value_enum)]
        group: Group,
        /// One candidate per line: a matrix `a, b; c, d` or, for suq2, a complex rho.
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
        /// Number of sampled candidates when no input file is given.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Fusion rules of v^(t) and the A_1/2 bot A_s decomposition.
    FusionVerify,
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let file = match &cli.opts.config {
        Some(path) => Overrides::read_file(path).map_err(CliError::Usage)?,
        None => Overrides::default(),
    };
    let cfg = SweepConfig::resolve(&file.merge(cli.opts.overrides())).map_err(CliError::Usage)?;
    let report = match &cli.command {
        Command::CheckRelations => commands::check_relations(&cfg, cli.opts.inject_corruption)?,
        Command::NormTable => commands::norm_table(&cfg)?,
        Command::Boundedness => commands::boundedness(&cfg)?,
        Command::CharSpec { group, input, samples } => commands::char_spec(&cfg, *group, input.as_deref(), *samples)?,
        Command::FusionVerify => commands::fusion_verify(&cfg)?,
    };
    let bytes = report.table.render(&cfg, &report.meta);
    output::emit(&bytes, &cfg).map_err(|e| CliError::Usage(format!("cannot write output: {e}")))?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(report) => {
            eprintln!("{}", report.summary);
            for f in &report.failures {
                eprintln!("FAIL {f}");
            }
            if report.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
