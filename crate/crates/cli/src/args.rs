use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// pdf, cdf, survival and hazard over a time grid
    Eval,
    /// draw random variates
    Sample,
    /// maximum-likelihood fit with goodness-of-fit report
    Fit,
    /// fit several models and rank them
    Compare,
    /// histogram of the data plus the fitted density
    Plotdata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "ehypofit", version, about = "Exponentiated hypoexponential evaluation, sampling and fitting")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,

    /// Comma-separated stage rates
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub rates: Option<Vec<f64>>,

    /// Exponent k
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,

    /// Number of stages for fitting
    #[arg(long)]
    pub n: Option<usize>,

    /// Model family (hypoexp, ehypoexp, exp), optionally as family:n; repeat or comma-separate for compare
    #[arg(long, value_delimiter = ',')]
    pub model: Vec<String>,

    /// Data file with positive values
    #[arg(long)]
    pub data: Option<PathBuf>,

    /// Time grid START:STOP:STEP
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,

    /// Number of variates to draw
    #[arg(long)]
    pub count: Option<usize>,

    #[arg(long, env = "EHYPOFIT_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write output here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}
