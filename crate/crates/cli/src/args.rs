use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "donor-drp",
    version,
    about = "Donor spin levels, refocusing fields, echoes and decays"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML file with run parameters; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Built-in species name (Bi) or path to a species TOML file.
    #[arg(long, global = true)]
    pub species: Option<String>,

    /// Electron gyromagnetic ratio γ_e/2π in GHz/T.
    #[arg(long = "gamma-e", global = true)]
    pub gamma_e: Option<f64>,

    /// Write CSV here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenenergies against field.
    Levels(LevelsArgs),
    /// All S_x-connected transitions with class, frequency and ρ.
    Transitions(TransitionsArgs),
    /// Scan the refocusing objective and locate DRPs and OWPs.
    Magic(MagicArgs),
    /// Two-donor evolution and Hahn-echo fidelity.
    Echo(EchoArgs),
    /// Monte-Carlo ensemble coherence decay.
    Decay(DecayArgs),
}

#[derive(Debug, Args)]
pub struct LevelsArgs {
    /// Field in tesla: a value or lo:hi:n.
    #[arg(long = "B", allow_hyphen_values = true)]
    pub field: Option<String>,
}

#[derive(Debug, Args)]
pub struct TransitionsArgs {
    /// Field in tesla: a value or lo:hi:n.
    #[arg(long = "B", allow_hyphen_values = true)]
    pub field: Option<String>,

    /// Also list dark pairs.
    #[arg(long)]
    pub include_dark: bool,
}

#[derive(Debug, Args)]
pub struct MagicArgs {
    /// Upper and lower state, e.g. 11,10 or -4+,-5u.
    #[arg(long, allow_hyphen_values = true)]
    pub transition: Option<String>,

    /// Field interval lo:hi in tesla.
    #[arg(long)]
    pub range: Option<String>,

    /// Number of grid points.
    #[arg(long)]
    pub grid: Option<usize>,

    /// Write the roots table here.
    #[arg(long)]
    pub roots: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EchoArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub transition: Option<String>,

    /// Field in tesla.
    #[arg(long = "B")]
    pub field: Option<f64>,

    /// Dipolar coupling J in rad/s.
    #[arg(long = "J", allow_hyphen_values = true)]
    pub j: Option<f64>,

    /// Times: a value or lo:hi:n, in seconds (or units of 1/J with --dimensionless).
    #[arg(long)]
    pub t: Option<String>,

    /// Read and write times as the product J·t.
    #[arg(long)]
    pub dimensionless: bool,

    /// Axis of the refocusing π pulse (x or y).
    #[arg(long)]
    pub axis: Option<String>,
}

#[derive(Debug, Args)]
pub struct DecayArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub transition: Option<String>,

    /// Field in tesla.
    #[arg(long = "B")]
    pub field: Option<f64>,

    /// Donor density in m⁻³.
    #[arg(long)]
    pub density: Option<f64>,

    /// Set the density from a mean nearest-neighbour distance in metres.
    #[arg(long, conflicts_with = "density")]
    pub spacing: Option<f64>,

    /// Bath sphere radius in metres.
    #[arg(long)]
    pub radius: Option<f64>,

    /// Minimum donor separation in metres.
    #[arg(long = "r-min")]
    pub r_min: Option<f64>,

    /// full, id_only or dff_only.
    #[arg(long)]
    pub mode: Option<String>,

    /// Number of bath realizations.
    #[arg(long = "n")]
    pub n_realizations: Option<usize>,

    /// Master random seed (required here or in the config).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Total echo times lo:hi:n in seconds.
    #[arg(long)]
    pub t: Option<String>,
}
