//! Command-line front end for the donor strain toolkit.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use donor_strain::donor::{GAnisotropySource, ParameterSet};
use donor_strain::echo::{VoigtParams, Window};
use donor_strain::strain::StressAxis;

use commands::{EchoArgs, EchoSource, FitArgs, FitMode, LevelsArgs, ParamOverrides, PredictArgs, StrainArgs, SynthSpec};
use config::{Context, OutputFormat, Overrides, CONFIG_ENV};
use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "donor-strain", version, about = "Strain response of donor spin transitions in silicon")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Run configuration (TOML).
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Donor constants file replacing the built-in table.
    #[arg(long, global = true)]
    pub constants: Option<PathBuf>,
    #[arg(long, global = true)]
    pub elastic_preset: Option<String>,
    #[arg(long, global = true)]
    pub c11: Option<f64>,
    #[arg(long, global = true)]
    pub c12: Option<f64>,
    #[arg(long, global = true)]
    pub c44: Option<f64>,
    /// Sample cross-section in m^2.
    #[arg(long, global = true)]
    pub cross_section: Option<f64>,
    /// Microwave drive frequency in Hz.
    #[arg(long, global = true)]
    pub drive_hz: Option<f64>,
    #[arg(long, global = true)]
    pub format: Option<OutputFormat>,
    #[arg(long, global = true)]
    pub param_set: Option<ParameterSet>,
    #[arg(long, global = true)]
    pub g_anisotropy: Option<GAnisotropySource>,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

impl GlobalOpts {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            constants: self.constants.clone(),
            elastic_preset: self.elastic_preset.clone(),
            c11_pa: self.c11,
            c12_pa: self.c12,
            c44_pa: self.c44,
            cross_section_m2: self.cross_section,
            drive_hz: self.drive_hz,
            format: self.format,
            parameter_set: self.param_set,
            g_anisotropy: self.g_anisotropy,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels against magnetic field.
    Levels {
        #[arg(long)]
        donor: String,
        #[arg(long, default_value_t = 0.0)]
        b_min: f64,
        #[arg(long, default_value_t = 1.0)]
        b_max: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Hyperfine constant override in Hz.
        #[arg(long)]
        a_hz: Option<f64>,
    },
    /// Allowed ESR transitions at the drive frequency.
    Transitions {
        #[arg(long)]
        donor: String,
        #[arg(long)]
        a_hz: Option<f64>,
    },
    /// Strain tensor for a uniaxial load.
    Strain {
        #[arg(long, default_value = "110")]
        axis: StressAxis,
        #[arg(long, conflicts_with = "stress_pa")]
        mass_kg: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        stress_pa: Option<f64>,
    },
    /// Predicted df/d eps_11 per transition and angle.
    Predict {
        #[arg(long)]
        donor: String,
        /// Field angles from [001] in degrees.
        #[arg(long = "theta", value_delimiter = ',', default_value = "0")]
        thetas: Vec<f64>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta_vrm: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta_shear: Option<f64>,
    },
    /// Line centres from echo traces, and the shift per unit strain.
    Echo(EchoCmd),
    /// Fit a measurement dataset.
    Fit {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "slope")]
        mode: FitMode,
        #[arg(long)]
        donor: Option<String>,
        /// Known per-point noise in Hz; otherwise estimated from residuals.
        #[arg(long)]
        noise_sigma: Option<f64>,
    },
    /// Parameter table for all donors and parameter sets.
    Report {
        #[arg(long)]
        donor: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct EchoCmd {
    /// Trace files (time_s,re,im or re,im with --dt).
    #[arg(long = "trace", conflicts_with = "synth")]
    pub traces: Vec<PathBuf>,
    /// Strain of each trace (or of each synthesized trace).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub strains: Vec<f64>,
    /// Synthesize traces instead of reading them.
    #[arg(long)]
    pub synth: bool,
    /// Synthetic shift per unit strain, Hz.
    #[arg(long, default_value_t = 5.4e9, allow_hyphen_values = true)]
    pub slope_hz: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub offset_hz: f64,
    #[arg(long, default_value_t = 5e3)]
    pub sigma_hz: f64,
    #[arg(long, default_value_t = 2e3)]
    pub gamma_hz: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub dt: f64,
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise_rms: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "none")]
    pub window: Window,
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
}

impl EchoCmd {
    fn to_args(&self) -> Result<EchoArgs> {
        let source = if self.synth {
            if self.strains.is_empty() {
                return Err(CliError::Invalid("--synth needs --strains".into()));
            }
            EchoSource::Synth(SynthSpec {
                slope_hz: self.slope_hz,
                strains: self.strains.clone(),
                offset_hz: self.offset_hz,
                lineshape: VoigtParams::new(0.0, self.sigma_hz, self.gamma_hz, 1.0, 0.0)?,
                dt_s: self.dt,
                samples: self.samples,
                noise_rms: self.noise_rms,
                seed: self.seed,
            })
        } else {
            EchoSource::Files { traces: self.traces.clone(), strains: self.strains.clone() }
        };
        Ok(EchoArgs { source, window: self.window, restarts: self.restarts, seed: self.seed })
    }
}

/// Runs one command and returns the rendered output.
pub fn run(cli: &Cli) -> Result<String> {
    let ctx = Context::load(cli.global.config.as_deref(), &cli.global.overrides())?;
    let out = match &cli.command {
        Command::Levels { donor, b_min, b_max, points, a_hz } => commands::levels(
            &ctx,
            &LevelsArgs { donor: donor.clone(), b_min_t: *b_min, b_max_t: *b_max, points: *points, a_hz: *a_hz },
        )?,
        Command::Transitions { donor, a_hz } => commands::transitions(&ctx, donor, *a_hz)?,
        Command::Strain { axis, mass_kg, stress_pa } => {
            commands::strain(&ctx, &StrainArgs { axis: *axis, mass_kg: *mass_kg, stress_pa: *stress_pa })?
        }
        Command::Predict { donor, thetas, k, beta_vrm, beta_shear } => commands::predict(
            &ctx,
            &PredictArgs {
                donor: donor.clone(),
                thetas_deg: thetas.clone(),
                overrides: ParamOverrides { k: *k, beta_vrm: *beta_vrm, beta_shear: *beta_shear },
            },
        )?,
        Command::Echo(e) => commands::echo(&ctx, &e.to_args()?)?,
        Command::Fit { dataset, mode, donor, noise_sigma } => commands::fit(
            &ctx,
            &FitArgs { dataset: dataset.clone(), mode: *mode, donor: donor.clone(), noise_sigma_hz: *noise_sigma },
        )?,
        Command::Report { donor } => commands::report(&ctx, donor.as_deref())?,
    };
    let text = out.render(ctx.config.format);
    match &cli.global.output {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::io(path, e))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}
