use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dsweep_core::config::RunConfig;
use dsweep_core::figures::{figure_run, run_design, run_profile, Family, Figure, RunOutput};
use dsweep_core::fourier::coefficients;
use dsweep_core::verify::{run_verify, VerifyOptions};

const EXIT_INVALID: u8 = 1;
const EXIT_VERIFY_FAILED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "dsweep",
    version,
    about = "Broadband excitation by double sweeps: design, simulate, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fourier coefficients and the first-order flip-angle table.
    Design(ConfigArgs),
    /// Simulate an excitation, rotation or hard-pulse offset profile.
    Profile {
        #[arg(long, value_parser = ["excitation", "rotation", "hard"])]
        family: String,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run the invariant suites and emit a JSON report.
    Verify {
        /// Also check the six broadband profiles against their thresholds.
        #[arg(long)]
        profiles: bool,
        /// Replace u_0 before the Fourier check (negative control).
        #[arg(long)]
        u0: Option<f64>,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Regenerate a named figure run, or `all`.
    Reproduce {
        figure: String,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

/// Config layers: defaults, then `--config`, then `--set`, then named flags.
#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Any config key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    slices: Option<String>,
    #[arg(long)]
    harmonics: Option<String>,
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sweep_start: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sweep_end: Option<String>,
    #[arg(long)]
    sweep_duration: Option<String>,
    /// `nominal` or a number.
    #[arg(long)]
    sweep_amplitude: Option<String>,
    /// `waveform`, `two_m_pi` or a number.
    #[arg(long = "refocus-T")]
    refocus_t: Option<String>,
    #[arg(long)]
    peak_khz: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    grid_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    grid_max: Option<String>,
    #[arg(long)]
    grid_points: Option<String>,
    /// `ideal` or `integrated`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    max_phase_step: Option<String>,
    #[arg(long)]
    hard_amplitude: Option<String>,
    #[arg(long)]
    hard_flip_deg: Option<String>,
    #[arg(long)]
    parallel: Option<String>,
    #[arg(long, short = 'o')]
    output_dir: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> dsweep_core::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| dsweep_core::Error::Config(format!("--set expects key=value, got `{item}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        let flags = [
            ("slices", &self.slices),
            ("harmonics", &self.harmonics),
            ("blocks", &self.blocks),
            ("sweep_start", &self.sweep_start),
            ("sweep_end", &self.sweep_end),
            ("sweep_duration", &self.sweep_duration),
            ("sweep_amplitude", &self.sweep_amplitude),
            ("refocus_T", &self.refocus_t),
            ("peak_khz", &self.peak_khz),
            ("grid_min", &self.grid_min),
            ("grid_max", &self.grid_max),
            ("grid_points", &self.grid_points),
            ("mode", &self.mode),
            ("max_phase_step", &self.max_phase_step),
            ("hard_amplitude", &self.hard_amplitude),
            ("hard_flip_deg", &self.hard_flip_deg),
            ("parallel", &self.parallel),
            ("output_dir", &self.output_dir),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn report(out: &RunOutput) {
    for f in &out.files {
        println!("{}", f.display());
    }
}

fn run(cli: Cli) -> Result<u8, dsweep_core::Error> {
    match cli.command {
        Command::Design(args) => {
            report(&run_design(&args.resolve()?, None)?);
        }
        Command::Profile { family, config } => {
            let family: Family = family.parse()?;
            report(&run_profile(&config.resolve()?, family, None)?);
        }
        Command::Verify {
            profiles,
            u0,
            seed,
            config,
        } => {
            let cfg = config.resolve()?;
            let coefficients = u0.map(|u0| {
                let mut c = coefficients(&cfg.design().expect("validated"));
                c.values[0] = u0;
                c
            });
            let opts = VerifyOptions {
                coefficients,
                profiles,
                seed,
                ..VerifyOptions::default()
            };
            let r = run_verify(&cfg, &opts)?;
            println!("{}", r.to_json()?);
            if !r.passed {
                for c in r.checks.iter().filter(|c| !c.passed) {
                    eprintln!("FAIL {}: {} (threshold {})", c.name, c.value, c.threshold);
                }
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
        Command::Reproduce { figure, config } => {
            let base = config.resolve()?;
            let figures = if figure == "all" {
                Figure::ALL.to_vec()
            } else {
                vec![figure.parse::<Figure>()?]
            };
            for f in figures {
                report(&figure_run(f, &base)?);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
