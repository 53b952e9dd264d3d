use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use llf_cli::commands::{self, FilterPath, RunConfig, SimMode, Threads, DEFAULT_BANDWIDTHS};
use llf_cli::corpus::{default_corpus, test_card, CardSpec};
use llf_cli::image_io::save_image_u8;
use llf_cli::metrics::psnr;
use llf_cli::{load_image, CliError, CliResult};
use llf_core::hwsim::Bandwidth;
use llf_core::RemapParams;

#[derive(Parser)]
#[command(name = "llf", version, about = "Local Laplacian filtering with a fixed-point accelerator model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Remap {
    /// Detail exponent: below 1 enhances, above 1 smooths.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Edge gain: below 1 compresses tone.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Edge/detail threshold in normalized intensity.
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
}

impl Remap {
    fn params(&self) -> CliResult<RemapParams> {
        Ok(RemapParams::new(self.alpha, self.beta, self.sigma)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Filter one image.
    Run {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        remap: Remap,
        /// reference or accel
        #[arg(long, default_value = "reference")]
        path: String,
        #[arg(long, default_value_t = 3)]
        bands: usize,
        /// Worker threads, or 'auto'.
        #[arg(long, default_value = "auto")]
        threads: String,
    },
    /// Accelerator-vs-reference PSNR over a parameter grid, as CSV.
    Sweep {
        /// Images to sweep; the built-in synthetic corpus when omitted.
        #[arg(long)]
        input: Vec<PathBuf>,
        /// The 18-cell grid (alpha x sigma at beta 1, beta x sigma at alpha 1).
        #[arg(long)]
        default_grid: bool,
        #[arg(long, default_value = "1")]
        alphas: String,
        #[arg(long, default_value = "1")]
        betas: String,
        #[arg(long, default_value = "0.1,0.2,0.4")]
        sigmas: String,
        #[arg(long, default_value = "auto")]
        threads: String,
    },
    /// Cycle model of the nine input streams, as CSV.
    Sim {
        /// Aggregate link bandwidths in bits per cycle; 'inf' for unlimited.
        #[arg(long, default_value = DEFAULT_BANDWIDTHS)]
        bandwidth: String,
        /// Report the replicated-L1 latency model for 1..=N instances instead.
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
    },
    /// Time the accelerator model per band on square synthetic cards.
    Bench {
        /// Image sizes in megapixels.
        #[arg(long, default_value = "0.25,0.5,0.75,1")]
        sizes: String,
        #[command(flatten)]
        remap: Remap,
        #[arg(long, default_value = "auto")]
        threads: String,
    },
    /// PSNR between two images.
    Compare { a: PathBuf, b: PathBuf },
    /// Write a synthetic test card, or the whole corpus into a directory.
    Card {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        #[arg(long, default_value_t = 0)]
        variant: u32,
        /// Treat OUTPUT as a directory and write the default corpus as PPM files.
        #[arg(long)]
        corpus: bool,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let stdout = &mut std::io::stdout().lock();
    match cli.command {
        Command::Run { input, output, remap, path, bands, threads } => {
            let cfg = RunConfig {
                input,
                output,
                params: remap.params()?,
                path: path.parse::<FilterPath>()?,
                n_bands: bands,
                threads: threads.parse::<Threads>()?,
            };
            commands::cmd_run(&cfg, stdout)?;
        }
        Command::Sweep { input, default_grid, alphas, betas, sigmas, threads } => {
            let grid = if default_grid {
                commands::default_grid()
            } else {
                commands::grid_from_lists(
                    &commands::parse_list(&alphas, "alpha")?,
                    &commands::parse_list(&betas, "beta")?,
                    &commands::parse_list(&sigmas, "sigma")?,
                )?
            };
            let images = if input.is_empty() {
                default_corpus().into_iter().map(|(_, img)| img).collect()
            } else {
                input.iter().map(|p| load_image(p)).collect::<CliResult<Vec<_>>>()?
            };
            let rows = commands::with_threads(threads.parse()?, || commands::cmd_sweep(&images, &grid))??;
            print!("{}", commands::emit_sweep_csv(&rows));
        }
        Command::Sim { bandwidth, instances, width, height } => {
            let mode = match instances {
                Some(n) => SimMode::Replication { max_instances: n },
                None => SimMode::Bandwidth(commands::parse_list::<Bandwidth>(&bandwidth, "bandwidth")?),
            };
            print!("{}", commands::cmd_sim(&mode, width, height)?);
        }
        Command::Bench { sizes, remap, threads } => {
            let sizes = commands::parse_list::<f64>(&sizes, "size")?;
            let params = remap.params()?;
            let rows = commands::with_threads(threads.parse()?, || commands::cmd_bench(&sizes, &params))??;
            print!("{}", commands::format_bench_table(&rows));
        }
        Command::Compare { a, b } => {
            let report = psnr(&load_image(&a)?, &load_image(&b)?)?;
            println!("{report}");
        }
        Command::Card { output, width, height, variant, corpus } => {
            if corpus {
                std::fs::create_dir_all(&output).map_err(|e| CliError::io(&output, e))?;
                for (name, img) in default_corpus() {
                    save_image_u8(&img, &output.join(format!("{name}.ppm")))?;
                }
            } else {
                if width == 0 || height == 0 {
                    return Err(CliError::Validation("card size must be positive".into()));
                }
                save_image_u8(&test_card(CardSpec { width, height, variant }), &output)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("llf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
