//! `panoforge` command-line tool. Exit codes: 0 success, 1 pipeline
//! failure, 2 usage or I/O error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "panoforge", version, about = "Fisheye panorama pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterArg {
    Ransac,
    Gms,
    None,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorArg {
    Brief,
    Freak,
}

#[derive(Args, Debug, Clone)]
pub struct DetectArgs {
    /// Keypoint budget per image.
    #[arg(long, default_value_t = 5000)]
    pub keypoints: usize,
    #[arg(long, value_enum, default_value_t = DescriptorArg::Freak)]
    pub descriptor: DescriptorArg,
}

#[derive(Args, Debug, Clone)]
pub struct RobustArgs {
    /// Pixel threshold for correctness and RANSAC inliers.
    #[arg(long, default_value_t = 5.0)]
    pub threshold_px: f64,
    /// RANSAC confidence.
    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Remove lens distortion with a key=value camera file.
    Undistort {
        input: PathBuf,
        #[arg(long)]
        camera: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Detect keypoints and write descriptors to a feature container.
    Detect {
        image: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        detect: DetectArgs,
    },
    /// Match two feature containers and write `query_idx,train_idx,distance` CSV.
    Match {
        query: PathBuf,
        train: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = FilterArg::Gms)]
        filter: FilterArg,
        #[command(flatten)]
        robust: RobustArgs,
        /// Also write the RANSAC homography (ransac filter only).
        #[arg(long)]
        homography: Option<PathBuf>,
        /// Side-by-side match drawing; needs --images.
        #[arg(long, value_name = "DIR")]
        debug_matches: Option<PathBuf>,
        /// Source images of the two containers, for --debug-matches.
        #[arg(long, num_args = 2, value_names = ["QUERY_IMAGE", "TRAIN_IMAGE"])]
        images: Option<Vec<PathBuf>>,
    },
    /// Score a registration pipeline on a sequence directory (img1..imgN, H1toKp).
    Eval {
        dataset: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Plain-text table path; printed to stdout when omitted.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FilterArg::Gms)]
        filter: FilterArg,
        #[command(flatten)]
        detect: DetectArgs,
        #[command(flatten)]
        robust: RobustArgs,
    },
    /// Stitch overlapping images into a panorama.
    Stitch {
        #[arg(required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        camera: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        bands: usize,
        /// Index of the reference image.
        #[arg(long)]
        reference: Option<usize>,
        #[command(flatten)]
        detect: DetectArgs,
        #[command(flatten)]
        robust: RobustArgs,
        /// Side-by-side drawings of the verified matches of every pair.
        #[arg(long, value_name = "DIR")]
        debug_matches: Option<PathBuf>,
        /// Seam masks and the gain table.
        #[arg(long, value_name = "DIR")]
        debug_dir: Option<PathBuf>,
    },
    /// Sharpness and quality metrics as JSON.
    Metrics {
        image: PathBuf,
        #[arg(long)]
        reference: Option<PathBuf>,
        /// JSON path; printed to stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the attention-gated NAFNet forward pass.
    Deblur {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Trained parameter file. Without it, seeded random weights are used.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write synthetic test data.
    Synth {
        #[arg(value_enum)]
        kind: SynthKind,
        /// Output directory.
        dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 640)]
        width: usize,
        #[arg(long, default_value_t = 480)]
        height: usize,
        /// Crop count for `crops`.
        #[arg(long, default_value_t = 2)]
        count: usize,
        /// Overlap fraction for `crops`.
        #[arg(long, default_value_t = 0.6)]
        overlap: f64,
        #[arg(long, default_value = "ppm")]
        ext: String,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// Base image plus five warped views and ground-truth homographies.
    Sequence,
    /// Horizontal crops of one source.
    Crops,
    /// Three rotated and scaled views of one scene.
    Views,
}

fn configure_threads() -> Result<(), commands::CliError> {
    let Ok(v) = std::env::var("PANOFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| commands::CliError::Usage(format!("PANOFORGE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| commands::CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| commands::run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
