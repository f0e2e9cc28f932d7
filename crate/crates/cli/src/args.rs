use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use jingleprint::config::Config;
use jingleprint::{BoundCombination, FrameFormat};

#[derive(Debug, Parser)]
#[command(
    name = "jingleprint",
    version,
    about = "Identify TV programs by their visual jingles"
)]
pub struct Cli {
    /// `key=value` file applied over the built-in defaults; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for scanning; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sign a jingle and add it to a catalogue.
    Sign(SignArgs),
    /// Scan a stream for catalogue jingles and write a detection report.
    Scan(ScanArgs),
    /// Estimate per-descriptor fusion weights from labelled streams.
    Calibrate(CalibrateArgs),
    /// Inspect or edit a catalogue.
    #[command(subcommand)]
    Catalogue(CatalogueCommand),
    /// Generate a seeded synthetic corpus with ground truth.
    GenCorpus(GenCorpusArgs),
    /// Segment a single image and dump the region map.
    SegmentImage(SegmentImageArgs),
}

#[derive(Debug, Subcommand)]
pub enum CatalogueCommand {
    /// List entries.
    List {
        #[arg(long, value_name = "FILE")]
        catalogue: PathBuf,
    },
    /// Remove one entry.
    Remove {
        #[arg(long, value_name = "FILE")]
        catalogue: PathBuf,
        #[arg(long)]
        id: String,
    },
}

/// Descriptor tunables; unset flags fall back to the config file, then to
/// the defaults shown.
#[derive(Debug, Args, Default)]
pub struct DescriptorArgs {
    /// Gray-level buckets [default: 64]
    #[arg(long)]
    pub n_color: Option<u16>,
    /// Coherence threshold in pixels, or `auto` for 1% of the frame [default: auto]
    #[arg(long, value_parser = parse_tau)]
    pub tau: Option<String>,
    /// Region merging complexity Q [default: 32]
    #[arg(long)]
    pub q: Option<f64>,
    /// Harris k [default: 0.04]
    #[arg(long)]
    pub k: Option<f64>,
    /// Harris Gaussian sigma [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Interest points kept per frame [default: 50]
    #[arg(long)]
    pub n_poi: Option<u32>,
    /// Non-maximum suppression radius [default: 3]
    #[arg(long)]
    pub nms: Option<u32>,
    /// Merge bound combination: sum or quadrature [default: sum]
    #[arg(long)]
    pub srm_bound: Option<BoundCombination>,
}

impl DescriptorArgs {
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        push(&mut out, "n_color", self.n_color);
        push(&mut out, "tau", self.tau.clone());
        push(&mut out, "q", self.q);
        push(&mut out, "k", self.k);
        push(&mut out, "sigma", self.sigma);
        push(&mut out, "n_poi", self.n_poi);
        push(&mut out, "nms", self.nms);
        if let Some(b) = self.srm_bound {
            let name = match b {
                BoundCombination::Sum => "sum",
                BoundCombination::Quadrature => "quadrature",
            };
            out.push(("srm_bound", name.to_string()));
        }
        out
    }
}

#[derive(Debug, Args, Default)]
pub struct FusionArgs {
    /// CCV fusion weight [default: 1]
    #[arg(long)]
    pub w_ccv: Option<f64>,
    /// POI fusion weight [default: 1]
    #[arg(long)]
    pub w_poi: Option<f64>,
    /// CCV similarity threshold [default: 0.85]
    #[arg(long)]
    pub th_ccv: Option<f64>,
    /// POI similarity threshold [default: 0.70]
    #[arg(long)]
    pub th_poi: Option<f64>,
}

impl FusionArgs {
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        push(&mut out, "w_ccv", self.w_ccv);
        push(&mut out, "w_poi", self.w_poi);
        push(&mut out, "th_ccv", self.th_ccv);
        push(&mut out, "th_poi", self.th_poi);
        out
    }
}

#[derive(Debug, Args, Default)]
pub struct MatchArgs {
    /// Maximum POI displacement in pixels, exclusive [default: 4]
    #[arg(long)]
    pub thre_dist: Option<f64>,
    /// Maximum normalized response difference, exclusive [default: 0.1]
    #[arg(long)]
    pub thre_harris: Option<f64>,
}

impl MatchArgs {
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        push(&mut out, "thre_dist", self.thre_dist);
        push(&mut out, "thre_harris", self.thre_harris);
        out
    }
}

fn parse_tau(s: &str) -> Result<String, String> {
    match s {
        "auto" => Ok(s.to_string()),
        _ => match s.parse::<u32>() {
            Ok(v) if v > 0 => Ok(s.to_string()),
            _ => Err("expected `auto` or a positive integer".into()),
        },
    }
}

fn push<T: ToString>(out: &mut Vec<(&'static str, String)>, key: &'static str, v: Option<T>) {
    if let Some(v) = v {
        out.push((key, v.to_string()));
    }
}

#[derive(Debug, Args)]
pub struct SignArgs {
    /// Jingle frames: a .y4m file or a directory of .ppm/.pgm frames
    #[arg(long, value_name = "PATH")]
    pub frames: PathBuf,
    /// Frame format; guessed from the path when omitted
    #[arg(long)]
    pub format: Option<FrameFormat>,
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub channel: String,
    /// First sampled frame
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    /// Sampled frames [default: 5]
    #[arg(long)]
    pub nframes: Option<u32>,
    /// Frames between samples [default: 12]
    #[arg(long)]
    pub tstep: Option<u32>,
    /// Catalogue file, created when missing
    #[arg(long, value_name = "FILE")]
    pub catalogue: PathBuf,
    /// Replace an existing entry with the same id
    #[arg(long)]
    pub replace: bool,
    #[command(flatten)]
    pub descriptor: DescriptorArgs,
    #[command(flatten)]
    pub fusion: FusionArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Stream: a .y4m file or a directory of .ppm/.pgm frames
    #[arg(long, value_name = "PATH")]
    pub stream: PathBuf,
    #[arg(long)]
    pub format: Option<FrameFormat>,
    #[arg(long, value_name = "FILE")]
    pub catalogue: PathBuf,
    /// Report CSV; printed to stdout when omitted
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Distance between candidate offsets [default: 1]
    #[arg(long)]
    pub stride: Option<usize>,
    /// Require every entry to use this many sampled frames
    #[arg(long)]
    pub nframes: Option<u32>,
    /// Require every entry to use this sampling step
    #[arg(long)]
    pub tstep: Option<u32>,
    /// Recompute frame signatures for every window instead of caching them
    #[arg(long)]
    pub no_cache: bool,
    /// Log offsets where no entry matched to stderr
    #[arg(long)]
    pub emit_undefined: bool,
    #[command(flatten)]
    pub descriptor: DescriptorArgs,
    #[command(flatten)]
    pub matching: MatchArgs,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, value_name = "FILE")]
    pub catalogue: PathBuf,
    /// Ground truth CSV `stream_path,offset,program_id`; relative stream
    /// paths are resolved against the CSV's directory
    #[arg(long, value_name = "FILE")]
    pub truth: PathBuf,
    /// Only calibrate entries of this channel
    #[arg(long)]
    pub channel: Option<String>,
    /// Distance between candidate offsets [default: 1]
    #[arg(long)]
    pub stride: Option<usize>,
    /// Print the table without rewriting the catalogue
    #[arg(long)]
    pub dry_run: bool,
    #[command(flatten)]
    pub matching: MatchArgs,
}

#[derive(Debug, Args)]
pub struct GenCorpusArgs {
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub jingles: usize,
    #[arg(long, default_value_t = 5)]
    pub streams: usize,
    /// Frames per stream
    #[arg(long, default_value_t = 2000)]
    pub frames: usize,
    /// Occurrences of each jingle across all streams
    #[arg(long, default_value_t = 2)]
    pub plants: usize,
    /// Frames per jingle
    #[arg(long, default_value_t = 60)]
    pub jingle_frames: usize,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 48)]
    pub height: usize,
    #[arg(long, alias = "seed", default_value_t = 7)]
    pub rng_seed: u64,
    /// Uniform integer noise amplitude added to stream frames
    #[arg(long, default_value_t = 0)]
    pub noise_amp: u8,
    /// 3x3 box blur stream frames before adding noise
    #[arg(long)]
    pub blur: bool,
}

#[derive(Debug, Args)]
pub struct SegmentImageArgs {
    /// Input .ppm or .pgm image
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Output PGM painted with region means
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Region table; defaults to the output path with a .csv extension
    #[arg(long, value_name = "FILE")]
    pub regions: Option<PathBuf>,
    /// Region merging complexity Q [default: 32]
    #[arg(long)]
    pub q: Option<f64>,
    /// Gray-level buckets [default: 64]
    #[arg(long)]
    pub n_color: Option<u16>,
    /// Merge bound combination: sum or quadrature [default: sum]
    #[arg(long)]
    pub srm_bound: Option<BoundCombination>,
}

/// Defaults, then the config file, then explicit flags.
pub fn layered_config(
    file: Option<&PathBuf>,
    flags: &[(&'static str, String)],
) -> anyhow::Result<Config> {
    let mut cfg = Config::default();
    if let Some(path) = file {
        cfg.apply_file(path)?;
    }
    for (k, v) in flags {
        cfg.set(k, v).map_err(|msg| {
            jingleprint::Error::InvalidParameter(format!("--{}: {msg}", k.replace('_', "-")))
        })?;
    }
    cfg.validate()?;
    Ok(cfg)
}
