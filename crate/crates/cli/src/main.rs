use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};

use pfake_core::analysis::{compare, noise_residual, residual_image, sample_columns, temporal_slice, DEFAULT_SLICE_COLUMNS};
use pfake_core::media::{read_landmarks, Frame};
use pfake_core::pipeline::{generate_batch, read_manifest};
use pfake_core::{build_mask, generate_pfake_with, load_clip, load_frames, save_clip, MaskKind, RpgConfig};

const BATCH_REPORT: &str = "batch_report.json";

/// Seeded pseudo-fake face clip generator.
#[derive(Parser)]
#[command(name = "pfake", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a pseudo-fake clip, or a batch from a manifest.
    Generate(GenerateArgs),
    /// Compare temporal and noise regularity of two frame directories.
    Analyze(AnalyzeArgs),
    /// Rasterize one binary region mask.
    Mask(MaskArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Directory of frames, read in file-name order.
    #[arg(long, required_unless_present = "manifest")]
    input: Option<PathBuf>,
    /// JSON file with one 68-point row per frame.
    #[arg(long, required_unless_present = "manifest")]
    landmarks: Option<PathBuf>,
    /// Clip seed, or the master seed in batch mode.
    #[arg(long)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Use only the first N frames.
    #[arg(long)]
    frames: Option<usize>,
    /// TOML file overriding the default sampling ranges.
    #[arg(long, env = "PFAKE_CONFIG")]
    config: Option<PathBuf>,
    /// JSON list of {frame_dir, landmark_file, source_id}.
    #[arg(long, conflicts_with_all = ["input", "landmarks", "frames"])]
    manifest: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    edit_probability: Option<f64>,
    #[arg(long)]
    face_group_probability: Option<f64>,
    #[arg(long)]
    max_segment_len: Option<usize>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    real: PathBuf,
    #[arg(long)]
    candidate: PathBuf,
    /// Report path; slice and residual images go next to it.
    #[arg(long)]
    out: PathBuf,
    /// Number of evenly spaced columns for slice energy.
    #[arg(long, default_value_t = DEFAULT_SLICE_COLUMNS)]
    columns: usize,
}

#[derive(Args)]
struct MaskArgs {
    /// Landmark JSON; the first row is used.
    #[arg(long)]
    landmarks: PathBuf,
    /// Frame that sets the mask size.
    #[arg(long)]
    frame: PathBuf,
    #[arg(long, value_parser = PossibleValuesParser::new(MaskKind::ALL.map(MaskKind::name)))]
    kind: String,
    #[arg(long)]
    out: PathBuf,
}

fn resolve_config(args: &GenerateArgs) -> Result<RpgConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => RpgConfig::default(),
    };
    if let Some(p) = args.edit_probability {
        config.edit_probability = p;
    }
    if let Some(p) = args.face_group_probability {
        config.face_group_probability = p;
    }
    if let Some(n) = args.max_segment_len {
        config.max_segment_len = n;
    }
    config.validate()?;
    Ok(config)
}

fn generate(args: GenerateArgs) -> Result<()> {
    let config = resolve_config(&args)?;
    println!("# resolved config\n{}", toml::to_string(&config)?);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build()?;

    if let Some(manifest) = &args.manifest {
        let entries = read_manifest(manifest)?;
        let report = pool.install(|| generate_batch(&entries, args.seed, &args.out, &config));
        fs::create_dir_all(&args.out)?;
        let report_path = args.out.join(BATCH_REPORT);
        fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
        for ok in &report.succeeded {
            println!("trace: {}", ok.out_dir.join(pfake_core::media::TRACE_FILE).display());
        }
        for f in &report.failed {
            eprintln!("failed {}: {}", f.source_id, f.error);
        }
        println!("batch report: {}", report_path.display());
        if !report.failed.is_empty() {
            bail!("{} of {} clips failed", report.failed.len(), entries.len());
        }
        return Ok(());
    }

    let (input, landmarks) = match (&args.input, &args.landmarks) {
        (Some(i), Some(l)) => (i, l),
        _ => bail!("--input and --landmarks are required without --manifest"),
    };
    let mut clip = load_clip(input, landmarks)?;
    if let Some(n) = args.frames {
        clip = clip.truncated(n)?;
    }
    let out = pool.install(|| generate_pfake_with(&clip, args.seed, &config))?;
    let trace_path = save_clip(&out.clip, &args.out, &out.trace)?;
    println!("trace: {}", trace_path.display());
    Ok(())
}

fn write_views(frames: &[Frame], column: usize, dir: &Path, tag: &str) -> Result<()> {
    temporal_slice(frames, column)?.save_png(&dir.join(format!("{tag}_slice.png")))?;
    residual_image(&noise_residual(&frames[0]), 4.0).save_png(&dir.join(format!("{tag}_residual.png")))?;
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    if args.columns == 0 {
        bail!("--columns must be at least 1");
    }
    let real = load_frames(&args.real).with_context(|| format!("loading {}", args.real.display()))?;
    let candidate = load_frames(&args.candidate).with_context(|| format!("loading {}", args.candidate.display()))?;
    let cmp = compare(&real, &candidate, None, args.columns)?;
    let dir = match args.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    fs::write(&args.out, cmp.to_document())?;
    let columns = sample_columns(real[0].width(), args.columns);
    let column = columns[columns.len() / 2];
    write_views(&real, column, &dir, "real")?;
    write_views(&candidate, column, &dir, "candidate")?;
    println!(
        "slice energy {:.3} -> {:.3}, mean frame delta {:.3} -> {:.3}",
        cmp.real.temporal_slice_energy,
        cmp.candidate.temporal_slice_energy,
        cmp.real.mean_frame_delta(),
        cmp.candidate.mean_frame_delta()
    );
    println!("report: {}", args.out.display());
    Ok(())
}

fn mask(args: MaskArgs) -> Result<()> {
    let kind: MaskKind = args.kind.parse()?;
    let rows = read_landmarks(&args.landmarks)?;
    let Some(lm) = rows.first() else {
        bail!("{} has no landmark rows", args.landmarks.display());
    };
    let frame = Frame::open(&args.frame)?;
    let m = build_mask(lm, kind, frame.height(), frame.width())?;
    m.save_png(&args.out)?;
    println!("{} pixels in {}", m.support(), kind.name());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Analyze(a) => analyze(a),
        Command::Mask(a) => mask(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
