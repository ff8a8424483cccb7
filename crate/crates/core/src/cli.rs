//! The `lossyfield` command-line tool.
//!
//! Every subcommand writes its report to the supplied writer so it can be
//! driven in-process. Exit codes: 0 success, 2 usage, 3 data or format
//! error, 4 invariant breach (including a bound violation found by
//! `verify`).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::codec::{
    compress, decompress, decompress_like, read_header, verify_bound, ArtifactHeader, BlockConfig, BoundMode,
    ByteStage, CompressedArtifact, ErrorBound, MAGIC,
};
use crate::dataset::{build_dataset, rebuild_from_manifest, DatasetManifest, DatasetSpec, SourcePaths};
use crate::fields::{load_field_with_sidecar, parse_dims, save_field_with_sidecar, Dims, Field3D};
use crate::labeler::{class_histogram, classify, save_labels, FlameChannels, LabelThresholds, CHANNEL_NAMES};
use crate::quality::{compression_ratio, psnr, ssim};
use crate::sweep::{run_sweep, sweep_csv, validate_bounds, SweepSpec, DEFAULT_BOUNDS};
use crate::synth::{flame_field, signed_field, smooth_field, CANONICAL_SEED, FLAME_DIMS};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "lossyfield",
    version,
    about = "Error-bounded compression and dataset tooling for 3-D fields"
)]
pub struct Cli {
    /// Worker threads (defaults to all cores). Output bytes do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress one field file into an artifact.
    Compress(CompressArgs),
    /// Reconstruct a field file from an artifact.
    Decompress(DecompressArgs),
    /// Check a reconstruction against the artifact's bound.
    Verify(VerifyArgs),
    /// PSNR, SSIM and (with an artifact) compression ratio.
    Metrics(MetricsArgs),
    /// Five-class regime labels from the four flame channels.
    Label(LabelArgs),
    /// Build or rebuild a tiled dataset.
    Dataset(DatasetArgs),
    /// Compress across a list of bounds and emit CSV.
    Sweep(SweepArgs),
    /// Print an artifact header without decoding payloads.
    Info(InfoArgs),
    /// Write seeded synthetic fields with sidecars.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Abs,
    Pwr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StageArg {
    None,
    Deflate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Smooth,
    Signed,
    Flame,
}

#[derive(Debug, Args)]
pub struct CodecFlags {
    #[arg(long, value_enum, default_value = "pwr")]
    pub mode: ModeArg,
    /// Absolute bound, or fraction of each value in pwr mode (must be < 1).
    #[arg(long)]
    pub bound: f64,
    #[arg(long)]
    pub zero_threshold: Option<f64>,
    /// Regression block edge (>= 2).
    #[arg(long, default_value_t = 6)]
    pub block: usize,
    #[arg(long, default_value_t = 32768)]
    pub bin_radius: u32,
    #[arg(long)]
    pub no_regression: bool,
    #[arg(long)]
    pub no_lorenzo: bool,
    #[arg(long, value_enum, default_value = "deflate")]
    pub byte_stage: StageArg,
}

impl CodecFlags {
    fn bound(&self) -> Result<ErrorBound> {
        let b = match self.mode {
            ModeArg::Abs => ErrorBound::absolute(self.bound)?,
            ModeArg::Pwr => ErrorBound::pointwise_relative(self.bound)?,
        };
        match self.zero_threshold {
            Some(t) => b.with_zero_threshold(t),
            None => Ok(b),
        }
    }

    fn config(&self) -> Result<BlockConfig> {
        let cfg = BlockConfig {
            block_edge: self.block,
            bin_radius: self.bin_radius,
            lorenzo: !self.no_lorenzo,
            regression: !self.no_regression,
            byte_stage: match self.byte_stage {
                StageArg::None => ByteStage::None,
                StageArg::Deflate => ByteStage::Deflate,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    /// Field file with a `.meta` sidecar.
    #[arg(required_unless_present = "synthetic")]
    pub input: Option<PathBuf>,
    /// Use a seeded synthetic field instead of a file.
    #[arg(long, value_enum, conflicts_with = "input")]
    pub synthetic: Option<SynthKind>,
    #[arg(long, default_value_t = CANONICAL_SEED)]
    pub seed: u64,
    /// Grid of the synthetic field, e.g. 64x64x64.
    #[arg(long, default_value = "64x64x64")]
    pub dims: String,
    #[command(flatten)]
    pub codec: CodecFlags,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write the synthetic original here (with sidecar).
    #[arg(long)]
    pub save_original: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecompressArgs {
    pub artifact: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Copy the grid coordinates of this field file.
    #[arg(long)]
    pub coords_from: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub original: PathBuf,
    pub artifact: PathBuf,
    /// Check this field file instead of decoding the artifact.
    #[arg(long)]
    pub reconstructed: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub clean: PathBuf,
    /// Lossy field file, or an artifact to decode.
    pub lossy: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ThresholdFlags {
    /// TOML file with z_air, z_fuel, y_prod_min, g_min.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    #[arg(long)]
    pub z_air: Option<f64>,
    #[arg(long)]
    pub z_fuel: Option<f64>,
}

impl ThresholdFlags {
    fn resolve(&self) -> Result<LabelThresholds> {
        let mut t = match &self.thresholds {
            Some(p) => LabelThresholds::from_toml(&read_text(p)?)?,
            None => LabelThresholds::default(),
        };
        if let Some(v) = self.z_air {
            t.z_air = v;
        }
        if let Some(v) = self.z_fuel {
            t.z_fuel = v;
        }
        t.validate()?;
        Ok(t)
    }

    fn any(&self) -> bool {
        self.thresholds.is_some() || self.z_air.is_some() || self.z_fuel.is_some()
    }
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Y_H2, Y_O2, Y_H2O and Z field files, in that order.
    #[arg(long, num_args = 4, value_names = ["Y_H2", "Y_O2", "Y_H2O", "Z"], required_unless_present = "synthetic")]
    pub channels: Vec<PathBuf>,
    #[arg(long, conflicts_with = "channels")]
    pub synthetic: bool,
    #[arg(long, default_value_t = CANONICAL_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub thresholds: ThresholdFlags,
    /// Write the u8 label file (with sidecar) here.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// TOML dataset spec; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Rebuild from an existing manifest instead.
    #[arg(long, conflicts_with_all = ["config", "sources"])]
    pub rebuild: Option<PathBuf>,
    /// Y_H2, Y_O2, Y_H2O and Z field files.
    #[arg(long, num_args = 4, value_names = ["Y_H2", "Y_O2", "Y_H2O", "Z"])]
    pub sources: Vec<PathBuf>,
    /// Tile shape, e.g. 256x256x3.
    #[arg(long)]
    pub tile: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub augmentations: Option<usize>,
    /// Build from lossy fields at this point-wise relative bound.
    #[arg(long)]
    pub lossy_bound: Option<f64>,
    /// With --lossy-bound, also label the lossy fields.
    #[arg(long, requires = "lossy_bound")]
    pub lossy_labels: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML sweep spec; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Field files with sidecars.
    #[arg(long, num_args = 1..)]
    pub channels: Vec<PathBuf>,
    #[arg(long, value_enum, conflicts_with = "channels")]
    pub synthetic: Option<SynthKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated fractions, e.g. 0.01,0.05,0.1.
    #[arg(long, value_delimiter = ',')]
    pub bounds: Option<Vec<f64>>,
    /// Compute label error with default thresholds.
    #[arg(long)]
    pub labels: bool,
    #[command(flatten)]
    pub thresholds: ThresholdFlags,
    #[arg(long)]
    pub block: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    pub artifact: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: SynthKind,
    #[arg(long, default_value_t = CANONICAL_SEED)]
    pub seed: u64,
    /// Defaults to 64x64x64, or 64x64x8 for flame.
    #[arg(long)]
    pub dims: Option<String>,
    /// Output file (smooth, signed) or directory (flame).
    #[arg(long, short)]
    pub out: PathBuf,
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) => 2,
        Error::Invariant(_) => 4,
        _ => 3,
    }
}

/// Parses `std::env::args`, runs, and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("lossyfield: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Runs one parsed command; the returned value is the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8> {
    match cli.threads {
        Some(0) => Err(Error::InvalidArgument("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Invariant(e.to_string()))?;
            let mut buf = Vec::new();
            let code = pool.install(|| dispatch(&cli.command, &mut buf));
            out.write_all(&buf).map_err(io)?;
            code
        }
        None => dispatch(&cli.command, out),
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<u8> {
    match cmd {
        Command::Compress(a) => cmd_compress(a, out),
        Command::Decompress(a) => cmd_decompress(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Metrics(a) => cmd_metrics(a, out),
        Command::Label(a) => cmd_label(a, out),
        Command::Dataset(a) => cmd_dataset(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Info(a) => cmd_info(a, out),
        Command::Generate(a) => cmd_generate(a, out),
    }
}

fn read_text(p: &Path) -> Result<String> {
    fs::read_to_string(p).map_err(|e| Error::Data(format!("{}: {e}", p.display())))
}

fn read_bytes(p: &Path) -> Result<Vec<u8>> {
    fs::read(p).map_err(|e| Error::Data(format!("{}: {e}", p.display())))
}

fn load(p: &Path) -> Result<Field3D> {
    Ok(load_field_with_sidecar(p, true)?.0)
}

fn load_artifact(p: &Path) -> Result<CompressedArtifact> {
    CompressedArtifact::from_bytes(&read_bytes(p)?)
}

fn synth(kind: SynthKind, dims: Dims, seed: u64) -> Result<Field3D> {
    match kind {
        SynthKind::Smooth => Ok(smooth_field(dims, seed)),
        SynthKind::Signed => Ok(signed_field(dims, seed)),
        SynthKind::Flame => Err(Error::InvalidArgument(
            "flame is a four-channel profile; use `generate flame` or `label --synthetic`".into(),
        )),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e)
}

fn cmd_compress(a: &CompressArgs, out: &mut dyn Write) -> Result<u8> {
    let bound = a.codec.bound()?;
    let cfg = a.codec.config()?;
    let field = match (&a.input, a.synthetic) {
        (Some(p), _) => load(p)?,
        (None, Some(kind)) => synth(kind, parse_dims(&a.dims)?, a.seed)?,
        (None, None) => return Err(Error::InvalidArgument("need an input file or --synthetic".into())),
    };
    if let Some(p) = &a.save_original {
        save_field_with_sidecar(p, &field, None)?;
    }
    let art = compress(&field, &bound, &cfg)?;
    let bytes = art.to_bytes();
    fs::write(&a.out, &bytes)?;
    let recon = decompress_like(&art, &field)?;
    let report = verify_bound(&field, &recon, &art.header.bound)?;
    let ratio = compression_ratio(field.values().len() as u64 * 4, bytes.len() as u64)?;
    writeln!(
        out,
        "compressed dims={} bound={} bytes={} ratio={:.4} max_abs_err={:e} max_rel_err={:e} violations={}",
        field.dims(),
        art.header.bound,
        bytes.len(),
        ratio,
        report.max_abs_error,
        report.max_rel_error,
        report.violations
    )
    .map_err(io)?;
    Ok(if report.violations > 0 { 4 } else { 0 })
}

fn cmd_decompress(a: &DecompressArgs, out: &mut dyn Write) -> Result<u8> {
    let art = load_artifact(&a.artifact)?;
    let field = match &a.coords_from {
        Some(p) => decompress_like(&art, &load(p)?)?,
        None => decompress(&art)?,
    };
    save_field_with_sidecar(&a.out, &field, None)?;
    writeln!(out, "decompressed dims={} -> {}", field.dims(), a.out.display()).map_err(io)?;
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<u8> {
    let original = load(&a.original)?;
    let art = load_artifact(&a.artifact)?;
    let recon = match &a.reconstructed {
        Some(p) => load(p)?,
        None => decompress_like(&art, &original)?,
    };
    let r = verify_bound(&original, &recon, &art.header.bound)?;
    writeln!(
        out,
        "bound={} max_abs_err={:e} max_rel_err={:e} floored={} nonfinite={} violations={}",
        art.header.bound, r.max_abs_error, r.max_rel_error, r.floored_cells, r.nonfinite_cells, r.violations
    )
    .map_err(io)?;
    Ok(if r.violations > 0 { 4 } else { 0 })
}

fn is_artifact(p: &Path) -> Result<bool> {
    let bytes = read_bytes(p)?;
    Ok(bytes.starts_with(MAGIC))
}

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.16e}")
    }
}

fn cmd_metrics(a: &MetricsArgs, out: &mut dyn Write) -> Result<u8> {
    let clean = load(&a.clean)?;
    let (lossy, ratio) = if is_artifact(&a.lossy)? {
        let art = load_artifact(&a.lossy)?;
        let ratio = compression_ratio(clean.values().len() as u64 * 4, art.encoded_len() as u64)?;
        (decompress_like(&art, &clean)?, Some(ratio))
    } else {
        (load(&a.lossy)?, None)
    };
    let p = psnr(&clean, &lossy)?;
    let s = ssim(&clean, &lossy)?;
    if a.json {
        let v = serde_json::json!({
            "psnr_db": if p.is_infinite() { serde_json::json!("inf") } else { serde_json::json!(p) },
            "ssim": s,
            "compression_ratio": ratio,
        });
        writeln!(out, "{v}").map_err(io)?;
    } else {
        let mut line = format!("psnr_db={} ssim={:.16e}", fmt_db(p), s);
        if let Some(r) = ratio {
            line.push_str(&format!(" ratio={r:.16e}"));
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(0)
}

fn load_flame(paths: &[PathBuf]) -> Result<FlameChannels> {
    let fields = paths
        .iter()
        .map(|p| Ok(load_field_with_sidecar(p, false)?.0))
        .collect::<Result<Vec<_>>>()?;
    let arr: [Field3D; 4] = fields
        .try_into()
        .map_err(|_| Error::InvalidArgument("exactly four channel files are needed".into()))?;
    FlameChannels::from_array(arr)
}

fn cmd_label(a: &LabelArgs, out: &mut dyn Write) -> Result<u8> {
    let fields = if a.synthetic {
        flame_field(FLAME_DIMS, a.seed)
    } else {
        load_flame(&a.channels)?
    };
    let labels = classify(&fields, &a.thresholds.resolve()?)?;
    if let Some(p) = &a.out {
        save_labels(p, &labels)?;
    }
    let h = class_histogram(&labels);
    writeln!(
        out,
        "{}",
        serde_json::to_string(&h).map_err(|e| Error::Invariant(e.to_string()))?
    )
    .map_err(io)?;
    Ok(0)
}

fn cmd_dataset(a: &DatasetArgs, out: &mut dyn Write) -> Result<u8> {
    let manifest: DatasetManifest = if let Some(m) = &a.rebuild {
        rebuild_from_manifest(m, &a.out)?
    } else {
        let mut spec = match &a.config {
            Some(p) => DatasetSpec::from_toml(&read_text(p)?, p.parent())?,
            None => {
                if a.sources.len() != 4 {
                    return Err(Error::InvalidArgument(
                        "need --config or --sources with four files".into(),
                    ));
                }
                DatasetSpec::new(sources_from(&a.sources))
            }
        };
        if a.sources.len() == 4 {
            spec.sources = sources_from(&a.sources);
        }
        if let Some(t) = &a.tile {
            spec.tile_shape = parse_dims(t)?.as_array();
        }
        if let Some(s) = a.seed {
            spec.seed = s;
        }
        if let Some(n) = a.augmentations {
            spec.augmentations_per_tile = n;
        }
        if let Some(b) = a.lossy_bound {
            let mut lossy = spec.lossy.unwrap_or(crate::dataset::LossySpec {
                bound: ErrorBound::pointwise_relative(b)?,
                block: BlockConfig::default(),
                labels: Default::default(),
            });
            lossy.bound = ErrorBound::pointwise_relative(b)?;
            if a.lossy_labels {
                lossy.labels = crate::dataset::LabelSource::Lossy;
            }
            spec.lossy = Some(lossy);
        }
        spec.validate()?;
        build_dataset(&spec, &a.out)?
    };
    let c = manifest.split_counts;
    let files: usize = manifest.tiles.iter().map(|t| t.files.len()).sum();
    writeln!(
        out,
        "dataset tiles={} train={} val={} test={} files={} out={}",
        manifest.tiles.len(),
        c.train,
        c.val,
        c.test,
        files,
        a.out.display()
    )
    .map_err(io)?;
    for w in &manifest.warnings {
        writeln!(out, "warning: {w}").map_err(io)?;
    }
    Ok(0)
}

fn sources_from(p: &[PathBuf]) -> SourcePaths {
    SourcePaths {
        y_h2: p[0].clone(),
        y_o2: p[1].clone(),
        y_h2o: p[2].clone(),
        z: p[3].clone(),
    }
}

fn channel_name(path: &Path, meta_channel: Option<String>) -> String {
    meta_channel.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string())
    })
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<u8> {
    let (mut spec, base) = match &a.config {
        Some(p) => (SweepSpec::from_toml(&read_text(p)?)?, p.parent().map(Path::to_owned)),
        None => (SweepSpec::default(), None),
    };
    let rebase = |p: &PathBuf| match &base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.clone(),
    };
    spec.channels = spec.channels.iter().map(rebase).collect();
    spec.thresholds = spec.thresholds.as_ref().map(rebase);
    spec.output = spec.output.as_ref().map(rebase);
    if !a.channels.is_empty() {
        spec.channels = a.channels.clone();
    }
    if let Some(b) = &a.bounds {
        spec.bounds = b.clone();
    } else if spec.bounds.is_empty() {
        spec.bounds = DEFAULT_BOUNDS.to_vec();
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if let Some(b) = a.block {
        spec.block.block_edge = b;
    }
    if a.out.is_some() {
        spec.output = a.out.clone();
    }
    validate_bounds(&spec.bounds)?;
    spec.block.validate()?;

    let seed = if a.seed.is_none() && a.config.is_none() {
        CANONICAL_SEED
    } else {
        spec.seed
    };
    let channels: Vec<(String, Field3D)> = match a.synthetic {
        Some(SynthKind::Flame) => CHANNEL_NAMES
            .iter()
            .map(|n| (*n).to_owned())
            .zip(flame_field(FLAME_DIMS, seed).into_array())
            .collect(),
        Some(kind) => vec![(
            format!("{kind:?}").to_lowercase(),
            synth(kind, Dims::new(64, 64, 64), seed)?,
        )],
        None => {
            if spec.channels.is_empty() {
                return Err(Error::InvalidArgument(
                    "no channels given (use --channels or --synthetic)".into(),
                ));
            }
            spec.channels
                .iter()
                .map(|p| {
                    let (f, meta) = load_field_with_sidecar(p, true)?;
                    Ok((channel_name(p, meta.channel), f))
                })
                .collect::<Result<_>>()?
        }
    };
    let thresholds = if a.thresholds.any() {
        Some(a.thresholds.resolve()?)
    } else if let Some(p) = &spec.thresholds {
        Some(LabelThresholds::from_toml(&read_text(p)?)?)
    } else if a.labels {
        Some(LabelThresholds::default())
    } else {
        None
    };
    let rows = run_sweep(&channels, &spec.bounds, &spec.block, thresholds.as_ref())?;
    let csv = sweep_csv(&rows);
    match &spec.output {
        Some(p) => {
            fs::write(p, &csv)?;
            writeln!(out, "sweep rows={} -> {}", rows.len(), p.display()).map_err(io)?;
        }
        None => out.write_all(csv.as_bytes()).map_err(io)?,
    }
    Ok(0)
}

/// Header summary as `key=value` lines. Reads only the header and section
/// lengths.
pub fn info_text(bytes: &[u8]) -> Result<String> {
    let (h, sizes) = read_header(bytes)?;
    let mut s = header_lines(&h);
    for (sec, n) in sizes {
        s.push_str(&format!("section.{}={}\n", sec.name(), n));
    }
    s.push_str(&format!("total_bytes={}\n", bytes.len()));
    Ok(s)
}

fn header_lines(h: &ArtifactHeader) -> String {
    let mode = match h.bound.mode {
        BoundMode::Absolute => "abs",
        BoundMode::PointwiseRelative => "pwr",
    };
    let mut s = String::new();
    s.push_str(&format!("version={}\n", h.version));
    s.push_str(&format!("dims={}\n", h.dims));
    s.push_str(&format!("mode={mode}\n"));
    s.push_str(&format!("bound={}\n", h.bound.value));
    if let Some(t) = h.bound.zero_threshold {
        s.push_str(&format!("zero_threshold={t:e}\n"));
    }
    s.push_str(&format!("block={}\n", h.config.block_edge));
    s.push_str(&format!("bin_radius={}\n", h.config.bin_radius));
    s.push_str(&format!("lorenzo={}\n", h.config.lorenzo));
    s.push_str(&format!("regression={}\n", h.config.regression));
    s.push_str(&format!("byte_stage={}\n", h.config.byte_stage.name()));
    s.push_str(&format!("transform={:?}\n", h.transform).to_lowercase());
    s.push_str(&format!("original_checksum={:016x}\n", h.original_checksum));
    s
}

fn cmd_info(a: &InfoArgs, out: &mut dyn Write) -> Result<u8> {
    let bytes = read_bytes(&a.artifact)?;
    if a.json {
        let (h, sizes) = read_header(&bytes)?;
        let v = serde_json::json!({
            "version": h.version,
            "dims": h.dims.as_array(),
            "bound": h.bound,
            "config": h.config,
            "transform": format!("{:?}", h.transform).to_lowercase(),
            "original_checksum": format!("{:016x}", h.original_checksum),
            "sections": sizes.iter().map(|(s, n)| (s.name().to_owned(), *n)).collect::<std::collections::BTreeMap<_, _>>(),
            "total_bytes": bytes.len(),
        });
        writeln!(out, "{v}").map_err(io)?;
    } else {
        out.write_all(info_text(&bytes)?.as_bytes()).map_err(io)?;
    }
    Ok(0)
}

fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<u8> {
    match a.kind {
        SynthKind::Flame => {
            let dims = match &a.dims {
                Some(d) => parse_dims(d)?,
                None => FLAME_DIMS,
            };
            fs::create_dir_all(&a.out)?;
            let set = flame_field(dims, a.seed);
            for (name, f) in CHANNEL_NAMES.iter().zip(set.as_array()) {
                let p = a.out.join(format!("{name}.f32"));
                save_field_with_sidecar(&p, f, Some(name))?;
                writeln!(out, "{}", p.display()).map_err(io)?;
            }
        }
        kind => {
            let dims = parse_dims(a.dims.as_deref().unwrap_or("64x64x64"))?;
            let f = synth(kind, dims, a.seed)?;
            save_field_with_sidecar(&a.out, &f, None)?;
            writeln!(out, "{}", a.out.display()).map_err(io)?;
        }
    }
    Ok(0)
}
