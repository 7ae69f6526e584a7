//! The `percept` command line: augment, postprocess, draw and batch-inspect.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags or pipeline
//! config), 2 for data errors (unreadable or malformed input files).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use percept_core::boxes::AnchorSet;
use percept_core::data::{batches, load_manifest, parse_message, serialize_message, BatchPlan, Message};
use percept_core::detection::{postprocess, PostprocessParams};
use percept_core::image::{class_color, draw_box, encode_image, load_image};
use percept_core::pipeline::{PipelineConfig, Registry, SequentialProcessor, Value};
use percept_core::{DataPacket, ImageU8, PixelBox, RngStream};

#[derive(Debug, Parser)]
#[command(name = "percept", version, about = "Run perception pipelines over files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply a pipeline config to every image in a directory.
    Augment(AugmentArgs),
    /// Turn raw per-anchor predictions into Box2D lines.
    Postprocess(PostprocessArgs),
    /// Draw Box2D lines onto an image.
    Draw(DrawArgs),
    /// Print per-batch summaries of a dataset run through a pipeline.
    BatchInspect(BatchInspectArgs),
}

#[derive(Debug, Args)]
struct AugmentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Args)]
struct PostprocessArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    anchors: PathBuf,
    #[arg(long)]
    classes: PathBuf,
    #[arg(long, default_value_t = 0.45)]
    iou: f64,
    #[arg(long, default_value_t = 0.45)]
    score: f64,
    #[arg(long = "top-k", default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    top_k: u64,
    #[arg(long = "image-width", value_parser = clap::value_parser!(u32).range(1..))]
    image_width: u32,
    #[arg(long = "image-height", value_parser = clap::value_parser!(u32).range(1..))]
    image_height: u32,
}

#[derive(Debug, Args)]
struct DrawArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    boxes: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BatchInspectArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long = "batch-size", value_parser = clap::value_parser!(u64).range(1..))]
    batch_size: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    epochs: u64,
    #[arg(long = "drop-last")]
    drop_last: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

fn data(context: impl std::fmt::Display) -> impl FnOnce(String) -> CliError {
    move |e| CliError::Data(format!("{context}: {e}"))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Nothing is written to `stdout` or to disk unless the
/// whole command succeeds.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::Augment(a) => augment(&a),
        Command::Postprocess(a) => postprocess_cmd(&a),
        Command::Draw(a) => draw(&a),
        Command::BatchInspect(a) => batch_inspect(&a),
    };
    match result {
        Ok(text) => {
            let _ = stdout.write_all(text.as_bytes());
            let _ = stdout.flush();
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.code()
        }
    }
}

fn load_pipeline(path: &Path) -> Result<SequentialProcessor, CliError> {
    let cfg = PipelineConfig::load(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    cfg.build(&Registry::builtin())
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Writes into a temporary sibling and renames, so a failure never leaves a
/// truncated file behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::Data(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// Encoded bytes for `image`. An image equal to its source is written back
/// verbatim so untouched files stay byte-identical.
fn output_bytes(image: &ImageU8, source: &ImageU8, source_bytes: &[u8], path: &Path) -> Result<Vec<u8>, CliError> {
    if image == source {
        return Ok(source_bytes.to_vec());
    }
    encode_image(image, path).map_err(|e| CliError::Data(format!("cannot encode {}: {e}", path.display())))
}

fn same_location(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn is_supported_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| ["ppm", "png"].iter().any(|s| e.eq_ignore_ascii_case(s)))
}

fn augment(a: &AugmentArgs) -> Result<String, CliError> {
    let pipeline = load_pipeline(&a.config)?;
    if same_location(&a.input, &a.output) {
        return Err(CliError::Usage("--output must differ from --input".into()));
    }
    let entries = std::fs::read_dir(&a.input).map_err(|e| CliError::Data(format!("{}: {e}", a.input.display())))?;
    let mut files: Vec<(String, PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::Data(format!("{}: {e}", a.input.display())))?;
        let path = entry.path();
        if path.is_file() && is_supported_image(&path) {
            files.push((entry.file_name().to_string_lossy().into_owned(), path));
        }
    }
    if files.is_empty() {
        return Err(CliError::Data(format!(
            "no .ppm or .png images in {}",
            a.input.display()
        )));
    }
    files.sort();

    let root = RngStream::new(a.seed);
    let mut results = Vec::with_capacity(files.len());
    let mut summary = String::new();
    for (name, path) in &files {
        let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let source = load_image(path)
            .map_err(|e| e.to_string())
            .map_err(data(path.display()))?;
        let out = pipeline
            .call(DataPacket::single(Value::ImageU8(source.clone())), &root.fork(name))
            .map_err(|e| e.to_string())
            .map_err(data(name))?;
        let image = match out.into_values().into_iter().next() {
            Some(Value::ImageU8(img)) => img,
            other => {
                return Err(CliError::Data(format!(
                    "{name}: pipeline must produce an ImageU8 first, got {}",
                    other.map_or("nothing".to_string(), |v| v.signature())
                )))
            }
        };
        let target = a.output.join(name);
        let encoded = output_bytes(&image, &source, &bytes, &target)?;
        let _ = writeln!(
            summary,
            "{name} {}x{} -> {}x{} {:016x}",
            source.width(),
            source.height(),
            image.width(),
            image.height(),
            percept_core::rng::fnv1a64(&encoded)
        );
        results.push((target, encoded));
    }
    std::fs::create_dir_all(&a.output).map_err(|e| CliError::Data(format!("{}: {e}", a.output.display())))?;
    for (target, encoded) in &results {
        write_atomic(target, encoded)?;
    }
    Ok(summary)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassesFile {
    classes: Vec<String>,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn postprocess_cmd(a: &PostprocessArgs) -> Result<String, CliError> {
    if !(0.0..=1.0).contains(&a.iou) {
        return Err(CliError::Usage(format!("--iou {} must lie in [0, 1]", a.iou)));
    }
    if !a.score.is_finite() {
        return Err(CliError::Usage("--score must be finite".into()));
    }
    let rows: Vec<Vec<f64>> = serde_json::from_str(&read_text(&a.scores)?)
        .map_err(|e| e.to_string())
        .map_err(data(a.scores.display()))?;
    let anchors = AnchorSet::load(&a.anchors)
        .map_err(|e| e.to_string())
        .map_err(data(a.anchors.display()))?;
    let classes: ClassesFile = serde_json::from_str(&read_text(&a.classes)?)
        .map_err(|e| e.to_string())
        .map_err(data(a.classes.display()))?;
    let params = PostprocessParams {
        iou_threshold: a.iou,
        score_threshold: a.score,
        top_k: usize::try_from(a.top_k).unwrap_or(usize::MAX),
        width: a.image_width,
        height: a.image_height,
    };
    let msgs = postprocess(&rows, &anchors, &classes.classes, &params)
        .map_err(|e| e.to_string())
        .map_err(data(a.scores.display()))?;
    let mut out = String::new();
    for m in msgs {
        out.push_str(&serialize_message(&Message::Box2D(m)));
        out.push('\n');
    }
    Ok(out)
}

fn draw(a: &DrawArgs) -> Result<String, CliError> {
    if a.image == a.out || same_location(&a.image, &a.out) {
        return Err(CliError::Usage("--out must differ from --image".into()));
    }
    let bytes = std::fs::read(&a.image).map_err(|e| CliError::Data(format!("{}: {e}", a.image.display())))?;
    let source = load_image(&a.image)
        .map_err(|e| e.to_string())
        .map_err(data(a.image.display()))?;
    let mut image = source.clone();
    for (i, line) in read_text(&a.boxes)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = format!("{} line {}", a.boxes.display(), i + 1);
        match parse_message(line).map_err(|e| e.to_string()).map_err(data(&at))? {
            Message::Box2D(b) => {
                let [x_min, y_min, x_max, y_max] = b.coordinates;
                let pb = PixelBox {
                    x_min,
                    y_min,
                    x_max,
                    y_max,
                };
                image = draw_box(&image, pb, class_color(&b.class_name), 1);
            }
            other => {
                return Err(CliError::Data(format!(
                    "{at}: expected Box2D, got {}",
                    other.type_name()
                )))
            }
        }
    }
    write_atomic(&a.out, &output_bytes(&image, &source, &bytes, &a.out)?)?;
    Ok(String::new())
}

fn batch_inspect(a: &BatchInspectArgs) -> Result<String, CliError> {
    let pipeline = load_pipeline(&a.config)?;
    let manifest = load_manifest(&a.manifest).map_err(|e| CliError::Data(format!("{}: {e}", a.manifest.display())))?;
    let batch_size = usize::try_from(a.batch_size).map_err(|_| CliError::Usage("--batch-size too large".into()))?;
    let mut out = String::new();
    for epoch in 0..a.epochs {
        let plan = BatchPlan {
            seed: a.seed,
            batch_size,
            drop_last: a.drop_last,
            epoch,
        };
        let stream = batches(&manifest, &pipeline, plan).map_err(|e| CliError::Usage(e.to_string()))?;
        for batch in stream {
            let b = batch.map_err(|e| CliError::Data(format!("{}: {e}", a.manifest.display())))?;
            let join = |v: Vec<String>| v.join(",");
            let _ = writeln!(
                out,
                "epoch={} batch={} samples=[{}] shapes=[{}] checksum={:016x} sample_checksums=[{}]",
                b.epoch,
                b.index,
                join(b.sample_indices.iter().map(usize::to_string).collect()),
                join(b.shapes()),
                b.checksum(),
                join(b.sample_checksums().iter().map(|c| format!("{c:016x}")).collect()),
            );
        }
    }
    Ok(out)
}
