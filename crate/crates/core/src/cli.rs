//! Command-line front end: `detect-corners`, `rectify`, `evaluate`, `synth`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::files::{CornerFile, Report};
use crate::geometry::Intrinsics;
use crate::mask::{detect_corners, DetectParams, LabelMask, MorphOrder};
use crate::rectify::{overlay_corners, warp_image, Interpolation, RasterImage};
use crate::search::{default_workers, search_pose, search_pose_with_scores, ScoreStorage, SearchConfig};
use crate::synth::{
    anchored_pose, distort, evaluate, generate_reference, matched_reference, write_bundle, Layout, PanelSpec,
};

/// Exit status when every button was detected.
pub const EXIT_OK: i32 = 0;
/// Exit status for a failed command.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status of `detect-corners` when some buttons failed.
pub const EXIT_PARTIAL: i32 = 2;
/// Exit status for malformed command lines.
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "panel-rectify",
    version,
    about = "Perspective rectification of button panel images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find ordered button corners in a class-label mask PNG.
    DetectCorners(DetectArgs),
    /// Recover the camera pose from button corners and warp the image.
    Rectify(RectifyArgs),
    /// Print the cosine residual of one or more corner files.
    Evaluate(EvaluateArgs),
    /// Write a synthetic panel bundle seen from a known pose.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    /// Structuring element half-size for the closing step, pixels.
    #[arg(long, default_value_t = 2)]
    pub closing_radius: usize,
    /// Apply erosion before dilation (an opening) instead of a closing.
    #[arg(long)]
    pub erode_first: bool,
    /// Smallest button region kept, pixels.
    #[arg(long, default_value_t = 100)]
    pub min_area: usize,
    /// Use the raw Hough lines without refitting them to the boundary.
    #[arg(long)]
    pub no_refine: bool,
}

impl MaskArgs {
    fn params(&self) -> DetectParams {
        DetectParams {
            closing_radius: self.closing_radius,
            closing_order: if self.erode_first {
                MorphOrder::ErodeDilate
            } else {
                MorphOrder::DilateErode
            },
            min_area: self.min_area,
            refine: !self.no_refine,
            ..DetectParams::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// 8-bit single-channel PNG whose pixel values are class ids.
    pub mask: PathBuf,
    /// Corner file to write; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a PNG with a cross on every detected corner.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    /// Image to draw the overlay on; the mask itself when omitted.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Camera intrinsics recorded in the corner file.
    #[arg(long, value_name = "FX,FY,OX,OY", value_parser = parse_intrinsics)]
    pub intrinsics: Option<Intrinsics>,
    #[command(flatten)]
    pub mask_args: MaskArgs,
}

#[derive(Debug, Args)]
pub struct RectifyArgs {
    /// Distorted image (PNG, gray or RGB).
    #[arg(long)]
    pub image: PathBuf,
    /// Corner file of the distorted buttons.
    #[arg(long, conflicts_with = "mask", required_unless_present = "mask")]
    pub corners: Option<PathBuf>,
    /// Label mask to detect the corners from.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Corner file of the standard panel; generated to match when omitted.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Rectified PNG to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Report JSON to write; standard output when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the rectified image with the rectified corners marked.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    /// Camera intrinsics; taken from the corner file when omitted.
    #[arg(long, value_name = "FX,FY,OX,OY", value_parser = parse_intrinsics)]
    pub intrinsics: Option<Intrinsics>,
    /// Lowest sampled angle, degrees.
    #[arg(long, default_value_t = -40.0, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Highest sampled angle, degrees.
    #[arg(long, default_value_t = 40.0, allow_hyphen_values = true)]
    pub beta: f64,
    /// Angle step, degrees.
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Coarse sweep followed by a local fine sweep.
    #[arg(long, conflicts_with = "dump_scores")]
    pub coarse_to_fine: bool,
    /// Worker threads for the sweep; all cores by default.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Keep only score bounds and recompute in the second pass.
    #[arg(long)]
    pub low_memory: bool,
    /// Write every hypothesis and its raw scores as tab-separated text.
    #[arg(long)]
    pub dump_scores: Option<PathBuf>,
    /// Nearest-neighbour sampling instead of bilinear.
    #[arg(long)]
    pub nearest: bool,
    #[command(flatten)]
    pub mask_args: MaskArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Corner files; several files also print their average.
    #[arg(required = true)]
    pub corners: Vec<PathBuf>,
    /// Camera intrinsics; taken from each corner file when omitted.
    #[arg(long, value_name = "FX,FY,OX,OY", value_parser = parse_intrinsics)]
    pub intrinsics: Option<Intrinsics>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Rectifying pose angles in degrees.
    #[arg(long, value_name = "TX,TY,TZ", value_parser = parse_angles, allow_hyphen_values = true)]
    pub pose: Option<[f64; 3]>,
    /// Grid of rows by columns instead of the stacked pair.
    #[arg(long, value_name = "RxC", value_parser = parse_dims, conflicts_with = "column")]
    pub grid: Option<(usize, usize)>,
    /// Single column of N buttons instead of the stacked pair.
    #[arg(long, value_name = "N")]
    pub column: Option<usize>,
    /// Button width and height, pixels.
    #[arg(long, value_name = "WxH", value_parser = parse_dims, default_value = "80x80")]
    pub button_size: (usize, usize),
    /// Gap between buttons, pixels.
    #[arg(long, default_value_t = 40.0)]
    pub spacing: f64,
    /// Canvas width and height, pixels.
    #[arg(long, value_name = "WxH", value_parser = parse_dims, default_value = "640x480")]
    pub canvas: (usize, usize),
    /// Camera intrinsics recorded in the bundle.
    #[arg(long, value_name = "FX,FY,OX,OY", value_parser = parse_intrinsics)]
    pub intrinsics: Option<Intrinsics>,
}

/// Comma-separated list of exactly `n` finite numbers.
pub fn parse_f64_list(s: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let values = s
        .split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("'{part}' is not a finite number"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if values.len() != n {
        return Err(format!("expected {n} comma-separated values, got {}", values.len()));
    }
    Ok(values)
}

pub fn parse_intrinsics(s: &str) -> std::result::Result<Intrinsics, String> {
    let v = parse_f64_list(s, 4)?;
    Intrinsics::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

pub fn parse_angles(s: &str) -> std::result::Result<[f64; 3], String> {
    let v = parse_f64_list(s, 3)?;
    Ok([v[0], v[1], v[2]])
}

/// `AxB` with positive integers, e.g. `3x2`.
pub fn parse_dims(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("'{s}' is not of the form AxB"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v > 0 && v <= 1 << 20)
            .ok_or_else(|| format!("'{t}' is not a positive integer"))
    };
    Ok((parse(a)?, parse(b)?))
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::DetectCorners(a) => cmd_detect_corners(&a),
        Command::Rectify(a) => cmd_rectify(&a).map(|()| EXIT_OK),
        Command::Evaluate(a) => cmd_evaluate(&a).map(|()| EXIT_OK),
        Command::Synth(a) => cmd_synth(&a).map(|()| EXIT_OK),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Mask scaled so that every class is visible, as RGB.
fn mask_preview(mask: &LabelMask) -> RasterImage {
    let k = mask.class_count().max(1) as u32;
    let data = mask.labels.iter().map(|&l| (l as u32 * 200 / k) as u8).collect();
    RasterImage {
        width: mask.width,
        height: mask.height,
        channels: 1,
        data,
    }
    .to_rgb()
}

pub fn cmd_detect_corners(a: &DetectArgs) -> Result<i32> {
    let mask = LabelMask::read_png(&a.mask)?;
    let detection = detect_corners(&mask, &a.mask_args.params())?;
    for s in &detection.statuses {
        if let Err(e) = &s.result {
            eprintln!(
                "warning: button with label {} at ({}, {}) failed: {e}",
                s.label, s.bbox.min_x, s.bbox.min_y
            );
        }
    }
    let file = CornerFile::from_corner_set(&detection.corners, a.intrinsics)?;
    write_or_print(a.out.as_deref(), &file.to_json()?)?;
    if let Some(path) = &a.overlay {
        let base = match &a.image {
            Some(p) => RasterImage::read_png(p)?.to_rgb(),
            None => mask_preview(&mask),
        };
        overlay_corners(&base, &detection.corners)?.write_png(path)?;
    }
    Ok(if detection.is_complete() { EXIT_OK } else { EXIT_PARTIAL })
}

pub fn cmd_rectify(a: &RectifyArgs) -> Result<()> {
    let image = RasterImage::read_png(&a.image)?;
    let (detected, file_k) = match (&a.corners, &a.mask) {
        (Some(path), _) => {
            let f = CornerFile::read(path)?;
            (f.corner_set()?, f.intrinsics)
        }
        (None, Some(path)) => {
            let mask = LabelMask::read_png(path)?;
            let detection = detect_corners(&mask, &a.mask_args.params())?;
            if !detection.is_complete() {
                eprintln!(
                    "warning: {} of {} buttons failed detection",
                    detection.failed(),
                    detection.statuses.len()
                );
            }
            (detection.corners, None)
        }
        (None, None) => return Err(Error::Format("either --corners or --mask is required".into())),
    };
    let k = a.intrinsics.or(file_k).unwrap_or_default();
    let reference = match &a.reference {
        Some(path) => CornerFile::read(path)?.corner_set()?,
        None => matched_reference(&detected, (image.width, image.height))?,
    };
    let cfg = SearchConfig {
        alpha: a.alpha,
        beta: a.beta,
        gamma: a.gamma,
        coarse_to_fine: a.coarse_to_fine,
        worker_count: a.workers.unwrap_or_else(default_workers),
        storage: if a.low_memory {
            ScoreStorage::Recompute
        } else {
            ScoreStorage::Table
        },
    };
    let result = match &a.dump_scores {
        Some(path) => {
            let (result, table) = search_pose_with_scores(&detected, &reference, &k, &cfg)?;
            let file = std::fs::File::create(path)?;
            table.write_tsv(std::io::BufWriter::new(file))?;
            result
        }
        None => search_pose(&detected, &reference, &k, &cfg)?,
    };
    let interp = if a.nearest {
        Interpolation::Nearest
    } else {
        Interpolation::Bilinear
    };
    let rectified = warp_image(&image, &result.best_pose, &k, (image.width, image.height), interp)?;
    rectified.write_png(&a.out)?;
    let rectified_corners = result.rectify_corners(&detected, &k)?;
    if let Some(path) = &a.overlay {
        overlay_corners(&rectified.to_rgb(), &rectified_corners)?.write_png(path)?;
    }
    let report = Report::new(
        &result,
        &k,
        evaluate(&detected, &k)?,
        evaluate(&rectified_corners, &k)?,
        &rectified_corners,
    )?;
    write_or_print(a.report.as_deref(), &report.to_json()?)
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let mut values = Vec::with_capacity(a.corners.len());
    for path in &a.corners {
        let f = CornerFile::read(path)?;
        let k = a.intrinsics.or(f.intrinsics).unwrap_or_default();
        values.push(evaluate(&f.corner_set()?, &k)?);
    }
    let mut out = String::new();
    if let [single] = values.as_slice() {
        out.push_str(&format!("{single:e}\n"));
    } else {
        for (path, v) in a.corners.iter().zip(&values) {
            out.push_str(&format!("{}\t{v:e}\n", path.display()));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        out.push_str(&format!("average\t{mean:e}\n"));
    }
    write_or_print(None, &out)
}

pub fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let layout = match (a.grid, a.column) {
        (Some((rows, cols)), _) => Layout::Grid { rows, cols },
        (None, Some(n)) => Layout::SingleColumn(n),
        (None, None) => Layout::VerticalPair,
    };
    let canvas = (
        u32::try_from(a.canvas.0).map_err(|_| Error::InvalidPanel("canvas too wide".into()))?,
        u32::try_from(a.canvas.1).map_err(|_| Error::InvalidPanel("canvas too tall".into()))?,
    );
    let spec = PanelSpec {
        layout,
        button_size: (a.button_size.0 as f64, a.button_size.1 as f64),
        spacing: a.spacing,
        origin: None,
        canvas,
    };
    let k = a.intrinsics.unwrap_or_default();
    let panel = generate_reference(&spec)?;
    let pose = anchored_pose(a.pose.unwrap_or([0.0; 3]), &panel.corners, &k);
    let distorted = distort(&panel, &pose, &k)?;
    write_bundle(&a.out, &distorted, &pose, &k)?;
    let reference = CornerFile::from_corner_set(&panel.corners, Some(k))?;
    std::fs::write(a.out.join("reference.json"), reference.to_json()?)?;
    Ok(())
}
