use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use panoforge::anafnet::{deblur_image, read_params, AnafConfig, AnafParams};
use panoforge::deblurmetrics;
use panoforge::features::container::FeatureSet;
use panoforge::features::{detect_and_describe, DescriptorKind, DetectorConfig};
use panoforge::imagecore::{read_image, to_grayscale, write_image, ImageU8};
use panoforge::matching::{self, filter_gms, filter_ransac_homography, match_bruteforce, GmsParams, RansacParams};
use panoforge::regeval::{evaluate_sequence, format_table, synthetic_sequence, EvalSequence, FilterKind, PipelineConfig};
use panoforge::stitching::{draw_matches, stitch, RegistrationConfig, StitchConfig, StitchError};
use panoforge::synthetic::{overlapping_crops, rotated_views};
use panoforge::undistort::{undistort_image, CameraModel, UndistortError};

use crate::{Command, DescriptorArg, DetectArgs, FilterArg, RobustArgs, SynthKind};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable / invalid input files.
    Usage(String),
    Io(String),
    /// The pipeline ran and failed.
    Pipeline(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Pipeline(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Pipeline(m) => f.write_str(m),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<ImageU8> {
    read_image(path).map_err(|e| io_err(path, e))
}

fn save(path: &Path, img: &ImageU8) -> Result<()> {
    write_image(path, img).map_err(|e| io_err(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

fn camera(path: &Path) -> Result<CameraModel> {
    CameraModel::from_file(path).map_err(|e| match e {
        UndistortError::NotFound(_) => CliError::Usage(e.to_string()),
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })
}

fn descriptor(d: DescriptorArg) -> DescriptorKind {
    match d {
        DescriptorArg::Brief => DescriptorKind::Brief,
        DescriptorArg::Freak => DescriptorKind::Freak,
    }
}

fn ransac(r: &RobustArgs) -> Result<RansacParams> {
    if !(r.confidence > 0.0 && r.confidence < 1.0) {
        return Err(CliError::Usage(format!("--confidence must be in (0, 1), got {}", r.confidence)));
    }
    if !(r.threshold_px > 0.0 && r.threshold_px.is_finite()) {
        return Err(CliError::Usage(format!("--threshold-px must be positive, got {}", r.threshold_px)));
    }
    Ok(RansacParams {
        confidence: r.confidence,
        reproj_threshold: r.threshold_px,
        seed: r.seed,
        ..RansacParams::default()
    })
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Undistort { input, camera: cam, output } => {
            let model = camera(&cam)?;
            let img = load(&input)?;
            let (out, stats) = undistort_image(&model, &img).map_err(|e| CliError::Pipeline(e.to_string()))?;
            if stats.nonconverged + stats.out_of_source > 0 {
                log::info!(
                    "{} pixels without a converged inverse, {} mapped outside the source",
                    stats.nonconverged,
                    stats.out_of_source
                );
            }
            save(&output, &out)
        }
        Command::Detect { image, output, detect } => cmd_detect(&image, &output, &detect),
        Command::Match {
            query,
            train,
            output,
            filter,
            robust,
            homography,
            debug_matches,
            images,
        } => cmd_match(&query, &train, &output, filter, &robust, homography.as_deref(), debug_matches.as_deref(), images),
        Command::Eval {
            dataset,
            output,
            table,
            filter,
            detect,
            robust,
        } => {
            let filter = match filter {
                FilterArg::Gms => FilterKind::Gms,
                FilterArg::Ransac => FilterKind::Ransac,
                FilterArg::None => FilterKind::None,
            };
            let cfg = PipelineConfig {
                keypoints: detect.keypoints,
                descriptor: descriptor(detect.descriptor),
                filter,
                threshold_px: robust.threshold_px,
                gms: GmsParams::default(),
                ransac: ransac(&robust)?,
            };
            let seq = EvalSequence::load(&dataset).map_err(|e| io_err(&dataset, e))?;
            let report = evaluate_sequence(&seq, &cfg);
            write_json(&output, &report)?;
            let text = format_table(std::slice::from_ref(&report));
            match table {
                Some(p) => {
                    let mut w = create(&p)?;
                    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| io_err(&p, e))
                }
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Stitch {
            inputs,
            output,
            camera: cam,
            bands,
            reference,
            detect,
            robust,
            debug_matches,
            debug_dir,
        } => {
            if bands == 0 {
                return Err(CliError::Usage("--bands must be at least 1".into()));
            }
            let cfg = StitchConfig {
                registration: RegistrationConfig {
                    keypoints: detect.keypoints,
                    descriptor: descriptor(detect.descriptor),
                    gms: GmsParams::default(),
                    ransac: ransac(&robust)?,
                },
                bands,
                camera: cam.as_deref().map(camera).transpose()?,
                reference,
            };
            let images = inputs.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
            cmd_stitch(&images, &cfg, &output, debug_matches.as_deref(), debug_dir.as_deref())
        }
        Command::Metrics {
            image,
            reference,
            output,
        } => {
            let img = load(&image)?;
            let r = reference.as_deref().map(load).transpose()?;
            let report = deblurmetrics::evaluate(&img, r.as_ref()).map_err(|e| CliError::Pipeline(e.to_string()))?;
            match output {
                Some(p) => write_json(&p, &report),
                None => {
                    let s = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
                    println!("{s}");
                    Ok(())
                }
            }
        }
        Command::Deblur {
            input,
            output,
            params,
            seed,
        } => {
            let img = load(&input)?;
            let p = match params {
                Some(path) => {
                    let f = File::open(&path).map_err(|e| io_err(&path, e))?;
                    read_params(BufReader::new(f)).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
                }
                None => {
                    eprintln!(
                        "warning: structural test mode: no --params file, using seeded random weights; \
                         the output is not a deblurring result"
                    );
                    let cfg = AnafConfig {
                        image_channels: img.channels(),
                        ..AnafConfig::default()
                    };
                    AnafParams::random(&cfg, seed).map_err(|e| CliError::Pipeline(e.to_string()))?
                }
            };
            if p.config.image_channels != img.channels() {
                return Err(CliError::Usage(format!(
                    "parameters expect {} channels, image has {}",
                    p.config.image_channels,
                    img.channels()
                )));
            }
            let out = deblur_image(&img, &p).map_err(|e| CliError::Pipeline(e.to_string()))?;
            save(&output, &out)
        }
        Command::Synth {
            kind,
            dir,
            seed,
            width,
            height,
            count,
            overlap,
            ext,
        } => cmd_synth(kind, &dir, seed, width, height, count, overlap, &ext),
    }
}

fn cmd_detect(image: &Path, output: &Path, d: &DetectArgs) -> Result<()> {
    let img = load(image)?;
    let kind = descriptor(d.descriptor);
    let det = DetectorConfig {
        max_keypoints: d.keypoints,
        ..DetectorConfig::default()
    };
    let described = detect_and_describe(&to_grayscale(&img), &det, kind);
    let set = FeatureSet {
        width: img.width() as u32,
        height: img.height() as u32,
        kind,
        keypoints: described.keypoints,
        descriptors: described.descriptors,
    };
    let mut w = create(output)?;
    set.write_to(&mut w).map_err(|e| io_err(output, e))?;
    w.flush().map_err(|e| io_err(output, e))?;
    log::info!("{} keypoints", set.keypoints.len());
    Ok(())
}

fn read_features(path: &Path) -> Result<FeatureSet> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    FeatureSet::read_from(BufReader::new(f)).map_err(|e| io_err(path, e))
}

#[allow(clippy::too_many_arguments)]
fn cmd_match(
    query: &Path,
    train: &Path,
    output: &Path,
    filter: FilterArg,
    robust: &RobustArgs,
    homography: Option<&Path>,
    debug: Option<&Path>,
    images: Option<Vec<std::path::PathBuf>>,
) -> Result<()> {
    let params = ransac(robust)?;
    if homography.is_some() && filter != FilterArg::Ransac {
        return Err(CliError::Usage("--homography needs --filter ransac".into()));
    }
    if debug.is_some() && images.is_none() {
        return Err(CliError::Usage("--debug-matches needs --images QUERY_IMAGE TRAIN_IMAGE".into()));
    }
    let a = read_features(query)?;
    let b = read_features(train)?;
    let raw = match_bruteforce(&a.descriptors, &b.descriptors).map_err(|e| CliError::Pipeline(e.to_string()))?;
    let size = |s: &FeatureSet| (s.width as usize, s.height as usize);
    let (matches, h) = match filter {
        FilterArg::None => (raw, None),
        FilterArg::Gms => {
            let out = filter_gms(&raw, &a.keypoints, &b.keypoints, size(&a), size(&b), &GmsParams::default())
                .map_err(|e| CliError::Pipeline(e.to_string()))?;
            if out.degenerate {
                log::warn!("all matches fall in one grid cell; GMS passed them through unfiltered");
            }
            (out.matches, None)
        }
        FilterArg::Ransac => {
            let out = filter_ransac_homography(&raw, &a.keypoints, &b.keypoints, &params)
                .map_err(|e| CliError::Pipeline(e.to_string()))?;
            (out.matches, Some(out.homography))
        }
    };
    let mut w = create(output)?;
    matching::csv::write_matches(&mut w, &matches)
        .and_then(|_| w.flush())
        .map_err(|e| io_err(output, e))?;
    if let (Some(path), Some(h)) = (homography, h) {
        let mut w = create(path)?;
        write!(w, "{h}").and_then(|_| w.flush()).map_err(|e| io_err(path, e))?;
    }
    if let (Some(dir), Some(imgs)) = (debug, images) {
        let ia = load(&imgs[0])?;
        let ib = load(&imgs[1])?;
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        save(&dir.join("matches.png"), &draw_matches(&ia, &ib, &a.keypoints, &b.keypoints, &matches))?;
    }
    Ok(())
}

fn cmd_stitch(images: &[ImageU8], cfg: &StitchConfig, output: &Path, debug_matches: Option<&Path>, debug_dir: Option<&Path>) -> Result<()> {
    let pano = match stitch(images, cfg) {
        Ok(p) => p,
        Err(StitchError::NoConnectedComponent { pairs }) => {
            for p in &pairs {
                eprintln!(
                    "pair {}-{}: {} matches, {} after GMS, {} inliers",
                    p.a, p.b, p.raw_matches, p.gms_matches, p.inliers
                );
            }
            return Err(CliError::Pipeline(StitchError::NoConnectedComponent { pairs }.to_string()));
        }
        Err(StitchError::Undistort(e)) => return Err(CliError::Usage(e.to_string())),
        Err(e) => return Err(CliError::Pipeline(e.to_string())),
    };
    if !pano.dropped.is_empty() {
        eprintln!("warning: images {:?} did not connect and were left out", pano.dropped);
    }
    save(output, &pano.image)?;
    if let Some(dir) = debug_matches {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        for p in &pano.graph.pairs {
            let (fa, fb) = (&pano.features[p.a], &pano.features[p.b]);
            let img = draw_matches(&images[p.a], &images[p.b], &fa.keypoints, &fb.keypoints, &p.survivors);
            save(&dir.join(format!("pair_{}_{}.png", p.a, p.b)), &img)?;
        }
    }
    if let Some(dir) = debug_dir {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let (w, h) = (pano.seams.width, pano.seams.height);
        for (k, &img) in pano.alignment.members.iter().enumerate() {
            let mask: Vec<u8> = pano.seams.mask_of(k).iter().map(|&v| v * 255).collect();
            let m = ImageU8::new(w, h, 1, mask).expect("canvas size");
            save(&dir.join(format!("seam_{img}.pgm")), &m)?;
        }
        let gains: Vec<serde_json::Value> = pano
            .alignment
            .members
            .iter()
            .zip(&pano.gains.gains)
            .enumerate()
            .map(|(k, (&img, &g))| {
                serde_json::json!({ "image": img, "gain": g, "clamped": pano.gains.clamped.contains(&k) })
            })
            .collect();
        write_json(&dir.join("gains.json"), &gains)?;
        write_json(&dir.join("pairs.json"), &pano.graph.pairs)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(kind: SynthKind, dir: &Path, seed: u64, width: usize, height: usize, count: usize, overlap: f64, ext: &str) -> Result<()> {
    if !matches!(ext, "ppm" | "pgm" | "png") {
        return Err(CliError::Usage(format!("--ext must be ppm, pgm or png, got {ext:?}")));
    }
    if width < 64 || height < 64 {
        return Err(CliError::Usage("--width and --height must be at least 64".into()));
    }
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let gray = |img: ImageU8| if ext == "pgm" { img.to_gray_u8() } else { img };
    match kind {
        SynthKind::Sequence => {
            let (mut seq, _) = synthetic_sequence(&format!("synthetic-{seed}"), seed, width, height);
            if ext == "pgm" {
                seq.base = seq.base.to_gray_u8();
                seq.deformed = seq.deformed.into_iter().map(|i| i.to_gray_u8()).collect();
            }
            seq.save(dir, ext).map_err(|e| io_err(dir, e))
        }
        SynthKind::Crops => {
            if count == 0 || !(0.0..1.0).contains(&overlap) {
                return Err(CliError::Usage("--count must be >= 1 and --overlap in [0, 1)".into()));
            }
            let set = overlapping_crops(width, height, count, overlap, seed);
            save(&dir.join(format!("source.{ext}")), &gray(set.source.clone()))?;
            for (k, c) in set.crops.into_iter().enumerate() {
                save(&dir.join(format!("crop_{k}.{ext}")), &gray(c))?;
            }
            Ok(())
        }
        SynthKind::Views => {
            let views = rotated_views(width, height, 0.4 * width as f64, 15.0, 1.2, seed);
            for (k, v) in views.into_iter().enumerate() {
                save(&dir.join(format!("view_{k}.{ext}")), &gray(v))?;
            }
            Ok(())
        }
    }
}
