//! Batch drivers. Work fans out over a rayon pool; results are assembled in
//! a fixed order so output does not depend on scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use ctxmeasure_core::camo::{quantify_detailed, CamoMap};
use ctxmeasure_core::metastudy::{
    aggregate, mm1_unit, mm2_plan, mm2_unit, mm3_noisy, mm3_unit, mm4_unit, qualified, MetaResult, MetricScorer,
    Outcome, Protocol, RankedGroup, SamplePair,
};
use ctxmeasure_core::morphology::MorphOp;
use ctxmeasure_core::{Error as CoreError, Metric, RgbImage};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{load_binary, load_gray, load_rgb, write_degree_png, write_degree_preview};
use crate::manifest::Record;
use crate::report::{CamoRow, EvalRow};

pub fn pool(threads: Option<usize>) -> Result<ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

fn needs_image(metrics: &[Metric]) -> bool {
    metrics.iter().any(|m| m.needs_image())
}

fn eval_record(rec: &Record, cfg: &RunConfig) -> Vec<EvalRow> {
    let row = |fm: usize, metric: Metric, res: std::result::Result<f64, String>| EvalRow {
        id: rec.id.clone(),
        fm,
        metric: metric.name().into(),
        score: res.as_ref().ok().copied(),
        error: res.err(),
    };
    let fail_all = |msg: String| -> Vec<EvalRow> {
        (0..rec.fms.len())
            .flat_map(|k| cfg.metrics.iter().map(move |&m| (k, m)))
            .map(|(k, m)| row(k, m, Err(msg.clone())))
            .collect()
    };
    let gt = match load_binary(&rec.gt) {
        Ok(g) => g,
        Err(e) => return fail_all(e.to_string()),
    };
    // the camouflage map depends only on image and truth; share it across maps
    let camo: Option<std::result::Result<CamoMap, String>> = needs_image(&cfg.metrics).then(|| {
        let path = rec.image.as_ref().ok_or_else(|| CoreError::MissingImage.to_string())?;
        let img = load_rgb(path).map_err(|e| e.to_string())?;
        quantify_detailed(&img, &gt, &cfg.suite.camo).map(|q| q.map).map_err(|e| e.to_string())
    });
    let mut rows = Vec::with_capacity(rec.fms.len() * cfg.metrics.len());
    for (k, path) in rec.fms.iter().enumerate() {
        let fm = match load_gray(path) {
            Ok(f) => f,
            Err(e) => {
                rows.extend(cfg.metrics.iter().map(|&m| row(k, m, Err(e.to_string()))));
                continue;
            }
        };
        for &m in &cfg.metrics {
            let res = if m.needs_image() {
                match camo.as_ref().expect("computed when requested") {
                    Ok(d) => cfg.suite.score_with_map(m, &fm, &gt, Some(d)).map_err(|e| e.to_string()),
                    Err(e) => Err(e.clone()),
                }
            } else {
                cfg.suite.score_with_map(m, &fm, &gt, None).map_err(|e| e.to_string())
            };
            rows.push(row(k, m, res));
        }
    }
    rows
}

/// One row per (record, map, metric), sorted by id, map index and the
/// configured metric order. Failures land in the `error` column.
pub fn run_eval(records: &[Record], cfg: &RunConfig) -> Result<Vec<EvalRow>> {
    cfg.validate()?;
    let pool = pool(cfg.threads)?;
    let mut rows: Vec<EvalRow> =
        pool.install(|| records.par_iter().map(|r| eval_record(r, cfg)).collect::<Vec<_>>()).concat();
    let order = |name: &str| cfg.metrics.iter().position(|m| m.name() == name);
    rows.sort_by(|a, b| (&a.id, a.fm, order(&a.metric)).cmp(&(&b.id, b.fm, order(&b.metric))));
    Ok(rows)
}

/// File-name-safe form of a record id.
pub fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

fn camo_record(rec: &Record, cfg: &RunConfig, out_dir: &Path) -> Result<CamoRow> {
    let path = rec.image.as_ref().ok_or(CoreError::MissingImage)?;
    let img = load_rgb(path)?;
    let gt = load_binary(&rec.gt)?;
    let q = quantify_detailed(&img, &gt, &cfg.suite.camo)?;
    let stem = file_stem(&rec.id);
    write_degree_png(&q.map, &out_dir.join(format!("{stem}_camo.png")))?;
    write_degree_preview(&q.map, &gt, &img, &out_dir.join(format!("{stem}_camo_preview.png")))?;
    let object = gt.count();
    let total: f64 = q.map.values().iter().sum();
    Ok(CamoRow {
        id: rec.id.clone(),
        object_pixels: object,
        covered_pixels: q.overpainting.covered().iter().filter(|&&c| c).count(),
        mean_degree: Some(total / object as f64),
        error: None,
    })
}

/// Writes `<id>_camo.png` (16-bit degree) and `<id>_camo_preview.png` per
/// record and returns a summary row for each.
pub fn run_camo_map(records: &[Record], cfg: &RunConfig, out_dir: &Path) -> Result<Vec<CamoRow>> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let pool = pool(cfg.threads)?;
    let mut rows: Vec<CamoRow> = pool.install(|| {
        records
            .par_iter()
            .map(|rec| {
                camo_record(rec, cfg, out_dir).unwrap_or_else(|e| CamoRow {
                    id: rec.id.clone(),
                    object_pixels: 0,
                    covered_pixels: 0,
                    mean_degree: None,
                    error: Some(e.to_string()),
                })
            })
            .collect()
    });
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(rows)
}

fn load_image_if(rec: &Record, wanted: bool) -> Result<Option<RgbImage>> {
    match (&rec.image, wanted) {
        (Some(p), true) => Ok(Some(load_rgb(p)?)),
        _ => Ok(None),
    }
}

fn sorted(records: &[Record]) -> Vec<&Record> {
    let mut v: Vec<&Record> = records.iter().collect();
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}

/// Every (record, map) as a pair with id `<record>#<index>`.
pub fn load_pairs(records: &[Record], with_images: bool) -> Result<Vec<SamplePair>> {
    let sorted = sorted(records);
    let per_record: Vec<Vec<SamplePair>> = sorted
        .par_iter()
        .map(|rec| {
            let gt = load_binary(&rec.gt)?;
            let image = load_image_if(rec, with_images)?;
            rec.fms
                .iter()
                .enumerate()
                .map(|(k, p)| Ok(SamplePair::new(format!("{}#{k}", rec.id), load_gray(p)?, gt.clone(), image.clone())?))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_record.concat())
}

/// Records carrying a human ranking, as ranked groups.
pub fn load_groups(records: &[Record], with_images: bool) -> Result<Vec<RankedGroup>> {
    sorted(records)
        .par_iter()
        .filter(|rec| rec.human_rank.is_some())
        .map(|rec| {
            let gt = load_binary(&rec.gt)?;
            let fms = rec.fms.iter().map(|p| load_gray(p)).collect::<Result<Vec<_>>>()?;
            let rank = rec.human_rank.clone().expect("filtered");
            Ok(RankedGroup::new(rec.id.clone(), gt, load_image_if(rec, with_images)?, fms, rank)?)
        })
        .collect()
}

fn collect_units<F>(n: usize, f: F) -> Result<Vec<Outcome>>
where
    F: Fn(usize) -> ctxmeasure_core::Result<Outcome> + Sync,
{
    (0..n).into_par_iter().map(|i| f(i).map_err(CliError::from)).collect()
}

/// One [`MetaResult`] per configured metric.
pub fn run_meta(records: &[Record], cfg: &RunConfig, protocol: Protocol) -> Result<Vec<MetaResult>> {
    cfg.validate()?;
    let seed = match (protocol.is_seeded(), cfg.seed) {
        (true, None) => return Err(CliError::Config(format!("--seed is required for {protocol}"))),
        (_, s) => s.unwrap_or(0),
    };
    let images = needs_image(&cfg.metrics);
    let pool = pool(cfg.threads)?;
    pool.install(|| {
        let scorer = |m: Metric| MetricScorer { suite: &cfg.suite, metric: m };
        let mut results = Vec::with_capacity(cfg.metrics.len());
        match protocol {
            Protocol::Mm1 => {
                let groups = load_groups(records, images)?;
                if groups.is_empty() {
                    return Err(CliError::Config("mm1 needs records with human_rank".into()));
                }
                for &m in &cfg.metrics {
                    let s = scorer(m);
                    let outcomes = collect_units(groups.len(), |i| mm1_unit(&groups[i], &s))?;
                    results.push(aggregate(m.name().into(), protocol, &outcomes, seed));
                }
            }
            Protocol::Mm2 => {
                let pairs = load_pairs(records, images)?;
                let plan = mm2_plan(&pairs, seed)?;
                for &m in &cfg.metrics {
                    let s = scorer(m);
                    let outcomes = collect_units(plan.qualified.len(), |i| mm2_unit(&pairs, &plan, i, &s))?;
                    results.push(aggregate(m.name().into(), protocol, &outcomes, seed));
                }
            }
            Protocol::Mm3 => {
                let pairs = load_pairs(records, images)?;
                let keep = qualified(&pairs)?;
                let noisy = keep
                    .par_iter()
                    .map(|&i| mm3_noisy(&pairs[i], i, seed, cfg.candidates).map_err(CliError::from))
                    .collect::<Result<Vec<_>>>()?;
                for &m in &cfg.metrics {
                    let s = scorer(m);
                    let outcomes = collect_units(keep.len(), |k| mm3_unit(&pairs[keep[k]], &noisy[k], &s))?;
                    results.push(aggregate(m.name().into(), protocol, &outcomes, seed));
                }
            }
            Protocol::Mm4Erode | Protocol::Mm4Dilate => {
                let op = if protocol == Protocol::Mm4Erode { MorphOp::Erode } else { MorphOp::Dilate };
                let pairs = load_pairs(records, images)?;
                for &m in &cfg.metrics {
                    let s = scorer(m);
                    let outcomes = collect_units(pairs.len(), |i| mm4_unit(&pairs[i], op, &s))?;
                    results.push(aggregate(m.name().into(), protocol, &outcomes, seed));
                }
            }
        }
        Ok(results)
    })
}

/// Output path helper: `None` or `-` means stdout.
pub fn output_target(path: Option<&PathBuf>) -> Option<&Path> {
    path.map(PathBuf::as_path).filter(|p| p.as_os_str() != "-")
}
