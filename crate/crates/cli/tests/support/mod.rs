//! Synthetic scenes shared by the integration tests.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use ctxmeasure::io::{write_gray8, write_mask, write_rgb};
use ctxmeasure_core::{BinaryMask, GrayMap, RgbImage};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct Ellipse {
    pub row: f64,
    pub col: f64,
    pub a: f64,
    pub b: f64,
    pub angle: f64,
}

impl Ellipse {
    pub fn disk(row: f64, col: f64, r: f64) -> Self {
        Self { row, col, a: r, b: r, angle: 0.0 }
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        let (dr, dc) = (r as f64 - self.row, c as f64 - self.col);
        let (s, co) = self.angle.sin_cos();
        let u = (dr * co + dc * s) / self.a;
        let v = (-dr * s + dc * co) / self.b;
        u * u + v * v <= 1.0
    }

    pub fn mask(&self, h: usize, w: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |r, c| self.contains(r, c)).unwrap()
    }

    pub fn random(rng: &mut ChaCha8Rng, h: usize, w: usize, radii: std::ops::Range<f64>) -> Self {
        let a = rng.random_range(radii.clone());
        let b = rng.random_range(radii);
        let m = a.max(b) + 1.0;
        Self {
            row: rng.random_range(m..h as f64 - m),
            col: rng.random_range(m..w as f64 - m),
            a,
            b,
            angle: rng.random_range(0.0..std::f64::consts::PI),
        }
    }
}

/// Object and background in two colours with mild per-pixel jitter.
pub fn textured_scene(rng: &mut ChaCha8Rng, gt: &BinaryMask, fg: [u8; 3], bg: [u8; 3]) -> RgbImage {
    RgbImage::from_fn(gt.width(), gt.height(), |r, c| {
        let base = if gt.get(r, c) { fg } else { bg };
        base.map(|v| (i32::from(v) + rng.random_range(-6..=6)).clamp(0, 255) as u8)
    })
    .unwrap()
}

pub fn random_colour(rng: &mut ChaCha8Rng) -> [u8; 3] {
    [rng.random_range(20..236), rng.random_range(20..236), rng.random_range(20..236)]
}

/// A constant-valued prediction on `mask`.
pub fn flat_prediction(mask: &BinaryMask, value: f64) -> GrayMap {
    GrayMap::from_fn(mask.width(), mask.height(), |r, c| if mask.get(r, c) { value } else { 0.0 }).unwrap()
}

/// Flips the first `n` pixels of `order` in `gt`.
pub fn corrupt(gt: &BinaryMask, order: &[usize], n: usize) -> BinaryMask {
    let mut bits = gt.values().to_vec();
    for &i in &order[..n] {
        bits[i] = !bits[i];
    }
    BinaryMask::new(gt.width(), gt.height(), bits).unwrap()
}

/// A manifest record on disk.
pub struct DiskRecord {
    pub id: String,
    pub gt: BinaryMask,
    pub fms: Vec<GrayMap>,
    pub image: Option<RgbImage>,
    pub human_rank: Option<Vec<u32>>,
}

/// Writes images and a manifest under `dir`; returns the manifest path.
pub fn write_corpus(dir: &Path, records: &[DiskRecord]) -> PathBuf {
    let mut lines = Vec::new();
    for rec in records {
        let sub = dir.join(&rec.id);
        fs::create_dir_all(&sub).unwrap();
        write_mask(&rec.gt, &sub.join("gt.png")).unwrap();
        let mut fms = Vec::new();
        for (k, fm) in rec.fms.iter().enumerate() {
            let name = format!("{}/fm{k}.png", rec.id);
            write_gray8(fm, &dir.join(&name)).unwrap();
            fms.push(name);
        }
        let mut obj = serde_json::json!({ "id": rec.id, "gt": format!("{}/gt.png", rec.id), "fms": fms });
        if let Some(img) = &rec.image {
            write_rgb(img, &sub.join("image.png")).unwrap();
            obj["image"] = format!("{}/image.png", rec.id).into();
        }
        if let Some(rank) = &rec.human_rank {
            obj["human_rank"] = serde_json::json!(rank);
        }
        lines.push(obj.to_string());
    }
    let path = dir.join("manifest.jsonl");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}
