//! Image loading and map export.

use std::path::Path;

use ctxmeasure_core::camo::CamoMap;
use ctxmeasure_core::{BinaryMask, GrayMap, RgbImage};
use image::{DynamicImage, ImageBuffer, ImageReader, Luma, Rgb};

use crate::colormap;
use crate::error::{CliError, Result};

fn open(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path).map_err(|e| CliError::io(path, e))?;
    let reader = reader.with_guessed_format().map_err(|e| CliError::io(path, e))?;
    reader.decode().map_err(|source| CliError::Decode { path: path.to_path_buf(), source })
}

fn is_wide(img: &DynamicImage) -> bool {
    img.color().bytes_per_pixel() / img.color().channel_count() > 1
}

/// Gray map scaled by the largest representable value; colour images are
/// reduced to luminance first.
pub fn load_gray(path: &Path) -> Result<GrayMap> {
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values = if is_wide(&img) {
        img.to_luma16().into_raw().into_iter().map(|v| f64::from(v) / 65535.0).collect()
    } else {
        img.to_luma8().into_raw().into_iter().map(|v| f64::from(v) / 255.0).collect()
    };
    Ok(GrayMap::new(w, h, values)?)
}

/// Foreground wherever the scaled value is at least one half.
pub fn load_binary(path: &Path) -> Result<BinaryMask> {
    let gray = load_gray(path)?;
    let bits = gray.values().iter().map(|&v| v >= 0.5).collect();
    Ok(BinaryMask::new(gray.width(), gray.height(), bits)?)
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = open(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(RgbImage::from_interleaved(w, h, img.as_raw())?)
}

fn save<P, C>(buf: &ImageBuffer<P, C>, path: &Path) -> Result<()>
where
    P: image::PixelWithColorType,
    [P::Subpixel]: image::EncodableLayout,
    C: std::ops::Deref<Target = [P::Subpixel]>,
{
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| CliError::Decode { path: path.to_path_buf(), source })
}

/// `round(D * 65535)` as a 16-bit grayscale PNG.
pub fn write_degree_png(map: &CamoMap, path: &Path) -> Result<()> {
    let (w, h) = (map.width() as u32, map.height() as u32);
    let raw: Vec<u16> = map.values().iter().map(|&d| (d * 65535.0).round() as u16).collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(w, h, raw).expect("buffer matches frame");
    save(&buf, path)
}

/// Colour preview: object pixels through the colormap, the rest as a
/// dimmed gray copy of the image.
pub fn write_degree_preview(map: &CamoMap, object: &BinaryMask, image: &RgbImage, path: &Path) -> Result<()> {
    let (w, h) = (map.width() as u32, map.height() as u32);
    let mut raw = Vec::with_capacity(map.values().len() * 3);
    for (i, &d) in map.values().iter().enumerate() {
        if object.values()[i] {
            raw.extend_from_slice(&colormap::ramp(d));
        } else {
            let [r, g, b] = image.pixels()[i];
            let luma = (0.2126 * f64::from(r) + 0.7152 * f64::from(g) + 0.0722 * f64::from(b)) * 0.4;
            let v = luma.round() as u8;
            raw.extend_from_slice(&[v, v, v]);
        }
    }
    let buf: ImageBuffer<Rgb<u8>, Vec<u8>> = ImageBuffer::from_raw(w, h, raw).expect("buffer matches frame");
    save(&buf, path)
}

pub fn write_gray8(map: &GrayMap, path: &Path) -> Result<()> {
    let raw: Vec<u8> = map.values().iter().map(|&v| (v * 255.0).round() as u8).collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(map.width() as u32, map.height() as u32, raw).expect("buffer matches frame");
    save(&buf, path)
}

pub fn write_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    write_gray8(&GrayMap::from(mask), path)
}

pub fn write_rgb(img: &RgbImage, path: &Path) -> Result<()> {
    let raw: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    let buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
        ImageBuffer::from_raw(img.width() as u32, img.height() as u32, raw).expect("buffer matches frame");
    save(&buf, path)
}
