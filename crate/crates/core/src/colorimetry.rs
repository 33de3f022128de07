//! sRGB to CIELAB conversion (D65, 2 degree observer) and the CIEDE2000
//! colour difference.

use alloc::vec::Vec;

use libm::{atan2, cbrt, cos, exp, fabs, pow, sin, sqrt};

use crate::raster::RgbImage;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl Lab {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        Self { l, a, b }
    }
}

/// A CIELAB image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabImage {
    width: usize,
    height: usize,
    pixels: Vec<Lab>,
}

impl LabImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Lab>) -> Result<Self> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::InvalidRaster("Lab image dimensions do not match pixel count"));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[Lab] {
        &self.pixels
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [Lab] {
        &mut self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> Lab {
        self.pixels[row * self.width + col]
    }
}

// IEC 61966-2-1 linear sRGB -> XYZ.
const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

// CIE constants in their exact rational form.
const LAB_EPSILON: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

fn srgb_decode(channel: u8) -> f64 {
    let c = f64::from(channel) / 255.0;
    if c <= 0.040_45 {
        c / 12.92
    } else {
        pow((c + 0.055) / 1.055, 2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        cbrt(t)
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

/// Converts one 8-bit sRGB pixel to CIELAB.
///
/// The white point is the image of sRGB white under the conversion matrix,
/// so `(255, 255, 255)` maps to `L = 100, a = b = 0`.
pub fn srgb_to_lab(rgb: [u8; 3]) -> Lab {
    let lin = [srgb_decode(rgb[0]), srgb_decode(rgb[1]), srgb_decode(rgb[2])];
    let mut xyz = [0.0; 3];
    for (out, row) in xyz.iter_mut().zip(&SRGB_TO_XYZ) {
        let white = row[0] + row[1] + row[2];
        *out = (row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2]) / white;
    }
    let (fx, fy, fz) = (lab_f(xyz[0]), lab_f(xyz[1]), lab_f(xyz[2]));
    Lab {
        l: (116.0 * fy - 16.0).clamp(0.0, 100.0),
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

pub fn rgb_to_lab(img: &RgbImage) -> LabImage {
    let pixels = img.pixels().iter().map(|&p| srgb_to_lab(p)).collect();
    LabImage { width: img.width(), height: img.height(), pixels }
}

fn hue_degrees(b: f64, a: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    let h = atan2(b, a).to_degrees();
    if h < 0.0 {
        h + 360.0
    } else {
        h
    }
}

/// CIEDE2000 colour difference with unit weighting factors (kL = kC = kH = 1).
pub fn ciede2000(c1: Lab, c2: Lab) -> f64 {
    const POW25_7: f64 = 6_103_515_625.0; // 25^7

    let chroma1 = sqrt(c1.a * c1.a + c1.b * c1.b);
    let chroma2 = sqrt(c2.a * c2.a + c2.b * c2.b);
    let mean_chroma = 0.5 * (chroma1 + chroma2);
    let mc7 = pow(mean_chroma, 7.0);
    let g = 0.5 * (1.0 - sqrt(mc7 / (mc7 + POW25_7)));

    let a1 = (1.0 + g) * c1.a;
    let a2 = (1.0 + g) * c2.a;
    let cp1 = sqrt(a1 * a1 + c1.b * c1.b);
    let cp2 = sqrt(a2 * a2 + c2.b * c2.b);
    let hp1 = hue_degrees(c1.b, a1);
    let hp2 = hue_degrees(c2.b, a2);

    let delta_l = c2.l - c1.l;
    let delta_c = cp2 - cp1;
    let chroma_product = cp1 * cp2;
    let delta_h_angle = if chroma_product == 0.0 {
        0.0
    } else {
        let d = hp2 - hp1;
        if d > 180.0 {
            d - 360.0
        } else if d < -180.0 {
            d + 360.0
        } else {
            d
        }
    };
    let delta_h = 2.0 * sqrt(chroma_product) * sin((delta_h_angle / 2.0).to_radians());

    let mean_l = 0.5 * (c1.l + c2.l);
    let mean_cp = 0.5 * (cp1 + cp2);
    let mean_hp = if chroma_product == 0.0 {
        hp1 + hp2
    } else if fabs(hp1 - hp2) <= 180.0 {
        0.5 * (hp1 + hp2)
    } else if hp1 + hp2 < 360.0 {
        0.5 * (hp1 + hp2 + 360.0)
    } else {
        0.5 * (hp1 + hp2 - 360.0)
    };

    let t = 1.0 - 0.17 * cos((mean_hp - 30.0).to_radians())
        + 0.24 * cos((2.0 * mean_hp).to_radians())
        + 0.32 * cos((3.0 * mean_hp + 6.0).to_radians())
        - 0.20 * cos((4.0 * mean_hp - 63.0).to_radians());
    let hue_term = (mean_hp - 275.0) / 25.0;
    let delta_theta = 30.0 * exp(-hue_term * hue_term);
    let mcp7 = pow(mean_cp, 7.0);
    let rc = 2.0 * sqrt(mcp7 / (mcp7 + POW25_7));
    let l50 = (mean_l - 50.0) * (mean_l - 50.0);
    let sl = 1.0 + 0.015 * l50 / sqrt(20.0 + l50);
    let sc = 1.0 + 0.045 * mean_cp;
    let sh = 1.0 + 0.015 * mean_cp * t;
    let rt = -sin((2.0 * delta_theta).to_radians()) * rc;

    let tl = delta_l / sl;
    let tc = delta_c / sc;
    let th = delta_h / sh;
    sqrt((tl * tl + tc * tc + th * th + rt * tc * th).max(0.0))
}

/// [`ciede2000`] clamped to `[0, 100]`, the range the camouflage mapping
/// expects.
pub fn ciede2000_clamped(c1: Lab, c2: Lab) -> f64 {
    ciede2000(c1, c2).clamp(0.0, 100.0)
}

/// Published CIEDE2000 verification pairs: `(Lab1, Lab2, reference dE00)`.
pub const REFERENCE_PAIRS: [(Lab, Lab, f64); 34] = [
    (Lab::new(50.0, 2.6772, -79.7751), Lab::new(50.0, 0.0, -82.7485), 2.0425),
    (Lab::new(50.0, 3.1571, -77.2803), Lab::new(50.0, 0.0, -82.7485), 2.8615),
    (Lab::new(50.0, 2.8361, -74.0200), Lab::new(50.0, 0.0, -82.7485), 3.4412),
    (Lab::new(50.0, -1.3802, -84.2814), Lab::new(50.0, 0.0, -82.7485), 1.0000),
    (Lab::new(50.0, -1.1848, -84.8006), Lab::new(50.0, 0.0, -82.7485), 1.0000),
    (Lab::new(50.0, -0.9009, -85.5211), Lab::new(50.0, 0.0, -82.7485), 1.0000),
    (Lab::new(50.0, 0.0, 0.0), Lab::new(50.0, -1.0, 2.0), 2.3669),
    (Lab::new(50.0, -1.0, 2.0), Lab::new(50.0, 0.0, 0.0), 2.3669),
    (Lab::new(50.0, 2.4900, -0.0010), Lab::new(50.0, -2.4900, 0.0009), 7.1792),
    (Lab::new(50.0, 2.4900, -0.0010), Lab::new(50.0, -2.4900, 0.0010), 7.1792),
    (Lab::new(50.0, 2.4900, -0.0010), Lab::new(50.0, -2.4900, 0.0011), 7.2195),
    (Lab::new(50.0, 2.4900, -0.0010), Lab::new(50.0, -2.4900, 0.0012), 7.2195),
    (Lab::new(50.0, -0.0010, 2.4900), Lab::new(50.0, 0.0009, -2.4900), 4.8045),
    (Lab::new(50.0, -0.0010, 2.4900), Lab::new(50.0, 0.0010, -2.4900), 4.8045),
    (Lab::new(50.0, -0.0010, 2.4900), Lab::new(50.0, 0.0011, -2.4900), 4.7461),
    (Lab::new(50.0, 2.5000, 0.0000), Lab::new(50.0, 0.0000, -2.5000), 4.3065),
    (Lab::new(50.0, 2.5000, 0.0000), Lab::new(73.0, 25.0000, -18.0000), 27.1492),
    (Lab::new(50.0, 2.5000, 0.0000), Lab::new(61.0, -5.0000, 29.0000), 22.8977),
    (Lab::new(50.0, 2.5000, 0.0000), Lab::new(56.0, -27.0000, -3.0000), 31.9030),
    (Lab::new(50.0, 2.5000, 0.0000), Lab::new(58.0, 24.0000, 15.0000), 19.4535),
    (Lab::new(50.0, 2.5000, 0.0000), Lab::new(50.0, 3.1736, 0.5854), 1.0000),
    (Lab::new(50.0, 2.5000, 0.0000), Lab::new(50.0, 3.2972, 0.0000), 1.0000),
    (Lab::new(50.0, 2.5000, 0.0000), Lab::new(50.0, 1.8634, 0.5757), 1.0000),
    (Lab::new(50.0, 2.5000, 0.0000), Lab::new(50.0, 3.2592, 0.3350), 1.0000),
    (Lab::new(60.2574, -34.0099, 36.2677), Lab::new(60.4626, -34.1751, 39.4387), 1.2644),
    (Lab::new(63.0109, -31.0961, -5.8663), Lab::new(62.8187, -29.7946, -4.0864), 1.2630),
    (Lab::new(61.2901, 3.7196, -5.3901), Lab::new(61.4292, 2.2480, -4.9620), 1.8731),
    (Lab::new(35.0831, -44.1164, 3.7933), Lab::new(35.0232, -40.0716, 1.5901), 1.8645),
    (Lab::new(22.7233, 20.0904, -46.6940), Lab::new(23.0331, 14.9730, -42.5619), 2.0373),
    (Lab::new(36.4612, 47.8580, 18.3852), Lab::new(36.2715, 50.5065, 21.2231), 1.4146),
    (Lab::new(90.8027, -2.0831, 1.4410), Lab::new(91.1528, -1.6435, 0.0447), 1.4441),
    (Lab::new(90.9257, -0.5406, -0.9208), Lab::new(88.6381, -0.8985, -0.7239), 1.5381),
    (Lab::new(6.7747, -0.2908, -2.4247), Lab::new(5.8714, -0.0985, -2.2286), 0.6377),
    (Lab::new(2.0776, 0.0795, -1.1350), Lab::new(0.9033, -0.0636, -0.5514), 0.9082),
];
