//! Blue to red ramp for camouflage previews; warmer means more camouflaged.

const STOPS: [[u8; 3]; 6] = [
    [49, 54, 149],
    [69, 117, 180],
    [171, 217, 233],
    [254, 224, 144],
    [244, 109, 67],
    [165, 0, 38],
];

/// Piecewise-linear colour for `t` in `[0, 1]`.
pub fn ramp(t: f64) -> [u8; 3] {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let pos = t * (STOPS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |k: usize| (f64::from(a[k]) + (f64::from(b[k]) - f64::from(a[k])) * f).round() as u8;
    [mix(0), mix(1), mix(2)]
}
