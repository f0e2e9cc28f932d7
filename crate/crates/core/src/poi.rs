//! Harris interest points and their match-ratio similarity.

use crate::error::{Error, Result};
use crate::frame::GrayFrame;

/// No point is selected closer than this to the frame border.
pub const BORDER_MARGIN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poi {
    pub x: u32,
    pub y: u32,
    /// Normalized Harris response in `[0, 1]`, rounded to 6 decimals.
    pub response: f64,
}

impl Poi {
    fn dist2(&self, other: &Poi) -> f64 {
        let dx = self.x as f64 - other.x as f64;
        let dy = self.y as f64 - other.y as f64;
        dx * dx + dy * dy
    }
}

/// Interest points sorted by descending response.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoiSignature {
    points: Vec<Poi>,
}

impl PoiSignature {
    /// Wraps points, sorting them by descending response (stable).
    pub fn from_points(mut points: Vec<Poi>) -> Self {
        points.sort_by(|a, b| b.response.total_cmp(&a.response));
        PoiSignature { points }
    }

    pub fn points(&self) -> &[Poi] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarrisParams {
    pub k: f64,
    pub sigma: f64,
}

impl Default for HarrisParams {
    fn default() -> Self {
        HarrisParams {
            k: 0.04,
            sigma: 1.0,
        }
    }
}

/// Per-pixel Harris response normalized by its maximum absolute value.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl ResponseMap {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable convolution with clamped borders.
fn smooth(src: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; src.len()];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..width {
            tmp[y * width + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * row[clamp(x as isize + i as isize - r, width)])
                .sum();
        }
    }
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * tmp[clamp(y as isize + i as isize - r, height) * width + x])
                .sum();
        }
    }
    out
}

pub fn harris_response(f: &GrayFrame, params: &HarrisParams) -> Result<ResponseMap> {
    let (w, h) = (f.width(), f.height());
    if w < 3 || h < 3 {
        return Err(Error::InvalidParameter(format!(
            "Harris needs at least a 3x3 frame, got {w}x{h}"
        )));
    }
    if params.sigma.is_nan() || params.sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {}",
            params.sigma
        )));
    }
    let n = w * h;
    let mut ixx = vec![0.0; n];
    let mut iyy = vec![0.0; n];
    let mut ixy = vec![0.0; n];
    for y in 0..h {
        for x in 0..w {
            let (xi, yi) = (x as isize, y as isize);
            let gx = (f.get_clamped(xi + 1, yi) as f64 - f.get_clamped(xi - 1, yi) as f64) / 2.0;
            let gy = (f.get_clamped(xi, yi + 1) as f64 - f.get_clamped(xi, yi - 1) as f64) / 2.0;
            let i = y * w + x;
            ixx[i] = gx * gx;
            iyy[i] = gy * gy;
            ixy[i] = gx * gy;
        }
    }
    let kernel = gaussian_kernel(params.sigma);
    let sxx = smooth(&ixx, w, h, &kernel);
    let syy = smooth(&iyy, w, h, &kernel);
    let sxy = smooth(&ixy, w, h, &kernel);

    let mut values: Vec<f64> = (0..n)
        .map(|i| {
            let det = sxx[i] * syy[i] - sxy[i] * sxy[i];
            let trace = sxx[i] + syy[i];
            det - params.k * trace * trace
        })
        .collect();
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs > 0.0 {
        values.iter_mut().for_each(|v| *v /= max_abs);
    }
    Ok(ResponseMap {
        width: w,
        height: h,
        values,
    })
}

#[inline]
fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Greedy selection of the strongest responses with Euclidean suppression.
pub fn select_pois(map: &ResponseMap, n_poi: usize, nms_radius: u32) -> PoiSignature {
    let (w, h) = (map.width, map.height);
    let mut candidates: Vec<Poi> = Vec::new();
    if w > 2 * BORDER_MARGIN && h > 2 * BORDER_MARGIN {
        for y in BORDER_MARGIN..h - BORDER_MARGIN {
            for x in BORDER_MARGIN..w - BORDER_MARGIN {
                let r = round6(map.get(x, y));
                if r > 0.0 {
                    candidates.push(Poi {
                        x: x as u32,
                        y: y as u32,
                        response: r,
                    });
                }
            }
        }
    }
    // stable: equal responses keep row-major order
    candidates.sort_by(|a, b| b.response.total_cmp(&a.response));

    let r2 = (nms_radius as f64).powi(2);
    let mut selected: Vec<Poi> = Vec::with_capacity(n_poi);
    for c in candidates {
        if selected.len() >= n_poi {
            break;
        }
        if selected.iter().all(|s| s.dist2(&c) > r2) {
            selected.push(c);
        }
    }
    PoiSignature { points: selected }
}

pub fn detect_pois(
    f: &GrayFrame,
    params: &HarrisParams,
    n_poi: usize,
    nms_radius: u32,
) -> Result<PoiSignature> {
    if n_poi == 0 {
        return Err(Error::InvalidParameter("n_poi must be at least 1".into()));
    }
    let map = harris_response(f, params)?;
    Ok(select_pois(&map, n_poi, nms_radius))
}

/// Fraction of the catalogue-side points `a` that find a partner in `b`
/// closer than `thre_dist` pixels with a response difference below
/// `thre_harris`. Each point of `b` is used at most once; among admissible
/// partners the nearest wins.
pub fn poi_similarity(a: &PoiSignature, b: &PoiSignature, thre_dist: f64, thre_harris: f64) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let dist2_limit = thre_dist * thre_dist;
    let mut used = vec![false; b.len()];
    let mut matched = 0usize;
    for pa in &a.points {
        let mut best: Option<(usize, f64)> = None;
        for (j, pb) in b.points.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d2 = pa.dist2(pb);
            if d2 < dist2_limit && (pa.response - pb.response).abs() < thre_harris {
                match best {
                    Some((_, bd)) if bd <= d2 => {}
                    _ => best = Some((j, d2)),
                }
            }
        }
        if let Some((j, _)) = best {
            debug_assert!(!used[j]);
            used[j] = true;
            matched += 1;
        }
    }
    matched as f64 / a.len() as f64
}
