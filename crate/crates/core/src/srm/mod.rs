//! Statistical Region Merging.
//!
//! Adjacent pixel pairs (4-connectivity) are ordered by absolute gray
//! difference with a 256-bucket counting sort, then replayed in order: a pair
//! whose endpoints lie in different regions merges them when the regions'
//! mean difference is within the statistical bound
//!
//! ```text
//! b(R) = g * sqrt( (min(g, |R|) * ln(|R| + 1) + ln(1/delta)) / (2 * Q * |R|) )
//! ```
//!
//! combined over the two regions either as a plain sum (the default) or in
//! quadrature.

mod union_find;

pub use union_find::UnionFind;

use std::str::FromStr;

use crate::frame::GrayFrame;
use crate::preprocess::QuantizedFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundCombination {
    /// `b(R) + b(R')`
    #[default]
    Sum,
    /// `sqrt(b(R)^2 + b(R')^2)`
    Quadrature,
}

impl FromStr for BoundCombination {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(BoundCombination::Sum),
            "quadrature" => Ok(BoundCombination::Quadrature),
            other => Err(format!("unknown SRM bound `{other}` (sum|quadrature)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrmParams {
    /// Granularity Q; larger values give finer segmentations.
    pub q: f64,
    /// Number of gray levels.
    pub g: f64,
    /// Confidence δ; `None` means `1 / (6 |I|^2)`.
    pub delta: Option<f64>,
    pub combination: BoundCombination,
}

impl Default for SrmParams {
    fn default() -> Self {
        SrmParams {
            q: 32.0,
            g: 256.0,
            delta: None,
            combination: BoundCombination::Sum,
        }
    }
}

impl SrmParams {
    pub fn with_q(q: f64) -> Self {
        SrmParams {
            q,
            ..Default::default()
        }
    }

    /// `ln(1/δ)` for an image of `pixel_count` pixels.
    pub fn log_inv_delta(&self, pixel_count: usize) -> f64 {
        match self.delta {
            Some(d) => -d.ln(),
            None => 6f64.ln() + 2.0 * (pixel_count as f64).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionStats {
    pub size: u32,
    pub mean: f64,
}

/// The merging bound for one image size, with `ln(1/δ)` precomputed.
#[derive(Debug, Clone, Copy)]
pub struct MergeBound {
    g: f64,
    q: f64,
    log_inv_delta: f64,
    combination: BoundCombination,
}

impl MergeBound {
    pub fn new(params: &SrmParams, pixel_count: usize) -> Self {
        MergeBound {
            g: params.g,
            q: params.q,
            log_inv_delta: params.log_inv_delta(pixel_count),
            combination: params.combination,
        }
    }

    pub fn b(&self, size: u32) -> f64 {
        let n = size as f64;
        let complexity = self.g.min(n) * (n + 1.0).ln();
        self.g * ((complexity + self.log_inv_delta) / (2.0 * self.q * n)).sqrt()
    }

    pub fn threshold(&self, a: u32, b: u32) -> f64 {
        let (ba, bb) = (self.b(a), self.b(b));
        match self.combination {
            BoundCombination::Sum => ba + bb,
            BoundCombination::Quadrature => (ba * ba + bb * bb).sqrt(),
        }
    }

    #[inline]
    pub fn accepts(&self, r: RegionStats, r2: RegionStats) -> bool {
        (r2.mean - r.mean).abs() <= self.threshold(r.size, r2.size)
    }
}

/// Gradient used to order adjacent pairs.
#[inline]
pub fn pair_gradient(p: u8, p2: u8) -> u8 {
    p.abs_diff(p2)
}

pub fn merge_predicate(
    r: RegionStats,
    r2: RegionStats,
    params: &SrmParams,
    pixel_count: usize,
) -> bool {
    MergeBound::new(params, pixel_count).accepts(r, r2)
}

/// Adjacent pixel pair; `b` is the right (horizontal) or lower (vertical)
/// neighbour of `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelPair {
    pub a: u32,
    pub b: u32,
}

/// All 4-connected pairs in construction order (row-major, horizontal before
/// vertical at each pixel), stably counting-sorted by gradient.
pub fn sorted_pairs(width: usize, height: usize, values: &[u8]) -> Vec<PixelPair> {
    assert_eq!(values.len(), width * height);
    let n_pairs = (width - 1) * height + width * (height - 1);
    let mut counts = [0usize; 257];
    for_each_pair(width, height, |a, b| {
        counts[pair_gradient(values[a], values[b]) as usize + 1] += 1;
    });
    for i in 1..257 {
        counts[i] += counts[i - 1];
    }
    let mut out = vec![PixelPair { a: 0, b: 0 }; n_pairs];
    for_each_pair(width, height, |a, b| {
        let slot = &mut counts[pair_gradient(values[a], values[b]) as usize];
        out[*slot] = PixelPair {
            a: a as u32,
            b: b as u32,
        };
        *slot += 1;
    });
    out
}

#[inline]
fn for_each_pair(width: usize, height: usize, mut f: impl FnMut(usize, usize)) {
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if x + 1 < width {
                f(i, i + 1);
            }
            if y + 1 < height {
                f(i, i + width);
            }
        }
    }
}

/// Partition of a frame into labeled regions.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    sizes: Vec<u32>,
    means: Vec<f64>,
}

impl RegionMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn region_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn region_sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn region_means(&self) -> &[f64] {
        &self.means
    }

    #[inline]
    pub fn label(&self, pixel: usize) -> u32 {
        self.labels[pixel]
    }

    #[inline]
    pub fn region_size(&self, region: u32) -> u32 {
        self.sizes[region as usize]
    }

    /// Each pixel painted with its region's rounded mean.
    pub fn to_mean_frame(&self) -> GrayFrame {
        let paint: Vec<u8> = self
            .means
            .iter()
            .map(|m| m.round().clamp(0.0, 255.0) as u8)
            .collect();
        GrayFrame::new(
            self.width,
            self.height,
            self.labels.iter().map(|&l| paint[l as usize]).collect(),
        )
        .expect("region map dimensions are valid")
    }
}

/// Segments a quantized frame; gray statistics use each bucket's
/// representative level so that `g = 256` keeps its meaning.
pub fn segment(frame: &QuantizedFrame, params: &SrmParams) -> RegionMap {
    segment_values(
        frame.width(),
        frame.height(),
        &frame.to_gray_values(),
        params,
    )
}

pub fn segment_gray(frame: &GrayFrame, params: &SrmParams) -> RegionMap {
    segment_values(frame.width(), frame.height(), frame.luma(), params)
}

pub fn segment_values(width: usize, height: usize, values: &[u8], params: &SrmParams) -> RegionMap {
    let n = width * height;
    assert!(n > 0, "cannot segment an empty frame");
    assert_eq!(values.len(), n);
    let bound = MergeBound::new(params, n);

    let mut uf = UnionFind::new(n);
    // gray sums per root; exact, so means are reproducible
    let mut sums: Vec<u64> = values.iter().map(|&v| v as u64).collect();

    for pair in sorted_pairs(width, height, values) {
        let ra = uf.find(pair.a);
        let rb = uf.find(pair.b);
        if ra == rb {
            continue;
        }
        let stats = |root: u32| {
            let size = uf.root_size(root);
            RegionStats {
                size,
                mean: sums[root as usize] as f64 / size as f64,
            }
        };
        if bound.accepts(stats(ra), stats(rb)) {
            let total = sums[ra as usize] + sums[rb as usize];
            let root = uf.union_roots(ra, rb);
            sums[root as usize] = total;
        }
    }

    // canonical ids by first touch in row-major order
    let mut id_of_root = vec![u32::MAX; n];
    let mut labels = Vec::with_capacity(n);
    let mut sizes = Vec::new();
    let mut region_sums = Vec::new();
    for p in 0..n as u32 {
        let root = uf.find(p) as usize;
        if id_of_root[root] == u32::MAX {
            id_of_root[root] = sizes.len() as u32;
            sizes.push(0u32);
            region_sums.push(0u64);
        }
        let id = id_of_root[root];
        labels.push(id);
        sizes[id as usize] += 1;
        region_sums[id as usize] += values[p as usize] as u64;
    }
    let means = sizes
        .iter()
        .zip(&region_sums)
        .map(|(&s, &sum)| sum as f64 / s as f64)
        .collect();

    RegionMap {
        width,
        height,
        labels,
        sizes,
        means,
    }
}
