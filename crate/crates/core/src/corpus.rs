//! Seeded synthetic corpus: jingles made of moving gray rectangles, planted
//! into streams of unrelated filler scenes, with optional degradations.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frame::GrayFrame;
use crate::io::{write_pgm_sequence, write_y4m, Chroma};
use crate::preprocess::box_blur_3x3;
use crate::truth::{write_truth_csv, TruthRecord};

const MIN_GAP: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub jingles: usize,
    pub streams: usize,
    pub frames_per_stream: usize,
    /// Occurrences of each jingle across all streams.
    pub plants_per_jingle: usize,
    pub jingle_frames: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    /// Uniform integer noise in `[-noise_amp, noise_amp]`, added after blur.
    pub noise_amp: u8,
    pub blur: bool,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            jingles: 10,
            streams: 5,
            frames_per_stream: 2000,
            plants_per_jingle: 2,
            jingle_frames: 60,
            width: 64,
            height: 48,
            seed: 7,
            noise_amp: 0,
            blur: false,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.jingles == 0 || self.streams == 0 {
            return bad("need at least one jingle and one stream".into());
        }
        if self.width < 16 || self.height < 16 {
            return bad(format!(
                "frames must be at least 16x16, got {}x{}",
                self.width, self.height
            ));
        }
        if self.jingle_frames == 0 {
            return bad("jingle_frames must be positive".into());
        }
        let total = self.jingles * self.plants_per_jingle;
        let per_stream = total.div_ceil(self.streams);
        let need = per_stream * (self.jingle_frames + MIN_GAP) + MIN_GAP;
        if need > self.frames_per_stream {
            return bad(format!(
                "{per_stream} plants per stream need {need} frames, streams have {}",
                self.frames_per_stream
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jingle {
    pub id: String,
    pub frames: Vec<GrayFrame>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plant {
    pub stream: usize,
    pub offset: usize,
    pub jingle: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub spec: CorpusSpec,
    /// Clean jingle frames, as used to build a catalogue.
    pub jingles: Vec<Jingle>,
    /// Streams with degradations applied.
    pub streams: Vec<Vec<GrayFrame>>,
    /// Sorted by `(stream, offset)`.
    pub plants: Vec<Plant>,
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x: i32,
    y: i32,
    w: i32,
    h: i32,
    gray: u8,
    /// Displacement per `period` frames.
    dx: i32,
    dy: i32,
    period: i32,
}

impl Rect {
    fn at(&self, t: i32) -> (i32, i32) {
        (
            self.x + self.dx * t / self.period,
            self.y + self.dy * t / self.period,
        )
    }
}

fn paint(
    luma: &mut [u8],
    (width, height): (usize, usize),
    (x, y, w, h): (i32, i32, i32, i32),
    gray: u8,
) {
    let x0 = x.clamp(0, width as i32) as usize;
    let x1 = (x + w).clamp(0, width as i32) as usize;
    let y0 = y.clamp(0, height as i32) as usize;
    let y1 = (y + h).clamp(0, height as i32) as usize;
    for row in y0..y1 {
        luma[row * width + x0..row * width + x1].fill(gray);
    }
}

/// Distinct gray levels at bucket centres, at least 32 apart.
fn gray_palette(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    let mut rungs: Vec<u32> = (0..7).collect();
    rungs.shuffle(rng);
    rungs
        .into_iter()
        .take(n)
        .map(|k| (2 + 40 * k + 4 * rng.gen_range(0..=2u32)) as u8)
        .collect()
}

/// Picks a start coordinate and direction so the whole motion stays inside
/// `[0, limit - size]`.
fn motion_axis(rng: &mut ChaCha8Rng, size: i32, limit: i32, travel: i32) -> (i32, i32) {
    let room = limit - size;
    let dir = if room >= travel {
        *[-1, 0, 1].choose(rng).expect("non-empty")
    } else {
        0
    };
    let start = match dir {
        1 => rng.gen_range(0..=room - travel),
        -1 => rng.gen_range(travel..=room),
        _ => rng.gen_range(0..=room),
    };
    (start, dir)
}

fn make_jingle(rng: &mut ChaCha8Rng, spec: &CorpusSpec, id: String) -> Jingle {
    let (w, h) = (spec.width as i32, spec.height as i32);
    let n_shapes = rng.gen_range(3..=5);
    let palette = gray_palette(rng, n_shapes + 1);
    let background = palette[0];
    let period = 3;
    let travel = (spec.jingle_frames as i32 - 1) / period;
    let mut shapes = Vec::with_capacity(n_shapes);
    for &gray in &palette[1..] {
        let rw = rng.gen_range(6..=(w / 3).max(7));
        let rh = rng.gen_range(6..=(h / 3).max(7));
        let (x, dx) = motion_axis(rng, rw, w, travel);
        let (y, dy) = motion_axis(rng, rh, h, travel);
        shapes.push(Rect {
            x,
            y,
            w: rw,
            h: rh,
            gray,
            dx,
            dy,
            period,
        });
    }
    let frames = (0..spec.jingle_frames)
        .map(|t| {
            let mut luma = vec![background; spec.width * spec.height];
            for s in &shapes {
                let (x, y) = s.at(t as i32);
                paint(
                    &mut luma,
                    (spec.width, spec.height),
                    (x, y, s.w, s.h),
                    s.gray,
                );
            }
            GrayFrame::new(spec.width, spec.height, luma)
                .expect("sized buffer")
                .with_index(t)
        })
        .collect();
    Jingle { id, frames }
}

/// Filler: scenes of random duration with drifting blocks over a textured
/// background.
fn fill_stream(rng: &mut ChaCha8Rng, spec: &CorpusSpec) -> Vec<GrayFrame> {
    let (w, h) = (spec.width as i32, spec.height as i32);
    let mut frames = Vec::with_capacity(spec.frames_per_stream);
    while frames.len() < spec.frames_per_stream {
        let len = rng.gen_range(40..=120);
        let background = rng.gen::<u8>();
        let texture = rng.gen_range(0..=12i32);
        let shapes: Vec<Rect> = (0..rng.gen_range(1..=6))
            .map(|_| Rect {
                x: rng.gen_range(-8..w),
                y: rng.gen_range(-8..h),
                w: rng.gen_range(4..=w / 2),
                h: rng.gen_range(4..=h / 2),
                gray: rng.gen(),
                dx: rng.gen_range(-2..=2),
                dy: rng.gen_range(-2..=2),
                period: rng.gen_range(1..=4),
            })
            .collect();
        for t in 0..len {
            if frames.len() == spec.frames_per_stream {
                break;
            }
            let mut luma: Vec<u8> = (0..spec.width * spec.height)
                .map(|_| {
                    (background as i32 + rng.gen_range(-texture..=texture)).clamp(0, 255) as u8
                })
                .collect();
            for s in &shapes {
                let (x, y) = s.at(t);
                paint(
                    &mut luma,
                    (spec.width, spec.height),
                    (x, y, s.w, s.h),
                    s.gray,
                );
            }
            let index = frames.len();
            frames.push(
                GrayFrame::new(spec.width, spec.height, luma)
                    .expect("sized buffer")
                    .with_index(index),
            );
        }
    }
    frames
}

/// Non-overlapping offsets for `count` plants of `len` frames, each
/// separated from its neighbours and the stream ends by at least the gap.
fn plant_offsets(rng: &mut ChaCha8Rng, count: usize, len: usize, total: usize) -> Vec<usize> {
    let slot = len + MIN_GAP;
    let slack = total - count * slot - MIN_GAP;
    let mut cuts: Vec<usize> = (0..count).map(|_| rng.gen_range(0..=slack)).collect();
    cuts.sort_unstable();
    cuts.iter()
        .enumerate()
        .map(|(i, c)| MIN_GAP + c + i * slot)
        .collect()
}

/// Blur (if enabled) and then additive noise.
pub fn degrade(f: &GrayFrame, noise_amp: u8, blur: bool, rng: &mut impl Rng) -> GrayFrame {
    let mut out = if blur { box_blur_3x3(f) } else { f.clone() };
    if noise_amp > 0 {
        let a = noise_amp as i16;
        for v in out.luma_mut() {
            *v = (*v as i16 + rng.gen_range(-a..=a)).clamp(0, 255) as u8;
        }
    }
    out
}

pub fn jingle_id(i: usize) -> String {
    format!("J{i:02}")
}

/// Builds the corpus. Layout depends only on the seed; degradations use a
/// separate random stream, so clean and degraded corpora share plants.
pub fn generate(spec: &CorpusSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let jingles: Vec<Jingle> = (0..spec.jingles)
        .map(|i| make_jingle(&mut rng, spec, jingle_id(i)))
        .collect();

    let mut order: Vec<usize> = (0..spec.jingles)
        .flat_map(|j| std::iter::repeat_n(j, spec.plants_per_jingle))
        .collect();
    order.shuffle(&mut rng);

    let mut streams = Vec::with_capacity(spec.streams);
    let mut plants = Vec::with_capacity(order.len());
    for s in 0..spec.streams {
        let mut frames = fill_stream(&mut rng, spec);
        let mine: Vec<usize> = order
            .iter()
            .skip(s)
            .step_by(spec.streams)
            .copied()
            .collect();
        let offsets = plant_offsets(
            &mut rng,
            mine.len(),
            spec.jingle_frames,
            spec.frames_per_stream,
        );
        for (&jingle, &offset) in mine.iter().zip(&offsets) {
            for (k, f) in jingles[jingle].frames.iter().enumerate() {
                frames[offset + k] = f.clone().with_index(offset + k);
            }
            plants.push(Plant {
                stream: s,
                offset,
                jingle,
            });
        }
        streams.push(frames);
    }

    if spec.noise_amp > 0 || spec.blur {
        let mut noise = ChaCha8Rng::seed_from_u64(spec.seed);
        noise.set_stream(1);
        for frames in &mut streams {
            for f in frames.iter_mut() {
                *f = degrade(f, spec.noise_amp, spec.blur, &mut noise);
            }
        }
    }

    Ok(Corpus {
        spec: spec.clone(),
        jingles,
        streams,
        plants,
    })
}

/// Paths of a corpus written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusLayout {
    pub root: PathBuf,
    pub jingle_dirs: Vec<PathBuf>,
    pub stream_paths: Vec<PathBuf>,
    pub truth_path: PathBuf,
}

pub fn stream_name(i: usize) -> String {
    format!("streams/stream_{i:02}.y4m")
}

impl Corpus {
    /// Truth rows with stream paths relative to the corpus root.
    pub fn truth(&self) -> Vec<TruthRecord> {
        self.plants
            .iter()
            .map(|p| TruthRecord {
                stream_path: stream_name(p.stream),
                offset: p.offset,
                program_id: self.jingles[p.jingle].id.clone(),
            })
            .collect()
    }

    /// `jingles/<id>/frame_*.pgm`, `streams/stream_*.y4m`, `truth.csv`.
    pub fn write(&self, root: &Path) -> Result<CorpusLayout> {
        let mut jingle_dirs = Vec::with_capacity(self.jingles.len());
        for j in &self.jingles {
            let dir = root.join("jingles").join(&j.id);
            write_pgm_sequence(&dir, &j.frames)?;
            jingle_dirs.push(dir);
        }
        let sdir = root.join("streams");
        std::fs::create_dir_all(&sdir).map_err(|e| Error::io(&sdir, e))?;
        let mut stream_paths = Vec::with_capacity(self.streams.len());
        for (i, frames) in self.streams.iter().enumerate() {
            let path = root.join(stream_name(i));
            write_y4m(&path, frames, Chroma::Mono)?;
            stream_paths.push(path);
        }
        let truth_path = root.join("truth.csv");
        write_truth_csv(&truth_path, &self.truth())?;
        Ok(CorpusLayout {
            root: root.to_path_buf(),
            jingle_dirs,
            stream_paths,
            truth_path,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CorpusSpec {
        CorpusSpec {
            jingles: 3,
            streams: 2,
            frames_per_stream: 400,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_from_seed() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a, b);
        let c = generate(&CorpusSpec { seed: 8, ..small() }).unwrap();
        assert_ne!(a.streams, c.streams);
    }

    #[test]
    fn plants_are_exact_copies_without_overlap() {
        let c = generate(&small()).unwrap();
        assert_eq!(c.plants.len(), 6);
        for p in &c.plants {
            for (k, f) in c.jingles[p.jingle].frames.iter().enumerate() {
                assert_eq!(c.streams[p.stream][p.offset + k].luma(), f.luma());
            }
        }
        for s in 0..2 {
            let offs: Vec<usize> = c
                .plants
                .iter()
                .filter(|p| p.stream == s)
                .map(|p| p.offset)
                .collect();
            for w in offs.windows(2) {
                assert!(w[1] >= w[0] + 60 + MIN_GAP);
            }
        }
        for j in 0..3 {
            assert_eq!(c.plants.iter().filter(|p| p.jingle == j).count(), 2);
        }
    }

    #[test]
    fn degradation_keeps_layout() {
        let clean = generate(&small()).unwrap();
        let noisy = generate(&CorpusSpec {
            noise_amp: 2,
            blur: true,
            ..small()
        })
        .unwrap();
        assert_eq!(clean.plants, noisy.plants);
        assert_eq!(clean.jingles, noisy.jingles);
        let a = clean.streams[0][0].luma();
        let b = noisy.streams[0][0].luma();
        assert_ne!(a, b);
    }

    #[test]
    fn noise_is_bounded() {
        let f = GrayFrame::filled(8, 8, 100);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = degrade(&f, 2, false, &mut rng);
        assert!(d.luma().iter().all(|&v| (98..=102).contains(&v)));
        let d = degrade(&GrayFrame::filled(8, 8, 1), 2, false, &mut rng);
        assert!(d.luma().iter().all(|&v| v <= 3));
    }

    #[test]
    fn crowded_spec_is_rejected() {
        let spec = CorpusSpec {
            frames_per_stream: 100,
            ..Default::default()
        };
        assert!(matches!(generate(&spec), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn written_layout() {
        let dir = tempfile::tempdir().unwrap();
        let c = generate(&small()).unwrap();
        let l = c.write(dir.path()).unwrap();
        assert_eq!(l.stream_paths.len(), 2);
        let truth = crate::truth::read_truth_csv(&l.truth_path).unwrap();
        assert_eq!(truth.len(), 6);
        assert_eq!(truth, c.truth());
        let mut src =
            crate::io::FrameSource::open(&l.stream_paths[1], crate::io::FrameFormat::Y4m).unwrap();
        assert_eq!(src.read_all().unwrap().len(), 400);
    }
}
