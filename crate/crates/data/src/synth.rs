//! Deterministic synthetic digit images in MNIST's format.
//!
//! Each sample renders a 5x7 digit glyph into a 28x28 grayscale frame through
//! a seeded random affine transform (rotation, anisotropic scale, shear,
//! translation), Gaussian blur, intensity jitter, and pixel noise, then
//! quantizes to bytes. The generator exists so the full experiment pipeline
//! can run on machines without the real handwritten-digit files; any IDX
//! dataset with the same layout is a drop-in replacement.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{LabeledDataset, Split};
use crate::error::DataError;
use crate::idx::{write_idx_images, write_idx_labels};
use crate::Result;

pub const SIDE: usize = 28;

const GLYPH_W: usize = 5;
const GLYPH_H: usize = 7;

#[rustfmt::skip]
const GLYPHS: [[&str; GLYPH_H]; 10] = [
    [".###.",
     "#...#",
     "#...#",
     "#...#",
     "#...#",
     "#...#",
     ".###."],
    ["..#..",
     ".##..",
     "..#..",
     "..#..",
     "..#..",
     "..#..",
     ".###."],
    [".###.",
     "#...#",
     "....#",
     "...#.",
     "..#..",
     ".#...",
     "#####"],
    [".###.",
     "#...#",
     "....#",
     "..##.",
     "....#",
     "#...#",
     ".###."],
    ["...#.",
     "..##.",
     ".#.#.",
     "#..#.",
     "#####",
     "...#.",
     "...#."],
    ["#####",
     "#....",
     "####.",
     "....#",
     "....#",
     "#...#",
     ".###."],
    [".###.",
     "#....",
     "#....",
     "####.",
     "#...#",
     "#...#",
     ".###."],
    ["#####",
     "....#",
     "...#.",
     "..#..",
     ".#...",
     ".#...",
     ".#..."],
    [".###.",
     "#...#",
     "#...#",
     ".###.",
     "#...#",
     "#...#",
     ".###."],
    [".###.",
     "#...#",
     "#...#",
     ".####",
     "....#",
     "....#",
     ".###."],
];

#[derive(Clone, Debug)]
pub struct SynthConfig {
    /// Digit classes to emit, each in 0..10.
    pub classes: Vec<u8>,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub seed: u64,
    /// Standard deviation of the additive per-pixel noise.
    pub noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: (0..10).collect(),
            train_per_class: 640,
            test_per_class: 110,
            seed: 0,
            noise: 0.10,
        }
    }
}

/// Generates the train and test splits described by `config`.
///
/// Every sample is derived from a counter-mode stream keyed on
/// (seed, split, class, index), so a configuration pins every byte.
pub fn generate(config: &SynthConfig) -> Result<(LabeledDataset, LabeledDataset)> {
    validate(config)?;
    let train = generate_split(config, Split::Train, config.train_per_class)?;
    let test = generate_split(config, Split::Test, config.test_per_class)?;
    Ok((train, test))
}

/// Writes the two splits as IDX files under `dir`, using MNIST's conventional
/// names, and returns `[train images, train labels, test images, test labels]`.
pub fn write_idx_files(config: &SynthConfig, dir: &Path) -> Result<[PathBuf; 4]> {
    validate(config)?;
    let paths = [
        dir.join("train-images-idx3-ubyte"),
        dir.join("train-labels-idx1-ubyte"),
        dir.join("t10k-images-idx3-ubyte"),
        dir.join("t10k-labels-idx1-ubyte"),
    ];
    for (split, count, images_path, labels_path) in [
        (Split::Train, config.train_per_class, &paths[0], &paths[1]),
        (Split::Test, config.test_per_class, &paths[2], &paths[3]),
    ] {
        let (pixels, labels) = render_split_bytes(config, split, count);
        write_idx_images(images_path, &pixels, labels.len(), SIDE, SIDE)?;
        write_idx_labels(labels_path, &labels)?;
    }
    Ok(paths)
}

fn validate(config: &SynthConfig) -> Result<()> {
    if config.classes.is_empty() || config.train_per_class == 0 || config.test_per_class == 0 {
        return Err(DataError::Invalid(
            "synthetic dataset needs at least one class and one sample per split".to_string(),
        ));
    }
    if let Some(&bad) = config.classes.iter().find(|&&c| c > 9) {
        return Err(DataError::Invalid(format!("no glyph for class {bad}")));
    }
    Ok(())
}

fn generate_split(config: &SynthConfig, split: Split, per_class: usize) -> Result<LabeledDataset> {
    let (bytes, labels) = render_split_bytes(config, split, per_class);
    let pixels: Vec<f32> = bytes.iter().map(|&b| b as f32 / 255.0).collect();
    LabeledDataset::new(pixels, labels, SIDE, SIDE, split)
}

fn render_split_bytes(config: &SynthConfig, split: Split, per_class: usize) -> (Vec<u8>, Vec<u8>) {
    let mut pixels = Vec::with_capacity(per_class * config.classes.len() * SIDE * SIDE);
    let mut labels = Vec::with_capacity(per_class * config.classes.len());
    let split_tag = match split {
        Split::Train => 1u64,
        Split::Test => 2u64,
    };
    for &class in &config.classes {
        for index in 0..per_class {
            let sample_seed = mix(config.seed, &[split_tag, class as u64, index as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
            pixels.extend_from_slice(&render_digit(class, &mut rng, config.noise));
            labels.push(class);
        }
    }
    (pixels, labels)
}

fn render_digit(class: u8, rng: &mut ChaCha8Rng, noise: f64) -> [u8; SIDE * SIDE] {
    let glyph = glyph_grid(class);

    let theta: f64 = rng.random_range(-0.30..0.30);
    let scale_x: f64 = rng.random_range(0.60..1.15);
    let scale_y: f64 = rng.random_range(0.60..1.15);
    let shear: f64 = rng.random_range(-0.28..0.28);
    let shift_x: f64 = rng.random_range(-3.0..3.0);
    let shift_y: f64 = rng.random_range(-3.0..3.0);
    let blur_sigma: f64 = rng.random_range(0.55..1.25);
    let intensity: f64 = rng.random_range(0.55..1.00);

    let cell = 2.6; // glyph cell size in pixels before scaling
    let (cos, sin) = (theta.cos(), theta.sin());
    let center = SIDE as f64 / 2.0;

    let mut frame = [0.0f64; SIDE * SIDE];
    for py in 0..SIDE {
        for px in 0..SIDE {
            let dx = px as f64 + 0.5 - center - shift_x;
            let dy = py as f64 + 0.5 - center - shift_y;
            // Inverse transform: unrotate, unshear, unscale.
            let rx = cos * dx + sin * dy;
            let ry = -sin * dx + cos * dy;
            let ux = rx - shear * ry;
            let gx = ux / (scale_x * cell) + (GLYPH_W as f64 - 1.0) / 2.0;
            let gy = ry / (scale_y * cell) + (GLYPH_H as f64 - 1.0) / 2.0;
            frame[py * SIDE + px] = bilinear(&glyph, gx, gy);
        }
    }

    blur(&mut frame, blur_sigma);

    // Blur dilutes stroke cores; gain restores saturated centers.
    let gain = 1.9;
    let mut out = [0u8; SIDE * SIDE];
    for (o, &v) in out.iter_mut().zip(frame.iter()) {
        let n: f64 = normal(rng) * noise;
        let value = ((v * gain).min(1.0) * intensity + n).clamp(0.0, 1.0);
        *o = (value * 255.0).round() as u8;
    }
    out
}

fn glyph_grid(class: u8) -> [[f64; GLYPH_W]; GLYPH_H] {
    let rows = GLYPHS[class as usize];
    let mut grid = [[0.0; GLYPH_W]; GLYPH_H];
    for (y, row) in rows.iter().enumerate() {
        for (x, ch) in row.bytes().enumerate() {
            grid[y][x] = if ch == b'#' { 1.0 } else { 0.0 };
        }
    }
    grid
}

fn bilinear(grid: &[[f64; GLYPH_W]; GLYPH_H], gx: f64, gy: f64) -> f64 {
    let x0 = gx.floor();
    let y0 = gy.floor();
    let fx = gx - x0;
    let fy = gy - y0;
    let sample = |x: f64, y: f64| -> f64 {
        if x < 0.0 || y < 0.0 || x >= GLYPH_W as f64 || y >= GLYPH_H as f64 {
            0.0
        } else {
            grid[y as usize][x as usize]
        }
    };
    sample(x0, y0) * (1.0 - fx) * (1.0 - fy)
        + sample(x0 + 1.0, y0) * fx * (1.0 - fy)
        + sample(x0, y0 + 1.0) * (1.0 - fx) * fy
        + sample(x0 + 1.0, y0 + 1.0) * fx * fy
}

fn blur(frame: &mut [f64; SIDE * SIDE], sigma: f64) {
    const RADIUS: i64 = 2;
    let mut kernel = [0.0f64; (2 * RADIUS + 1) as usize];
    let mut sum = 0.0;
    for (i, k) in kernel.iter_mut().enumerate() {
        let d = i as f64 - RADIUS as f64;
        *k = (-d * d / (2.0 * sigma * sigma)).exp();
        sum += *k;
    }
    for k in &mut kernel {
        *k /= sum;
    }

    let mut tmp = [0.0f64; SIDE * SIDE];
    for y in 0..SIDE as i64 {
        for x in 0..SIDE as i64 {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let sx = (x + i as i64 - RADIUS).clamp(0, SIDE as i64 - 1);
                acc += k * frame[(y * SIDE as i64 + sx) as usize];
            }
            tmp[(y * SIDE as i64 + x) as usize] = acc;
        }
    }
    for y in 0..SIDE as i64 {
        for x in 0..SIDE as i64 {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let sy = (y + i as i64 - RADIUS).clamp(0, SIDE as i64 - 1);
                acc += k * tmp[(sy * SIDE as i64 + x) as usize];
            }
            frame[(y * SIDE as i64 + x) as usize] = acc;
        }
    }
}

/// Box-Muller from two uniform draws; keeps this crate off a distribution
/// dependency for one sampler.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn mix(seed: u64, parts: &[u64]) -> u64 {
    let mut z = seed;
    for &p in parts {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(p);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}
