//! In-memory labeled image datasets and the two-class reduction.

use gradlab_tensor::{Precision, Tensor};
use rand::seq::IndexedRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::DataError;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// A batch of single-channel images with integer labels, pixels in [0, 1].
#[derive(Clone, Debug)]
pub struct LabeledDataset {
    pixels: Vec<f32>,
    labels: Vec<u8>,
    rows: usize,
    cols: usize,
    split: Split,
    class_count: usize,
    /// Present after a binary reduction: (original id, reduced id) pairs.
    class_map: Option<Vec<(u8, u8)>>,
}

impl LabeledDataset {
    pub fn new(
        pixels: Vec<f32>,
        labels: Vec<u8>,
        rows: usize,
        cols: usize,
        split: Split,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(DataError::Empty);
        }
        if pixels.len() != labels.len() * rows * cols {
            return Err(DataError::Invalid(format!(
                "{} pixels cannot hold {} images of {rows}x{cols}",
                pixels.len(),
                labels.len()
            )));
        }
        if pixels.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(DataError::Invalid(
                "pixel values must lie in [0, 1]".to_string(),
            ));
        }
        let class_count = labels.iter().copied().max().unwrap_or(0) as usize + 1;
        Ok(Self {
            pixels,
            labels,
            rows,
            cols,
            split,
            class_count,
            class_map: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> usize {
        self.labels[index] as usize
    }

    pub fn class_map(&self) -> Option<&[(u8, u8)]> {
        self.class_map.as_deref()
    }

    /// Maps a reduced label back to the original class id.
    pub fn original_label(&self, reduced: u8) -> Option<u8> {
        self.class_map
            .as_ref()?
            .iter()
            .find(|(_, r)| *r == reduced)
            .map(|(o, _)| *o)
    }

    /// The image layout every network in this workspace consumes.
    pub fn image_shape(&self) -> [usize; 3] {
        [self.rows, self.cols, 1]
    }

    pub fn image_pixels(&self, index: usize) -> &[f32] {
        let n = self.rows * self.cols;
        &self.pixels[index * n..(index + 1) * n]
    }

    /// One image as a `[rows, cols, 1]` tensor in the requested precision.
    pub fn image(&self, index: usize, precision: Precision) -> Tensor {
        let raw = self.image_pixels(index);
        match precision {
            Precision::Single => {
                Tensor::from_f32(self.image_shape().to_vec(), raw.to_vec()).expect("shape fixed")
            }
            Precision::Double => Tensor::from_f64(
                self.image_shape().to_vec(),
                raw.iter().map(|&p| p as f64).collect(),
            )
            .expect("shape fixed"),
        }
    }

    pub fn classes_present(&self) -> Vec<u8> {
        let mut present: Vec<u8> = Vec::new();
        for &label in &self.labels {
            if !present.contains(&label) {
                present.push(label);
            }
        }
        present.sort_unstable();
        present
    }
}

/// How the two retained classes are chosen.
#[derive(Clone, Copy, Debug)]
pub enum ClassSelection {
    /// Explicit pair; recorded as given.
    Pair { class_a: u8, class_b: u8 },
    /// Seeded random draw of two distinct present classes, so an unspecified
    /// choice is still reproducible.
    Random { seed: u64 },
}

/// Keeps only two classes, relabeling `class_a -> 0` and `class_b -> 1`.
/// Sample order is preserved and the mapping is recorded on the result.
pub fn binary_reduce(data: &LabeledDataset, selection: ClassSelection) -> Result<LabeledDataset> {
    let (class_a, class_b) = match selection {
        ClassSelection::Pair { class_a, class_b } => (class_a, class_b),
        ClassSelection::Random { seed } => {
            let present = data.classes_present();
            if present.len() < 2 {
                return Err(DataError::TooFewClasses);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let picked: Vec<u8> = present.choose_multiple(&mut rng, 2).copied().collect();
            (picked[0].min(picked[1]), picked[0].max(picked[1]))
        }
    };
    if class_a == class_b {
        return Err(DataError::SameClass(class_a));
    }
    for class in [class_a, class_b] {
        if !data.labels.iter().any(|&l| l == class) {
            return Err(DataError::ClassAbsent(class));
        }
    }

    let n = data.rows * data.cols;
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for (i, &label) in data.labels.iter().enumerate() {
        let reduced = if label == class_a {
            0
        } else if label == class_b {
            1
        } else {
            continue;
        };
        labels.push(reduced);
        pixels.extend_from_slice(&data.pixels[i * n..(i + 1) * n]);
    }

    let mut out = LabeledDataset::new(pixels, labels, data.rows, data.cols, data.split)?;
    out.class_count = 2;
    out.class_map = Some(vec![(class_a, 0), (class_b, 1)]);
    Ok(out)
}
