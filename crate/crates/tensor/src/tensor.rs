use std::sync::Arc;

use crate::error::TensorError;
use crate::Result;

/// Numeric width of a tensor's buffer. Fixed at construction; ops never mix
/// precisions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    Single,
    Double,
}

impl Precision {
    pub fn name(self) -> &'static str {
        match self {
            Precision::Single => "single",
            Precision::Double => "double",
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Buffer {
    F32(Arc<Vec<f32>>),
    F64(Arc<Vec<f64>>),
}

impl Buffer {
    fn len(&self) -> usize {
        match self {
            Buffer::F32(v) => v.len(),
            Buffer::F64(v) => v.len(),
        }
    }
}

/// An n-dimensional numeric array: a shape plus a flat row-major buffer.
///
/// The buffer is reference-counted, so clones are cheap and weight tensors can
/// be shared read-only across concurrent evaluations. Mutation goes through
/// [`Tensor::map_mut_f32`] / [`Tensor::map_mut_f64`], which copy on write when
/// the buffer is shared.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Buffer,
}

impl Tensor {
    pub fn from_f32(shape: impl Into<Vec<usize>>, data: Vec<f32>) -> Result<Self> {
        let shape = shape.into();
        check_len(&shape, data.len())?;
        Ok(Self {
            shape,
            data: Buffer::F32(Arc::new(data)),
        })
    }

    pub fn from_f64(shape: impl Into<Vec<usize>>, data: Vec<f64>) -> Result<Self> {
        let shape = shape.into();
        check_len(&shape, data.len())?;
        Ok(Self {
            shape,
            data: Buffer::F64(Arc::new(data)),
        })
    }

    /// 1-D convenience constructors.
    pub fn vector_f32(data: Vec<f32>) -> Self {
        let shape = vec![data.len()];
        Self {
            shape,
            data: Buffer::F32(Arc::new(data)),
        }
    }

    pub fn vector_f64(data: Vec<f64>) -> Self {
        let shape = vec![data.len()];
        Self {
            shape,
            data: Buffer::F64(Arc::new(data)),
        }
    }

    pub fn zeros(shape: impl Into<Vec<usize>>, precision: Precision) -> Self {
        let shape = shape.into();
        let len = shape.iter().product();
        let data = match precision {
            Precision::Single => Buffer::F32(Arc::new(vec![0.0; len])),
            Precision::Double => Buffer::F64(Arc::new(vec![0.0; len])),
        };
        Self { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.len() == 0
    }

    pub fn precision(&self) -> Precision {
        match self.data {
            Buffer::F32(_) => Precision::Single,
            Buffer::F64(_) => Precision::Double,
        }
    }

    pub fn as_f32(&self) -> Result<&[f32]> {
        match &self.data {
            Buffer::F32(v) => Ok(v.as_slice()),
            Buffer::F64(_) => Err(TensorError::PrecisionMismatch {
                expected: Precision::Single,
                actual: Precision::Double,
            }),
        }
    }

    pub fn as_f64(&self) -> Result<&[f64]> {
        match &self.data {
            Buffer::F64(v) => Ok(v.as_slice()),
            Buffer::F32(_) => Err(TensorError::PrecisionMismatch {
                expected: Precision::Double,
                actual: Precision::Single,
            }),
        }
    }

    /// Widen the buffer to `f64` regardless of stored precision (exact for
    /// `f32` inputs).
    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.data {
            Buffer::F32(v) => v.iter().map(|&x| x as f64).collect(),
            Buffer::F64(v) => v.as_ref().clone(),
        }
    }

    /// Convert to the requested precision (rounds when narrowing).
    pub fn to_precision(&self, precision: Precision) -> Tensor {
        if self.precision() == precision {
            return self.clone();
        }
        match (&self.data, precision) {
            (Buffer::F32(v), Precision::Double) => Tensor {
                shape: self.shape.clone(),
                data: Buffer::F64(Arc::new(v.iter().map(|&x| x as f64).collect())),
            },
            (Buffer::F64(v), Precision::Single) => Tensor {
                shape: self.shape.clone(),
                data: Buffer::F32(Arc::new(v.iter().map(|&x| x as f32).collect())),
            },
            _ => unreachable!(),
        }
    }

    /// Mutate the f32 buffer in place, copying first if it is shared.
    pub fn map_mut_f32(&mut self, f: impl FnOnce(&mut [f32])) -> Result<()> {
        match &mut self.data {
            Buffer::F32(v) => {
                f(Arc::make_mut(v).as_mut_slice());
                Ok(())
            }
            Buffer::F64(_) => Err(TensorError::PrecisionMismatch {
                expected: Precision::Single,
                actual: Precision::Double,
            }),
        }
    }

    pub fn map_mut_f64(&mut self, f: impl FnOnce(&mut [f64])) -> Result<()> {
        match &mut self.data {
            Buffer::F64(v) => {
                f(Arc::make_mut(v).as_mut_slice());
                Ok(())
            }
            Buffer::F32(_) => Err(TensorError::PrecisionMismatch {
                expected: Precision::Double,
                actual: Precision::Single,
            }),
        }
    }

    /// Bitwise equality, the determinism predicate (`0.0 == -0.0` and
    /// NaN-vs-NaN comparisons are distinguished, unlike `PartialEq`).
    pub fn bit_eq(&self, other: &Tensor) -> bool {
        if self.shape != other.shape {
            return false;
        }
        match (&self.data, &other.data) {
            (Buffer::F32(a), Buffer::F32(b)) => a
                .iter()
                .zip(b.iter())
                .all(|(x, y)| x.to_bits() == y.to_bits()),
            (Buffer::F64(a), Buffer::F64(b)) => a
                .iter()
                .zip(b.iter())
                .all(|(x, y)| x.to_bits() == y.to_bits()),
            _ => false,
        }
    }

    pub fn is_all_zero(&self) -> bool {
        match &self.data {
            Buffer::F32(v) => v.iter().all(|&x| x == 0.0),
            Buffer::F64(v) => v.iter().all(|&x| x == 0.0),
        }
    }

    pub fn infinity_norm(&self) -> f64 {
        match &self.data {
            Buffer::F32(v) => v.iter().fold(0.0f64, |m, &x| m.max((x as f64).abs())),
            Buffer::F64(v) => v.iter().fold(0.0f64, |m, &x| m.max(x.abs())),
        }
    }

    pub fn linf_distance(&self, other: &Tensor) -> Result<f64> {
        self.zip_fold(other, 0.0, |m, a, b| m.max((a - b).abs()))
    }

    pub fn l2_distance(&self, other: &Tensor) -> Result<f64> {
        Ok(self
            .zip_fold(other, 0.0, |s, a, b| s + (a - b) * (a - b))?
            .sqrt())
    }

    /// Count of coordinates that differ by more than `tol`.
    pub fn l0_distance(&self, other: &Tensor, tol: f64) -> Result<f64> {
        self.zip_fold(other, 0.0, |n, a, b| {
            if (a - b).abs() > tol {
                n + 1.0
            } else {
                n
            }
        })
    }

    /// `self += scale * other`, elementwise in the shared precision.
    pub fn add_scaled(&mut self, other: &Tensor, scale: f64) -> Result<()> {
        if self.shape != other.shape {
            return Err(TensorError::Invalid(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        match &other.data {
            Buffer::F32(src) => {
                let s = scale as f32;
                let src = src.clone();
                self.map_mut_f32(|dst| {
                    for (d, &v) in dst.iter_mut().zip(src.iter()) {
                        *d += s * v;
                    }
                })
            }
            Buffer::F64(src) => {
                let src = src.clone();
                self.map_mut_f64(|dst| {
                    for (d, &v) in dst.iter_mut().zip(src.iter()) {
                        *d += scale * v;
                    }
                })
            }
        }
    }

    fn zip_fold(&self, other: &Tensor, init: f64, f: impl Fn(f64, f64, f64) -> f64) -> Result<f64> {
        if self.shape != other.shape {
            return Err(TensorError::Invalid(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        if self.precision() != other.precision() {
            return Err(TensorError::PrecisionMismatch {
                expected: self.precision(),
                actual: other.precision(),
            });
        }
        let acc = match (&self.data, &other.data) {
            (Buffer::F32(a), Buffer::F32(b)) => a
                .iter()
                .zip(b.iter())
                .fold(init, |acc, (&x, &y)| f(acc, x as f64, y as f64)),
            (Buffer::F64(a), Buffer::F64(b)) => a
                .iter()
                .zip(b.iter())
                .fold(init, |acc, (&x, &y)| f(acc, x, y)),
            _ => unreachable!(),
        };
        Ok(acc)
    }
}

fn check_len(shape: &[usize], actual: usize) -> Result<()> {
    let expected: usize = shape.iter().product();
    if expected != actual {
        return Err(TensorError::LengthMismatch {
            shape: shape.to_vec(),
            expected,
            actual,
        });
    }
    Ok(())
}

/// Numeric element type of a tensor buffer; implemented for `f32` and `f64`.
///
/// The differentiation kernels are written once, generically, and dispatched
/// at the record boundary based on the runtime [`Precision`] tag.
pub trait Scalar:
    num_traits::Float
    + ndarray::LinalgScalar
    + Send
    + Sync
    + std::fmt::Debug
    + std::fmt::Display
    + std::iter::Sum
    + 'static
{
    const PRECISION: Precision;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn slice(tensor: &Tensor) -> Result<&[Self]>;
    fn tensor(shape: Vec<usize>, data: Vec<Self>) -> Tensor;
}

impl Scalar for f32 {
    const PRECISION: Precision = Precision::Single;

    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn slice(tensor: &Tensor) -> Result<&[f32]> {
        tensor.as_f32()
    }

    fn tensor(shape: Vec<usize>, data: Vec<f32>) -> Tensor {
        Tensor {
            shape,
            data: Buffer::F32(Arc::new(data)),
        }
    }
}

impl Scalar for f64 {
    const PRECISION: Precision = Precision::Double;

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn slice(tensor: &Tensor) -> Result<&[f64]> {
        tensor.as_f64()
    }

    fn tensor(shape: Vec<usize>, data: Vec<f64>) -> Tensor {
        Tensor {
            shape,
            data: Buffer::F64(Arc::new(data)),
        }
    }
}
