use gradlab_tensor::{Precision, Tensor};

use crate::error::NnError;
use crate::Result;

/// What a one-hot vector stands for when it enters a loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelRole {
    GroundTruth,
    AttackTarget,
}

/// A one-hot class label: exactly one entry is 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OneHotLabel {
    index: usize,
    classes: usize,
    role: LabelRole,
}

impl OneHotLabel {
    pub fn new(index: usize, classes: usize, role: LabelRole) -> Result<Self> {
        if index >= classes || classes == 0 {
            return Err(NnError::BadHotIndex { index, classes });
        }
        Ok(Self {
            index,
            classes,
            role,
        })
    }

    pub fn ground_truth(index: usize, classes: usize) -> Result<Self> {
        Self::new(index, classes, LabelRole::GroundTruth)
    }

    pub fn attack_target(index: usize, classes: usize) -> Result<Self> {
        Self::new(index, classes, LabelRole::AttackTarget)
    }

    /// Validates that `v` holds exactly one 1 and zeros elsewhere.
    pub fn from_vector(v: &[f64], role: LabelRole) -> Result<Self> {
        let mut hot = None;
        for (i, &x) in v.iter().enumerate() {
            if x == 1.0 {
                if hot.is_some() {
                    return Err(NnError::NotProbabilities(
                        "more than one hot entry".to_string(),
                    ));
                }
                hot = Some(i);
            } else if x != 0.0 {
                return Err(NnError::NotProbabilities(format!(
                    "entry {i} is {x}, expected 0 or 1"
                )));
            }
        }
        match hot {
            Some(index) => Self::new(index, v.len(), role),
            None => Err(NnError::NotProbabilities("no hot entry".to_string())),
        }
    }

    pub fn hot_index(&self) -> usize {
        self.index
    }

    pub fn len(&self) -> usize {
        self.classes
    }

    pub fn is_empty(&self) -> bool {
        self.classes == 0
    }

    pub fn role(&self) -> LabelRole {
        self.role
    }

    pub fn to_tensor(&self, precision: Precision) -> Tensor {
        match precision {
            Precision::Single => {
                let mut v = vec![0.0f32; self.classes];
                v[self.index] = 1.0;
                Tensor::vector_f32(v)
            }
            Precision::Double => {
                let mut v = vec![0.0f64; self.classes];
                v[self.index] = 1.0;
                Tensor::vector_f64(v)
            }
        }
    }
}
