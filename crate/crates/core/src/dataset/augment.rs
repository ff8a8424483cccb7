use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::fields::Dims;
use crate::{Error, Result};

/// Counter-clockwise quarter turns in the x-y plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rotation {
    None,
    Rot90,
    Rot180,
    Rot270,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flip {
    None,
    X,
    Y,
    Z,
}

/// Rotation followed by a flip. Written as e.g. `rot90+flip_x`, `flip_z`,
/// `rot180` or `none`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Augmentation {
    pub rotation: Rotation,
    pub flip: Flip,
}

impl Augmentation {
    pub const IDENTITY: Augmentation = Augmentation {
        rotation: Rotation::None,
        flip: Flip::None,
    };

    /// Every transform in a fixed order, identity first.
    pub fn all() -> Vec<Augmentation> {
        let mut out = Vec::with_capacity(16);
        for rotation in [Rotation::None, Rotation::Rot90, Rotation::Rot180, Rotation::Rot270] {
            for flip in [Flip::None, Flip::X, Flip::Y, Flip::Z] {
                out.push(Augmentation { rotation, flip });
            }
        }
        out
    }

    pub fn is_identity(self) -> bool {
        self == Self::IDENTITY
    }

    /// Quarter and three-quarter turns only keep the shape of x-y square tiles.
    pub fn preserves_shape(self, shape: Dims) -> bool {
        shape.nx == shape.ny || !matches!(self.rotation, Rotation::Rot90 | Rotation::Rot270)
    }

    pub(crate) fn codes(self) -> (u8, u8) {
        let r = match self.rotation {
            Rotation::None => 0,
            Rotation::Rot90 => 1,
            Rotation::Rot180 => 2,
            Rotation::Rot270 => 3,
        };
        let f = match self.flip {
            Flip::None => 0,
            Flip::X => 1,
            Flip::Y => 2,
            Flip::Z => 3,
        };
        (r, f)
    }

    pub(crate) fn from_codes(r: u8, f: u8) -> Option<Self> {
        let rotation = [Rotation::None, Rotation::Rot90, Rotation::Rot180, Rotation::Rot270]
            .get(r as usize)
            .copied()?;
        let flip = [Flip::None, Flip::X, Flip::Y, Flip::Z].get(f as usize).copied()?;
        Some(Self { rotation, flip })
    }

    /// Source cell of output cell `(i, j, k)` in a tile of `shape`.
    fn source(self, shape: Dims, i: usize, j: usize, k: usize) -> (usize, usize, usize) {
        let (nx, ny, nz) = (shape.nx, shape.ny, shape.nz);
        // undo the flip
        let (i, j, k) = match self.flip {
            Flip::None => (i, j, k),
            Flip::X => (nx - 1 - i, j, k),
            Flip::Y => (i, ny - 1 - j, k),
            Flip::Z => (i, j, nz - 1 - k),
        };
        // undo the rotation; rot90 sends (x, y) to (n - 1 - y, x)
        match self.rotation {
            Rotation::None => (i, j, k),
            Rotation::Rot90 => (j, nx - 1 - i, k),
            Rotation::Rot180 => (nx - 1 - i, ny - 1 - j, k),
            Rotation::Rot270 => (ny - 1 - j, i, k),
        }
    }

    /// Permutation: `out[c] = input[perm[c]]`.
    pub(crate) fn permutation(self, shape: Dims) -> Result<Vec<usize>> {
        if !self.preserves_shape(shape) {
            return Err(Error::InvalidArgument(format!(
                "{self} needs a tile square in x-y, got {shape}"
            )));
        }
        Ok((0..shape.len())
            .map(|c| {
                let (i, j, k) = shape.coords(c);
                let (si, sj, sk) = self.source(shape, i, j, k);
                shape.index(si, sj, sk)
            })
            .collect())
    }
}

impl fmt::Display for Augmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rot = match self.rotation {
            Rotation::None => None,
            Rotation::Rot90 => Some("rot90"),
            Rotation::Rot180 => Some("rot180"),
            Rotation::Rot270 => Some("rot270"),
        };
        let flip = match self.flip {
            Flip::None => None,
            Flip::X => Some("flip_x"),
            Flip::Y => Some("flip_y"),
            Flip::Z => Some("flip_z"),
        };
        match (rot, flip) {
            (None, None) => f.write_str("none"),
            (Some(r), None) => f.write_str(r),
            (None, Some(fl)) => f.write_str(fl),
            (Some(r), Some(fl)) => write!(f, "{r}+{fl}"),
        }
    }
}

impl FromStr for Augmentation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = Self::IDENTITY;
        let mut seen = (false, false);
        for part in s.split('+') {
            match part {
                "none" => {}
                "rot90" | "rot180" | "rot270" if !seen.0 => {
                    seen.0 = true;
                    out.rotation = match part {
                        "rot90" => Rotation::Rot90,
                        "rot180" => Rotation::Rot180,
                        _ => Rotation::Rot270,
                    };
                }
                "flip_x" | "flip_y" | "flip_z" if !seen.1 => {
                    seen.1 = true;
                    out.flip = match part {
                        "flip_x" => Flip::X,
                        "flip_y" => Flip::Y,
                        _ => Flip::Z,
                    };
                }
                _ => return Err(Error::InvalidArgument(format!("unknown transform id `{s}`"))),
            }
        }
        Ok(out)
    }
}

impl Serialize for Augmentation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Augmentation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One tile's features and labels with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SubvolumeSample {
    pub shape: Dims,
    /// One block per channel, x fastest.
    pub features: Vec<Vec<f32>>,
    pub labels: Option<Vec<u8>>,
    pub origin: [usize; 3],
    /// Transforms applied so far, oldest first. Empty for an untouched tile.
    pub augmentations: Vec<Augmentation>,
}

impl SubvolumeSample {
    pub fn provenance_tag(&self) -> String {
        if self.augmentations.is_empty() {
            return "none".to_owned();
        }
        self.augmentations
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Applies `aug` to features and labels alike.
pub fn augment(sample: &SubvolumeSample, aug: Augmentation) -> Result<SubvolumeSample> {
    let perm = aug.permutation(sample.shape)?;
    let apply = |block: &[f32]| perm.iter().map(|&p| block[p]).collect::<Vec<_>>();
    let mut augmentations = sample.augmentations.clone();
    if !aug.is_identity() {
        augmentations.push(aug);
    }
    Ok(SubvolumeSample {
        shape: sample.shape,
        features: sample.features.iter().map(|b| apply(b)).collect(),
        labels: sample.labels.as_ref().map(|l| perm.iter().map(|&p| l[p]).collect()),
        origin: sample.origin,
        augmentations,
    })
}
