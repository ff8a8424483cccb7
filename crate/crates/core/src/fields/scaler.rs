use serde::{Deserialize, Serialize};

use super::Field3D;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
    /// `max == min`; such channels scale to 0.0.
    pub degenerate: bool,
}

/// Per-channel min-max normalisation fitted on a subset of cells.
///
/// Values outside the fitted range are not clipped, so `apply` followed by
/// `invert` is the identity up to rounding for every input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub channels: Vec<ChannelRange>,
}

/// Fits one range per channel over `cells` (linear indices), or over every
/// cell when `cells` is `None`. Non-finite cells are ignored.
pub fn fit_scaler(channels: &[(&str, &Field3D)], cells: Option<&[usize]>) -> Result<MinMaxScaler> {
    let mut out = Vec::with_capacity(channels.len());
    for (name, field) in channels {
        let values = field.values();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut visit = |v: f32| {
            if v.is_finite() {
                lo = lo.min(v as f64);
                hi = hi.max(v as f64);
            }
        };
        match cells {
            Some(idx) => {
                for &i in idx {
                    let v = *values
                        .get(i)
                        .ok_or_else(|| Error::InvalidArgument(format!("cell index {i} outside channel `{name}`")))?;
                    visit(v);
                }
            }
            None => values.iter().copied().for_each(&mut visit),
        }
        if lo > hi {
            return Err(Error::Data(format!(
                "channel `{name}` has no finite cells in the fit subset"
            )));
        }
        out.push(ChannelRange {
            name: (*name).to_owned(),
            min: lo,
            max: hi,
            degenerate: hi == lo,
        });
    }
    Ok(MinMaxScaler { channels: out })
}

impl MinMaxScaler {
    pub fn channel(&self, name: &str) -> Option<(usize, &ChannelRange)> {
        self.channels.iter().enumerate().find(|(_, c)| c.name == name)
    }

    #[inline]
    pub fn apply_value(&self, channel: usize, x: f64) -> f64 {
        let c = &self.channels[channel];
        if c.degenerate {
            0.0
        } else {
            (x - c.min) / (c.max - c.min)
        }
    }

    #[inline]
    pub fn invert_value(&self, channel: usize, y: f64) -> f64 {
        let c = &self.channels[channel];
        if c.degenerate {
            c.min
        } else {
            y * (c.max - c.min) + c.min
        }
    }

    pub fn apply(&self, channel: usize, field: &Field3D) -> Field3D {
        self.map(field, |x| self.apply_value(channel, x))
    }

    pub fn invert(&self, channel: usize, field: &Field3D) -> Field3D {
        self.map(field, |y| self.invert_value(channel, y))
    }

    fn map(&self, field: &Field3D, f: impl Fn(f64) -> f64) -> Field3D {
        let values = field.values().iter().map(|&v| f(v as f64) as f32).collect();
        field.with_values(values).expect("shape preserved")
    }

    pub fn warnings(&self) -> Vec<String> {
        self.channels
            .iter()
            .filter(|c| c.degenerate)
            .map(|c| {
                format!(
                    "channel `{}` is constant ({}) over the fit subset; scaled to 0.0",
                    c.name, c.min
                )
            })
            .collect()
    }
}
