//! Five-class combustion regime labels derived from species mass fractions,
//! mixture fraction and their gradients.
//!
//! Per cell, in order:
//!
//! 1. `Z <= z_air` → [`Regime::Air`]
//! 2. `Z >= z_fuel` → [`Regime::Fuel`]
//! 3. `Y_H2O >= y_prod_min` and `|∇Y_H2O| >= g_min` → flame, split by the
//!    sign of the flame index `∇Y_H2 · ∇Y_O2`: non-negative is
//!    [`Regime::PremixedFlame`], negative [`Regime::NonPremixedFlame`]
//! 4. otherwise [`Regime::Mixture`]
//!
//! Labels are computed on physical (unnormalised) fields.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fields::{gradient_vector, Dims, Field3D, FieldMeta, GradientField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Regime {
    PremixedFlame = 0,
    NonPremixedFlame = 1,
    Fuel = 2,
    Air = 3,
    Mixture = 4,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::PremixedFlame,
        Regime::NonPremixedFlame,
        Regime::Fuel,
        Regime::Air,
        Regime::Mixture,
    ];

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::PremixedFlame => "premixed_flame",
            Regime::NonPremixedFlame => "non_premixed_flame",
            Regime::Fuel => "fuel",
            Regime::Air => "air",
            Regime::Mixture => "mixture",
        }
    }
}

/// Channel names in dataset order.
pub const CHANNEL_NAMES: [&str; 4] = ["Y_H2", "Y_O2", "Y_H2O", "Z"];

/// The four input channels: fuel, oxidiser, product, mixture fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct FlameChannels {
    pub y_h2: Field3D,
    pub y_o2: Field3D,
    pub y_h2o: Field3D,
    pub z: Field3D,
}

impl FlameChannels {
    pub fn from_array([y_h2, y_o2, y_h2o, z]: [Field3D; 4]) -> Result<Self> {
        let c = Self { y_h2, y_o2, y_h2o, z };
        c.dims()?;
        Ok(c)
    }

    pub fn as_array(&self) -> [&Field3D; 4] {
        [&self.y_h2, &self.y_o2, &self.y_h2o, &self.z]
    }

    pub fn into_array(self) -> [Field3D; 4] {
        [self.y_h2, self.y_o2, self.y_h2o, self.z]
    }

    pub fn dims(&self) -> Result<Dims> {
        let d = self.y_h2.dims();
        for f in self.as_array() {
            self.y_h2.check_same_dims(f)?;
        }
        Ok(d)
    }
}

/// A floor either given directly or as a fraction of a field statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Floor {
    Absolute(f64),
    Relative(f64),
}

impl Floor {
    fn resolve(self, reference: f64) -> f64 {
        match self {
            Floor::Absolute(v) => v,
            Floor::Relative(f) => f * reference,
        }
    }

    fn value(self) -> f64 {
        match self {
            Floor::Absolute(v) | Floor::Relative(v) => v,
        }
    }
}

/// Cascade thresholds. `y_prod_min` relative floors scale with the maximum
/// of `Y_H2O`, `g_min` relative floors with the 99th percentile of
/// `|∇Y_H2O|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelThresholds {
    pub z_air: f64,
    pub z_fuel: f64,
    pub y_prod_min: Floor,
    pub g_min: Floor,
}

impl Default for LabelThresholds {
    fn default() -> Self {
        Self {
            z_air: 0.01,
            z_fuel: 0.95,
            y_prod_min: Floor::Relative(0.05),
            g_min: Floor::Relative(0.05),
        }
    }
}

impl LabelThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.z_air && self.z_air < self.z_fuel && self.z_fuel < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < z_air < z_fuel < 1, got z_air={} z_fuel={}",
                self.z_air, self.z_fuel
            )));
        }
        for (name, f) in [("y_prod_min", self.y_prod_min), ("g_min", self.g_min)] {
            if !(f.value().is_finite() && f.value() >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative")));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let t: Self = toml::from_str(text).map_err(|e| Error::Format(format!("thresholds: {e}")))?;
        t.validate()?;
        Ok(t)
    }
}

/// Thresholds turned into absolute values for one set of fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedThresholds {
    pub z_air: f64,
    pub z_fuel: f64,
    pub y_prod_min: f64,
    pub g_min: f64,
}

/// Per-cell regime codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelField {
    dims: Dims,
    codes: Vec<u8>,
}

impl LabelField {
    pub fn new(dims: Dims, codes: Vec<u8>) -> Result<Self> {
        dims.check_positive()?;
        if codes.len() != dims.len() {
            return Err(Error::Format(format!("{} labels for a {dims} grid", codes.len())));
        }
        if let Some(bad) = codes.iter().find(|&&c| Regime::from_code(c).is_none()) {
            return Err(Error::Data(format!("invalid label code {bad}")));
        }
        Ok(Self { dims, codes })
    }

    pub fn filled(dims: Dims, regime: Regime) -> Result<Self> {
        Self::new(dims, vec![regime as u8; dims.len()])
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Regime {
        Regime::from_code(self.codes[self.dims.index(i, j, k)]).expect("validated on construction")
    }
}

/// `∇Y_fuel · ∇Y_ox` per cell.
pub fn flame_index(grad_fuel: &GradientField, grad_ox: &GradientField) -> Result<Vec<f64>> {
    if grad_fuel.dims != grad_ox.dims {
        return Err(Error::DimsMismatch(format!("{} vs {}", grad_fuel.dims, grad_ox.dims)));
    }
    let [fx, fy, fz] = &grad_fuel.components;
    let [ox, oy, oz] = &grad_ox.components;
    Ok((0..grad_fuel.dims.len())
        .map(|i| fx[i] * ox[i] + fy[i] * oy[i] + fz[i] * oz[i])
        .collect())
}

/// Nearest-rank percentile (`p` in `(0, 1]`) of finite values.
fn percentile(values: &[f64], p: f64) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let rank = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

pub fn resolve_thresholds(fields: &FlameChannels, thr: &LabelThresholds) -> Result<ResolvedThresholds> {
    thr.validate()?;
    fields.dims()?;
    let prod_max = fields.y_h2o.finite_range().map(|(_, hi)| hi as f64).unwrap_or(0.0);
    let g_ref = match thr.g_min {
        Floor::Absolute(_) => 0.0,
        Floor::Relative(_) => percentile(&gradient_vector(&fields.y_h2o).magnitude(), 0.99),
    };
    Ok(ResolvedThresholds {
        z_air: thr.z_air,
        z_fuel: thr.z_fuel,
        y_prod_min: thr.y_prod_min.resolve(prod_max),
        g_min: thr.g_min.resolve(g_ref),
    })
}

pub fn classify_resolved(fields: &FlameChannels, thr: &ResolvedThresholds) -> Result<LabelField> {
    let dims = fields.dims()?;
    let fi = flame_index(&gradient_vector(&fields.y_h2), &gradient_vector(&fields.y_o2))?;
    let g_prod = gradient_vector(&fields.y_h2o).magnitude();
    let z = fields.z.values();
    let prod = fields.y_h2o.values();
    let codes = (0..dims.len())
        .map(|c| {
            let zc = z[c] as f64;
            let regime = if zc <= thr.z_air {
                Regime::Air
            } else if zc >= thr.z_fuel {
                Regime::Fuel
            } else if prod[c] as f64 >= thr.y_prod_min && g_prod[c] >= thr.g_min {
                if fi[c] >= 0.0 {
                    Regime::PremixedFlame
                } else {
                    Regime::NonPremixedFlame
                }
            } else {
                Regime::Mixture
            };
            regime as u8
        })
        .collect();
    LabelField::new(dims, codes)
}

pub fn classify(fields: &FlameChannels, thr: &LabelThresholds) -> Result<LabelField> {
    classify_resolved(fields, &resolve_thresholds(fields, thr)?)
}

/// Fraction of cells whose labels differ.
pub fn label_error(a: &LabelField, b: &LabelField) -> Result<f64> {
    if a.dims != b.dims {
        return Err(Error::DimsMismatch(format!("{} vs {}", a.dims, b.dims)));
    }
    let diff = a.codes.iter().zip(&b.codes).filter(|(x, y)| x != y).count();
    Ok(diff as f64 / a.codes.len() as f64)
}

/// Cell counts per regime, indexed by regime code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassHistogram(pub [usize; 5]);

impl ClassHistogram {
    pub fn count(&self, r: Regime) -> usize {
        self.0[r as usize]
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

impl Serialize for ClassHistogram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(5))?;
        for r in Regime::ALL {
            m.serialize_entry(r.name(), &self.count(r))?;
        }
        m.end()
    }
}

pub fn class_histogram(labels: &LabelField) -> ClassHistogram {
    let mut h = ClassHistogram::default();
    for &c in &labels.codes {
        h.0[c as usize] += 1;
    }
    h
}

/// One byte per cell, x fastest, plus a `.meta` sidecar with `dtype=u8`.
pub fn save_labels(path: &Path, labels: &LabelField) -> Result<()> {
    fs::write(path, &labels.codes)?;
    let mut meta = FieldMeta::new(labels.dims).with_channel("labels");
    meta.dtype = "u8".to_owned();
    fs::write(FieldMeta::sidecar_path(path), meta.render())?;
    Ok(())
}

pub fn load_labels(path: &Path) -> Result<LabelField> {
    let meta = FieldMeta::read(&FieldMeta::sidecar_path(path))?;
    if meta.dtype != "u8" {
        return Err(Error::Format(format!(
            "label file dtype must be u8, got `{}`",
            meta.dtype
        )));
    }
    let codes = fs::read(path)?;
    LabelField::new(meta.dims, codes)
}
