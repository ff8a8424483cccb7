use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{uniform_coords, Axis, Dims, Field3D};
use crate::{Error, Result};

/// Sidecar metadata describing a raw field file.
///
/// Stored next to the data file as `<data>.meta`, one `key=value` pair per
/// line:
///
/// ```text
/// dims=64,64,64
/// dtype=f32
/// channel=Y_H2
/// coords_y=field.f32.y.coords
/// ```
///
/// Coordinate files hold little-endian f64 values; relative paths resolve
/// against the directory of the sidecar. Missing coordinate keys mean unit
/// spacing starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMeta {
    pub dims: Dims,
    pub dtype: String,
    pub channel: Option<String>,
    pub coords: [Option<PathBuf>; 3],
}

const COORD_KEYS: [&str; 3] = ["coords_x", "coords_y", "coords_z"];

impl FieldMeta {
    pub fn new(dims: Dims) -> Self {
        Self {
            dims,
            dtype: "f32".to_owned(),
            channel: None,
            coords: [None, None, None],
        }
    }

    pub fn with_channel(mut self, name: impl Into<String>) -> Self {
        self.channel = Some(name.into());
        self
    }

    pub fn sidecar_path(data: &Path) -> PathBuf {
        let mut s = data.as_os_str().to_owned();
        s.push(".meta");
        PathBuf::from(s)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut dims = None;
        let mut dtype = None;
        let mut channel = None;
        let mut coords: [Option<PathBuf>; 3] = [None, None, None];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("sidecar line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "dims" => dims = Some(parse_dims(value)?),
                "dtype" => dtype = Some(value.to_owned()),
                "channel" => channel = Some(value.to_owned()),
                _ => match COORD_KEYS.iter().position(|k| *k == key) {
                    Some(axis) => coords[axis] = Some(PathBuf::from(value)),
                    None => {
                        return Err(Error::Format(format!("sidecar: unknown key `{key}`")));
                    }
                },
            }
        }
        Ok(Self {
            dims: dims.ok_or_else(|| Error::Format("sidecar: missing dims".into()))?,
            dtype: dtype.unwrap_or_else(|| "f32".to_owned()),
            channel,
            coords,
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let d = self.dims;
        writeln!(out, "dims={},{},{}", d.nx, d.ny, d.nz).unwrap();
        writeln!(out, "dtype={}", self.dtype).unwrap();
        if let Some(ch) = &self.channel {
            writeln!(out, "channel={ch}").unwrap();
        }
        for (key, path) in COORD_KEYS.iter().zip(&self.coords) {
            if let Some(p) = path {
                writeln!(out, "{key}={}", p.display()).unwrap();
            }
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

pub fn parse_dims(value: &str) -> Result<Dims> {
    let parts: Vec<usize> = value
        .split([',', 'x'])
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Format(format!("bad dims `{value}`: {e}")))?;
    match parts[..] {
        [nx, ny, nz] => Ok(Dims::new(nx, ny, nz)),
        _ => Err(Error::Format(format!("dims must have three entries, got `{value}`"))),
    }
}

/// Reads a flat little-endian f32 file laid out x-fastest. Relative
/// coordinate paths in `meta` resolve against the data file's directory.
pub fn load_field(path: &Path, meta: &FieldMeta, allow_nonfinite: bool) -> Result<Field3D> {
    if meta.dtype != "f32" {
        return Err(Error::Format(format!("unsupported dtype `{}`", meta.dtype)));
    }
    let bytes = fs::read(path)?;
    let expected = meta.dims.len() * 4;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "{}: {} bytes on disk, dims {} need {expected}",
            path.display(),
            bytes.len(),
            meta.dims
        )));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();

    let base = path.parent().unwrap_or(Path::new("."));
    let mut coords = uniform_coords(meta.dims);
    for axis in Axis::ALL {
        if let Some(p) = &meta.coords[axis.ordinal()] {
            coords[axis.ordinal()] = read_coords(&base.join(p), meta.dims.extent(axis))?;
        }
    }
    let field = if allow_nonfinite {
        Field3D::build(meta.dims, values, coords, true)?
    } else {
        Field3D::with_coords(meta.dims, values, coords)?
    };
    Ok(field)
}

/// Loads a field whose sidecar lives at `<path>.meta`.
pub fn load_field_with_sidecar(path: &Path, allow_nonfinite: bool) -> Result<(Field3D, FieldMeta)> {
    let meta = FieldMeta::read(&FieldMeta::sidecar_path(path))?;
    let field = load_field(path, &meta, allow_nonfinite)?;
    Ok((field, meta))
}

fn read_coords(path: &Path, n: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() != n * 8 {
        return Err(Error::Format(format!(
            "{}: coordinate file holds {} bytes, expected {}",
            path.display(),
            bytes.len(),
            n * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Writes the raw value bytes only.
pub fn save_field(path: &Path, field: &Field3D) -> Result<()> {
    fs::write(path, field.to_le_bytes())?;
    Ok(())
}

/// Writes the raw values, the `.meta` sidecar, and coordinate files for any
/// axis whose spacing is not the unit default.
pub fn save_field_with_sidecar(path: &Path, field: &Field3D, channel: Option<&str>) -> Result<FieldMeta> {
    save_field(path, field)?;
    let mut meta = FieldMeta::new(field.dims());
    meta.channel = channel.map(str::to_owned);
    let defaults = uniform_coords(field.dims());
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no file name", path.display())))?
        .to_string_lossy()
        .into_owned();
    for axis in Axis::ALL {
        let c = field.coords(axis);
        if c != defaults[axis.ordinal()].as_slice() {
            let name = format!("{file_name}.{}.coords", ["x", "y", "z"][axis.ordinal()]);
            let coord_path = path.with_file_name(&name);
            let bytes: Vec<u8> = c.iter().flat_map(|v| v.to_le_bytes()).collect();
            fs::write(coord_path, bytes)?;
            meta.coords[axis.ordinal()] = Some(PathBuf::from(name));
        }
    }
    fs::write(FieldMeta::sidecar_path(path), meta.render())?;
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_floats(path: &Path, vals: &[f32]) {
        let bytes: Vec<u8> = vals.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(path, bytes).unwrap();
    }

    #[test]
    fn loads_simple_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.f32");
        write_floats(&p, &[1.0, 2.0, 3.0, 4.0]);
        let f = load_field(&p, &FieldMeta::new(Dims::new(2, 2, 1)), false).unwrap();
        assert_eq!(f.values(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn size_mismatch_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.f32");
        write_floats(&p, &[1.0, 2.0, 3.0]);
        let err = load_field(&p, &FieldMeta::new(Dims::new(2, 2, 1)), false).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err}");
    }

    #[test]
    fn nan_needs_flag() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.f32");
        write_floats(&p, &[1.0, f32::NAN, 3.0, 4.0]);
        let meta = FieldMeta::new(Dims::new(2, 2, 1));
        assert!(matches!(load_field(&p, &meta, false), Err(Error::Data(_))));
        let f = load_field(&p, &meta, true).unwrap();
        assert_eq!(f.n_nonfinite(), 1);
    }

    #[test]
    fn sidecar_roundtrip_with_stretched_coords() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.f32");
        let dims = Dims::new(2, 3, 1);
        let coords = [vec![0.0, 1.0], vec![0.0, 1.0, 3.0], vec![0.0]];
        let f = Field3D::with_coords(dims, vec![0.5, 1.5, -2.0, 7.0, 0.0, 1e-30], coords).unwrap();
        let meta = save_field_with_sidecar(&p, &f, Some("Z")).unwrap();
        assert!(meta.coords[1].is_some() && meta.coords[0].is_none());
        let (back, meta2) = load_field_with_sidecar(&p, false).unwrap();
        assert_eq!(back, f);
        assert_eq!(meta2.channel.as_deref(), Some("Z"));
    }

    #[test]
    fn save_is_byte_identical_including_nan_payloads() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.f32");
        let q = dir.path().join("d.f32");
        let raw: Vec<u8> = [1.0f32, -0.0, f32::from_bits(0x7fc0_1234), f32::INFINITY]
            .iter()
            .flat_map(|v| v.to_le_bytes())
            .collect();
        fs::write(&p, &raw).unwrap();
        let f = load_field(&p, &FieldMeta::new(Dims::new(4, 1, 1)), true).unwrap();
        save_field(&q, &f).unwrap();
        assert_eq!(fs::read(&q).unwrap(), raw);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(FieldMeta::parse("dims=1,2").is_err());
        assert!(FieldMeta::parse("dtype=f32").is_err());
        assert!(FieldMeta::parse("dims=1,2,3\ncolour=red").is_err());
        let m = FieldMeta::parse("# comment\ndims = 4x5x6\n").unwrap();
        assert_eq!(m.dims, Dims::new(4, 5, 6));
    }
}
