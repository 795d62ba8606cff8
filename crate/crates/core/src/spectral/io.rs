//! Binary field snapshots with a JSON sidecar, plus CSV export.
//!
//! Payload layout: the three components in sidecar order, each `n × n`
//! row-major (`y` slow), little-endian `f64`. Spectral payloads store each
//! coefficient as an interleaved `(re, im)` pair.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{Representation, ScalarField, VectorField};
use super::grid::{Grid, MAX_POINTS_PER_AXIS};
use crate::error::{Error, Result};

pub const FIELD_FORMAT: &str = "cmcwave-field";
pub const FIELD_FORMAT_VERSION: u32 = 1;
pub const COMPONENT_ORDER: [&str; 3] = ["u1", "u2", "u3"];

/// Largest grid accepted by [`field_to_csv`].
pub const CSV_MAX_POINTS_PER_AXIS: usize = 128;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSidecar {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub box_length: f64,
    pub representation: Representation,
    pub component_order: Vec<String>,
    pub dtype: String,
    pub byte_order: String,
}

impl FieldSidecar {
    pub fn for_field(field: &VectorField) -> Self {
        Self {
            format: FIELD_FORMAT.into(),
            version: FIELD_FORMAT_VERSION,
            n: field.grid().n(),
            box_length: field.grid().box_length(),
            representation: field.representation(),
            component_order: COMPONENT_ORDER.iter().map(|s| s.to_string()).collect(),
            dtype: "f64".into(),
            byte_order: "little".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.format != FIELD_FORMAT {
            return Err(Error::Decode(format!(
                "unknown format tag {:?}",
                self.format
            )));
        }
        if self.version != FIELD_FORMAT_VERSION {
            return Err(Error::Decode(format!(
                "unsupported version {}",
                self.version
            )));
        }
        if self.dtype != "f64" || self.byte_order != "little" {
            return Err(Error::Decode(format!(
                "unsupported element type {}/{}",
                self.dtype, self.byte_order
            )));
        }
        if self.n < 8 || self.n > MAX_POINTS_PER_AXIS || !self.n.is_power_of_two() {
            return Err(Error::Decode(format!("grid size {} out of range", self.n)));
        }
        if self.component_order != COMPONENT_ORDER {
            return Err(Error::Decode(format!(
                "component order must be {COMPONENT_ORDER:?}, got {:?}",
                self.component_order
            )));
        }
        Ok(())
    }

    fn values_per_component(&self) -> usize {
        let points = self.n * self.n;
        match self.representation {
            Representation::Physical => points,
            Representation::Spectral => 2 * points,
        }
    }
}

pub fn encode_field(field: &VectorField) -> (FieldSidecar, Vec<u8>) {
    let sidecar = FieldSidecar::for_field(field);
    let mut payload = Vec::with_capacity(3 * 8 * sidecar.values_per_component());
    for component in field.components() {
        match field.representation() {
            Representation::Physical => {
                for v in component.values().iter() {
                    payload.extend_from_slice(&v.to_le_bytes());
                }
            }
            Representation::Spectral => {
                for c in component.coefficients().iter() {
                    payload.extend_from_slice(&c.re.to_le_bytes());
                    payload.extend_from_slice(&c.im.to_le_bytes());
                }
            }
        }
    }
    (sidecar, payload)
}

/// Decodes a sidecar and payload, validating every structural field before
/// allocating.
pub fn decode_field(sidecar_json: &str, payload: &[u8]) -> Result<VectorField> {
    let sidecar: FieldSidecar =
        serde_json::from_str(sidecar_json).map_err(|e| Error::Decode(format!("sidecar: {e}")))?;
    sidecar.validate()?;
    let per_component = sidecar.values_per_component();
    let expected = 3 * 8 * per_component;
    if payload.len() != expected {
        return Err(Error::Decode(format!(
            "payload has {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let grid =
        Grid::new(sidecar.n, sidecar.box_length).map_err(|e| Error::Decode(e.to_string()))?;
    let floats: Vec<f64> = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
        .collect();
    if floats.iter().any(|v| !v.is_finite()) {
        return Err(Error::Decode("payload contains non-finite values".into()));
    }
    let mut components = Vec::with_capacity(3);
    for chunk in floats.chunks_exact(per_component) {
        let component = match sidecar.representation {
            Representation::Physical => ScalarField::from_physical(&grid, chunk.to_vec())?,
            Representation::Spectral => ScalarField::from_spectral(
                &grid,
                chunk
                    .chunks_exact(2)
                    .map(|p| Complex64::new(p[0], p[1]))
                    .collect(),
            )?,
        };
        components.push(component);
    }
    let components: [ScalarField; 3] = components
        .try_into()
        .map_err(|_| Error::Decode("expected three components".into()))?;
    VectorField::new(components)
}

/// Writes `<stem>.bin` and `<stem>.json`; returns both paths.
pub fn write_field(stem: &Path, field: &VectorField) -> Result<(PathBuf, PathBuf)> {
    let (sidecar, payload) = encode_field(field);
    let bin = stem.with_extension("bin");
    let json = stem.with_extension("json");
    std::fs::write(&bin, payload)?;
    std::fs::write(&json, serde_json::to_string_pretty(&sidecar)?)?;
    Ok((bin, json))
}

pub fn read_field(stem: &Path) -> Result<VectorField> {
    let sidecar = std::fs::read_to_string(stem.with_extension("json"))?;
    let payload = std::fs::read(stem.with_extension("bin"))?;
    decode_field(&sidecar, &payload)
}

/// Physical-space CSV: `ix,iy,x,y,u1,u2,u3`.
pub fn field_to_csv<W: Write>(field: &VectorField, mut out: W) -> Result<()> {
    let grid = field.grid();
    let n = grid.n();
    if n > CSV_MAX_POINTS_PER_AXIS {
        return Err(Error::param(
            "n",
            format!("CSV export is limited to n ≤ {CSV_MAX_POINTS_PER_AXIS}"),
        ));
    }
    let values: Vec<_> = field
        .components()
        .iter()
        .map(|c| c.values().into_owned())
        .collect();
    writeln!(out, "ix,iy,x,y,u1,u2,u3")?;
    for idx in 0..grid.len() {
        let (ix, iy) = (idx % n, idx / n);
        writeln!(
            out,
            "{ix},{iy},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            grid.coordinate(ix),
            grid.coordinate(iy),
            values[0][idx],
            values[1][idx],
            values[2][idx]
        )?;
    }
    Ok(())
}
