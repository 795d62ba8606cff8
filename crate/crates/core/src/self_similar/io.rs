//! Profile snapshots: little-endian `f64` payload, ring by ring with `θ`
//! fast and the three components interleaved, plus a JSON sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::equation::identity_profile;
use super::polar::{PolarGrid, MAX_NODES, MIN_THETA_NODES};
use super::profile::{Parametrization, SelfSimilarProfile};
use crate::error::{Error, Result};

pub const PROFILE_FORMAT: &str = "cmcwave-profile";
pub const PROFILE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSidecar {
    pub format: String,
    pub version: u32,
    pub radial_nodes: usize,
    pub theta_nodes: usize,
    /// `"chebyshev-lobatto"` on `[0, 1]`.
    pub radial_grid: String,
    pub parametrization: Parametrization,
    pub dtype: String,
    pub byte_order: String,
}

impl ProfileSidecar {
    pub fn for_profile(v: &SelfSimilarProfile) -> Self {
        Self {
            format: PROFILE_FORMAT.into(),
            version: PROFILE_FORMAT_VERSION,
            radial_nodes: v.grid().radial_len(),
            theta_nodes: v.grid().theta_len(),
            radial_grid: "chebyshev-lobatto".into(),
            parametrization: v.parametrization(),
            dtype: "f64".into(),
            byte_order: "little".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.format != PROFILE_FORMAT || self.version != PROFILE_FORMAT_VERSION {
            return Err(Error::Decode(format!(
                "unknown format {:?} version {}",
                self.format, self.version
            )));
        }
        if self.radial_grid != "chebyshev-lobatto" {
            return Err(Error::Decode(format!("unknown radial grid {:?}", self.radial_grid)));
        }
        if self.dtype != "f64" || self.byte_order != "little" {
            return Err(Error::Decode(format!(
                "unsupported element type {}/{}",
                self.dtype, self.byte_order
            )));
        }
        if !(2..=MAX_NODES).contains(&self.radial_nodes)
            || !(MIN_THETA_NODES..=MAX_NODES).contains(&self.theta_nodes)
            || !self.theta_nodes.is_multiple_of(2)
        {
            return Err(Error::Decode(format!(
                "bad grid shape {}x{}",
                self.radial_nodes, self.theta_nodes
            )));
        }
        Ok(())
    }
}

pub fn encode_profile(v: &SelfSimilarProfile) -> (ProfileSidecar, Vec<u8>) {
    let mut payload = Vec::with_capacity(24 * v.values().len());
    for x in v.values().iter().flatten() {
        payload.extend_from_slice(&x.to_le_bytes());
    }
    (ProfileSidecar::for_profile(v), payload)
}

/// Validates the sidecar and the payload length before building the grid.
pub fn decode_profile(sidecar_json: &str, payload: &[u8]) -> Result<SelfSimilarProfile> {
    let sidecar: ProfileSidecar =
        serde_json::from_str(sidecar_json).map_err(|e| Error::Decode(format!("sidecar: {e}")))?;
    sidecar.validate()?;
    let expected = 24 * sidecar.radial_nodes * sidecar.theta_nodes;
    if payload.len() != expected {
        return Err(Error::Decode(format!(
            "payload has {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let values: Vec<[f64; 3]> = payload
        .chunks_exact(24)
        .map(|p| std::array::from_fn(|k| f64::from_le_bytes(p[8 * k..8 * k + 8].try_into().expect("8 bytes"))))
        .collect();
    let grid = PolarGrid::new(sidecar.radial_nodes, sidecar.theta_nodes)
        .map_err(|e| Error::Decode(e.to_string()))?;
    SelfSimilarProfile::new(&grid, sidecar.parametrization, values).map_err(|e| Error::Decode(e.to_string()))
}

/// Writes `<stem>.bin` and `<stem>.json`.
pub fn write_profile(stem: &Path, v: &SelfSimilarProfile) -> Result<(PathBuf, PathBuf)> {
    let (sidecar, payload) = encode_profile(v);
    let bin = stem.with_extension("bin");
    let json = stem.with_extension("json");
    std::fs::write(&bin, payload)?;
    std::fs::write(&json, serde_json::to_string_pretty(&sidecar)?)?;
    Ok((bin, json))
}

pub fn read_profile(stem: &Path) -> Result<SelfSimilarProfile> {
    let sidecar = std::fs::read_to_string(stem.with_extension("json"))?;
    let payload = std::fs::read(stem.with_extension("bin"))?;
    decode_profile(&sidecar, &payload)
}

/// `rho,identity` at every interior node.
pub fn identity_to_csv<W: Write>(v: &SelfSimilarProfile, mut out: W) -> Result<()> {
    writeln!(out, "rho,identity")?;
    for (rho, value) in identity_profile(v) {
        writeln!(out, "{rho:e},{value:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SelfSimilarProfile {
        let g = PolarGrid::new(17, 8).unwrap();
        SelfSimilarProfile::from_fn(&g, Parametrization::Sigma, |r, t| {
            [r * t.cos(), r * r * (2.0 * t).sin(), 0.25]
        })
        .unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let v = sample();
        let (sidecar, payload) = encode_profile(&v);
        let json = serde_json::to_string(&sidecar).unwrap();
        let w = decode_profile(&json, &payload).unwrap();
        assert_eq!(w.parametrization(), Parametrization::Sigma);
        assert_eq!(w.values(), v.values());
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let v = sample();
        write_profile(&dir.path().join("v"), &v).unwrap();
        assert_eq!(read_profile(&dir.path().join("v")).unwrap().values(), v.values());
    }

    #[test]
    fn rejects_malformed_input() {
        let v = sample();
        let (sidecar, payload) = encode_profile(&v);
        let json = serde_json::to_string(&sidecar).unwrap();
        assert!(decode_profile(&json, &payload[..payload.len() - 1]).is_err());
        assert!(decode_profile("{}", &payload).is_err());
        let mut bad = sidecar.clone();
        bad.theta_nodes = 7;
        assert!(decode_profile(&serde_json::to_string(&bad).unwrap(), &payload).is_err());
        let mut nan = payload.clone();
        nan[200..208].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(decode_profile(&json, &nan).is_err());
        // pole ring must be single-valued
        let mut split = payload.clone();
        split[24..32].copy_from_slice(&5.0f64.to_le_bytes());
        assert!(decode_profile(&json, &split).is_err());
    }

    #[test]
    fn identity_csv_has_interior_rows() {
        let v = sample();
        let mut out = Vec::new();
        identity_to_csv(&v, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("rho,identity\n"));
        assert_eq!(text.lines().count(), 1 + identity_profile(&v).len());
    }
}
