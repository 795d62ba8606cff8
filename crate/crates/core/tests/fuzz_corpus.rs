//! Runs the checked-in fuzz seeds through the decoders on stable.

use std::path::PathBuf;

use cmcwave_core::harness::{RunConfig, RunReport};
use cmcwave_core::self_similar::decode_profile;
use cmcwave_core::spectral::io::decode_field;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

fn split(data: &[u8]) -> (&str, &[u8]) {
    let len = u16::from_le_bytes([data[0], data[1]]) as usize;
    (std::str::from_utf8(&data[2..2 + len]).unwrap(), &data[2 + len..])
}

#[test]
fn run_config_seeds_parse_and_validate() {
    for (name, data) in seeds("run_config") {
        let c = RunConfig::from_json(std::str::from_utf8(&data).unwrap());
        assert!(c.is_ok(), "{name}: {c:?}");
    }
}

#[test]
fn report_seeds_decode() {
    for (name, data) in seeds("report_decode") {
        assert!(RunReport::from_json(std::str::from_utf8(&data).unwrap()).is_ok(), "{name}");
    }
}

#[test]
fn field_seeds_decode_and_truncation_is_rejected() {
    for (name, data) in seeds("field_decode") {
        let (sidecar, payload) = split(&data);
        assert!(decode_field(sidecar, payload).is_ok(), "{name}");
        assert!(decode_field(sidecar, &payload[..payload.len() - 1]).is_err(), "{name}");
    }
}

#[test]
fn profile_seeds_decode_and_truncation_is_rejected() {
    for (name, data) in seeds("profile_decode") {
        let (sidecar, payload) = split(&data);
        assert!(decode_profile(sidecar, payload).is_ok(), "{name}");
        assert!(decode_profile(sidecar, &payload[..payload.len() - 8]).is_err(), "{name}");
    }
}
