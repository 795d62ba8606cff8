#![no_main]

use cmcwave_core::spectral::io::{decode_field, encode_field};
use libfuzzer_sys::fuzz_target;

// Input layout: u16 LE sidecar length, sidecar JSON, payload bytes.
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let len = u16::from_le_bytes([data[0], data[1]]) as usize;
    let rest = &data[2..];
    if len > rest.len() {
        return;
    }
    let Ok(sidecar) = std::str::from_utf8(&rest[..len]) else { return };
    if let Ok(field) = decode_field(sidecar, &rest[len..]) {
        let (_, payload) = encode_field(&field);
        assert_eq!(payload.len(), rest.len() - len);
    }
});
