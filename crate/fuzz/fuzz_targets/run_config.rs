#![no_main]

use cmcwave_core::harness::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = RunConfig::parse(text) {
        let again = RunConfig::parse(&config.to_json()).expect("serialized config reparses");
        assert_eq!(again.to_value(), config.to_value());
        let _ = config.validate();
    }
});
