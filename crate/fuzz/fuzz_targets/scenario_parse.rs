//! Scenario documents: parsing and validation must reject, never panic.

#![no_main]

use libfuzzer_sys::fuzz_target;
use qosc_cli::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sc) = Scenario::from_toml(text) {
        // a valid scenario has a usable window
        let times = sc.output_times();
        assert!(times.len() >= 2);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }
});
