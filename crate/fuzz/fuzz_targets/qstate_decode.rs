#![no_main]

use libfuzzer_sys::fuzz_target;
use qosc_core::dump;

fuzz_target!(|data: &[u8]| {
    if let Ok(state) = dump::decode(data) {
        assert_eq!(state.amplitudes.len(), state.grid.len());
        // byte-exact round trip, NaN payloads included
        assert_eq!(dump::encode(&state), data);
    }
});
