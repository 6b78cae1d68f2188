#![no_main]

use libfuzzer_sys::fuzz_target;
use qosc_cli::scenario::Tolerances;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = std::str::from_utf8(data) else { return };
    let mut t = Tolerances::default();
    if t.apply_override(spec).is_ok() {
        t.validate().expect("accepted override must leave valid tolerances");
    } else {
        assert_eq!(t, Tolerances::default());
    }
});
