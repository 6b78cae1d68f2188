//! Table schedules built from raw `(time, value)` pairs.

#![no_main]

use libfuzzer_sys::fuzz_target;
use qosc_core::schedule::{CubicSpline, Schedule};

fuzz_target!(|data: &[u8]| {
    let words: Vec<f64> = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let (times, values): (Vec<f64>, Vec<f64>) = words.chunks_exact(2).map(|p| (p[0], p[1])).unzip();
    let Ok(spline) = CubicSpline::new(times.clone(), values.clone()) else { return };
    let s = Schedule::Table(spline);
    s.validate().expect("a built table is valid");
    for (&t, &v) in times.iter().zip(&values) {
        let j = s.eval(t);
        // the spline interpolates whenever its moments did not overflow
        if j.d2.is_finite() {
            assert_eq!(j.value, v);
        }
    }
});
