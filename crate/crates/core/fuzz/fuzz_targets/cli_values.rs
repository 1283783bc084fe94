//! Command-line value parsers.

#![no_main]

use libfuzzer_sys::fuzz_target;
use panel_rectify::cli::{parse_angles, parse_dims, parse_f64_list, parse_intrinsics};

fuzz_target!(|s: &str| {
    let _ = parse_f64_list(s, 3);
    let _ = parse_angles(s);
    let _ = parse_dims(s);
    if let Ok(k) = parse_intrinsics(s) {
        assert!(k.validate().is_ok());
    }
});
