//! Corner file parsing and validation.
//!
//!   cargo +nightly fuzz run corner_file

#![no_main]

use libfuzzer_sys::fuzz_target;
use panel_rectify::files::CornerFile;

fuzz_target!(|data: &[u8]| {
    if let Ok(file) = CornerFile::from_slice(data) {
        // Anything that validates must convert and round-trip.
        let set = file.corner_set().expect("validated file converts");
        let json = file.to_json().expect("serializes");
        let again = CornerFile::from_slice(json.as_bytes()).expect("round trip parses");
        assert_eq!(again.corner_set().unwrap(), set);
    }
});
