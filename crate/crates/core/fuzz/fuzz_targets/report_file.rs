#![no_main]

use libfuzzer_sys::fuzz_target;
use panel_rectify::files::Report;

fuzz_target!(|data: &[u8]| {
    let _ = Report::from_slice(data);
});
