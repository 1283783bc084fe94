//! Label mask decoding.

#![no_main]

use libfuzzer_sys::fuzz_target;
use panel_rectify::mask::LabelMask;

fuzz_target!(|data: &[u8]| {
    if let Ok(mask) = LabelMask::from_png_bytes(data) {
        assert_eq!(mask.labels.len(), mask.width as usize * mask.height as usize);
        let bytes = mask.to_png_bytes().unwrap();
        assert_eq!(LabelMask::from_png_bytes(&bytes).unwrap(), mask);
    }
});
