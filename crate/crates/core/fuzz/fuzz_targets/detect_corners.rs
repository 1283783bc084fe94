//! Full detection pipeline on arbitrary small masks.
//!
//! The first two bytes give the width and height, the rest fill the label
//! plane row by row.

#![no_main]

use libfuzzer_sys::fuzz_target;
use panel_rectify::mask::{detect_corners, is_canonical_convex, DetectParams, LabelMask};

fuzz_target!(|data: &[u8]| {
    let [w, h, rest @ ..] = data else { return };
    let (w, h) = (*w as u32 + 1, *h as u32 + 1);
    let mut labels = vec![0u8; (w * h) as usize];
    for (slot, b) in labels.iter_mut().zip(rest) {
        *slot = b % 4;
    }
    let mask = LabelMask::new(w, h, labels).unwrap();
    if let Ok(d) = detect_corners(&mask, &DetectParams::default()) {
        for q in d.corners.quads() {
            assert!(is_canonical_convex(&q));
        }
    }
});
