#![no_main]

use libfuzzer_sys::fuzz_target;
use panel_rectify::rectify::RasterImage;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = RasterImage::from_png_bytes(data) {
        let expected = img.width as usize * img.height as usize * img.channels as usize;
        assert_eq!(img.data.len(), expected);
    }
});
