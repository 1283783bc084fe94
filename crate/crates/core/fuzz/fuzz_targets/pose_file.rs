#![no_main]

use libfuzzer_sys::fuzz_target;
use panel_rectify::files::PoseFile;

fuzz_target!(|data: &[u8]| {
    if let Ok(file) = PoseFile::from_slice(data) {
        let json = file.to_json().unwrap();
        assert_eq!(PoseFile::from_slice(json.as_bytes()).unwrap(), file);
    }
});
