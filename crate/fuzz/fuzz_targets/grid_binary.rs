#![no_main]
use libfuzzer_sys::fuzz_target;
use scz_core::grid::{Encoding, GridFunction};

fuzz_target!(|data: &[u8]| {
    if let Ok(f) = GridFunction::from_bytes(data) {
        let bytes = f.to_bytes(Encoding::F64le);
        let again = GridFunction::from_bytes(&bytes).expect("re-read own binary");
        assert_eq!(bytes, again.to_bytes(Encoding::F64le));
    }
});
