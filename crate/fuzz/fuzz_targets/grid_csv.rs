#![no_main]
use libfuzzer_sys::fuzz_target;
use scz_core::grid::{Encoding, GridFunction};

// Parsed grids must survive a CSV round trip unchanged.
fuzz_target!(|data: &[u8]| {
    if let Ok(f) = GridFunction::from_bytes(data) {
        let again = GridFunction::from_bytes(&f.to_bytes(Encoding::Csv)).expect("re-read own CSV");
        assert_eq!(f.domain(), again.domain());
        assert!(f.values().iter().zip(again.values()).all(|(a, b)| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())));
    }
});
