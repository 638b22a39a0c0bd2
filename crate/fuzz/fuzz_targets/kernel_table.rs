#![no_main]
use libfuzzer_sys::fuzz_target;
use scz_core::kernels::{KernelModel, TableKernel};

fuzz_target!(|data: &[u8]| {
    if let Ok(k) = TableKernel::from_reader("fuzz", data) {
        let _ = k.eval(&[0.0; 3], &[1.0, 0.0, 0.0]);
    }
});
