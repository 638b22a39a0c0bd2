//! Special functions not provided by `std`: the complex Gamma function.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(z) for complex `z` (Lanczos approximation with reflection for Re z < 1/2).
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (Complex64::new(PI, 0.0) * z).sin();
        return Complex64::new(PI, 0.0) / (s * gamma(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += *c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * acc
}
