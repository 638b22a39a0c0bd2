//! The file formats read from disk: grid functions (CSV and binary) and kernel tables.
//! The fuzz corpus seeds double as fixtures so they cannot drift from the parsers.

use proptest::prelude::*;
use scz_core::grid::{Encoding, GridDomain, GridFunction};
use scz_core::kernels::{KernelModel, TableKernel};
use std::path::PathBuf;

fn corpus(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let b = std::fs::read(&p).unwrap();
            (p, b)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn grid_seeds_parse_and_round_trip() {
    for target in ["grid_csv", "grid_binary"] {
        for (path, bytes) in corpus(target) {
            let f = GridFunction::from_bytes(&bytes).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            for enc in [Encoding::Csv, Encoding::F64le] {
                assert_eq!(GridFunction::from_bytes(&f.to_bytes(enc)).unwrap(), f);
            }
        }
    }
}

#[test]
fn csv_seed_values() {
    let (_, bytes) = &corpus("grid_csv")[0];
    let f = GridFunction::from_bytes(bytes).unwrap();
    assert_eq!(f.values(), &[0.5, 1.0, 0.5]);
}

#[test]
fn table_seeds_parse() {
    for (path, bytes) in corpus("kernel_table") {
        TableKernel::from_reader("seed", bytes.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
    let (_, bytes) = &corpus("kernel_table")[0];
    let k = TableKernel::from_reader("seed", bytes.as_slice()).unwrap();
    assert_eq!(k.eval(&[-1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap()[0], 0.5);
}

#[test]
fn truncated_and_garbled_inputs_are_errors() {
    let (_, bytes) = &corpus("grid_binary")[0];
    assert!(GridFunction::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    assert!(GridFunction::from_bytes(b"").is_err());
    assert!(GridFunction::from_bytes(b"{}\n").is_err());
    let (_, csv) = &corpus("grid_csv")[0];
    let text = String::from_utf8(csv.clone()).unwrap().replace("\n0,1\n", "\n0.5,1\n");
    assert!(GridFunction::from_bytes(text.as_bytes()).is_err());
    assert!(TableKernel::from_reader("bad", "x1,y1\n0,1\n".as_bytes()).is_err());
    assert!(TableKernel::from_reader("bad", "x1,y1,k\n0,1,zz\n".as_bytes()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_grid_function_round_trips(d in 1usize..=3, n in 2usize..=6, half in 0.1f64..50.0, seed in any::<u64>()) {
        let domain = GridDomain::new(d, half, n).unwrap();
        let mut state = seed | 1;
        let values: Vec<f64> = (0..domain.node_count())
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                f64::from_bits(state >> 2) * if state & 1 == 0 { 1.0 } else { -1.0 }
            })
            .map(|v| if v.is_finite() { v } else { 0.0 })
            .collect();
        let f = GridFunction::new(domain, values).unwrap();
        for enc in [Encoding::Csv, Encoding::F64le] {
            prop_assert_eq!(&GridFunction::from_bytes(&f.to_bytes(enc)).unwrap(), &f);
        }
    }

    #[test]
    fn parsers_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
        let _ = GridFunction::from_bytes(&bytes);
        let _ = TableKernel::from_reader("p", bytes.as_slice());
    }
}
