//! Kernels tabulated on a set of node pairs, read from CSV.
//!
//! The header is `x1,…,xd,y1,…,yd,k` and fixes d; every row gives K at one pair. Lookups
//! match coordinates after rounding to 10⁻⁹, so the table is meant for pairs of grid nodes.

use super::{KernelDecl, KernelModel, KernelValue, SczType};
use crate::geometry::{Point, MAX_DIM};
use crate::{Error, Result};
use std::collections::HashMap;
use std::io::Read;

const KEY_SCALE: f64 = 1e9;
/// Coordinates beyond this magnitude cannot be keyed exactly.
const MAX_COORD: f64 = 1e6;

type Key = [i64; 2 * MAX_DIM];

#[derive(Clone, Debug)]
pub struct TableKernel {
    name: String,
    dim: usize,
    decl: KernelDecl,
    values: HashMap<Key, f64>,
}

fn key(d: usize, x: &Point, y: &Point) -> Key {
    let mut k = [0; 2 * MAX_DIM];
    for a in 0..d {
        k[a] = (x[a] * KEY_SCALE).round() as i64;
        k[MAX_DIM + a] = (y[a] * KEY_SCALE).round() as i64;
    }
    k
}

impl TableKernel {
    /// Parses a table; the kernel is declared pointwise with `c = 0`, `m = 1`, `δ = 1` until
    /// [`TableKernel::with_decl`] says otherwise.
    pub fn from_reader(name: &str, input: impl Read) -> Result<Self> {
        let bad = |s: String| Error::KernelTable(s);
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers()?.clone();
        let cols = headers.len();
        if cols % 2 == 0 || !(3..=2 * MAX_DIM + 1).contains(&cols) {
            return Err(bad(format!("{cols} columns; expected 2d + 1 with d ≤ {MAX_DIM}")));
        }
        let d = (cols - 1) / 2;
        let expected: Vec<String> = (1..=d)
            .map(|i| format!("x{i}"))
            .chain((1..=d).map(|i| format!("y{i}")))
            .chain(std::iter::once("k".to_string()))
            .collect();
        if headers.iter().ne(expected.iter().map(String::as_str)) {
            return Err(bad(format!("header must be {}", expected.join(","))));
        }
        let mut values = HashMap::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let line = row + 2;
            if record.len() != cols {
                return Err(bad(format!("line {line} has {} fields", record.len())));
            }
            let mut nums = [0.0; 2 * MAX_DIM + 1];
            for (i, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| bad(format!("line {line}: `{field}` is not a number")))?;
                if !v.is_finite() {
                    return Err(bad(format!("line {line}: non-finite entry")));
                }
                nums[i] = v;
            }
            let (mut x, mut y) = ([0.0; MAX_DIM], [0.0; MAX_DIM]);
            x[..d].copy_from_slice(&nums[..d]);
            y[..d].copy_from_slice(&nums[d..2 * d]);
            if x.iter().chain(y.iter()).any(|c| c.abs() > MAX_COORD) {
                return Err(bad(format!("line {line}: coordinate magnitude above {MAX_COORD}")));
            }
            if x == y {
                return Err(bad(format!("line {line}: diagonal pair")));
            }
            if values.insert(key(d, &x, &y), nums[2 * d]).is_some() {
                return Err(bad(format!("line {line}: duplicate pair")));
            }
        }
        if values.is_empty() {
            return Err(bad("no rows".into()));
        }
        let decl = KernelDecl { tag: SczType::Pointwise, c: 0.0, m: 1.0, delta: 1.0 };
        Ok(Self { name: name.to_string(), dim: d, decl, values })
    }

    pub fn from_bytes(name: &str, bytes: &[u8]) -> Result<Self> {
        Self::from_reader(name, bytes)
    }

    pub fn with_decl(mut self, decl: KernelDecl) -> Result<Self> {
        decl.validate()?;
        self.decl = decl;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl KernelModel for TableKernel {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &Point, y: &Point) -> Result<KernelValue> {
        match self.values.get(&key(self.dim, x, y)) {
            Some(v) => Ok([*v, 0.0, 0.0]),
            None if x == y => Err(Error::CoincidentPoints(*x)),
            None => Err(Error::KernelTable(format!("pair {x:?}, {y:?} is not tabulated"))),
        }
    }
    fn decl(&self) -> KernelDecl {
        self.decl
    }
    fn off_grid(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;

    #[test]
    fn parses_and_looks_up() {
        let csv = "x1,y1,k\n0,0.5,2\n0.5,0,-1.5\n0.1,0.3,1e-3\n";
        let t = TableKernel::from_bytes("t", csv.as_bytes()).unwrap();
        assert_eq!(t.dim(), 1);
        assert_eq!(t.len(), 3);
        assert_eq!(t.eval(&point(&[0.0]), &point(&[0.5])).unwrap()[0], 2.0);
        // 0.1 + 0.2 is not 0.3 in floating point, but rounds to the same key.
        assert_eq!(t.eval(&point(&[0.1]), &point(&[0.1 + 0.2])).unwrap()[0], 1e-3);
        assert!(t.eval(&point(&[0.0]), &point(&[0.25])).is_err());
    }

    #[test]
    fn two_dimensional_with_spaces() {
        let csv = "x1, x2, y1, y2, k\n0, 0, 1, 1, 0.25\n";
        let t = TableKernel::from_bytes("t", csv.as_bytes()).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.eval(&point(&[0.0, 0.0]), &point(&[1.0, 1.0])).unwrap()[0], 0.25);
    }

    #[test]
    fn rejects_malformed_tables() {
        for bad in [
            "",
            "x1,y1\n0,1\n",
            "a,b,k\n0,1,2\n",
            "x1,y1,k\n",
            "x1,y1,k\n0,1\n",
            "x1,y1,k\n0,1,nan\n",
            "x1,y1,k\n0,1,abc\n",
            "x1,y1,k\n0,0,1\n",
            "x1,y1,k\n0,1,1\n0,1,2\n",
            "x1,y1,k\n1e300,1,2\n",
            "x1,x2,x3,x4,y1,y2,y3,y4,k\n0,0,0,0,1,1,1,1,1\n",
        ] {
            assert!(TableKernel::from_bytes("t", bad.as_bytes()).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn drives_the_grid_operator_without_a_diagonal_cell() {
        use crate::grid::{GridDomain, GridFunction};
        use crate::kernels::KernelOperator;
        let g = GridDomain::new(1, 1.0, 5).unwrap();
        let mut csv = String::from("x1,y1,k\n");
        for x in g.nodes() {
            for y in g.nodes().filter(|y| *y != x) {
                csv.push_str(&format!("{},{},{}\n", x[0], y[0], (x[0] - y[0]).abs()));
            }
        }
        let t = TableKernel::from_bytes("t", csv.as_bytes()).unwrap();
        let f = GridFunction::constant(g, 1.0).unwrap();
        let tf = KernelOperator::new(&t, g, 0).unwrap().apply(&f).unwrap();
        // At x = −1: h Σ |x − y| over the other four nodes = 0.5 (0.5 + 1 + 1.5 + 2).
        assert!((tf.values()[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn declaration_is_validated() {
        let t = TableKernel::from_bytes("t", b"x1,y1,k\n0,1,1\n").unwrap();
        let decl = KernelDecl { tag: SczType::Integral { s: 1.0 }, c: 1.0, m: 1.0, delta: 1.0 };
        assert!(t.with_decl(decl).is_err());
    }
}
