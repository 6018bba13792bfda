//! The `WSF1` text dump for scalar fields.
//!
//! ```text
//! WSF1 nx=<int> ny=<int> L=<float>
//! <ny values for column i = 0>
//! ...
//! <ny values for column i = nx>
//! ```
//!
//! Values are written with 17 significant digits, which round-trips every
//! finite `f64` bit for bit.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField};

pub fn to_string(u: &ScalarField) -> String {
    let g = u.grid;
    let mut out = String::with_capacity(g.len() * 25 + 64);
    let _ = writeln!(out, "WSF1 nx={} ny={} L={:?}", g.nx, g.ny, g.l);
    for i in 0..=g.nx {
        let mut first = true;
        for v in u.column(i) {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

fn header_field<'a>(tok: Option<&'a str>, key: &str) -> Result<&'a str> {
    tok.and_then(|t| t.strip_prefix(key))
        .ok_or_else(|| Error::Parse(format!("missing header field {key}")))
}

pub fn read(reader: impl Read) -> Result<ScalarField> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))??;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("WSF1") {
        return Err(Error::Parse("missing WSF1 magic".into()));
    }
    let nx: usize = header_field(toks.next(), "nx=")?
        .parse()
        .map_err(|e| Error::Parse(format!("nx: {e}")))?;
    let ny: usize = header_field(toks.next(), "ny=")?
        .parse()
        .map_err(|e| Error::Parse(format!("ny: {e}")))?;
    let l: f64 = header_field(toks.next(), "L=")?
        .parse()
        .map_err(|e| Error::Parse(format!("L: {e}")))?;
    let grid = Grid::new(l, nx, ny)?;
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..=nx {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing column {i}")))??;
        let before = values.len();
        for t in line.split_whitespace() {
            values.push(t.parse::<f64>().map_err(|e| Error::Parse(format!("column {i}: {e}")))?);
        }
        if values.len() - before != ny {
            return Err(Error::Parse(format!(
                "column {i} has {} values, expected {ny}",
                values.len() - before
            )));
        }
    }
    ScalarField::from_values(grid, values)
}

pub fn from_str(s: &str) -> Result<ScalarField> {
    read(s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(2.0, 8, 8).unwrap();
        let u = ScalarField::from_fn(g, |x, y| x + y);
        let s = to_string(&u);
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "WSF1 nx=8 ny=8 L=2.0");
        assert_eq!(s.lines().count(), 10);
        assert_eq!(lines.next().unwrap().split_whitespace().count(), 8);
    }

    #[test]
    fn rejects_malformed() {
        assert!(from_str("").is_err());
        assert!(from_str("WSF2 nx=8 ny=8 L=1").is_err());
        assert!(from_str("WSF1 nx=8 ny=8 L=1\n1 2 3\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_identical(
            vals in proptest::collection::vec(-1e300f64..1e300, 81 * 8),
            l in 1e-3f64..1e3,
        ) {
            let g = Grid::new(l, 80, 8).unwrap();
            let u = ScalarField::from_values(g, vals).unwrap();
            let back = from_str(&to_string(&u)).unwrap();
            prop_assert_eq!(back.grid, u.grid);
            for (a, b) in u.values.iter().zip(&back.values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
