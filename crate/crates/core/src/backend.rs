//! Text format for matrix backends.
//!
//! ```text
//! vnwb-backend v1
//! dims 2 2
//! weights 1/2 1/2
//! unit special
//! gen
//! (1/1+0/1 i) (0/1+0/1 i)
//! (0/1+0/1 i) (0/1+0/1 i)
//! --
//! (0/1+0/1 i) (0/1+0/1 i)
//! (0/1+0/1 i) (1/1+0/1 i)
//! end
//! gallery
//! construction amplification
//! m 2
//! ```
//!
//! Each `gen` block lists the generator's blocks row-major, blocks
//! separated by `--`. Lines starting with `#` are ignored. The optional
//! `gallery` section holds `key value` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::MatrixAlgebra;
use crate::matrix::{BlockMat, QMat};
use crate::scalar::{Gauss, Rational};
use crate::{Error, Result};

pub const HEADER: &str = "vnwb-backend v1";

#[derive(Clone, Debug)]
pub struct BackendFile {
    pub algebra: MatrixAlgebra,
    pub unit_special: bool,
    pub gallery: BTreeMap<String, String>,
}

fn fmt_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format(format!("line {}: {}", line + 1, msg.into()))
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// Parses `(a/b+c/d i)`, whitespace-insensitive.
pub fn parse_entry(s: &str) -> Option<Gauss> {
    let body: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = body.strip_prefix('(')?.strip_suffix(')')?;
    let inner = inner.strip_suffix('i')?;
    // split at the '+' separating the parts: first '+' after position 0
    let bytes = inner.as_bytes();
    let split = (1..bytes.len()).find(|&i| bytes[i] == b'+')?;
    let re = parse_rational(&inner[..split])?;
    let im = parse_rational(&inner[split + 1..])?;
    Some(Gauss::new(re, im))
}

pub fn entry_text(g: &Gauss) -> String {
    format!("({}/{}+{}/{} i)", g.re.numer(), g.re.denom(), g.im.numer(), g.im.denom())
}

/// Splits a matrix row into `( … )` groups.
pub fn split_entries(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match c {
            '(' => start = Some(i),
            ')' => {
                if let Some(s) = start.take() {
                    out.push(&line[s..=i]);
                }
            }
            _ => {}
        }
    }
    out
}

pub fn parse_backend(text: &str) -> Result<BackendFile> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let mut it = lines.into_iter().peekable();
    match it.next() {
        Some((_, HEADER)) => {}
        Some((i, _)) => return Err(fmt_err(i, format!("expected header `{HEADER}`"))),
        None => return Err(Error::Format("empty backend file".into())),
    }
    let mut dims: Option<Vec<usize>> = None;
    let mut weights: Option<Vec<Rational>> = None;
    let mut unit_special = true;
    let mut gens = Vec::new();
    let mut gallery = BTreeMap::new();
    while let Some((i, line)) = it.next() {
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match key {
            "dims" => {
                let d: std::result::Result<Vec<usize>, _> = rest.split_whitespace().map(str::parse).collect();
                dims = Some(d.map_err(|_| fmt_err(i, "bad block dimension"))?);
            }
            "weights" => {
                let w: Option<Vec<Rational>> = rest.split_whitespace().map(parse_rational).collect();
                weights = Some(w.ok_or_else(|| fmt_err(i, "bad trace weight"))?);
            }
            "unit" => {
                unit_special = match rest.trim() {
                    "special" => true,
                    "derived" => false,
                    _ => return Err(fmt_err(i, "unit must be `special` or `derived`")),
                }
            }
            "gen" => {
                let dims = dims.as_ref().ok_or_else(|| fmt_err(i, "`dims` must precede generators"))?;
                let mut blocks = vec![Vec::new()];
                loop {
                    let Some((j, l)) = it.next() else {
                        return Err(fmt_err(i, "unterminated generator"));
                    };
                    match l {
                        "end" => break,
                        "--" => blocks.push(Vec::new()),
                        _ => {
                            let row: Option<Vec<Gauss>> = split_entries(l).into_iter().map(parse_entry).collect();
                            let row = row.ok_or_else(|| fmt_err(j, "bad matrix entry"))?;
                            blocks.last_mut().expect("block").push(row);
                        }
                    }
                }
                if blocks.len() != dims.len() {
                    return Err(fmt_err(i, "generator block count differs from `dims`"));
                }
                let mut bm = Vec::new();
                for (rows, &d) in blocks.into_iter().zip(dims) {
                    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                        return Err(fmt_err(i, format!("generator block is not {d}x{d}")));
                    }
                    bm.push(QMat::from_rows(rows));
                }
                gens.push(BlockMat { blocks: bm });
            }
            "gallery" => {
                for (_, l) in it.by_ref() {
                    let (k, v) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
                    gallery.insert(k.to_string(), v.trim().to_string());
                }
            }
            _ => return Err(fmt_err(i, format!("unknown directive `{key}`"))),
        }
    }
    let dims = dims.ok_or_else(|| Error::Format("missing `dims`".into()))?;
    let weights = match weights {
        Some(w) => w,
        None if dims.len() == 1 => vec![Rational::one()],
        None => return Err(Error::Format("missing `weights`".into())),
    };
    let algebra = MatrixAlgebra::new(dims, weights, gens)?;
    Ok(BackendFile { algebra, unit_special, gallery })
}

pub fn write_backend(b: &BackendFile) -> String {
    let a = &b.algebra;
    let mut s = String::new();
    writeln!(s, "{HEADER}").ok();
    writeln!(s, "dims {}", a.dims.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")).ok();
    writeln!(s, "weights {}", a.weights.iter().map(Rational::to_string).collect::<Vec<_>>().join(" ")).ok();
    writeln!(s, "unit {}", if b.unit_special { "special" } else { "derived" }).ok();
    for g in &a.gens {
        writeln!(s, "gen").ok();
        for (bi, blk) in g.blocks.iter().enumerate() {
            if bi > 0 {
                writeln!(s, "--").ok();
            }
            for r in 0..blk.rows {
                let row: Vec<String> = (0..blk.cols).map(|c| entry_text(&blk[(r, c)])).collect();
                writeln!(s, "{}", row.join(" ")).ok();
            }
        }
        writeln!(s, "end").ok();
    }
    if !b.gallery.is_empty() {
        writeln!(s, "gallery").ok();
        for (k, v) in &b.gallery {
            writeln!(s, "{k} {v}").ok();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    const SAMPLE: &str = "vnwb-backend v1
dims 2 1
weights 2/3 1/3
gen
(1/1+0/1 i) (0/1 + 0/1 i)
(0/1+0/1 i) (0/1+-1/2 i)
--
(1/1+0/1 i)
end
gallery
construction fixed-point
";

    #[test]
    fn round_trip() {
        let b = parse_backend(SAMPLE).unwrap();
        assert_eq!(b.algebra.dims, vec![2, 1]);
        assert_eq!(b.algebra.gens[0].blocks[0][(1, 1)], Gauss::new(rat(0, 1), rat(-1, 2)));
        assert_eq!(b.gallery["construction"], "fixed-point");
        let again = parse_backend(&write_backend(&b)).unwrap();
        assert_eq!(again.algebra.gens, b.algebra.gens);
        assert_eq!(write_backend(&again), write_backend(&b));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_backend("vnwb-backend v2\n").is_err());
        let noncontraction = "vnwb-backend v1\ndims 1\ngen\n(2/1+0/1 i)\nend\n";
        assert!(parse_backend(noncontraction).is_err());
        let badw = "vnwb-backend v1\ndims 1 1\nweights 1/2 1/3\n";
        assert!(parse_backend(badw).is_err());
    }
}
