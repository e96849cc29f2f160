//! Canonical dataset CSV: `x,y,rss_0,...,rss_{L-1}[,split]`.
//!
//! UTF-8, comma-separated, no quoting. Floats are written with Rust's
//! shortest-round-trip formatting, so a save/load cycle is bit-identical.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{FingerprintDataset, Point2, RssSample, SignalError, Split};

pub fn save_csv(ds: &FingerprintDataset, path: &Path) -> Result<(), SignalError> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_csv(ds, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv(ds: &FingerprintDataset, w: &mut impl Write) -> Result<(), SignalError> {
    let mut header = String::from("x,y");
    for l in 0..ds.num_rus {
        header.push_str(&format!(",rss_{l}"));
    }
    if ds.split_tags.is_some() {
        header.push_str(",split");
    }
    writeln!(w, "{header}")?;
    for (i, s) in ds.samples.iter().enumerate() {
        let mut line = format!("{},{}", s.rp.x, s.rp.y);
        for v in &s.rss {
            line.push(',');
            line.push_str(&v.to_string());
        }
        if let Some(tags) = &ds.split_tags {
            line.push(',');
            line.push_str(tags[i].as_str());
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn load_csv(path: &Path) -> Result<FingerprintDataset, SignalError> {
    let file = File::open(path)?;
    read_csv(BufReader::new(file))
}

pub fn read_csv(r: impl BufRead) -> Result<FingerprintDataset, SignalError> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(SignalError::Parse { line: 1, msg: "empty file, expected a header".into() })?;
    let header = header?;
    let cols: Vec<&str> = header.trim_end_matches(['\r', '\n']).split(',').collect();
    if cols.len() < 3 || cols[0] != "x" || cols[1] != "y" {
        return Err(SignalError::Parse {
            line: 1,
            msg: format!("header must start with x,y,rss_0,...; got {header:?}"),
        });
    }
    let has_split = *cols.last().unwrap() == "split";
    let rss_cols = &cols[2..cols.len() - usize::from(has_split)];
    for (l, c) in rss_cols.iter().enumerate() {
        if *c != format!("rss_{l}") {
            return Err(SignalError::Parse {
                line: 1,
                msg: format!("expected column rss_{l}, got {c:?}"),
            });
        }
    }
    let num_rus = rss_cols.len();
    if num_rus == 0 {
        return Err(SignalError::Parse { line: 1, msg: "no rss_* columns".into() });
    }

    let mut ds = FingerprintDataset::new(num_rus);
    let mut tags = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = 2 + num_rus + usize::from(has_split);
        if fields.len() != expected {
            if fields.len().saturating_sub(2 + usize::from(has_split)) != num_rus {
                return Err(SignalError::DimensionMismatch {
                    line: line_no,
                    expected: num_rus,
                    got: fields.len().saturating_sub(2 + usize::from(has_split)),
                });
            }
            return Err(SignalError::Parse {
                line: line_no,
                msg: format!("expected {expected} fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64, SignalError> {
            s.parse::<f64>().map_err(|_| SignalError::Parse {
                line: line_no,
                msg: format!("bad {what} value {s:?}"),
            })
        };
        let x = parse(fields[0], "x")?;
        let y = parse(fields[1], "y")?;
        let mut rss = Vec::with_capacity(num_rus);
        for f in &fields[2..2 + num_rus] {
            rss.push(parse(f, "rss")?);
        }
        if has_split {
            let tag = fields[expected - 1];
            tags.push(Split::parse(tag).ok_or(SignalError::Parse {
                line: line_no,
                msg: format!("bad split tag {tag:?}, expected train|val|test"),
            })?);
        }
        ds.samples.push(RssSample { rp: Point2::new(x, y), rss });
    }
    if has_split {
        ds.split_tags = Some(tags);
    }
    Ok(ds)
}
