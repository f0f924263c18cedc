//! The encoded-dataset exchange file.
//!
//! ```text
//! ppcard-bf v1, ell=200, epsilon=1, provider=p0, n=2
//! 8f03...
//! 0c11...
//! ```
//!
//! One filter per line in lowercase hex (see [`BloomFilter::to_hex`]). Ground
//! truth travels in a separate sidecar with one entity id per line.

use std::io::{BufRead, Write};

use crate::bloom::BloomFilter;
use crate::error::{Error, Result};
use crate::ldp::EncodedDataset;

pub const MAGIC: &str = "ppcard-bf v1";

pub fn header_line(ds: &EncodedDataset) -> String {
    format!(
        "{MAGIC}, ell={}, epsilon={}, provider={}, n={}",
        ds.ell,
        ds.epsilon,
        ds.provider_id,
        ds.filters.len()
    )
}

pub fn write_dataset<W: Write>(mut w: W, ds: &EncodedDataset) -> Result<()> {
    if ds.provider_id.contains([',', '\n', '\r']) {
        return Err(Error::param("provider id may not contain commas or newlines"));
    }
    writeln!(w, "{}", header_line(ds))?;
    for f in &ds.filters {
        writeln!(w, "{}", f.to_hex())?;
    }
    Ok(())
}

struct Header {
    ell: usize,
    epsilon: f64,
    provider: String,
    n: usize,
}

fn parse_header(line: &str) -> Result<Header> {
    let bad = |msg: String| Error::Format { line: 1, msg };
    let mut parts = line.split(", ");
    if parts.next() != Some(MAGIC) {
        return Err(bad(format!("expected header starting with {MAGIC:?}")));
    }
    let mut field = |name: &str| -> Result<String> {
        let part = parts
            .next()
            .ok_or_else(|| bad(format!("missing field {name}")))?;
        part.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| bad(format!("expected {name}=..., got {part:?}")))
    };
    let ell = field("ell")?
        .parse()
        .map_err(|e| bad(format!("ell: {e}")))?;
    let epsilon = field("epsilon")?
        .parse()
        .map_err(|e| bad(format!("epsilon: {e}")))?;
    let provider = field("provider")?;
    let n = field("n")?.parse().map_err(|e| bad(format!("n: {e}")))?;
    if parts.next().is_some() {
        return Err(bad("trailing header fields".into()));
    }
    if ell == 0 {
        return Err(bad("ell must be positive".into()));
    }
    Ok(Header {
        ell,
        epsilon,
        provider,
        n,
    })
}

pub fn read_dataset<R: BufRead>(r: R) -> Result<EncodedDataset> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(line) => parse_header(line?.trim_end())?,
        None => {
            return Err(Error::Format {
                line: 1,
                msg: "empty exchange file".into(),
            })
        }
    };
    let mut filters = Vec::with_capacity(header.n);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let bf = BloomFilter::from_hex(header.ell, line).map_err(|e| Error::Format {
            line: i + 2,
            msg: e.to_string(),
        })?;
        filters.push(bf);
    }
    if filters.len() != header.n {
        return Err(Error::Format {
            line: filters.len() + 2,
            msg: format!("header declares n={} but {} filters follow", header.n, filters.len()),
        });
    }
    if filters.is_empty() {
        return Err(Error::Format {
            line: 2,
            msg: "exchange file holds no filters".into(),
        });
    }
    EncodedDataset::new(header.provider, header.epsilon, filters)
}

pub fn write_ground_truth<W: Write>(mut w: W, ids: &[String]) -> Result<()> {
    for id in ids {
        writeln!(w, "{id}")?;
    }
    Ok(())
}

pub fn read_ground_truth<R: BufRead>(r: R) -> Result<Vec<String>> {
    r.lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| Ok(l?.trim().to_string()))
        .collect()
}
