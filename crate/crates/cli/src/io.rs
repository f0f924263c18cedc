//! Reading and writing the on-disk formats.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use ppcard_core::clustering::PuritySweep;
use ppcard_core::exchange;
use ppcard_core::{EncodedDataset, PlainRecord, RecordSchema};

use crate::error::{CliError, CliResult, Context};

pub const ENTITY_ID_COLUMN: &str = "entity_id";

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).at(dir)?;
    }
    Ok(BufWriter::new(File::create(path).at(path)?))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    Ok(BufReader::new(File::open(path).at(path)?))
}

pub fn read_schema(path: &Path) -> CliResult<RecordSchema> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read schema: {e}")).at(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(e.to_string()).at(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::internal(e.to_string()).at(path))?;
    writeln!(w).at(path)?;
    w.flush().at(path)
}

/// Header is the schema's attribute names, plus `entity_id` when any record
/// carries one.
pub fn write_records(path: &Path, schema: &RecordSchema, records: &[PlainRecord]) -> CliResult<()> {
    let with_ids = records.iter().any(|r| r.entity_id.is_some());
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header: Vec<&str> = schema.attributes().iter().map(|a| a.name.as_str()).collect();
    if with_ids {
        header.push(ENTITY_ID_COLUMN);
    }
    let csv_err = |e: csv::Error| CliError::data(e.to_string()).at(path);
    w.write_record(&header).map_err(csv_err)?;
    for r in records {
        let mut row: Vec<&str> = r.values.iter().map(String::as_str).collect();
        if with_ids {
            row.push(r.entity_id.as_deref().unwrap_or(""));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().at(path)
}

/// Reads records whose columns are matched to the schema by name. Extra
/// columns are ignored; an `entity_id` column, if present, fills
/// [`PlainRecord::entity_id`].
pub fn read_records(path: &Path, schema: &RecordSchema) -> CliResult<Vec<PlainRecord>> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let csv_err = |e: csv::Error| CliError::data(e.to_string()).at(path);
    let header = r.headers().map_err(csv_err)?.clone();
    let col = |name: &str| header.iter().position(|h| h.trim() == name);
    let cols: Vec<usize> = schema
        .attributes()
        .iter()
        .map(|a| col(&a.name).ok_or_else(|| CliError::data(format!("missing column {:?}", a.name)).at(path)))
        .collect::<CliResult<_>>()?;
    let id_col = col(ENTITY_ID_COLUMN);
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let get = |c: usize| {
            row.get(c)
                .map(str::to_string)
                .ok_or_else(|| CliError::data(format!("line {}: missing field {c}", i + 2)).at(path))
        };
        let values = cols.iter().map(|&c| get(c)).collect::<CliResult<Vec<_>>>()?;
        let entity_id = match id_col {
            Some(c) => Some(get(c)?).filter(|s| !s.is_empty()),
            None => None,
        };
        out.push(PlainRecord::new(values, entity_id));
    }
    Ok(out)
}

pub fn write_exchange(path: &Path, ds: &EncodedDataset) -> CliResult<()> {
    let mut w = create(path)?;
    exchange::write_dataset(&mut w, ds).at(path)?;
    w.flush().at(path)
}

pub fn read_exchange(path: &Path) -> CliResult<EncodedDataset> {
    exchange::read_dataset(open(path)?).at(path)
}

pub fn write_truth(path: &Path, ids: &[String]) -> CliResult<()> {
    let mut w = create(path)?;
    exchange::write_ground_truth(&mut w, ids).at(path)?;
    w.flush().at(path)
}

pub fn read_truth(path: &Path) -> CliResult<Vec<String>> {
    exchange::read_ground_truth(open(path)?).at(path)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Columns `k, Purity_k, silhouette, CH, inertia, input_clusters`.
pub fn write_sweep(path: &Path, sweep: &PuritySweep) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let csv_err = |e: csv::Error| CliError::data(e.to_string()).at(path);
    w.write_record(["k", "Purity_k", "silhouette", "CH", "inertia", "input_clusters"])
        .map_err(csv_err)?;
    for e in &sweep.entries {
        w.write_record([
            e.k.to_string(),
            e.purity.to_string(),
            opt(e.silhouette),
            opt(e.calinski_harabasz),
            e.inertia.to_string(),
            e.input_clusters.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().at(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_roundtrip_and_column_order() {
        let dir = tempfile::tempdir().unwrap();
        let schema = RecordSchema::voter();
        let recs = vec![
            PlainRecord::new(
                ["ann", "lee", "cary", "27511", "f"].map(String::from).to_vec(),
                Some("ent1".into()),
            ),
            PlainRecord::new(
                ["bo", "o'neil, jr", "apex", "27502", "m"].map(String::from).to_vec(),
                Some("ent2".into()),
            ),
        ];
        let p = dir.path().join("r.csv");
        write_records(&p, &schema, &recs).unwrap();
        assert_eq!(read_records(&p, &schema).unwrap(), recs);

        let shuffled = dir.path().join("s.csv");
        std::fs::write(&shuffled, "gender,postcode,extra,suburb,surname,given_name\nf,27511,x,cary,lee,ann\n").unwrap();
        let got = read_records(&shuffled, &schema).unwrap();
        assert_eq!(got[0].values, recs[0].values);
        assert_eq!(got[0].entity_id, None);

        let missing = dir.path().join("m.csv");
        std::fs::write(&missing, "given_name,surname\nann,lee\n").unwrap();
        assert_eq!(read_records(&missing, &schema).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn schema_errors_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(read_schema(&dir.path().join("none.json")).unwrap_err().exit_code(), 2);
        let p = dir.path().join("dup.json");
        std::fs::write(&p, r#"{"attributes":[{"name":"a","kind":"string"},{"name":"a","kind":"string"}]}"#).unwrap();
        assert_eq!(read_schema(&p).unwrap_err().exit_code(), 2);
    }
}
