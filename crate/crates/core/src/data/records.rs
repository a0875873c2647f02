use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::Schema;
use crate::error::{Error, Result};
use crate::mwem::{ApproxDistribution, Histogram, HistogramDomain};

/// Rows as category indices, in schema column order.
pub type Record = Vec<usize>;

/// Reads a CSV whose header names the schema's columns in order and maps
/// every value to its category index.
pub fn read_records<R: Read>(reader: R, schema: &Schema) -> Result<Vec<Record>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let names: Vec<&str> = schema.columns().iter().map(|c| c.name.as_str()).collect();
    if header.iter().collect::<Vec<_>>() != names {
        return Err(Error::Data(format!(
            "CSV header {:?} does not match schema columns {:?}",
            header.iter().collect::<Vec<_>>(),
            names
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i as u64 + 2, |p| p.line());
        if rec.len() != names.len() {
            return Err(Error::Data(format!("line {line}: expected {} fields, found {}", names.len(), rec.len())));
        }
        let row = rec
            .iter()
            .zip(schema.columns())
            .map(|(v, col)| {
                col.index_of(v).ok_or_else(|| {
                    Error::Data(format!("line {line}, column {}: unknown category {v:?}", col.name))
                })
            })
            .collect::<Result<Record>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn load_csv(path: &Path, schema: &Schema) -> Result<Vec<Record>> {
    let file = File::open(path).map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    read_records(file, schema)
}

pub fn write_records<W: Write>(writer: W, schema: &Schema, rows: &[Record]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(schema.columns().iter().map(|c| c.name.as_str()))?;
    for row in rows {
        w.write_record(row.iter().zip(schema.columns()).map(|(&v, c)| c.categories[v].as_str()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, schema: &Schema, rows: &[Record]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Data(format!("cannot create {}: {e}", path.display())))?;
    write_records(file, schema, rows)
}

/// Cell counts of `records` over `domain`.
pub fn build_local_histogram(records: &[Record], domain: &HistogramDomain) -> Result<Histogram> {
    let mut h = Histogram::zeros(domain.size());
    for r in records {
        h.counts_mut()[domain.cell_index(r)?] += 1;
    }
    Ok(h)
}

/// `n` independent draws from `a / mass`, as records.
pub fn sample_synthetic(a: &ApproxDistribution, domain: &HistogramDomain, n: usize, seed: u64) -> Result<Vec<Record>> {
    if a.len() != domain.size() {
        return Err(Error::argument("distribution and domain sizes differ"));
    }
    let dist = WeightedIndex::new(a.weights()).map_err(|e| Error::argument(format!("cannot sample: {e}")))?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| domain.tuple(dist.sample(&mut rng))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Schema {
        Schema::parse("size|categorical|small,big\ncolor|categorical|red,green,blue|label\n").unwrap()
    }

    #[test]
    fn reads_rows_and_reports_unknown_values() {
        let s = schema();
        let rows = read_records("size,color\nsmall,blue\n big , red\n".as_bytes(), &s).unwrap();
        assert_eq!(rows, [vec![0, 2], vec![1, 0]]);
        assert!(read_records("size,color\n".as_bytes(), &s).unwrap().is_empty());
        let err = read_records("size,color\nsmall,blue\nsmall,purple\n".as_bytes(), &s).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("color") && err.contains("purple"), "{err}");
        assert!(read_records("color,size\n".as_bytes(), &s).is_err());
        assert!(read_records("size,color\nsmall\n".as_bytes(), &s).is_err());
    }

    #[test]
    fn write_then_read() {
        let s = schema();
        let rows = vec![vec![1, 1], vec![0, 0]];
        let mut buf = Vec::new();
        write_records(&mut buf, &s, &rows).unwrap();
        assert_eq!(read_records(buf.as_slice(), &s).unwrap(), rows);
    }

    #[test]
    fn histograms_add_across_holders() {
        let s = schema();
        let d = s.domain().unwrap();
        assert_eq!(build_local_histogram(&[], &d).unwrap().counts(), [0; 6]);
        assert_eq!(build_local_histogram(&[vec![1, 2]], &d).unwrap().counts(), [0, 0, 0, 0, 0, 1]);
        let rows: Vec<Record> = (0..30).map(|i| vec![i % 2, i % 3]).collect();
        let whole = build_local_histogram(&rows, &d).unwrap();
        let left = build_local_histogram(&rows[..11], &d).unwrap();
        let right = build_local_histogram(&rows[11..], &d).unwrap();
        assert_eq!(left.merged(&right).unwrap(), whole);
        assert_eq!(whole.total(), 30);
    }

    #[test]
    fn sampling() {
        let d = schema().domain().unwrap();
        let point = ApproxDistribution::from_weights(vec![0.0, 0.0, 0.0, 5.0, 0.0, 0.0]).unwrap();
        assert!(sample_synthetic(&point, &d, 20, 1).unwrap().iter().all(|r| r == &vec![1, 0]));

        let a = ApproxDistribution::from_weights(vec![1.0, 2.0, 3.0, 4.0, 5.0, 5.0]).unwrap();
        assert_eq!(sample_synthetic(&a, &d, 50, 7).unwrap(), sample_synthetic(&a, &d, 50, 7).unwrap());
        let n = 100_000;
        let rows = sample_synthetic(&a, &d, n, 9).unwrap();
        let h = build_local_histogram(&rows, &d).unwrap();
        for (c, w) in h.counts().iter().zip(a.weights()) {
            assert!((*c as f64 / n as f64 - w / a.mass()).abs() <= 0.01);
        }
    }
}
