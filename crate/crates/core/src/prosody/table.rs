//! CSV serialization of feature vectors.
//!
//! Columns: `utterance_id`, `scope`, `normalized`, then the 20 feature ids in
//! canonical order. Missing values are written as `NA`.

use std::io::{Read, Write};

use super::{FeatureId, ProsodicFeatureVector, Scope, FEATURE_COUNT};

pub const MISSING_TOKEN: &str = "NA";

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub utterance_id: String,
    pub vector: ProsodicFeatureVector,
}

pub fn header() -> Vec<String> {
    ["utterance_id", "scope", "normalized"]
        .into_iter()
        .map(String::from)
        .chain(FeatureId::ALL.iter().map(|f| f.as_str().to_string()))
        .collect()
}

pub fn write_features_csv<W: Write>(out: W, rows: &[FeatureRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header())?;
    for row in rows {
        let mut record = vec![
            row.utterance_id.clone(),
            row.vector.scope.to_string(),
            row.vector.normalized.to_string(),
        ];
        record.extend(row.vector.values().iter().map(|v| match v {
            Some(x) => x.to_string(),
            None => MISSING_TOKEN.to_string(),
        }));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn invalid(msg: String) -> csv::Error {
    csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, msg))
}

pub fn read_features_csv<R: Read>(input: R) -> csv::Result<Vec<FeatureRow>> {
    let mut r = csv::Reader::from_reader(input);
    let expected = header();
    if r.headers()?.iter().ne(expected.iter().map(String::as_str)) {
        return Err(invalid("unexpected feature CSV header".into()));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let scope: Scope = record[1].parse().map_err(invalid)?;
        let normalized: bool = record[2]
            .parse()
            .map_err(|e| invalid(format!("bad normalized flag: {e}")))?;
        let mut values = [None; FEATURE_COUNT];
        for (i, field) in record.iter().skip(3).enumerate() {
            values[i] = match field {
                MISSING_TOKEN => None,
                s => Some(
                    s.parse::<f64>()
                        .map_err(|e| invalid(format!("bad value `{s}`: {e}")))?,
                ),
            };
        }
        let mut vector = ProsodicFeatureVector::new(scope, values);
        vector.normalized = normalized;
        rows.push(FeatureRow {
            utterance_id: record[0].to_string(),
            vector,
        });
    }
    Ok(rows)
}
