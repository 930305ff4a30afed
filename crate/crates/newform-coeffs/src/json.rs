use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::{check_recursion, CoeffTable, NewformError, Provenance};

pub const TABLE_FORMAT_TAG: &str = "coeff-table/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    format: String,
    level: u64,
    weight: u32,
    provenance: Provenance,
    a: Vec<String>,
}

/// Refuses to write a table that fails the recursion check.
pub fn table_to_json(t: &CoeffTable) -> Result<String, NewformError> {
    let report = check_recursion(t);
    if let Some(f) = report.first_failure {
        return Err(NewformError::Rejected(f));
    }
    let file = TableFile {
        format: TABLE_FORMAT_TAG.into(),
        level: t.level,
        weight: t.weight,
        provenance: t.provenance,
        a: t.a.iter().map(|x| x.to_string()).collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| NewformError::Schema(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Loads a table; the result is tagged `File` and must pass the recursion check.
pub fn table_from_json(text: &str) -> Result<CoeffTable, NewformError> {
    let file: TableFile = serde_json::from_str(text).map_err(|e| NewformError::Schema(e.to_string()))?;
    if file.format != TABLE_FORMAT_TAG {
        return Err(NewformError::Schema(format!("unknown format {:?}", file.format)));
    }
    let a = file
        .a
        .iter()
        .enumerate()
        .map(|(i, s)| s.parse::<BigInt>().map_err(|_| NewformError::Schema(format!("a[{i}]: not an integer: {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let t = CoeffTable { level: file.level, weight: file.weight, a, provenance: Provenance::File };
    let report = check_recursion(&t);
    if let Some(f) = report.first_failure {
        return Err(NewformError::Rejected(f));
    }
    Ok(t)
}
