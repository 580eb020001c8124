//! Deterministic report emission: canonical JSON with sorted keys and exact
//! rational strings, so byte-identical runs yield byte-identical files.

use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Serializes any value to JSON with object keys sorted.
///
/// Going through `serde_json::Value` normalizes map ordering (its object is
/// a sorted map), so the bytes do not depend on insertion or scheduling
/// order. All amounts serialize as canonical `"num/den"` strings.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report serialization cannot fail");
    let mut out = serde_json::to_string_pretty(&v).expect("json formatting cannot fail");
    out.push('\n');
    out
}

/// Writes a canonical JSON report to a file.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(canonical_json(value).as_bytes())
}

/// A simple CSV table for summary output; fields are escaped minimally
/// (quotes around anything containing a comma or quote).
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let escape = |s: &str| -> String {
        if s.contains(',') || s.contains('"') || s.contains('\n') {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    let mut out = String::new();
    out.push_str(&header.iter().map(|h| escape(h)).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|c| escape(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn object_keys_are_sorted_regardless_of_insertion() {
        let mut m1 = HashMap::new();
        m1.insert("zebra", 1);
        m1.insert("alpha", 2);
        let mut m2 = HashMap::new();
        m2.insert("alpha", 2);
        m2.insert("zebra", 1);
        assert_eq!(canonical_json(&m1), canonical_json(&m2));
        assert!(canonical_json(&m1).find("alpha").unwrap() < canonical_json(&m1).find("zebra").unwrap());
    }

    #[test]
    fn csv_escapes_commas() {
        let csv = to_csv(&["a", "b"], &[vec!["1,2".into(), "x".into()]]);
        assert_eq!(csv, "a,b\n\"1,2\",x\n");
    }
}
