//! Deterministic table emission. Every run writes a provenance header
//! carrying the seed, a hash of the effective configuration, and the
//! configuration itself, so an output file can be traced back to (and
//! re-parsed into) the exact run that produced it.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }
}

/// Provenance carried in every output file.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub seed: u64,
    /// Canonical JSON of the effective configuration.
    pub config_json: String,
}

impl Provenance {
    pub fn new(seed: u64, config_json: String) -> Self {
        Self { seed, config_json }
    }

    pub fn config_hash(&self) -> String {
        format!("{:016x}", fnv1a64(self.config_json.as_bytes()))
    }

    fn header_line(&self) -> String {
        format!(
            "# seed={} config_hash={} config={}",
            self.seed,
            self.config_hash(),
            self.config_json
        )
    }
}

/// FNV-1a 64-bit hash; stable across platforms and runs.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Re-parses a provenance header line into (seed, config hash, config).
pub fn parse_provenance(line: &str) -> Option<(u64, String, serde_json::Value)> {
    let rest = line.strip_prefix("# seed=")?;
    let (seed, rest) = rest.split_once(" config_hash=")?;
    let (hash, config) = rest.split_once(" config=")?;
    Some((seed.parse().ok()?, hash.to_string(), serde_json::from_str(config).ok()?))
}

/// Formats a float with six significant digits, decimal where reasonable and
/// scientific otherwise, trimming trailing zeros. The same text is embedded
/// in both the CSV and JSON encodings so the two carry identical values.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let mut s = if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        format!("{:.5e}", x)
    };
    if s.contains('.') && !s.contains('e') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn cell_text(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => fmt_g6(*v),
        Cell::Text(v) => v.clone(),
    }
}

pub fn render_csv(table: &Table, provenance: &Provenance) -> String {
    let mut out = String::new();
    writeln!(out, "{}", provenance.header_line()).unwrap();
    writeln!(out, "{}", table.columns.join(",")).unwrap();
    for row in &table.rows {
        let fields: Vec<String> = row.iter().map(cell_text).collect();
        writeln!(out, "{}", fields.join(",")).unwrap();
    }
    out
}

/// JSON rendering with float literals identical to the CSV text, so the two
/// formats encode the same values byte-for-byte where it matters.
pub fn render_json(table: &Table, provenance: &Provenance) -> String {
    let mut out = String::new();
    out.push_str("{\n  \"provenance\": {");
    write!(
        out,
        "\"seed\": {}, \"config_hash\": {}, \"config\": {}",
        provenance.seed,
        json_string(&provenance.config_hash()),
        provenance.config_json
    )
    .unwrap();
    out.push_str("},\n  \"columns\": [");
    for (i, c) in table.columns.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&json_string(c));
    }
    out.push_str("],\n  \"rows\": [\n");
    for (i, row) in table.rows.iter().enumerate() {
        out.push_str("    [");
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            match cell {
                Cell::Int(v) => write!(out, "{v}").unwrap(),
                Cell::Float(v) => {
                    let text = fmt_g6(*v);
                    if v.is_finite() {
                        out.push_str(&text);
                    } else {
                        out.push_str(&json_string(&text));
                    }
                }
                Cell::Text(v) => out.push_str(&json_string(v)),
            }
        }
        out.push(']');
        if i + 1 < table.rows.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

/// Writes the table in the requested format, or prints it to stdout when no
/// path is given. Empty tables are an error and produce no file.
pub fn emit_table(
    table: &Table,
    format: OutputFormat,
    out: Option<&Path>,
    provenance: &Provenance,
) -> Result<(), CliError> {
    if table.rows.is_empty() {
        return Err(CliError::Validation("refusing to emit an empty result table".into()));
    }
    let rendered = match format {
        OutputFormat::Csv => render_csv(table, provenance),
        OutputFormat::Json => render_json(table, provenance),
    };
    match out {
        Some(path) => std::fs::write(path, rendered).map_err(|e| {
            CliError::Validation(format!("cannot write output file {}: {e}", path.display()))
        }),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_g6(0.0), "0");
        assert_eq!(fmt_g6(1.0), "1");
        assert_eq!(fmt_g6(0.214597), "0.214597");
        assert_eq!(fmt_g6(-3.5), "-3.5");
        assert_eq!(fmt_g6(123456.0), "123456");
        assert_eq!(fmt_g6(1234567.0), "1.23457e6");
        assert_eq!(fmt_g6(0.00001234567), "1.23457e-5");
    }

    #[test]
    fn provenance_roundtrip() {
        let p = Provenance::new(42, r#"{"p":10,"n":20}"#.to_string());
        let line = p.header_line();
        let (seed, hash, config) = parse_provenance(&line).unwrap();
        assert_eq!(seed, 42);
        assert_eq!(hash, p.config_hash());
        assert_eq!(config["p"], 10);
    }

    #[test]
    fn empty_table_is_an_error_and_writes_nothing() {
        let t = Table::new(&["a"]);
        let p = Provenance::new(1, "{}".to_string());
        let dir = std::env::temp_dir().join("funcest-empty-table-test");
        let _ = std::fs::remove_file(&dir);
        let result = emit_table(&t, OutputFormat::Csv, Some(&dir), &p);
        assert!(result.is_err());
        assert!(!dir.exists(), "no file may be written for an empty table");
    }

    #[test]
    fn csv_and_json_encode_identical_values() {
        let mut t = Table::new(&["name", "value", "count"]);
        t.push(vec!["a".into(), 0.123456789.into(), 3usize.into()]);
        t.push(vec!["b".into(), (-42.0).into(), 0usize.into()]);
        let p = Provenance::new(7, "{}".to_string());
        let csv = render_csv(&t, &p);
        let json = render_json(&t, &p);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let csv_rows: Vec<&str> = csv.lines().skip(2).collect();
        for (ri, row) in parsed["rows"].as_array().unwrap().iter().enumerate() {
            let fields: Vec<&str> = csv_rows[ri].split(',').collect();
            assert_eq!(row[0].as_str().unwrap(), fields[0]);
            assert_eq!(row[1].as_f64().unwrap(), fields[1].parse::<f64>().unwrap());
            assert_eq!(row[2].as_i64().unwrap(), fields[2].parse::<i64>().unwrap());
        }
    }
}
