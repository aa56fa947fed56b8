//! CSV serialization of fields and tables.
//!
//! Every file starts with `#` lines echoing the producing configuration;
//! numbers use the shortest round-trip representation, so identical runs give
//! byte-identical files.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{make_grid, Field, SpectralGrid};

/// A CSV body with `#`-prefixed header lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(mut self, line: impl Into<String>) -> Self {
        self.comments.push(line.into());
        self
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows.push(row.into_iter().map(|v| v.to_string()).collect());
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let body = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| Error::Parse(e.to_string()))?);
        Ok(out)
    }

    /// Body without the comment lines.
    pub fn body(text: &str) -> String {
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| format!("{l}\n"))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let comments = text
            .lines()
            .filter_map(|l| l.strip_prefix('#'))
            .map(|l| l.trim().to_string())
            .collect();
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let columns = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_err)?;
        Ok(Self {
            comments,
            columns,
            rows,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_csv()?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Writes through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp~");
    std::fs::write(&tmp, contents).map_err(|e| Error::Parse(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn grid_comment(grid: &SpectralGrid, t: f64) -> String {
    format!("X={},N={},t={}", grid.half_width(), grid.len(), t)
}

/// Columns `x,value`.
pub fn field_table(f: &Field) -> Table {
    let mut t = Table::new(&["x", "value"]).comment(grid_comment(f.grid(), f.time()));
    for (x, v) in f.grid().nodes().iter().zip(f.values()) {
        t.push([x, v]);
    }
    t
}

/// Columns `x,re,im`.
pub fn complex_table(grid: &SpectralGrid, t: f64, values: &[Complex64]) -> Table {
    let mut tab = Table::new(&["x", "re", "im"]).comment(grid_comment(grid, t));
    for (x, v) in grid.nodes().iter().zip(values) {
        tab.push([*x, v.re, v.im]);
    }
    tab
}

fn header_value(comments: &[String], key: &str) -> Option<String> {
    comments
        .iter()
        .flat_map(|c| c.split(','))
        .filter_map(|kv| kv.split_once('='))
        .find(|(k, _)| k.trim() == key)
        .map(|(_, v)| v.trim().to_string())
}

/// Reads a field written by [`field_table`].
pub fn parse_field(text: &str) -> Result<Field> {
    let t = Table::parse(text)?;
    let num = |key: &str| -> Result<f64> {
        header_value(&t.comments, key)
            .ok_or_else(|| Error::Parse(format!("missing `{key}=` in header")))?
            .parse()
            .map_err(|e| Error::Parse(format!("{key}: {e}")))
    };
    let (x, n, time) = (num("X")?, num("N")?, num("t").unwrap_or(0.0));
    if t.columns.len() < 2 || t.columns[1] != "value" {
        return Err(Error::Parse("expected columns x,value".into()));
    }
    let values = t
        .rows
        .iter()
        .map(|r| {
            r.get(1)
                .ok_or_else(|| Error::Parse("short row".into()))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(e.to_string()))
        })
        .collect::<Result<Vec<f64>>>()?;
    let grid = make_grid(x, n as usize)?;
    Field::new(&grid, values, time)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_is_exact() {
        let grid = make_grid(10.0, 64).unwrap();
        let f = Field::from_fn(&grid, |x| (-x * x / 3.0).exp() / 7.0).with_time(2.5);
        let text = field_table(&f).to_csv().unwrap();
        assert!(text.starts_with("# X=10,N=64,t=2.5\nx,value\n"));
        let g = parse_field(&text).unwrap();
        assert_eq!(g.values(), f.values());
        assert_eq!(g.time(), 2.5);
    }

    #[test]
    fn malformed_input() {
        assert!(parse_field("x,value\n0,1\n").is_err());
        assert!(parse_field("# X=8,N=16\nx,value\n0,a\n").is_err());
        // row count disagrees with N
        assert!(parse_field("# X=8,N=16\nx,value\n0,1\n").is_err());
    }

    #[test]
    fn complex_and_body() {
        let grid = make_grid(8.0, 16).unwrap();
        let v = vec![Complex64::new(1.0, -0.5); 16];
        let text = complex_table(&grid, 0.0, &v).to_csv().unwrap();
        assert_eq!(Table::body(&text).lines().next(), Some("x,re,im"));
        assert_eq!(Table::parse(&text).unwrap().rows[0], ["-8", "1", "-0.5"]);
    }
}
