//! Comma-separated tables with a '#'-prefixed metadata header.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! value read back is bit-identical and reruns produce identical bytes.

use std::fmt::Write as _;

use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    fn render(&self, out: &mut String) {
        match self {
            Cell::Num(v) if v.is_nan() => out.push_str("nan"),
            Cell::Num(v) => write!(out, "{v:?}").unwrap(),
            Cell::Int(v) => write!(out, "{v}").unwrap(),
            Cell::Text(s) => out.push_str(&s.replace([',', '\n'], ";")),
            Cell::Missing => {}
        }
    }

    fn parse(s: &str) -> Cell {
        if s.is_empty() {
            return Cell::Missing;
        }
        if let Ok(v) = s.parse::<i64>() {
            return Cell::Int(v);
        }
        match s.parse::<f64>() {
            Ok(v) => Cell::Num(v),
            Err(_) => Cell::Text(s.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { meta: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column (`NaN` for missing or text cells).
    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column(name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            writeln!(s, "# {k} = {}", v.replace('\n', " ")).unwrap();
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                c.render(&mut s);
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut t = Table::default();
        let mut lines = text.lines();
        let header = loop {
            match lines.next() {
                Some(l) if l.starts_with('#') => {
                    let body = l.trim_start_matches('#').trim();
                    let (k, v) = body.split_once(" = ").unwrap_or((body, ""));
                    t.meta.push((k.to_string(), v.to_string()));
                }
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => break l,
                None => return Err(Error::Table("no column header".into())),
            }
        };
        t.columns = header.split(',').map(str::to_string).collect();
        for (i, l) in lines.enumerate() {
            if l.is_empty() {
                continue;
            }
            let row: Vec<Cell> = l.split(',').map(Cell::parse).collect();
            if row.len() != t.columns.len() {
                return Err(Error::Table(format!("row {} has {} cells, expected {}", i + 1, row.len(), t.columns.len())));
            }
            t.rows.push(row);
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut t = Table::new(&["m", "p2", "note", "n"]);
        t.meta("tier", "quantum").meta("tolerance", 1e-9);
        t.push(vec![12.0.into(), (0.1 + 0.2).into(), "a,b".into(), 3usize.into()]);
        t.push(vec![12.5.into(), f64::NAN.into(), Cell::Missing, 4usize.into()]);
        let s = t.render();
        assert!(s.starts_with("# tier = quantum\n# tolerance = 0.000000001\n"));
        let back = Table::parse(&s).unwrap();
        assert_eq!(back.get_meta("tier"), Some("quantum"));
        assert_eq!(back.floats("p2").unwrap()[0].to_bits(), (0.1f64 + 0.2).to_bits());
        assert!(back.floats("p2").unwrap()[1].is_nan());
        assert_eq!(back.render(), s.replace("a,b", "a;b"));
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Table::parse("a,b\n1,2\n3\n").is_err());
        assert!(Table::parse("# only = meta\n").is_err());
    }
}
