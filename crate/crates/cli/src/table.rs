//! Result tables and their CSV form.

use std::fmt;

/// Shortest round-trip text of `v`, switching to exponent form outside
/// `[1e-5, 1e16)` so that tiny values do not expand into long zero runs.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// One CSV cell. Floats print in a shortest round-trip form, so equal values
/// always produce equal bytes.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Empty,
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Empty => Ok(()),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => f.write_str(&format_float(*v)),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Rows under a fixed header. Rows are built as `(column, cell)` pairs so
/// that sparse row kinds can share one header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Append a full row in column order.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from the header");
        self.rows.push(row);
    }

    /// Append a row given by column name; unnamed columns stay empty.
    pub fn push_named(&mut self, cells: Vec<(&str, Cell)>) {
        let mut row = vec![Cell::Empty; self.columns.len()];
        for (name, cell) in cells {
            let i = self.columns.iter().position(|c| *c == name).unwrap_or_else(|| panic!("no column `{name}`"));
            row[i] = cell;
        }
        self.rows.push(row);
    }

    /// CSV text: a `# schema=1` line, a provenance comment, then the header
    /// with a leading `run_id` column and the rows.
    pub fn to_csv(&self, experiment: &str, run_id: &str) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("run_id").chain(self.columns.iter().copied()).collect();
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let fields: Vec<String> = std::iter::once(run_id.to_string()).chain(row.iter().map(Cell::to_string)).collect();
            w.write_record(&fields).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells");
        format!("# schema=1\n# experiment={experiment} run_id={run_id}\n{body}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["kind", "x", "y"]);
        t.push(vec!["a".into(), 1usize.into(), 0.1.into()]);
        t.push_named(vec![("kind", "fit, quoted".into()), ("y", f64::INFINITY.into())]);
        let csv = t.to_csv("demo", "abc");
        assert_eq!(format_float(3.5e-14), "3.5e-14");
        assert_eq!(format_float(-0.25), "-0.25");
        assert_eq!(format_float(2e20), "2e20");
        assert_eq!(csv, "# schema=1\n# experiment=demo run_id=abc\nrun_id,kind,x,y\nabc,a,1,0.1\nabc,\"fit, quoted\",,inf\n");
    }
}
