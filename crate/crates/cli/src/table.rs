//! Tabular output as CSV with a header row or as JSON with the same field
//! names. Floats are printed with 17 significant digits.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Flag(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<u8> for Cell {
    fn from(v: u8) -> Self {
        Cell::Int(v.into())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    /// print a lone row as a JSON object rather than an array
    single_object: bool,
}

fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_field(c: &Cell) -> String {
    match c {
        Cell::Num(v) => float(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Flag(b) => b.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n', '\r']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

fn json_value(c: &Cell) -> String {
    match c {
        Cell::Num(v) if v.is_finite() => float(*v),
        Cell::Num(_) => "null".into(),
        Cell::Int(v) => v.to_string(),
        Cell::Flag(b) => b.to_string(),
        Cell::Text(s) => serde_json::to_string(s).expect("strings serialize"),
    }
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
            single_object: false,
        }
    }

    pub fn single_object(mut self, yes: bool) -> Self {
        self.single_object = yes;
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push_str("\r\n");
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(csv_field).collect();
            out.push_str(&fields.join(","));
            out.push_str("\r\n");
        }
        out
    }

    fn json_object(&self, row: &[Cell]) -> String {
        let mut s = String::from("{");
        for (i, (name, cell)) in self.columns.iter().zip(row).enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            let _ = write!(s, "\"{name}\": {}", json_value(cell));
        }
        s.push('}');
        s
    }

    pub fn to_json(&self) -> String {
        if self.single_object && self.rows.len() == 1 {
            return format!("{}\n", self.json_object(&self.rows[0]));
        }
        let objects: Vec<String> = self.rows.iter().map(|r| format!("  {}", self.json_object(r))).collect();
        if objects.is_empty() {
            "[]\n".into()
        } else {
            format!("[\n{}\n]\n", objects.join(",\n"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec!["x", "name", "ok"]);
        t.push(vec![0.1.into(), "a,b".into(), true.into()]);
        t.push(vec![f64::NAN.into(), "say \"hi\"".into(), false.into()]);
        t
    }

    #[test]
    fn csv_quotes_and_digits() {
        let csv = sample().to_csv();
        assert_eq!(
            csv,
            "x,name,ok\r\n1.0000000000000001e-1,\"a,b\",true\r\nNaN,\"say \"\"hi\"\"\",false\r\n"
        );
    }

    #[test]
    fn json_parses_back() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v[0]["x"], 0.1);
        assert!(v[1]["x"].is_null());
        assert_eq!(v[1]["name"], "say \"hi\"");
    }

    #[test]
    fn lone_row_as_object() {
        let mut t = Table::new(vec!["a"]).single_object(true);
        t.push(vec![1.5.into()]);
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["a"], 1.5);
        assert_eq!(Table::new(vec!["a"]).to_json(), "[]\n");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2] {
            assert_eq!(float(v).parse::<f64>().unwrap(), v);
        }
    }
}
