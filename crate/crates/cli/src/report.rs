use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

/// One CSV table with `# key=value` header lines.
#[derive(Debug, Clone, Default)]
pub struct Report {
    meta: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

/// A value rendered into a CSV cell.
pub enum Cell {
    F(f64),
    I(i128),
    S(String),
    B(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i128)
    }
}

impl From<u128> for Cell {
    fn from(x: u128) -> Self {
        Cell::I(x as i128)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_g(*x),
            Cell::I(n) => n.to_string(),
            Cell::B(b) => b.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
        }
    }
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { meta: Vec::new(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn prepend_meta(&mut self, mut items: Vec<(String, String)>) {
        items.append(&mut self.meta);
        self.meta = items;
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row width");
        self.rows.push(cells.iter().map(Cell::render).collect());
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes to `path`, or to stdout when no path is given.
    pub fn emit(&self, path: Option<&Path>) -> std::io::Result<()> {
        let text = self.render();
        match path {
            Some(p) => std::fs::write(p, text),
            None => std::io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}

/// C-style `%.15g`.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const P: i32 = 15;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn word(w: &[usize]) -> String {
    w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf() {
        let cases = [
            (0.48121182505960347, "0.481211825059603"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1e-5, "1e-05"),
            (0.0001234, "0.0001234"),
            (123456789012345678.0, "1.23456789012346e+17"),
            (100000000000000.0, "100000000000000"),
            (1e15, "1e+15"),
            (f64::INFINITY, "inf"),
            (0.1 + 0.2, "0.3"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g(x), want, "{x}");
        }
    }

    #[test]
    fn header_only_when_empty() {
        let mut r = Report::new(&["a", "b"]);
        r.meta("seed", 7);
        assert_eq!(r.render(), "# seed=7\na,b\n");
        r.row(vec![1.5.into(), "x,y".into()]);
        assert_eq!(r.render(), "# seed=7\na,b\n1.5,\"x,y\"\n");
    }
}
