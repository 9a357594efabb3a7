use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Exit status of a finished analysis. Input errors never reach a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Conclusive,
    Inconclusive,
}

impl Exit {
    pub fn code(self) -> u8 {
        match self {
            Exit::Conclusive => 0,
            Exit::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: Vec<&str>| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(self.header.clone());
        for row in &self.rows {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
        }
        out
    }
}

/// Result of one subcommand in all three output formats.
pub struct Report {
    pub table: Option<Table>,
    pub fields: Vec<(String, String)>,
    pub json: Value,
    pub exit: Exit,
}

impl Report {
    pub fn new(json: Value, exit: Exit) -> Self {
        Self {
            table: None,
            fields: Vec::new(),
            json,
            exit,
        }
    }

    pub fn field(&mut self, key: impl Into<String>, value: impl ToString) {
        self.fields.push((key.into(), value.to_string()));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("reports serialize") + "\n",
            Format::Csv => match &self.table {
                Some(t) => t.to_csv(),
                None => {
                    let mut t = Table::new(vec!["field", "value"]);
                    for (k, v) in &self.fields {
                        t.push(vec![k.clone(), v.clone()]);
                    }
                    t.to_csv()
                }
            },
            Format::Text => {
                let mut out = self.table.as_ref().map(Table::to_text).unwrap_or_default();
                if !out.is_empty() && !self.fields.is_empty() {
                    out.push('\n');
                }
                let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in &self.fields {
                    out.push_str(&format!("{k:<width$}  {v}\n"));
                }
                out
            }
        }
    }
}

/// Fixed-point for ordinary magnitudes, scientific otherwise.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0.000000".to_string()
    } else if (1e-4..1e6).contains(&v.abs()) {
        format!("{v:.6}")
    } else {
        format!("{v:.3e}")
    }
}
