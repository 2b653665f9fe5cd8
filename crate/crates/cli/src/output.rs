use serde_json::{json, Map, Value};

use crate::{Context, Format};

/// A 15-significant-digit decimal string; `"NaN"`, `"inf"`, `"-inf"` for
/// non-finite values.
pub fn decimal(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let s = format!("{:.*}", (14 - exp).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.14e}")
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Report {
    pub command: &'static str,
    pub params: Map<String, Value>,
    pub results: Value,
    pub table: Option<Table>,
    pub text: Vec<String>,
    pub notes: Vec<String>,
    pub code: u8,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            params: Map::new(),
            results: Value::Null,
            table: None,
            text: Vec::new(),
            notes: Vec::new(),
            code: 0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    pub fn render(&self, format: Format, globals: Map<String, Value>, seed: u64) -> String {
        let mut params = self.params.clone();
        params.extend(globals);
        match format {
            Format::Json => {
                let doc = json!({
                    "command": self.command,
                    "params": params,
                    "results": self.results,
                    "provenance": {
                        "tool": "lapsum",
                        "version": env!("CARGO_PKG_VERSION"),
                        "seed": seed,
                        "params": params,
                    },
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
                s.push('\n');
                s
            }
            Format::Csv => match &self.table {
                Some(t) => {
                    let mut s = t.header.join(",");
                    s.push('\n');
                    for row in &t.rows {
                        let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
                        s.push_str(&cells.join(","));
                        s.push('\n');
                    }
                    s
                }
                None => {
                    let mut s = String::from("key,value\n");
                    if let Value::Object(m) = &self.results {
                        for (k, v) in m {
                            let v = match v {
                                Value::String(x) => x.clone(),
                                other => other.to_string(),
                            };
                            s.push_str(&format!("{},{}\n", csv_cell(k), csv_cell(&v)));
                        }
                    }
                    s
                }
            },
            Format::Text => {
                let mut s = self.text.join("\n");
                s.push('\n');
                s
            }
        }
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Budget and seed settings echoed in every report. `--threads` is left out
/// on purpose: it never changes results, and leaving it out keeps output
/// byte-identical across thread counts.
pub fn global_params(format: Format, ctx: &Context) -> Map<String, Value> {
    let b = &ctx.budgets;
    let mut m = Map::new();
    m.insert("format".into(), json!(format!("{format:?}").to_lowercase()));
    m.insert("seed".into(), json!(ctx.seed));
    m.insert("max_n".into(), json!(b.max_histogram_n));
    m.insert("max_k".into(), json!(b.max_weight_k));
    m.insert("max_order".into(), json!(ctx.max_order));
    m.insert("max_offspreads".into(), json!(b.max_offspreads));
    m.insert("max_partition_k".into(), json!(b.max_partition_k));
    m
}
