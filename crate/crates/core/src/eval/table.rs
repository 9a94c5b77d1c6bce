use std::collections::BTreeSet;

use super::EvalError;

/// One row per (task, training size), one column per model.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsGrid {
    pub models: Vec<String>,
    pub rows: Vec<ResultsRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsRow {
    pub task: String,
    pub size: Option<usize>,
    pub values: Vec<Option<f64>>,
}

/// One evaluated cell: task, training size, model and r² (or `None` if undefined).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultCell {
    pub task: String,
    pub size: Option<usize>,
    pub model: String,
    pub value: Option<f64>,
}

impl ResultsGrid {
    /// Models in first-seen order; rows in first-seen (task, size) order.
    pub fn from_cells(cells: &[ResultCell]) -> Self {
        let mut models: Vec<String> = Vec::new();
        let mut keys: Vec<(String, Option<usize>)> = Vec::new();
        for c in cells {
            if !models.contains(&c.model) {
                models.push(c.model.clone());
            }
            let key = (c.task.clone(), c.size);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let rows = keys
            .into_iter()
            .map(|(task, size)| {
                let values = models
                    .iter()
                    .map(|m| {
                        cells
                            .iter()
                            .rev()
                            .find(|c| c.task == task && c.size == size && &c.model == m)
                            .and_then(|c| c.value)
                    })
                    .collect();
                ResultsRow { task, size, values }
            })
            .collect();
        Self { models, rows }
    }

    /// Aligned text with the largest value of each row wrapped in `**`.
    /// Ties mark every tied cell.
    pub fn to_text(&self, decimals: usize) -> String {
        let mut header = vec!["Task".to_string(), "Size".to_string()];
        header.extend(self.models.iter().cloned());
        let mut table: Vec<Vec<String>> = vec![header];
        for row in &self.rows {
            let best = row.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut cells = vec![row.task.clone(), row.size.map(|s| s.to_string()).unwrap_or_default()];
            for v in &row.values {
                cells.push(match v {
                    Some(x) if *x == best => format!("**{x:.decimals$}**"),
                    Some(x) => format!("{x:.decimals$}"),
                    None => "n/a".to_string(),
                });
            }
            table.push(cells);
        }
        let widths: Vec<usize> = (0..table[0].len())
            .map(|c| table.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, r) in table.iter().enumerate() {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (cell, w))| if c < 2 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                .collect();
            out.push_str(line.join(" | ").trim_end());
            out.push('\n');
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                out.push_str(&rule.join("-|-"));
                out.push('\n');
            }
        }
        out
    }

    /// Full-precision CSV: `task,size,<model>...`; undefined cells are empty.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["task".to_string(), "size".to_string()];
        header.extend(self.models.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![row.task.clone(), row.size.map(|s| s.to_string()).unwrap_or_default()];
            rec.extend(row.values.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn from_csv(text: &str) -> Result<Self, EvalError> {
        let bad = |e: String| EvalError::Format(e);
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.len() < 2 || &header[0] != "task" || &header[1] != "size" {
            return Err(bad("header must start with task,size".into()));
        }
        let models: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let unique: BTreeSet<&String> = models.iter().collect();
        if unique.len() != models.len() {
            return Err(bad("duplicate model column".into()));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let size = match &rec[1] {
                "" => None,
                s => Some(s.parse().map_err(|_| bad(format!("bad size {s:?}")))?),
            };
            let values = rec
                .iter()
                .skip(2)
                .map(|s| match s {
                    "" => Ok(None),
                    s => s.parse().map(Some).map_err(|_| bad(format!("bad value {s:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(ResultsRow {
                task: rec[0].to_string(),
                size,
                values,
            });
        }
        Ok(Self { models, rows })
    }
}

/// Renders reports as an aligned table (three decimals, per-row max in bold).
pub fn results_table(cells: &[ResultCell]) -> String {
    ResultsGrid::from_cells(cells).to_text(3)
}
