//! CSV and JSON readers/writers for run files and model-card files.
//!
//! Run files are fail-closed: every row is validated and a single bad row
//! rejects the document, with all violations reported together.

use std::str::FromStr;

use serde_json::{Map, Value};

use super::{normalize_model_id, BenchmarkRun, Dataset, DatasetError, ModelCard, RowViolation, Sweep};

/// Column order of the CSV run format.
pub const RUN_COLUMNS: [&str; 10] = [
    "model_id",
    "concurrency",
    "request_count",
    "total_time_s",
    "avg_ttft_s",
    "input_tokens",
    "output_tokens",
    "total_tokens",
    "avg_throughput_tok_s",
    "cost_usd",
];

const CARD_COLUMNS: [&str; 4] = ["model_id", "params_billion", "quality_score", "notes"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(DatasetError::UnknownFormat(other.to_string())),
        }
    }
}

impl Format {
    /// Guesses the format from a file name, defaulting to JSON.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

/// Field accessor over one record, shared by the CSV and JSON paths. CSV cells
/// arrive as strings, JSON values as numbers.
struct Record<'a> {
    row: usize,
    fields: &'a Map<String, Value>,
    violations: Vec<RowViolation>,
}

impl<'a> Record<'a> {
    fn new(row: usize, fields: &'a Map<String, Value>) -> Self {
        Self {
            row,
            fields,
            violations: Vec::new(),
        }
    }

    fn flag(&mut self, field: &str, message: impl Into<String>) {
        self.violations.push(RowViolation {
            row: self.row,
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn raw(&mut self, field: &str) -> Option<&'a Value> {
        match self.fields.get(field) {
            None | Some(Value::Null) => {
                self.flag(field, "is missing");
                None
            }
            Some(v) => Some(v),
        }
    }

    fn string(&mut self, field: &str) -> String {
        match self.raw(field) {
            Some(Value::String(s)) => s.clone(),
            Some(other) => {
                self.flag(field, format!("expected a string, got {other}"));
                String::new()
            }
            None => String::new(),
        }
    }

    fn optional_string(&mut self, field: &str) -> String {
        match self.fields.get(field) {
            Some(Value::String(s)) => s.clone(),
            _ => String::new(),
        }
    }

    fn f64(&mut self, field: &str) -> f64 {
        let parsed = match self.raw(field) {
            Some(Value::Number(n)) => n.as_f64(),
            Some(Value::String(s)) => s.trim().parse::<f64>().ok(),
            Some(_) => None,
            None => return f64::NAN,
        };
        match parsed {
            Some(v) if v.is_finite() => v,
            _ => {
                self.flag(field, "is not a finite number");
                f64::NAN
            }
        }
    }

    fn optional_f64(&mut self, field: &str) -> Option<f64> {
        match self.fields.get(field) {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) if s.trim().is_empty() => None,
            Some(_) => Some(self.f64(field)),
        }
    }

    fn u64(&mut self, field: &str) -> u64 {
        let parsed = match self.raw(field) {
            Some(Value::Number(n)) => n.as_u64(),
            Some(Value::String(s)) => s.trim().parse::<u64>().ok(),
            Some(_) => None,
            None => return 0,
        };
        parsed.unwrap_or_else(|| {
            self.flag(field, "is not a non-negative integer");
            0
        })
    }

    fn u32(&mut self, field: &str) -> u32 {
        let v = self.u64(field);
        u32::try_from(v).unwrap_or_else(|_| {
            self.flag(field, "is out of range");
            0
        })
    }

    fn into_run(mut self) -> Result<BenchmarkRun, Vec<RowViolation>> {
        let run = BenchmarkRun {
            model_id: normalize_model_id(&self.string("model_id")),
            concurrency: self.u32("concurrency"),
            request_count: self.u32("request_count"),
            total_time_s: self.f64("total_time_s"),
            avg_ttft_s: self.f64("avg_ttft_s"),
            input_tokens: self.u64("input_tokens"),
            output_tokens: self.u64("output_tokens"),
            total_tokens: self.u64("total_tokens"),
            avg_throughput_tok_s: self.f64("avg_throughput_tok_s"),
            cost_usd: self.optional_f64("cost_usd"),
        };
        if self.violations.is_empty() {
            let v = run.violations(self.row);
            if v.is_empty() {
                return Ok(run);
            }
            return Err(v);
        }
        Err(self.violations)
    }

    fn into_card(mut self) -> Result<ModelCard, Vec<RowViolation>> {
        let card = ModelCard {
            model_id: normalize_model_id(&self.string("model_id")),
            params_billion: self.f64("params_billion"),
            quality_score: self.f64("quality_score"),
            notes: self.optional_string("notes"),
        };
        if self.violations.is_empty() {
            let v = card.violations(self.row);
            if v.is_empty() {
                return Ok(card);
            }
            return Err(v);
        }
        Err(self.violations)
    }
}

fn csv_records(document: &str, required: &[&str]) -> Result<Vec<Map<String, Value>>, DatasetError> {
    if document.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(document.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| DatasetError::Syntax(e.to_string()))?
        .clone();
    for column in required {
        if !headers.iter().any(|h| h == *column) {
            return Err(DatasetError::MissingColumn((*column).to_string()));
        }
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DatasetError::Syntax(e.to_string()))?;
        let map = headers
            .iter()
            .zip(record.iter())
            .map(|(h, v)| (h.to_string(), Value::String(v.to_string())))
            .collect();
        out.push(map);
    }
    Ok(out)
}

fn runs_from_records(records: &[Map<String, Value>]) -> Result<Vec<BenchmarkRun>, DatasetError> {
    let mut runs = Vec::with_capacity(records.len());
    let mut violations = Vec::new();
    for (i, fields) in records.iter().enumerate() {
        match Record::new(i + 1, fields).into_run() {
            Ok(run) => runs.push(run),
            Err(v) => violations.extend(v),
        }
    }
    if violations.is_empty() {
        Ok(runs)
    } else {
        Err(DatasetError::Invalid(violations))
    }
}

/// Groups runs into sweeps in order of first appearance.
fn group_runs(runs: Vec<BenchmarkRun>) -> Result<Vec<Sweep>, DatasetError> {
    let mut groups: Vec<(String, Vec<BenchmarkRun>)> = Vec::new();
    for run in runs {
        match groups.iter_mut().find(|(id, _)| *id == run.model_id) {
            Some((_, runs)) => {
                if runs.iter().any(|r| r.concurrency == run.concurrency) {
                    return Err(DatasetError::DuplicateRun {
                        model_id: run.model_id,
                        concurrency: run.concurrency,
                    });
                }
                runs.push(run);
            }
            None => groups.push((run.model_id.clone(), vec![run])),
        }
    }
    groups
        .into_iter()
        .map(|(id, runs)| Sweep::new(id, runs))
        .collect()
}

fn object_records(values: &[Value], what: &str) -> Result<Vec<Map<String, Value>>, DatasetError> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| match v {
            Value::Object(map) => Ok(map.clone()),
            _ => Err(DatasetError::Syntax(format!("{what} {} is not an object", i + 1))),
        })
        .collect()
}

fn cards_from_records(records: &[Map<String, Value>]) -> Result<Vec<ModelCard>, DatasetError> {
    let mut cards: Vec<ModelCard> = Vec::with_capacity(records.len());
    let mut violations = Vec::new();
    for (i, fields) in records.iter().enumerate() {
        match Record::new(i + 1, fields).into_card() {
            Ok(card) => {
                if cards.iter().any(|c| c.model_id == card.model_id) {
                    return Err(DatasetError::DuplicateCard(card.model_id));
                }
                cards.push(card);
            }
            Err(v) => violations.extend(v),
        }
    }
    if violations.is_empty() {
        Ok(cards)
    } else {
        Err(DatasetError::Invalid(violations))
    }
}

/// Validates an already-parsed JSON value: either an array of run objects or
/// an object `{sweeps: [{model_id, runs}], model_cards: [...]}`.
pub fn parse_dataset_value(value: &Value) -> Result<Dataset, DatasetError> {
    match value {
        Value::Array(items) => {
            let records = object_records(items, "run")?;
            Ok(Dataset {
                sweeps: group_runs(runs_from_records(&records)?)?,
                model_cards: Vec::new(),
            })
        }
        Value::Object(obj) => {
            let mut runs = Vec::new();
            if let Some(sweeps) = obj.get("sweeps") {
                let sweeps = sweeps
                    .as_array()
                    .ok_or_else(|| DatasetError::Syntax("`sweeps` must be an array".into()))?;
                for sweep in sweeps {
                    let items = sweep
                        .get("runs")
                        .and_then(Value::as_array)
                        .ok_or_else(|| DatasetError::Syntax("each sweep needs a `runs` array".into()))?;
                    runs.extend(object_records(items, "run")?);
                }
            }
            let sweeps = group_runs(runs_from_records(&runs)?)?;
            let model_cards = match obj.get("model_cards") {
                None | Some(Value::Null) => Vec::new(),
                Some(Value::Array(items)) => cards_from_records(&object_records(items, "model card")?)?,
                Some(_) => return Err(DatasetError::Syntax("`model_cards` must be an array".into())),
            };
            Ok(Dataset { sweeps, model_cards })
        }
        _ => Err(DatasetError::Syntax(
            "expected an array of runs or an object with `sweeps`".into(),
        )),
    }
}

/// Parses a run file. CSV documents carry runs only; JSON documents may also
/// carry model cards.
pub fn parse_dataset(document: &str, format: Format) -> Result<Dataset, DatasetError> {
    match format {
        Format::Csv => {
            let required = &RUN_COLUMNS[..RUN_COLUMNS.len() - 1];
            let records = csv_records(document, required)?;
            Ok(Dataset {
                sweeps: group_runs(runs_from_records(&records)?)?,
                model_cards: Vec::new(),
            })
        }
        Format::Json => {
            if document.trim().is_empty() {
                return Ok(Dataset::default());
            }
            let value: Value =
                serde_json::from_str(document).map_err(|e| DatasetError::Syntax(e.to_string()))?;
            parse_dataset_value(&value)
        }
    }
}

pub fn parse_runs(document: &str, format: Format) -> Result<Vec<Sweep>, DatasetError> {
    parse_dataset(document, format).map(|d| d.sweeps)
}

/// Parses a score file: CSV with `model_id,params_billion,quality_score[,notes]`
/// or JSON (an array of cards, or an object with a `model_cards` array).
pub fn parse_model_cards(document: &str, format: Format) -> Result<Vec<ModelCard>, DatasetError> {
    match format {
        Format::Csv => cards_from_records(&csv_records(document, &CARD_COLUMNS[..3])?),
        Format::Json => {
            if document.trim().is_empty() {
                return Ok(Vec::new());
            }
            let value: Value =
                serde_json::from_str(document).map_err(|e| DatasetError::Syntax(e.to_string()))?;
            let items = match &value {
                Value::Array(items) => items,
                Value::Object(obj) => obj
                    .get("model_cards")
                    .and_then(Value::as_array)
                    .ok_or_else(|| DatasetError::Syntax("expected a `model_cards` array".into()))?,
                _ => return Err(DatasetError::Syntax("expected an array of model cards".into())),
            };
            cards_from_records(&object_records(items, "model card")?)
        }
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    let bytes = writer.into_inner().expect("in-memory writer never fails");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

/// Serializes sweeps in canonical column/field order. JSON output is a flat
/// array of runs.
pub fn write_runs(sweeps: &[Sweep], format: Format) -> String {
    let runs = sweeps.iter().flat_map(|s| s.runs());
    match format {
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(RUN_COLUMNS).expect("in-memory write");
            for r in runs {
                let cost = r.cost_usd.map(|c| c.to_string()).unwrap_or_default();
                w.write_record([
                    r.model_id.clone(),
                    r.concurrency.to_string(),
                    r.request_count.to_string(),
                    r.total_time_s.to_string(),
                    r.avg_ttft_s.to_string(),
                    r.input_tokens.to_string(),
                    r.output_tokens.to_string(),
                    r.total_tokens.to_string(),
                    r.avg_throughput_tok_s.to_string(),
                    cost,
                ])
                .expect("in-memory write");
            }
            finish(w)
        }
        Format::Json => {
            let runs: Vec<&BenchmarkRun> = runs.collect();
            serde_json::to_string_pretty(&runs).expect("runs serialize")
        }
    }
}

pub fn write_model_cards(cards: &[ModelCard], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(CARD_COLUMNS).expect("in-memory write");
            for c in cards {
                w.write_record([
                    c.model_id.clone(),
                    c.params_billion.to_string(),
                    c.quality_score.to_string(),
                    c.notes.clone(),
                ])
                .expect("in-memory write");
            }
            finish(w)
        }
        Format::Json => serde_json::to_string_pretty(cards).expect("cards serialize"),
    }
}
