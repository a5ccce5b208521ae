//! Measure rows and their CSV forms: the full report with `#` metadata, and
//! the plot-friendly column subset. Both render floats with 12 significant
//! digits, locale-independent, so emitting, parsing, and re-emitting a file
//! reproduces it byte for byte.

use harmonica_core::{Error, Result};

/// Column order of the full report. One row per (model, region, temperature),
/// in config order, then region order, then ascending temperature; the
/// temperature list itself lives in the `# temps` metadata line.
pub const COLUMNS: [&str; 14] = [
    "D",
    "n",
    "model",
    "region",
    "volume",
    "surface",
    "entropy_bits",
    "log_negativity_bits",
    "classical_mi_bits",
    "lower_bound_bits",
    "upper_zero_t_bits",
    "upper_finite_t_bits",
    "area_bound_bits",
    "t_c",
];

/// Columns of the plot subset: the surface count plus every measure and
/// bound needed to draw an area-law figure.
pub const PLOT_COLUMNS: [&str; 7] = [
    "surface",
    "entropy_bits",
    "log_negativity_bits",
    "lower_bound_bits",
    "upper_zero_t_bits",
    "upper_finite_t_bits",
    "area_bound_bits",
];

/// One computed row. `None` in a numeric field renders as an empty cell:
/// the measure was not requested or does not apply (classical information of
/// the full lattice, finite-temperature bound at `T = 0`, and so on).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRow {
    pub dim: usize,
    pub side: usize,
    pub model: String,
    pub region: String,
    pub volume: usize,
    pub surface: usize,
    pub entropy_bits: Option<f64>,
    pub log_negativity_bits: Option<f64>,
    pub classical_mi_bits: Option<f64>,
    pub lower_bound_bits: Option<f64>,
    pub upper_zero_t_bits: Option<f64>,
    pub upper_finite_t_bits: Option<f64>,
    pub area_bound_bits: Option<f64>,
    pub t_c: Option<f64>,
}

impl MeasureRow {
    fn numeric_fields(&self) -> [Option<f64>; 8] {
        [
            self.entropy_bits,
            self.log_negativity_bits,
            self.classical_mi_bits,
            self.lower_bound_bits,
            self.upper_zero_t_bits,
            self.upper_finite_t_bits,
            self.area_bound_bits,
            self.t_c,
        ]
    }
}

/// `#`-prefixed header stamped on every report: enough to reproduce the run.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub version: String,
    pub config: String,
    pub config_sha256: String,
    pub seed: u64,
    pub temps: Vec<f64>,
    /// Zero-based indices of data rows whose lower bound is nonpositive and
    /// therefore vacuous; empty when every computed lower bound bites.
    pub vacuous_lower_rows: Vec<usize>,
}

/// Renders a float with 12 significant digits in scientific notation,
/// normalizing negative zero. Parsing the result and rendering it again is
/// the identity, which is what makes report files re-emittable byte for
/// byte.
pub fn format_float(value: f64) -> String {
    let value = if value == 0.0 { 0.0 } else { value };
    format!("{value:.11e}")
}

fn cell(value: Option<f64>) -> String {
    value.map(format_float).unwrap_or_default()
}

/// Serializes metadata plus rows into the full report CSV.
pub fn emit_report(rows: &[MeasureRow], metadata: &Metadata) -> String {
    let mut out = String::new();
    out.push_str(&format!("# version = {}\n", metadata.version));
    out.push_str(&format!("# config = {}\n", metadata.config));
    out.push_str(&format!("# config_sha256 = {}\n", metadata.config_sha256));
    out.push_str(&format!("# seed = {}\n", metadata.seed));
    let temps: Vec<String> = metadata.temps.iter().map(|&t| format_float(t)).collect();
    out.push_str(&format!("# temps = {}\n", temps.join(",")));
    if !metadata.vacuous_lower_rows.is_empty() {
        let marks: Vec<String> = metadata
            .vacuous_lower_rows
            .iter()
            .map(|i| i.to_string())
            .collect();
        out.push_str(&format!("# vacuous_lower_rows = {}\n", marks.join(",")));
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(COLUMNS).expect("in-memory write");
    for row in rows {
        let mut record = vec![
            row.dim.to_string(),
            row.side.to_string(),
            row.model.clone(),
            row.region.clone(),
            row.volume.to_string(),
            row.surface.to_string(),
        ];
        record.extend(row.numeric_fields().map(cell));
        writer.write_record(&record).expect("in-memory write");
    }
    out.push_str(
        &String::from_utf8(writer.into_inner().expect("in-memory flush"))
            .expect("csv output is utf-8"),
    );
    out
}

fn parse_metadata_line(line: &str, metadata: &mut Metadata) -> Result<()> {
    let body = line.trim_start_matches('#').trim();
    let (key, value) = body
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("metadata line `{line}` lacks `=`")))?;
    let value = value.trim();
    match key.trim() {
        "version" => metadata.version = value.to_string(),
        "config" => metadata.config = value.to_string(),
        "config_sha256" => metadata.config_sha256 = value.to_string(),
        "seed" => {
            metadata.seed = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad seed `{value}`")))?
        }
        "temps" => {
            metadata.temps = value
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad temperature `{t}`")))
                })
                .collect::<Result<_>>()?
        }
        "vacuous_lower_rows" => {
            metadata.vacuous_lower_rows = value
                .split(',')
                .map(|i| {
                    i.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad row index `{i}`")))
                })
                .collect::<Result<_>>()?
        }
        other => return Err(Error::Parse(format!("unknown metadata key `{other}`"))),
    }
    Ok(())
}

fn parse_cell(text: &str, column: &str) -> Result<Option<f64>> {
    if text.is_empty() {
        return Ok(None);
    }
    text.parse()
        .map(Some)
        .map_err(|_| Error::Parse(format!("bad {column} value `{text}`")))
}

fn parse_count(text: &str, column: &str) -> Result<usize> {
    text.parse()
        .map_err(|_| Error::Parse(format!("bad {column} value `{text}`")))
}

/// Parses a full report back into metadata and rows. The header must match
/// [`COLUMNS`] exactly.
pub fn parse_report(text: &str) -> Result<(Metadata, Vec<MeasureRow>)> {
    let mut metadata = Metadata {
        version: String::new(),
        config: String::new(),
        config_sha256: String::new(),
        seed: 0,
        temps: Vec::new(),
        vacuous_lower_rows: Vec::new(),
    };
    let mut body_start = 0;
    for line in text.lines() {
        if !line.starts_with('#') {
            break;
        }
        parse_metadata_line(line, &mut metadata)?;
        body_start += line.len() + 1;
    }
    let body = &text[body_start.min(text.len())..];
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(body.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse(format!("unreadable header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != COLUMNS {
        return Err(Error::Parse(format!(
            "unexpected report columns: {}",
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(format!("unreadable row: {e}")))?;
        if record.len() != COLUMNS.len() {
            return Err(Error::Parse(format!(
                "row has {} fields, expected {}",
                record.len(),
                COLUMNS.len()
            )));
        }
        rows.push(MeasureRow {
            dim: parse_count(&record[0], "D")?,
            side: parse_count(&record[1], "n")?,
            model: record[2].to_string(),
            region: record[3].to_string(),
            volume: parse_count(&record[4], "volume")?,
            surface: parse_count(&record[5], "surface")?,
            entropy_bits: parse_cell(&record[6], "entropy_bits")?,
            log_negativity_bits: parse_cell(&record[7], "log_negativity_bits")?,
            classical_mi_bits: parse_cell(&record[8], "classical_mi_bits")?,
            lower_bound_bits: parse_cell(&record[9], "lower_bound_bits")?,
            upper_zero_t_bits: parse_cell(&record[10], "upper_zero_t_bits")?,
            upper_finite_t_bits: parse_cell(&record[11], "upper_finite_t_bits")?,
            area_bound_bits: parse_cell(&record[12], "area_bound_bits")?,
            t_c: parse_cell(&record[13], "t_c")?,
        });
    }
    Ok((metadata, rows))
}

/// Serializes the plot subset: header always present, one line per row.
pub fn emit_plotdata(rows: &[MeasureRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(PLOT_COLUMNS).expect("in-memory write");
    for row in rows {
        let mut record = vec![row.surface.to_string()];
        record.extend(
            [
                row.entropy_bits,
                row.log_negativity_bits,
                row.lower_bound_bits,
                row.upper_zero_t_bits,
                row.upper_finite_t_bits,
                row.area_bound_bits,
            ]
            .map(cell),
        );
        writer.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// One parsed line of the plot subset.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub surface: usize,
    pub values: [Option<f64>; 6],
}

/// Parses plot-subset CSV back into rows.
pub fn parse_plotdata(text: &str) -> Result<Vec<PlotRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse(format!("unreadable header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != PLOT_COLUMNS {
        return Err(Error::Parse(format!(
            "unexpected plot columns: {}",
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(format!("unreadable row: {e}")))?;
        let mut values = [None; 6];
        for (slot, value) in values.iter_mut().zip(record.iter().skip(1)) {
            *slot = parse_cell(value, "plot")?;
        }
        rows.push(PlotRow {
            surface: parse_count(&record[0], "surface")?,
            values,
        });
    }
    Ok(rows)
}
