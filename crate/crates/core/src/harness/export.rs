use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::BasisLabel;

use super::ipr_ratio::IprRatioReport;
use super::sweep::{Measure, SweepResult};
use super::udist::UDistribution;

pub const CSV_HEADER: [&str; 9] = [
    "lambda",
    "sqrt_lambda",
    "measure_name",
    "k",
    "basis",
    "mean",
    "stderr",
    "theory_value",
    "n_samples",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

/// One row of the flat sweep table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub lambda: f64,
    pub sqrt_lambda: f64,
    pub measure_name: String,
    pub k: Option<u32>,
    pub basis: Option<BasisLabel>,
    pub mean: f64,
    pub stderr: f64,
    pub theory_value: Option<f64>,
    pub n_samples: usize,
}

impl CsvRow {
    pub fn measure(&self) -> Result<Measure> {
        Measure::from_parts(&self.measure_name, self.k, self.basis)
    }
}

pub fn csv_rows(result: &SweepResult) -> Vec<CsvRow> {
    result
        .points
        .iter()
        .flat_map(|p| {
            p.stats.iter().map(move |s| CsvRow {
                lambda: p.lambda,
                sqrt_lambda: p.sqrt_lambda,
                measure_name: s.measure.name().to_string(),
                k: s.measure.k(),
                basis: s.measure.basis(),
                mean: s.mean,
                stderr: s.stderr,
                theory_value: s.theory_value,
                n_samples: s.n_samples,
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in csv_rows(result) {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_json<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, result)?;
    out.flush().map_err(|e| Error::io("<json>", e))
}

pub fn read_json<R: Read>(input: R) -> Result<SweepResult> {
    Ok(serde_json::from_reader(input)?)
}

pub fn write_udist_csv<W: Write>(dist: &UDistribution, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u_lo", "u_hi", "count", "density", "theory_density"])?;
    for i in 0..dist.density.len() {
        w.write_record([
            dist.edges[i].to_string(),
            dist.edges[i + 1].to_string(),
            dist.pooled.counts[i].to_string(),
            dist.density[i].to_string(),
            dist.theory_density[i].to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn write_ipr_ratio_csv<W: Write>(report: &IprRatioReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in &report.points {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes `sweep.csv` or `sweep.json` plus `manifest.json` into `dir`.
pub fn export_results(result: &SweepResult, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let data = dir.join(format!("sweep.{format}"));
    match format {
        OutputFormat::Csv => write_csv(result, create(&data)?)?,
        OutputFormat::Json => write_json(result, create(&data)?)?,
    }
    let manifest = dir.join("manifest.json");
    let mut out = create(&manifest)?;
    serde_json::to_writer_pretty(&mut out, &result.manifest)?;
    out.flush().map_err(|e| Error::io(&manifest, e))?;
    Ok(vec![data, manifest])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_names() {
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert_eq!(OutputFormat::Json.to_string(), "json");
        assert!("xml".parse::<OutputFormat>().is_err());
    }

    #[test]
    fn header_is_checked() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
        let rows = read_csv(format!("{}\n", CSV_HEADER.join(",")).as_bytes()).unwrap();
        assert!(rows.is_empty());
    }
}
