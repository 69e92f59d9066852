//! File output: CSV and JSON for inspection, little-endian binary dumps for matrices.

use crate::distance::{DistanceTable, TableMethod};
use crate::error::{Result, TomoError};
use crate::experiments::RateReport;
use crate::mcmc::ChainOutput;
use crate::statmodel::Dataset;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

/// Row-major little-endian `f64` matrix.
pub fn write_f64_matrix(path: &Path, values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_f64_matrix(path: &Path) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(TomoError::Validation(format!("{} is not a whole number of f64 values", path.display())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

/// Columns `i, j, theta_i, theta_j, gamma, z, dgamma`; `z` is empty on the diagonal.
pub fn write_table_csv(path: &Path, table: &DistanceTable<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["i", "j", "theta_i", "theta_j", "gamma", "z", "dgamma"])?;
    for i in 0..table.k {
        for j in 0..table.k {
            let id = table.idx(i, j);
            let z = table.z[id];
            w.write_record([
                i.to_string(),
                j.to_string(),
                table.theta(i).to_string(),
                table.theta(j).to_string(),
                table.gamma[id].to_string(),
                if z.is_finite() { z.to_string() } else { String::new() },
                table.dgamma_dxi[id].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sidecar of a binary table dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableHeader {
    #[serde(rename = "K")]
    pub k: usize,
    pub delta: f64,
    pub field_hash: String,
    pub method: TableMethod,
}

/// Writes `<stem>.gamma.bin`, `<stem>.dgamma.bin` and `<stem>.json` into `dir`.
pub fn write_table_binary(dir: &Path, stem: &str, table: &DistanceTable<f64>) -> Result<()> {
    write_f64_matrix(&dir.join(format!("{stem}.gamma.bin")), &table.gamma)?;
    write_f64_matrix(&dir.join(format!("{stem}.dgamma.bin")), &table.dgamma_dxi)?;
    let header =
        TableHeader { k: table.k, delta: table.delta, field_hash: table.field_hash.clone(), method: table.method };
    write_json(&dir.join(format!("{stem}.json")), &header)
}

/// Reads back the header and the `Gamma` matrix of a binary dump.
pub fn read_table_binary(dir: &Path, stem: &str) -> Result<(TableHeader, Vec<f64>)> {
    let header: TableHeader = read_json(&dir.join(format!("{stem}.json")))?;
    let gamma = read_f64_matrix(&dir.join(format!("{stem}.gamma.bin")))?;
    if gamma.len() != header.k * header.k {
        return Err(TomoError::Validation(format!("expected {} entries, found {}", header.k * header.k, gamma.len())));
    }
    Ok((header, gamma))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n: usize,
    pub seed: u64,
    pub truth_hash: String,
    pub resampled: usize,
}

/// `<stem>.csv` with columns `theta_x, theta_y, z` and `<stem>.json` metadata.
pub fn write_dataset(dir: &Path, stem: &str, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(format!("{stem}.csv")))?;
    w.write_record(["theta_x", "theta_y", "z"])?;
    for r in &data.records {
        w.write_record([r.theta_x.to_string(), r.theta_y.to_string(), r.z.to_string()])?;
    }
    w.flush()?;
    let meta = DatasetMeta { n: data.len(), seed: data.seed, truth_hash: data.truth_hash.clone(), resampled: data.resampled };
    write_json(&dir.join(format!("{stem}.json")), &meta)
}

/// Diagnostics written next to a chain dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub samples: usize,
    pub dimension: usize,
    pub acceptance_rate: f64,
    pub burn_in_acceptance: f64,
    pub ess: Vec<f64>,
    pub step_schedule: Vec<f64>,
    pub final_step_size: f64,
    pub truncation_rejections: usize,
    pub likelihood_failures: usize,
    pub warning: Option<String>,
}

/// `<stem>.bin` (samples x coefficients), `<stem>.json` diagnostics and `<stem>.trace.csv`.
pub fn write_chain(dir: &Path, stem: &str, out: &ChainOutput) -> Result<()> {
    let dim = out.samples.first().map_or(0, Vec::len);
    let flat: Vec<f64> = out.samples.iter().flatten().copied().collect();
    write_f64_matrix(&dir.join(format!("{stem}.bin")), &flat)?;
    let diag = ChainDiagnostics {
        samples: out.samples.len(),
        dimension: dim,
        acceptance_rate: out.acceptance_rate,
        burn_in_acceptance: out.burn_in_acceptance,
        ess: out.ess.clone(),
        step_schedule: out.step_schedule.clone(),
        final_step_size: out.final_step_size,
        truncation_rejections: out.truncation_rejections,
        likelihood_failures: out.likelihood_failures,
        warning: out.warning.clone(),
    };
    write_json(&dir.join(format!("{stem}.json")), &diag)?;
    let mut w = csv::Writer::from_path(dir.join(format!("{stem}.trace.csv")))?;
    let mut header = vec!["index".to_string(), "log_like".to_string()];
    header.extend((0..dim).map(|j| format!("c{j}")));
    w.write_record(&header)?;
    for (i, (s, ll)) in out.samples.iter().zip(&out.log_likes).enumerate() {
        let mut row = vec![i.to_string(), ll.to_string()];
        row.extend(s.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `<stem>.json`, `<stem>.csv` (per-N summary) and `<stem>.plot.csv` (log N, log error, stderr).
pub fn write_rate_report(dir: &Path, stem: &str, report: &RateReport) -> Result<()> {
    write_json(&dir.join(format!("{stem}.json")), report)?;
    let mut w = csv::Writer::from_path(dir.join(format!("{stem}.csv")))?;
    w.write_record(["n", "delta_n", "error", "stderr"])?;
    for i in 0..report.n_values.len() {
        w.write_record([
            report.n_values[i].to_string(),
            report.delta_schedule[i].to_string(),
            report.errors[i].to_string(),
            report.stderrs[i].to_string(),
        ])?;
    }
    w.flush()?;
    let mut p = csv::Writer::from_path(dir.join(format!("{stem}.plot.csv")))?;
    p.write_record(["log_n", "log_error", "stderr"])?;
    for i in 0..report.n_values.len() {
        p.write_record([
            (report.n_values[i] as f64).ln().to_string(),
            report.errors[i].ln().to_string(),
            report.stderrs[i].to_string(),
        ])?;
    }
    p.flush()?;
    Ok(())
}
