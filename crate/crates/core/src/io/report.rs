//! Text, CSV and JSON renderings of results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::design::InterimPlan;
use crate::error::{Error, Result};
use crate::inference::PosteriorSummary;
use crate::sim::{ScenarioResult, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Delimited,
    Structured,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Table, Format::Delimited, Format::Structured];

    pub fn extension(self) -> &'static str {
        match self {
            Format::Table => "txt",
            Format::Delimited => "csv",
            Format::Structured => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Format::Table),
            "delimited" | "csv" => Ok(Format::Delimited),
            "structured" | "json" => Ok(Format::Structured),
            _ => Err(Error::InvalidConfig(format!(
                "unknown format '{s}' (expected table, delimited or structured)"
            ))),
        }
    }
}

/// Posterior summary of one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub y: u32,
    pub n: u32,
    pub summary: PosteriorSummary,
    /// Submodel weights (hist, reg, ind).
    pub rb_weights: [f64; 3],
    /// Effective sample size net of `n`.
    pub ess: f64,
    pub acceptance: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub fit: FitReport,
    pub plan: InterimPlan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Fit(FitReport),
    Design(DesignReport),
    Simulation(Vec<ScenarioResult>),
    Sweep(Vec<SweepRow>),
}

/// One row of the delimited operating-characteristics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcRow {
    pub scenario: u8,
    pub method: String,
    pub design: String,
    pub n_max: u32,
    pub replicates: usize,
    pub size: f64,
    pub rmse: f64,
    pub coverage: f64,
    pub width: f64,
    pub type1: f64,
    pub power: f64,
    pub p_hist: f64,
    pub p_reg: f64,
    pub p_ind: f64,
}

impl OcRow {
    fn from_result(r: &ScenarioResult) -> Self {
        let oc = &r.oc;
        OcRow {
            scenario: r.scenario_id,
            method: r.method.name().into(),
            design: r.design.name().into(),
            n_max: r.n_max,
            replicates: oc.n_replicates,
            size: oc.mean_size,
            rmse: oc.rmse,
            coverage: oc.coverage,
            width: oc.width,
            type1: oc.type1,
            power: oc.power,
            p_hist: oc.mean_rb_weights[0],
            p_reg: oc.mean_rb_weights[1],
            p_ind: oc.mean_rb_weights[2],
        }
    }
}

fn p3(v: f64) -> String {
    format!("{v:.3}")
}

fn p1(v: f64) -> String {
    format!("{v:.1}")
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match (report, format) {
        (Report::Simulation(r), _) if r.is_empty() => Err(Error::Degenerate("no simulation results to report".into())),
        (Report::Simulation(r), _) if r.iter().any(|x| x.records.is_empty()) => {
            Err(Error::Degenerate("empty replicate set".into()))
        }
        (Report::Sweep(rows), _) if rows.is_empty() => Err(Error::Degenerate("empty sweep".into())),
        (_, Format::Structured) => structured(report),
        (Report::Fit(f), Format::Table) => Ok(fit_table(f)),
        (Report::Fit(f), Format::Delimited) => delimited(&[fit_row(f)]),
        (Report::Design(d), Format::Table) => Ok(design_table(d)),
        (Report::Design(d), Format::Delimited) => delimited(&[design_row(d)]),
        (Report::Simulation(r), Format::Table) => Ok(oc_table(r)),
        (Report::Simulation(r), Format::Delimited) => {
            delimited(&r.iter().map(|x| oc_row_strings(&OcRow::from_result(x))).collect::<Vec<_>>())
        }
        (Report::Sweep(rows), Format::Table) => Ok(sweep_table(rows)),
        (Report::Sweep(rows), Format::Delimited) => delimited(&rows.iter().map(sweep_row).collect::<Vec<_>>()),
    }
}

/// Write `report` as `<dir>/<stem>.<ext>`, creating `dir` if needed.
pub fn emit_report(report: &Report, format: Format, dir: &Path, stem: &str) -> Result<PathBuf> {
    let text = render(report, format)?;
    write_file(dir, &format!("{stem}.{}", format.extension()), &text)
}

/// Per-replicate records in long format, one row per replicate and method.
pub fn render_records(results: &[ScenarioResult]) -> Result<String> {
    if results.iter().all(|r| r.records.is_empty()) {
        return Err(Error::Degenerate("empty replicate set".into()));
    }
    let mut rows = Vec::new();
    for r in results {
        for rec in &r.records {
            let b = |v: bool| u8::from(v).to_string();
            rows.push(vec![
                ("scenario", r.scenario_id.to_string()),
                ("method", r.method.name().to_string()),
                ("design", r.design.name().to_string()),
                ("replicate", rec.replicate.to_string()),
                ("seed", rec.seed.to_string()),
                ("ess", rec.ess.map_or(String::new(), |v| format!("{v:.1}"))),
                ("control_n", rec.control_n.to_string()),
                ("control_y", rec.control_y.to_string()),
                ("post_mean", format!("{:.6}", rec.post_mean)),
                ("lower", format!("{:.6}", rec.lower)),
                ("upper", format!("{:.6}", rec.upper)),
                ("covered", b(rec.covered)),
                ("p_positive_null", format!("{:.4}", rec.p_positive_null)),
                ("type1", b(rec.type1)),
                ("p_clinical_alt", format!("{:.4}", rec.p_clinical_alt)),
                ("power", b(rec.power)),
                ("p_hist", format!("{:.4}", rec.rb_weights[0])),
                ("p_reg", format!("{:.4}", rec.rb_weights[1])),
                ("p_ind", format!("{:.4}", rec.rb_weights[2])),
            ]);
        }
    }
    delimited(&rows)
}

pub fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Reload a delimited operating-characteristics table.
pub fn parse_oc_csv(text: &str) -> Result<Vec<OcRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::InvalidDataset(format!("operating characteristics table: {e}"))))
        .collect()
}

fn structured(report: &Report) -> Result<String> {
    let value = match report {
        Report::Fit(f) => serde_json::to_value(f),
        Report::Design(d) => serde_json::to_value(d),
        Report::Simulation(r) => serde_json::to_value(
            r.iter()
                .map(|x| {
                    serde_json::json!({
                        "scenario": x.scenario_id,
                        "method": x.method,
                        "design": x.design,
                        "n_max": x.n_max,
                        "true_rate": x.true_rate,
                        "master_seed": x.master_seed,
                        "operating_characteristics": x.oc,
                    })
                })
                .collect::<Vec<_>>(),
        ),
        Report::Sweep(rows) => serde_json::to_value(rows),
    }
    .map_err(|e| Error::Runtime(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| Error::Runtime(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

type Row = Vec<(&'static str, String)>;

fn delimited(rows: &[Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = rows[0].iter().map(|(k, _)| *k).collect();
    let err = |e: csv::Error| Error::Runtime(e.to_string());
    w.write_record(&header).map_err(err)?;
    for row in rows {
        w.write_record(row.iter().map(|(_, v)| v.as_str())).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Runtime(e.to_string()))
}

fn fit_row(f: &FitReport) -> Row {
    let s = &f.summary;
    vec![
        ("model", f.model.clone()),
        ("y", f.y.to_string()),
        ("n", f.n.to_string()),
        ("mean", p3(s.mean)),
        ("sd", p3(s.variance.sqrt())),
        ("lower", p3(s.lower)),
        ("upper", p3(s.upper)),
        ("p_hist", p3(f.rb_weights[0])),
        ("p_reg", p3(f.rb_weights[1])),
        ("p_ind", p3(f.rb_weights[2])),
        ("ess", p1(f.ess)),
        ("draws", s.n_draws.to_string()),
    ]
}

fn design_row(d: &DesignReport) -> Row {
    let mut row = fit_row(&d.fit);
    row.extend([
        ("n_stage1", d.plan.n_stage1.to_string()),
        ("n_stage2", d.plan.n_stage2.to_string()),
        ("total", d.plan.total.to_string()),
    ]);
    row
}

fn oc_row_strings(r: &OcRow) -> Row {
    vec![
        ("scenario", r.scenario.to_string()),
        ("method", r.method.clone()),
        ("design", r.design.clone()),
        ("n_max", r.n_max.to_string()),
        ("replicates", r.replicates.to_string()),
        ("size", p1(r.size)),
        ("rmse", p3(r.rmse)),
        ("coverage", p1(r.coverage)),
        ("width", p3(r.width)),
        ("type1", p1(r.type1)),
        ("power", p1(r.power)),
        ("p_hist", p3(r.p_hist)),
        ("p_reg", p3(r.p_reg)),
        ("p_ind", p3(r.p_ind)),
    ]
}

fn sweep_row(r: &SweepRow) -> Row {
    vec![
        ("observed_rate", format!("{:.2}", r.observed_rate)),
        ("p_hist", p3(r.rb_weights[0])),
        ("p_reg", p3(r.rb_weights[1])),
        ("p_ind", p3(r.rb_weights[2])),
        ("stage2_total", r.stage2_total.to_string()),
    ]
}

fn fit_table(f: &FitReport) -> String {
    let s = &f.summary;
    let mut out = String::new();
    let _ = writeln!(out, "model            {}", f.model);
    let _ = writeln!(out, "new trial        {}/{}", f.y, f.n);
    let _ = writeln!(out, "posterior mean   {}", p3(s.mean));
    let _ = writeln!(out, "posterior sd     {}", p3(s.variance.sqrt()));
    let _ = writeln!(
        out,
        "{:.0}% interval     ({}, {})",
        100.0 * s.level,
        p3(s.lower),
        p3(s.upper)
    );
    let _ = writeln!(
        out,
        "submodel weights hist {}  reg {}  ind {}",
        p3(f.rb_weights[0]),
        p3(f.rb_weights[1]),
        p3(f.rb_weights[2])
    );
    let _ = writeln!(out, "effective n      {}", p1(f.ess));
    let _ = writeln!(out, "draws            {}", s.n_draws);
    out
}

fn design_table(d: &DesignReport) -> String {
    let mut out = fit_table(&d.fit);
    let _ = writeln!(out, "stage 1          {}", d.plan.n_stage1);
    let _ = writeln!(out, "stage 2          {}", d.plan.n_stage2);
    let _ = writeln!(out, "total control    {}", d.plan.total);
    out
}

fn oc_table(results: &[ScenarioResult]) -> String {
    let headers: Vec<String> = results
        .iter()
        .map(|r| format!("S{} {} {} {}", r.scenario_id, r.method.name(), r.design.name(), r.n_max))
        .collect();
    let width = headers.iter().map(String::len).max().unwrap_or(0).max(8);
    let mut out = String::new();
    let _ = write!(out, "{:<9}", "");
    for h in &headers {
        let _ = write!(out, " {h:>width$}");
    }
    out.push('\n');
    let metrics: [(&str, fn(&ScenarioResult) -> String); 6] = [
        ("Size", |r| p1(r.oc.mean_size)),
        ("RMSE", |r| p3(r.oc.rmse)),
        ("Coverage", |r| p1(r.oc.coverage)),
        ("Width", |r| p3(r.oc.width)),
        ("Type I", |r| p1(r.oc.type1)),
        ("Power", |r| p1(r.oc.power)),
    ];
    for (name, f) in metrics {
        let _ = write!(out, "{name:<9}");
        for r in results {
            let _ = write!(out, " {:>width$}", f(r));
        }
        out.push('\n');
    }
    out
}

fn sweep_table(rows: &[SweepRow]) -> String {
    let mut out = String::from("rate   p_hist  p_reg   p_ind   total\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.2}   {}   {}   {}   {}",
            r.observed_rate,
            p3(r.rb_weights[0]),
            p3(r.rb_weights[1]),
            p3(r.rb_weights[2]),
            r.stage2_total
        );
    }
    out
}
