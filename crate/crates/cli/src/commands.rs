//! One function per subcommand; each returns the rendered report.

use std::path::Path;

use ehypo_core::ehypo::{ehypo_sample, PointEval};
use ehypo_core::gof::{rank, ComparisonRow, Ranking};
use ehypo_core::ingest::read_sample;
use ehypo_core::{fit, Distribution, EHypoParams, FitResult, GofReport, Sample};
use serde::Serialize;

use crate::args::Format;
use crate::config::{Grid, ModelSpec};
use crate::error::CliError;
use crate::output::{csv_number, csv_table, csv_text, rounded, rounded_vec, to_json};

/// Rendered output plus the failure, if any, to report after emitting it.
#[derive(Debug)]
pub struct Emission {
    pub text: String,
    pub failure: Option<CliError>,
}

impl Emission {
    fn ok(text: String) -> Self {
        Self { text, failure: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameters {
    #[serde(serialize_with = "rounded_vec")]
    pub rates: Vec<f64>,
    #[serde(serialize_with = "rounded")]
    pub k: f64,
}

impl From<&EHypoParams> for Parameters {
    fn from(p: &EHypoParams) -> Self {
        Self { rates: p.rates().as_slice().to_vec(), k: p.k() }
    }
}

fn parameter_cells(p: &Parameters) -> Vec<(String, String)> {
    let mut cells: Vec<(String, String)> = p
        .rates
        .iter()
        .enumerate()
        .map(|(i, r)| (format!("rate_{}", i + 1), csv_number(*r)))
        .collect();
    cells.push(("k".into(), csv_number(p.k)));
    cells
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    #[serde(serialize_with = "rounded")]
    pub t: f64,
    #[serde(serialize_with = "rounded")]
    pub pdf: f64,
    #[serde(serialize_with = "rounded")]
    pub cdf: f64,
    #[serde(serialize_with = "rounded")]
    pub survival: f64,
    #[serde(serialize_with = "rounded")]
    pub hazard: f64,
    pub tail_saturated: bool,
    pub ill_conditioned: bool,
}

impl From<PointEval> for EvalRow {
    fn from(e: PointEval) -> Self {
        Self {
            t: e.t,
            pdf: e.pdf,
            cdf: e.cdf,
            survival: e.survival,
            hazard: e.hazard,
            tail_saturated: e.tail_saturated,
            ill_conditioned: e.ill_conditioned,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub parameters: Parameters,
    pub rows: Vec<EvalRow>,
}

pub fn eval_table(params: &EHypoParams, grid: &Grid) -> EvalReport {
    let dist = params.distribution();
    EvalReport {
        parameters: params.into(),
        rows: grid.points().into_iter().map(|t| dist.evaluate(t).into()).collect(),
    }
}

pub fn eval(params: &EHypoParams, grid: &Grid, format: Format) -> Emission {
    let report = eval_table(params, grid);
    Emission::ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => csv_table(
            &["t", "pdf", "cdf", "survival", "hazard"],
            report.rows.iter().map(|r| {
                [r.t, r.pdf, r.cdf, r.survival, r.hazard].iter().map(|v| csv_number(*v)).collect()
            }),
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub parameters: Parameters,
    pub seed: u64,
    pub count: usize,
    #[serde(serialize_with = "rounded_vec")]
    pub values: Vec<f64>,
}

pub fn sample(params: &EHypoParams, count: usize, seed: u64, format: Format) -> Result<Emission, CliError> {
    let values = ehypo_sample(params, count, seed)?;
    let report = SampleReport { parameters: params.into(), seed, count, values };
    Ok(Emission::ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => csv_table(&["x"], report.values.iter().map(|v| vec![csv_number(*v)])),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataSummary {
    pub path: String,
    pub count: usize,
}

fn load(path: &Path) -> Result<(Sample, DataSummary), CliError> {
    let sample = read_sample(path)?;
    let summary = DataSummary { path: path.display().to_string(), count: sample.len() };
    Ok((sample, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: usize,
    #[serde(serialize_with = "rounded")]
    pub gradient_norm: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Statistics {
    #[serde(serialize_with = "rounded")]
    pub neg2loglik: f64,
    #[serde(serialize_with = "rounded")]
    pub aic: f64,
    #[serde(serialize_with = "rounded")]
    pub aicc: f64,
    #[serde(serialize_with = "rounded")]
    pub bic: f64,
    #[serde(serialize_with = "rounded")]
    pub a_star: f64,
    #[serde(serialize_with = "rounded")]
    pub w_star: f64,
    pub parameters: usize,
    pub tail_degenerate: bool,
}

impl From<&GofReport> for Statistics {
    fn from(r: &GofReport) -> Self {
        Self {
            neg2loglik: r.neg2loglik,
            aic: r.aic,
            aicc: r.aicc,
            bic: r.bic,
            a_star: r.a_star,
            w_star: r.w_star,
            parameters: r.c,
            tail_degenerate: r.tail_degenerate,
        }
    }
}

/// A fitted model with its goodness-of-fit report.
#[derive(Debug, Clone, PartialEq)]
pub struct Fitted {
    pub model: ModelSpec,
    pub seed: u64,
    pub result: FitResult,
    pub gof: GofReport,
}

pub fn fit_model(model: ModelSpec, sample: &Sample, seed: u64) -> Result<Fitted, CliError> {
    let result = fit(sample, &model.fit_options(seed))?;
    let gof = GofReport::new(&result.params.distribution(), result.loglik, model.parameters(), sample)?;
    Ok(Fitted { model, seed, result, gof })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub model: String,
    pub data: DataSummary,
    pub seed: u64,
    pub estimates: Parameters,
    pub statistics: Statistics,
    pub convergence: Convergence,
}

impl FitReport {
    fn new(f: &Fitted, data: DataSummary) -> Self {
        Self {
            model: f.model.to_string(),
            data,
            seed: f.seed,
            estimates: (&f.result.params).into(),
            statistics: (&f.gof).into(),
            convergence: Convergence {
                converged: f.result.converged,
                iterations: f.result.iterations,
                gradient_norm: f.result.gradient_norm,
                warnings: f.result.warnings.clone(),
            },
        }
    }

    fn csv(&self) -> String {
        let s = &self.statistics;
        let c = &self.convergence;
        let mut cells = vec![
            ("model".to_string(), self.model.clone()),
            ("data".into(), csv_text(&self.data.path)),
            ("count".into(), self.data.count.to_string()),
            ("seed".into(), self.seed.to_string()),
        ];
        cells.extend(parameter_cells(&self.estimates));
        cells.extend([
            ("neg2loglik".into(), csv_number(s.neg2loglik)),
            ("aic".into(), csv_number(s.aic)),
            ("aicc".into(), csv_number(s.aicc)),
            ("bic".into(), csv_number(s.bic)),
            ("a_star".into(), csv_number(s.a_star)),
            ("w_star".into(), csv_number(s.w_star)),
            ("parameters".into(), s.parameters.to_string()),
            ("tail_degenerate".into(), s.tail_degenerate.to_string()),
            ("converged".into(), c.converged.to_string()),
            ("iterations".into(), c.iterations.to_string()),
            ("gradient_norm".into(), csv_number(c.gradient_norm)),
            ("warnings".into(), csv_text(&c.warnings.join("; "))),
        ]);
        csv_table(&["field", "value"], cells.into_iter().map(|(k, v)| vec![k, v]))
    }
}

pub fn fit_report(model: ModelSpec, data: &Path, seed: u64) -> Result<FitReport, CliError> {
    let (sample, summary) = load(data)?;
    Ok(FitReport::new(&fit_model(model, &sample, seed)?, summary))
}

pub fn fit_command(model: ModelSpec, data: &Path, seed: u64, format: Format) -> Result<Emission, CliError> {
    let report = fit_report(model, data, seed)?;
    let text = match format {
        Format::Json => to_json(&report),
        Format::Csv => report.csv(),
    };
    let failure = (!report.convergence.converged).then_some(CliError::NotConverged);
    Ok(Emission { text, failure })
}

/// Per-model seed: FNV-1a over the root seed and the model's spec string,
/// so identical specs share a seed and reordering models changes nothing.
pub fn model_seed(root: u64, model: &ModelSpec) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    root.to_le_bytes()
        .iter()
        .chain(model.to_string().as_bytes())
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub model: String,
    pub seed: u64,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimates: Option<Parameters>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistics: Option<Statistics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<Convergence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub data: DataSummary,
    pub seed: u64,
    /// Fitted rows by AIC then name, followed by failed rows in request order.
    pub rows: Vec<CompareRow>,
    pub rankings: Vec<Ranking>,
}

pub fn compare_report(models: &[ModelSpec], data: &Path, seed: u64) -> Result<CompareReport, CliError> {
    let (sample, summary) = load(data)?;
    let outcomes: Vec<(ModelSpec, u64, Result<Fitted, CliError>)> = models
        .iter()
        .map(|&m| {
            let s = model_seed(seed, &m);
            (m, s, fit_model(m, &sample, s))
        })
        .collect();
    let fitted: Vec<&Fitted> = outcomes.iter().filter_map(|(_, _, r)| r.as_ref().ok()).collect();
    let gof_rows: Vec<ComparisonRow> = fitted
        .iter()
        .map(|f| ComparisonRow { name: f.model.to_string(), report: f.gof.clone() })
        .collect();
    let (ordered, rankings) = rank(&gof_rows);

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut used = vec![false; fitted.len()];
    for row in &ordered {
        let i = (0..fitted.len())
            .find(|&i| !used[i] && fitted[i].model.to_string() == row.name)
            .expect("ranked rows come from fitted models");
        used[i] = true;
        let f = fitted[i];
        let report = FitReport::new(f, summary.clone());
        rows.push(CompareRow {
            model: report.model,
            seed: f.seed,
            status: "ok",
            error: None,
            estimates: Some(report.estimates),
            statistics: Some(report.statistics),
            convergence: Some(report.convergence),
        });
    }
    for (m, s, r) in &outcomes {
        if let Err(e) = r {
            rows.push(CompareRow {
                model: m.to_string(),
                seed: *s,
                status: "failed",
                error: Some(e.to_string()),
                estimates: None,
                statistics: None,
                convergence: None,
            });
        }
    }
    Ok(CompareReport { data: summary, seed, rows, rankings })
}

impl CompareReport {
    fn csv(&self) -> String {
        let header = [
            "model", "status", "seed", "rates", "k", "neg2loglik", "aic", "aicc", "bic", "a_star", "w_star",
            "parameters", "converged", "error",
        ];
        csv_table(
            &header,
            self.rows.iter().map(|r| {
                let mut cells = vec![r.model.clone(), r.status.to_string(), r.seed.to_string()];
                match (&r.estimates, &r.statistics, &r.convergence) {
                    (Some(e), Some(s), Some(c)) => {
                        let rates: Vec<String> = e.rates.iter().map(|v| csv_number(*v)).collect();
                        cells.push(rates.join(" "));
                        cells.push(csv_number(e.k));
                        cells.extend([s.neg2loglik, s.aic, s.aicc, s.bic, s.a_star, s.w_star].map(csv_number));
                        cells.push(s.parameters.to_string());
                        cells.push(c.converged.to_string());
                        cells.push(String::new());
                    }
                    _ => {
                        cells.extend(std::iter::repeat_n(String::new(), 10));
                        cells.push(csv_text(r.error.as_deref().unwrap_or("")));
                    }
                }
                cells
            }),
        )
    }
}

pub fn compare(models: &[ModelSpec], data: &Path, seed: u64, format: Format) -> Result<Emission, CliError> {
    let report = compare_report(models, data, seed)?;
    let text = match format {
        Format::Json => to_json(&report),
        Format::Csv => report.csv(),
    };
    let failure = report.rows.iter().find_map(|r| match (&r.error, &r.convergence) {
        (Some(e), _) => Some(CliError::Core(ehypo_core::Error::FitFailed(format!("{}: {e}", r.model)))),
        (None, Some(c)) if !c.converged => Some(CliError::NotConverged),
        _ => None,
    });
    Ok(Emission { text, failure })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    #[serde(serialize_with = "rounded")]
    pub left: f64,
    #[serde(serialize_with = "rounded")]
    pub right: f64,
    pub count: usize,
    #[serde(serialize_with = "rounded")]
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    #[serde(serialize_with = "rounded")]
    pub t: f64,
    #[serde(serialize_with = "rounded")]
    pub pdf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotData {
    pub model: String,
    pub data: DataSummary,
    pub estimates: Parameters,
    #[serde(serialize_with = "rounded")]
    pub bin_width: f64,
    pub histogram: Vec<Bin>,
    pub curve: Vec<CurvePoint>,
}

/// Type-7 sample quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Freedman–Diaconis bin width `2 IQR / N^{1/3}`; falls back to Sturges'
/// bin count when the IQR is zero.
pub fn freedman_diaconis_width(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    let range = sorted[sorted.len() - 1] - sorted[0];
    if iqr > 0.0 {
        2.0 * iqr / n.cbrt()
    } else if range > 0.0 {
        range / (n.log2() + 1.0).ceil()
    } else {
        1.0
    }
}

/// Density-normalised histogram starting at the sample minimum; the last
/// bin is closed on the right.
pub fn histogram(sample: &Sample) -> (f64, Vec<Bin>) {
    let xs = sample.sorted();
    let width = freedman_diaconis_width(&xs);
    let lo = xs[0];
    let bins = (((xs[xs.len() - 1] - lo) / width).ceil() as usize).max(1);
    let mut counts = vec![0usize; bins];
    for &x in &xs {
        let i = (((x - lo) / width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    let total = xs.len() as f64;
    let histogram = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| Bin {
            left: lo + i as f64 * width,
            right: lo + (i + 1) as f64 * width,
            count,
            density: count as f64 / (total * width),
        })
        .collect();
    (width, histogram)
}

pub fn plot_data(model: ModelSpec, data: &Path, grid: Option<Grid>, seed: u64) -> Result<PlotData, CliError> {
    let (sample, summary) = load(data)?;
    let fitted = fit_model(model, &sample, seed)?;
    let grid = match grid {
        Some(g) => g,
        None => {
            let max = sample.sorted()[sample.len() - 1];
            Grid::new(0.0, max, max / 200.0)?
        }
    };
    let dist = fitted.result.params.distribution();
    let (bin_width, histogram) = histogram(&sample);
    Ok(PlotData {
        model: model.to_string(),
        data: summary,
        estimates: (&fitted.result.params).into(),
        bin_width,
        histogram,
        curve: grid.points().into_iter().map(|t| CurvePoint { t, pdf: dist.pdf(t) }).collect(),
    })
}

pub fn plotdata(model: ModelSpec, data: &Path, grid: Option<Grid>, seed: u64, format: Format) -> Result<Emission, CliError> {
    let plot = plot_data(model, data, grid, seed)?;
    Ok(Emission::ok(match format {
        Format::Json => to_json(&plot),
        Format::Csv => {
            let mut out = csv_table(
                &["left", "right", "count", "density"],
                plot.histogram.iter().map(|b| {
                    vec![csv_number(b.left), csv_number(b.right), b.count.to_string(), csv_number(b.density)]
                }),
            );
            out.push('\n');
            out.push_str(&csv_table(
                &["t", "pdf"],
                plot.curve.iter().map(|c| vec![csv_number(c.t), csv_number(c.pdf)]),
            ));
            out
        }
    }))
}
