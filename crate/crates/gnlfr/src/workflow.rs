//! Fit, tune, predict and residual-analysis pipelines shared by the CLI and
//! the tests.

use std::io::Write;

use gnlfr_core::analysis::{
    mean_map, residual_map, transport_abscissae, EpsilonChoice, LooContext, LooFold, TransportMap, TRANSPORT_POINTS,
};
use gnlfr_core::regression::{GcvRow, GcvTable};
use gnlfr_core::{
    bandwidth_heuristic, gcv_tune, FittedModel, KernelKind, KernelSpec, MetricObject, QuantileObject, EPSILON_GRID,
};
use serde::Serialize;

use crate::error::{AppError, AppResult};
use crate::parallel::loo_folds;

/// Kernel family plus an optional fixed parameter. Without `gamma`, the
/// Gaussian and Laplacian kernels take the bandwidth heuristic on the
/// training predictors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelChoice {
    pub kind: KernelKind,
    pub gamma: Option<f64>,
    pub offset: f64,
}

impl KernelChoice {
    pub fn resolve(&self, predictors: &[MetricObject]) -> gnlfr_core::Result<KernelSpec> {
        match self.kind {
            KernelKind::Linear => Ok(KernelSpec::linear(self.offset)),
            kind => {
                let gamma = match self.gamma {
                    Some(g) => g,
                    None => bandwidth_heuristic(predictors)?,
                };
                KernelSpec::new(kind, gamma, 0.0)
            }
        }
    }
}

/// Either a fixed `ε` or GCV over the default grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    Fixed(f64),
    Gcv,
}

impl std::str::FromStr for Regularization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("gcv") {
            return Ok(Regularization::Gcv);
        }
        match s.parse::<f64>() {
            Ok(e) if e > 0.0 && e.is_finite() => Ok(Regularization::Fixed(e)),
            _ => Err(format!("expected a positive number or 'gcv', got '{s}'")),
        }
    }
}

/// A fitted model with the choices that produced it.
pub struct Fit {
    pub model: FittedModel,
    pub gcv: Option<GcvTable>,
}

pub fn fit(
    predictors: Vec<MetricObject>,
    responses: Vec<MetricObject>,
    kernel: KernelChoice,
    reg: Regularization,
) -> gnlfr_core::Result<Fit> {
    let spec = kernel.resolve(&predictors)?;
    let (epsilon, gcv) = match reg {
        Regularization::Fixed(e) => (e, None),
        Regularization::Gcv => {
            let (e, table) = gcv_tune(&predictors, &responses, spec, &EPSILON_GRID)?;
            (e, Some(table))
        }
    };
    let model = FittedModel::fit(predictors, responses, spec, epsilon)?;
    Ok(Fit { model, gcv })
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSummary {
    pub kind: &'static str,
    pub gamma: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubjectFit {
    pub id: String,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GcvEntry {
    pub epsilon: f64,
    pub numerator: f64,
    pub trace: f64,
    pub denominator: Option<f64>,
    pub score: Option<f64>,
}

impl From<&GcvRow> for GcvEntry {
    fn from(r: &GcvRow) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        GcvEntry {
            epsilon: r.epsilon,
            numerator: r.numerator,
            trace: r.trace,
            denominator: finite(r.denominator),
            score: finite(r.score),
        }
    }
}

/// JSON summary written by `fit`.
#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub n: usize,
    pub response_kind: String,
    pub kernel: KernelSummary,
    pub epsilon: f64,
    pub gcv: Option<Vec<GcvEntry>>,
    pub mean_fitted_distance: f64,
    pub subjects: Vec<SubjectFit>,
}

pub fn kernel_name(kind: KernelKind) -> &'static str {
    match kind {
        KernelKind::GaussianRbf => "gaussian",
        KernelKind::Laplacian => "laplacian",
        KernelKind::Linear => "linear",
    }
}

/// In-sample distances between each response and its fitted value.
pub fn summarize(fit: &Fit, ids: &[String]) -> gnlfr_core::Result<FitSummary> {
    let model = &fit.model;
    let mut subjects = Vec::with_capacity(model.len());
    for ((x, y), id) in model.gram().objects().iter().zip(model.responses()).zip(ids) {
        let yhat = model.predict(x)?;
        subjects.push(SubjectFit {
            id: id.clone(),
            distance: y.distance(&yhat)?,
        });
    }
    let k = model.kernel();
    Ok(FitSummary {
        n: model.len(),
        response_kind: format!("{:?}", model.responses()[0].kind()).to_lowercase(),
        kernel: KernelSummary {
            kind: kernel_name(k.kind()),
            gamma: k.gamma(),
            offset: k.offset(),
        },
        epsilon: model.epsilon(),
        gcv: fit.gcv.as_ref().map(|t| t.iter().map(GcvEntry::from).collect()),
        mean_fitted_distance: subjects.iter().map(|s| s.distance).sum::<f64>() / subjects.len() as f64,
        subjects,
    })
}

pub fn write_gcv_table<W: Write>(out: W, table: &GcvTable) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epsilon", "numerator", "trace", "denominator", "score"])?;
    for r in table {
        w.write_record([
            r.epsilon.to_string(),
            r.numerator.to_string(),
            r.trace.to_string(),
            r.denominator.to_string(),
            r.score.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Predicted quantile functions, one row per query: `id` then the grid
/// probabilities as column names.
pub fn write_quantile_rows<W: Write>(out: W, rows: &[(String, QuantileObject)]) -> AppResult<()> {
    let first = rows
        .first()
        .ok_or_else(|| AppError::Output("no predictions to write".into()))?;
    let mut w = csv::Writer::from_writer(out);
    let mut head = vec!["id".to_string()];
    head.extend(first.1.grid().points().iter().map(|u| u.to_string()));
    w.write_record(&head)?;
    for (id, q) in rows {
        let mut row = vec![id.clone()];
        row.extend(q.values().iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Leave-one-out fits and residual transport maps of 1-D distributional
/// responses.
#[derive(Debug, Clone)]
pub struct ResidualAnalysis {
    pub ids: Vec<String>,
    pub folds: Vec<LooFold>,
    pub maps: Vec<TransportMap>,
    pub mean_map: TransportMap,
}

impl ResidualAnalysis {
    /// Mean `|T̄(a) − a|` over the abscissae, relative to their range.
    pub fn relative_mean_displacement(&self) -> f64 {
        let a = self.mean_map.abscissae();
        self.mean_map.mean_abs_displacement() / (a[a.len() - 1] - a[0])
    }

    pub fn mean_loo_distance(&self) -> f64 {
        self.folds.iter().map(|f| f.distance).sum::<f64>() / self.folds.len() as f64
    }
}

pub fn residual_analysis(
    ids: Vec<String>,
    predictors: Vec<MetricObject>,
    responses: Vec<MetricObject>,
    kernel: KernelChoice,
    reg: Regularization,
) -> gnlfr_core::Result<ResidualAnalysis> {
    let observed: Vec<QuantileObject> = responses
        .iter()
        .map(|y| {
            y.as_quantile().cloned().ok_or_else(|| {
                gnlfr_core::Error::InvalidArgument("residual maps need 1-D distributional responses".into())
            })
        })
        .collect::<gnlfr_core::Result<_>>()?;
    let spec = kernel.resolve(&predictors)?;
    let choice = match reg {
        Regularization::Fixed(e) => EpsilonChoice::Fixed(e),
        Regularization::Gcv => EpsilonChoice::Gcv(EPSILON_GRID.to_vec()),
    };
    let ctx = LooContext::new(predictors, responses, spec, choice)?;
    let folds = loo_folds(&ctx)?;
    let refs: Vec<&QuantileObject> = observed.iter().collect();
    let abscissae = transport_abscissae(&refs, TRANSPORT_POINTS)?;
    let maps = observed
        .iter()
        .zip(&folds)
        .map(|(y, f)| {
            let fitted = f.prediction.as_quantile().expect("quantile responses give quantile predictions");
            residual_map(y, fitted, &abscissae)
        })
        .collect::<gnlfr_core::Result<Vec<_>>>()?;
    let mean_map = mean_map(&maps)?;
    Ok(ResidualAnalysis {
        ids,
        folds,
        maps,
        mean_map,
    })
}

/// Long-format plot data: `series,subject,abscissa,value` with series
/// `subject`, `mean` and `identity`.
pub fn write_residual_maps<W: Write>(out: W, analysis: &ResidualAnalysis) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["series", "subject", "abscissa", "value"])?;
    for (id, map) in analysis.ids.iter().zip(&analysis.maps) {
        for (a, t) in map.abscissae().iter().zip(map.values()) {
            w.write_record(["subject", id, &a.to_string(), &t.to_string()])?;
        }
    }
    let mean = &analysis.mean_map;
    for (a, t) in mean.abscissae().iter().zip(mean.values()) {
        w.write_record(["mean", "", &a.to_string(), &t.to_string()])?;
    }
    for a in mean.abscissae() {
        let a = a.to_string();
        w.write_record(["identity", "", &a, &a])?;
    }
    w.flush()?;
    Ok(())
}

/// `id,distance,epsilon` per leave-one-out fold.
pub fn write_loo_distances<W: Write>(out: W, analysis: &ResidualAnalysis) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "distance", "epsilon"])?;
    for (id, f) in analysis.ids.iter().zip(&analysis.folds) {
        w.write_record([id.clone(), f.distance.to_string(), f.epsilon.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use gnlfr_core::metric::ProbGrid;

    #[test]
    fn regularization_parsing() {
        assert_eq!("GCV".parse::<Regularization>().unwrap(), Regularization::Gcv);
        assert_eq!("1e-4".parse::<Regularization>().unwrap(), Regularization::Fixed(1e-4));
        assert!("0".parse::<Regularization>().is_err());
        assert!("abc".parse::<Regularization>().is_err());
    }

    #[test]
    fn residual_maps_on_shifted_responses() {
        let g = ProbGrid::equispaced(30).unwrap();
        let xs: Vec<MetricObject> = (0..8).map(|i| MetricObject::scalar(i as f64 / 7.0)).collect();
        let ys: Vec<MetricObject> = (0..8)
            .map(|i| QuantileObject::normal(&g, 2.0 * i as f64 / 7.0, 1.0).unwrap().into())
            .collect();
        let ids = (0..8).map(|i| format!("s{i}")).collect();
        let kernel = KernelChoice {
            kind: KernelKind::Linear,
            gamma: None,
            offset: 1.0,
        };
        let a = residual_analysis(ids, xs, ys, kernel, Regularization::Fixed(1e-8)).unwrap();
        // a linear trend in the mean is fitted exactly by linear weights
        assert!(a.mean_loo_distance() < 1e-5);
        assert!(a.relative_mean_displacement() < 1e-5);
        let mut buf = Vec::new();
        write_residual_maps(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + (8 + 2) * TRANSPORT_POINTS);
    }
}
