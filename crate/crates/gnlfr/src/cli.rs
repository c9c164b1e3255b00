//! Command-line driver.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gnlfr_core::metric::{ProbGrid, DEFAULT_GRID_SIZE};
use gnlfr_core::simgen::{generate, replicate_rng};
use gnlfr_core::{KernelKind, MetricObject};

use crate::binned::{read_objects, write_binned, write_vectors};
use crate::config::{parse_spec, write_report};
use crate::error::{AppError, AppResult};
use crate::fixture::{mortality_fixture, COVARIATE_NAMES};
use crate::parallel;
use crate::workflow::{
    fit, residual_analysis, summarize, write_gcv_table, write_loo_distances, write_quantile_rows,
    write_residual_maps, KernelChoice, Regularization,
};

#[derive(Debug, Parser)]
#[command(name = "gnlfr", version, about = "Nonlinear global Fréchet regression for random objects")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Random seed (overrides the scenario file for `simulate`)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Number of probability grid points for quantile functions
    #[arg(long = "grid-size", global = true)]
    pub grid_size: Option<usize>,

    /// Regularization: a positive number or `gcv`
    #[arg(long, global = true, default_value = "gcv")]
    pub epsilon: Regularization,

    #[arg(long, global = true, value_enum, default_value_t = KernelArg::Gaussian)]
    pub kernel: KernelArg,

    /// Kernel scale γ; defaults to 1 / (2 · mean pairwise squared distance)
    #[arg(long, global = true)]
    pub gamma: Option<f64>,

    /// Constant added by the linear kernel
    #[arg(long, global = true, default_value_t = 1.0)]
    pub offset: f64,

    /// Output file (standard output when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Gaussian,
    Laplacian,
    Linear,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Predictor file: a vector table (`id,…`) or a binned CSV (`edges,…`)
    #[arg(long)]
    pub predictors: PathBuf,

    /// Response file: a binned CSV
    #[arg(long)]
    pub responses: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit on a data set and write a JSON model summary
    Fit(DataArgs),
    /// Fit, then predict the response at every row of a query file
    Predict {
        #[command(flatten)]
        data: DataArgs,
        /// Query predictors, same format as --predictors
        #[arg(long)]
        query: PathBuf,
    },
    /// Write the GCV table over the default regularization grid
    Tune(DataArgs),
    /// Run a simulation scenario and write the MPE report
    Simulate {
        /// Scenario file of `key = value` lines
        #[arg(long)]
        spec: PathBuf,
        /// Override the number of replicates
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Leave-one-out predictions and residual transport maps
    Residuals {
        #[arg(long, required_unless_present = "model_i1", requires = "responses")]
        predictors: Option<PathBuf>,
        #[arg(long)]
        responses: Option<PathBuf>,
        /// Use a generated Model I.1 sample of this size instead of files
        #[arg(long = "model-i1", conflicts_with = "predictors")]
        model_i1: Option<usize>,
        /// Also write `id,distance,epsilon` per subject here
        #[arg(long)]
        distances: Option<PathBuf>,
    },
    /// Write the synthetic mortality-like data set
    Fixture {
        #[arg(long, default_value_t = 60)]
        n: usize,
        /// Where to write the covariate table; histograms go to --out
        #[arg(long)]
        covariates: PathBuf,
    },
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gnlfr: {e}");
            e.exit_code()
        }
    }
}

fn output(path: Option<&Path>) -> AppResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| AppError::Output(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn grid(opts: &GlobalOpts) -> AppResult<ProbGrid> {
    let m = opts.grid_size.unwrap_or(DEFAULT_GRID_SIZE);
    ProbGrid::equispaced(m).map_err(|e| AppError::Usage(format!("--grid-size: {e}")))
}

fn kernel_choice(opts: &GlobalOpts) -> AppResult<KernelChoice> {
    let kind = match opts.kernel {
        KernelArg::Gaussian => KernelKind::GaussianRbf,
        KernelArg::Laplacian => KernelKind::Laplacian,
        KernelArg::Linear => KernelKind::Linear,
    };
    if let Some(g) = opts.gamma {
        if !(g > 0.0 && g.is_finite()) {
            return Err(AppError::Usage(format!("--gamma must be positive, got {g}")));
        }
    }
    Ok(KernelChoice {
        kind,
        gamma: opts.gamma,
        offset: opts.offset,
    })
}

/// Reads both files and pairs rows by id, in predictor order.
fn load_pairs(data: &DataArgs, grid: &ProbGrid) -> AppResult<(Vec<String>, Vec<MetricObject>, Vec<MetricObject>)> {
    pair_objects(
        read_objects(&data.predictors, grid)?,
        read_objects(&data.responses, grid)?,
        &data.responses,
    )
}

fn pair_objects(
    xs: Vec<(String, MetricObject)>,
    ys: Vec<(String, MetricObject)>,
    response_path: &Path,
) -> AppResult<(Vec<String>, Vec<MetricObject>, Vec<MetricObject>)> {
    if xs.len() != ys.len() {
        return Err(AppError::Usage(format!(
            "{} predictor rows but {} response rows",
            xs.len(),
            ys.len()
        )));
    }
    let mut by_id: HashMap<String, MetricObject> = HashMap::with_capacity(ys.len());
    for (id, y) in ys {
        if by_id.insert(id.clone(), y).is_some() {
            return Err(AppError::parse(response_path, 0, format!("duplicate id '{id}'")));
        }
    }
    let mut ids = Vec::with_capacity(xs.len());
    let mut predictors = Vec::with_capacity(xs.len());
    let mut responses = Vec::with_capacity(xs.len());
    for (id, x) in xs {
        let y = by_id
            .remove(&id)
            .ok_or_else(|| AppError::Usage(format!("predictor id '{id}' has no response row")))?;
        ids.push(id);
        predictors.push(x);
        responses.push(y);
    }
    Ok((ids, predictors, responses))
}

fn execute(cli: &Cli) -> AppResult<()> {
    let opts = &cli.global;
    let out = opts.out.as_deref();
    match &cli.command {
        Command::Fit(data) => {
            let grid = grid(opts)?;
            let (ids, xs, ys) = load_pairs(data, &grid)?;
            let fitted = fit(xs, ys, kernel_choice(opts)?, opts.epsilon)?;
            let summary = summarize(&fitted, &ids)?;
            let mut w = output(out)?;
            serde_json::to_writer_pretty(&mut w, &summary).map_err(|e| AppError::Output(e.to_string()))?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Predict { data, query } => {
            let grid = grid(opts)?;
            let (_, xs, ys) = load_pairs(data, &grid)?;
            if ys[0].as_quantile().is_none() {
                return Err(AppError::Usage("predict writes quantile rows; responses must be histograms".into()));
            }
            let queries = read_objects(query, &grid)?;
            let fitted = fit(xs, ys, kernel_choice(opts)?, opts.epsilon)?;
            let rows = queries
                .into_iter()
                .map(|(id, x)| {
                    let y = fitted.model.predict(&x)?;
                    let q = y.as_quantile().cloned().expect("quantile responses give quantile predictions");
                    Ok((id, q))
                })
                .collect::<AppResult<Vec<_>>>()?;
            write_quantile_rows(output(out)?, &rows)?;
        }
        Command::Tune(data) => {
            let grid = grid(opts)?;
            let (_, xs, ys) = load_pairs(data, &grid)?;
            let spec = kernel_choice(opts)?.resolve(&xs)?;
            let (_, table) = gnlfr_core::gcv_tune(&xs, &ys, spec, &gnlfr_core::EPSILON_GRID)?;
            write_gcv_table(output(out)?, &table)?;
        }
        Command::Simulate { spec, replicates } => {
            let text = std::fs::read_to_string(spec).map_err(|source| AppError::Read {
                path: spec.clone(),
                source,
            })?;
            let mut scenario = parse_spec(&text, spec)?;
            if let Some(s) = opts.seed {
                scenario.seed = s;
            }
            if let Some(m) = opts.grid_size {
                scenario.grid_size = m;
            }
            if let Some(b) = replicates {
                scenario.replicates = *b;
            }
            scenario.validate().map_err(|e| AppError::Usage(e.to_string()))?;
            let report = parallel::run_scenario(&scenario)?;
            write_report(output(out)?, &report)?;
        }
        Command::Residuals {
            predictors,
            responses,
            model_i1,
            distances,
        } => {
            let grid = grid(opts)?;
            let (ids, xs, ys) = match (predictors, responses, model_i1) {
                (Some(p), Some(r), None) => load_pairs(
                    &DataArgs {
                        predictors: p.clone(),
                        responses: r.clone(),
                    },
                    &grid,
                )?,
                (None, None, Some(n)) => model_i1_sample(*n, opts.seed.unwrap_or(1), grid.len())?,
                _ => return Err(AppError::Usage("give --predictors and --responses, or --model-i1".into())),
            };
            let analysis = residual_analysis(ids, xs, ys, kernel_choice(opts)?, opts.epsilon)?;
            write_residual_maps(output(out)?, &analysis)?;
            if let Some(path) = distances {
                write_loo_distances(output(Some(path))?, &analysis)?;
            }
            eprintln!(
                "mean LOO distance {:.6}; mean |T(a) - a| / range {:.6}",
                analysis.mean_loo_distance(),
                analysis.relative_mean_displacement()
            );
        }
        Command::Fixture { n, covariates } => {
            if *n < 3 {
                return Err(AppError::Usage(format!("fixture needs n >= 3, got {n}")));
            }
            let fx = mortality_fixture(*n, opts.seed.unwrap_or(1));
            write_vectors(output(Some(covariates))?, &COVARIATE_NAMES, &fx.covariates)?;
            write_binned(output(out)?, &fx.histograms)?;
        }
    }
    Ok(())
}

/// A Model I.1 data set with ids `s1, s2, …`.
pub fn model_i1_sample(
    n: usize,
    seed: u64,
    grid_size: usize,
) -> AppResult<(Vec<String>, Vec<MetricObject>, Vec<MetricObject>)> {
    let mut spec = gnlfr_core::simgen::ScenarioSpec::new(gnlfr_core::simgen::ModelId::I1);
    spec.n = n + n % 2;
    spec.grid_size = grid_size;
    spec.seed = seed;
    spec.validate().map_err(|e| AppError::Usage(e.to_string()))?;
    let mut sample = generate(&spec, &mut replicate_rng(seed, 0))?;
    sample.predictors.truncate(n);
    sample.responses.truncate(n);
    let ids = (1..=n).map(|i| format!("s{i}")).collect();
    Ok((ids, sample.predictors, sample.responses))
}
