//! Phase-diagram sweeps over a one-parameter grid.
//!
//! Every grid point is an independent sudden quench `λi → λi + δλ`; points
//! are evaluated on a rayon pool and collected back in grid order, so the
//! output never depends on scheduling.

mod grid;
mod jumps;
mod point;
mod table;

use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{ChainError, ChainSpec, MAX_SPARSE_SITES};
use crate::eigen::LanczosOptions;
use crate::free_fermion::FreeFermionError;
use crate::lz::{LzError, LzParams};
use crate::work::QuenchParam;

pub use grid::Grid;
pub use jumps::{detect_jumps, Jump, DEFAULT_THRESHOLD_FACTOR, MEDIAN_FLOOR};
pub use point::{evaluate_point, PointDiagnostics, PointReport, DENSE_SECTOR_LIMIT};
pub use table::{read_csv, write_csv, CsvWriter, CSV_HEADER, INCOMPLETE_MARKER};

/// Default `δλ` for closed-form and exact-diagonalization sweeps.
pub const DEFAULT_DELTA: f64 = 1e-5;
/// Default `δh` for free-fermion sweeps.
pub const DEFAULT_DELTA_FF: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Lz,
    XxzEd,
    XxEd,
    XxFf,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Lz, Model::XxzEd, Model::XxEd, Model::XxFf];

    pub fn label(self) -> &'static str {
        match self {
            Model::Lz => "LZ",
            Model::XxzEd => "XXZ_ED",
            Model::XxEd => "XX_ED",
            Model::XxFf => "XX_FF",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.label().eq_ignore_ascii_case(s))
    }

    pub fn default_delta(self) -> f64 {
        match self {
            Model::XxFf => DEFAULT_DELTA_FF,
            _ => DEFAULT_DELTA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Lz(LzParams),
    Chain(ChainSpec),
}

/// Control parameter label written to the `param` column.
pub const LZ_PARAM_LABEL: &str = "lambda";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("delta must be finite and nonzero, got {0}")]
    Delta(f64),
    #[error("model {model} needs {expected} parameters")]
    ParamsMismatch {
        model: &'static str,
        expected: &'static str,
    },
    #[error("model {model} quenches {expected}, not {found}")]
    QuenchParam {
        model: &'static str,
        expected: &'static str,
        found: &'static str,
    },
    #[error("model {model} requires {what}")]
    ModelShape { model: &'static str, what: String },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Lz(#[from] LzError),
    #[error(transparent)]
    FreeFermion(#[from] FreeFermionError),
    #[error("worker count must be at least 1")]
    Workers,
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("jump detection needs at least 4 rows, got {0}")]
    TooFewRows(usize),
    #[error("unknown or non-numeric column {0:?}")]
    Column(String),
    #[error("{0}")]
    Io(String),
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("schema mismatch at column {index}: expected {expected:?}, found {found:?}")]
    Schema {
        index: usize,
        expected: String,
        found: String,
    },
}

/// Everything needed to reproduce one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub model: Model,
    pub params: ModelParams,
    /// Quenched chain parameter; ignored for [`Model::Lz`].
    pub param: QuenchParam,
    pub grid: Grid,
    pub delta: f64,
    pub solver: LanczosOptions,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

impl SweepPlan {
    pub fn lz(params: LzParams, grid: Grid, delta: f64) -> Self {
        Self {
            model: Model::Lz,
            params: ModelParams::Lz(params),
            param: QuenchParam::LambdaZ,
            grid,
            delta,
            solver: LanczosOptions::default(),
            workers: None,
            output: None,
        }
    }

    pub fn chain(model: Model, spec: ChainSpec, param: QuenchParam, grid: Grid, delta: f64) -> Self {
        Self {
            model,
            params: ModelParams::Chain(spec),
            param,
            grid,
            delta,
            solver: LanczosOptions::default(),
            workers: None,
            output: None,
        }
    }

    /// Label of the quenched parameter as written to CSV.
    pub fn param_label(&self) -> &'static str {
        match self.model {
            Model::Lz => LZ_PARAM_LABEL,
            _ => self.param.label(),
        }
    }

    pub fn n_sites(&self) -> usize {
        match self.params {
            ModelParams::Lz(_) => 1,
            ModelParams::Chain(spec) => spec.n_sites,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        self.grid.validate()?;
        self.validate_model()
    }

    /// Every check of [`validate`](Self::validate) except the grid.
    pub fn validate_model(&self) -> Result<(), SweepError> {
        if !self.delta.is_finite() || self.delta == 0.0 {
            return Err(SweepError::Delta(self.delta));
        }
        if self.workers == Some(0) {
            return Err(SweepError::Workers);
        }
        let model = self.model.label();
        match (self.model, &self.params) {
            (Model::Lz, ModelParams::Lz(_)) => Ok(()),
            (Model::Lz, _) => Err(SweepError::ParamsMismatch {
                model,
                expected: "Landau-Zener",
            }),
            (_, ModelParams::Lz(_)) => Err(SweepError::ParamsMismatch {
                model,
                expected: "chain",
            }),
            (Model::XxzEd, ModelParams::Chain(spec)) => {
                spec.validate()?;
                if spec.n_sites > MAX_SPARSE_SITES {
                    return Err(ChainError::SiteCount(spec.n_sites).into());
                }
                Ok(())
            }
            (Model::XxEd, ModelParams::Chain(spec)) => {
                spec.validate()?;
                self.require_field_quench()?;
                if spec.jx != spec.jy || spec.lambda_z != 0.0 {
                    return Err(SweepError::ModelShape {
                        model,
                        what: "jx = jy and lambda_z = 0".into(),
                    });
                }
                Ok(())
            }
            (Model::XxFf, ModelParams::Chain(spec)) => {
                self.require_field_quench()?;
                if spec.n_sites < 2 {
                    return Err(ChainError::TooShort(spec.n_sites).into());
                }
                if spec.jx != spec.jy || spec.lambda_z != 0.0 || spec.pin_strength != 0.0 {
                    return Err(SweepError::ModelShape {
                        model,
                        what: "jx = jy, lambda_z = 0 and no pinning field".into(),
                    });
                }
                if !spec.jx.is_finite() || !spec.field_h.is_finite() {
                    return Err(ChainError::NonFinite("jx or field_h").into());
                }
                Ok(())
            }
        }
    }

    fn require_field_quench(&self) -> Result<(), SweepError> {
        if self.param != QuenchParam::FieldH {
            return Err(SweepError::QuenchParam {
                model: self.model.label(),
                expected: QuenchParam::FieldH.label(),
                found: self.param.label(),
            });
        }
        Ok(())
    }

    /// Grid values after nudging off known degeneracy points.
    pub fn grid_points(&self) -> Vec<(f64, bool)> {
        self.grid.points_nudged(|x| point::is_degenerate_point(self, x))
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub model: Model,
    pub n_sites: usize,
    pub param: String,
    pub grid_value: f64,
    pub delta: f64,
    pub e0_i: f64,
    pub e0_f: f64,
    pub avg_work: f64,
    pub delta_u: f64,
    pub irr_work: f64,
    pub variance: f64,
    pub avg_work_per_delta: f64,
    pub irr_per_delta2: f64,
    pub eq2_discrepancy: f64,
    pub flags: Vec<String>,
}

/// Numeric columns addressable by name.
pub const NUMERIC_COLUMNS: [&str; 11] = [
    "grid_value",
    "delta",
    "e0_i",
    "e0_f",
    "avg_work",
    "delta_u",
    "irr_work",
    "variance",
    "avg_work_per_delta",
    "irr_per_delta2",
    "eq2_discrepancy",
];

impl SweepRow {
    pub fn column(&self, name: &str) -> Option<f64> {
        Some(match name {
            "grid_value" => self.grid_value,
            "delta" => self.delta,
            "e0_i" => self.e0_i,
            "e0_f" => self.e0_f,
            "avg_work" => self.avg_work,
            "delta_u" => self.delta_u,
            "irr_work" => self.irr_work,
            "variance" => self.variance,
            "avg_work_per_delta" => self.avg_work_per_delta,
            "irr_per_delta2" => self.irr_per_delta2,
            "eq2_discrepancy" => self.eq2_discrepancy,
            _ => return None,
        })
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

/// Runs every grid point and returns the rows in grid order.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<SweepRow>, SweepError> {
    Ok(run_sweep_detailed(plan)?.into_iter().map(|r| r.row).collect())
}

/// Evaluates a single control value without nudging; the grid is ignored.
pub fn evaluate_single(plan: &SweepPlan, x: f64) -> Result<PointReport, SweepError> {
    plan.validate_model()?;
    if !x.is_finite() {
        return Err(SweepError::Grid(format!("point {x} is not finite")));
    }
    Ok(evaluate_point(plan, x, false))
}

/// Like [`run_sweep`], also returning per-point diagnostics.
pub fn run_sweep_detailed(plan: &SweepPlan) -> Result<Vec<PointReport>, SweepError> {
    let mut out = Vec::new();
    run_sweep_streaming(plan, |report| {
        out.push(report);
        Ok::<(), std::convert::Infallible>(())
    })
    .map_err(|e| match e {
        StreamError::Sweep(e) => e,
        StreamError::Sink(never) => match never {},
    })?;
    Ok(out)
}

#[derive(Debug)]
pub enum StreamError<E> {
    Sweep(SweepError),
    /// The sink rejected a row; rows before it were delivered.
    Sink(E),
}

/// Evaluates the grid in ordered chunks and hands each report to `sink` in
/// grid order as soon as its chunk is complete.
pub fn run_sweep_streaming<E, F>(plan: &SweepPlan, mut sink: F) -> Result<(), StreamError<E>>
where
    F: FnMut(PointReport) -> Result<(), E>,
{
    plan.validate().map_err(StreamError::Sweep)?;
    let workers = plan
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| StreamError::Sweep(SweepError::Pool(e.to_string())))?;
    let points = plan.grid_points();
    for chunk in points.chunks(4 * workers) {
        let reports: Vec<PointReport> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&(x, nudged)| evaluate_point(plan, x, nudged))
                .collect()
        });
        for report in reports {
            sink(report).map_err(StreamError::Sink)?;
        }
    }
    Ok(())
}
