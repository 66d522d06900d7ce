use conlaw::objective::{
    nesterov_worst_case, piecewise_cosine_1d, quadratic, shekel, sine_bowl_2d, styblinski_tang, Linear,
    LogSumExp, Objective, QuadraticSpec, ShekelSpec,
};
use nalgebra::{DMatrix, DVector};

use crate::config::ObjectiveConfig;
use crate::CliError;

pub const NAMES: [&str; 9] = [
    "quadratic",
    "quadratic-nesterov",
    "quadratic-random",
    "lse",
    "styblinski-tang",
    "shekel",
    "piecewise-cosine",
    "sine-bowl",
    "linear",
];

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn need_dim(cfg: &ObjectiveConfig) -> Result<usize, CliError> {
    cfg.dim.ok_or_else(|| CliError::Config(format!("objective {} needs --dim", cfg.name)))
}

fn read_matrix(path: &std::path::Path) -> Result<DMatrix<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{} must hold a JSON array of rows: {e}", path.display())))?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("{} is not a square matrix", path.display())));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn quadratic_spec(cfg: &ObjectiveConfig) -> Result<QuadraticSpec, CliError> {
    let b = cfg.b.as_ref().map(|b| DVector::from_column_slice(b));
    match (&cfg.diag, &cfg.matrix) {
        (Some(d), None) => QuadraticSpec::diagonal(d, b).map_err(config_err),
        (None, Some(path)) => {
            let a = read_matrix(path)?;
            let b = b.unwrap_or_else(|| DVector::zeros(a.nrows()));
            QuadraticSpec::new(a, b).map_err(config_err)
        }
        _ => Err(CliError::Config("quadratic needs exactly one of --diag or --matrix".into())),
    }
}

/// Builds the objective and fills in the defaults it used.
pub fn build(cfg: &mut ObjectiveConfig, seed: u64) -> Result<Box<dyn Objective>, CliError> {
    let f: Box<dyn Objective> = match cfg.name.as_str() {
        "quadratic" => Box::new(quadratic(quadratic_spec(cfg)?)),
        "quadratic-nesterov" => Box::new(quadratic(nesterov_worst_case(need_dim(cfg)?).map_err(config_err)?)),
        "quadratic-random" => Box::new(quadratic(
            QuadraticSpec::random_ill_conditioned(need_dim(cfg)?, seed).map_err(config_err)?,
        )),
        "lse" => {
            let dim = *cfg.dim.get_or_insert(50);
            let terms = *cfg.terms.get_or_insert(200);
            let rho = *cfg.rho.get_or_insert(5.0);
            Box::new(LogSumExp::random(dim, terms, rho, seed).map_err(config_err)?)
        }
        "styblinski-tang" => Box::new(styblinski_tang(need_dim(cfg)?).map_err(config_err)?),
        "shekel" => {
            let m = *cfg.m.get_or_insert(10);
            Box::new(shekel(ShekelSpec::new(m).map_err(config_err)?))
        }
        "piecewise-cosine" => Box::new(piecewise_cosine_1d()),
        "sine-bowl" => Box::new(sine_bowl_2d()),
        "linear" => {
            let c =
                cfg.b.as_ref().ok_or_else(|| CliError::Config("linear needs coefficients via --b".into()))?;
            Box::new(Linear::new(DVector::from_column_slice(c), 0.0))
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown objective {other:?}; expected one of {}",
                NAMES.join(", ")
            )))
        }
    };
    match cfg.dim {
        Some(d) if d != f.dim() => Err(CliError::Config(format!(
            "dim {d} does not match objective {} of dimension {}",
            cfg.name,
            f.dim()
        ))),
        _ => {
            cfg.dim = Some(f.dim());
            Ok(f)
        }
    }
}
