use std::fmt::Write as _;

use conlaw::baseline::{gradient_descent, heavy_ball, nesterov_agd, BaselineConfig};
use conlaw::objective::{default_step_size, Objective};
use conlaw::spectral::{block_diagonalize, build_transfer};
use conlaw::{ade_minimize, ec_detect, CombinedSearch, RunConfig, RunTrace, Termination};
use nalgebra::DVector;

use crate::config::{Config, VectorSpec, DEFAULT_EPS, DEFAULT_MAXITER, DEFAULT_STEPS};
use crate::{objectives, CliError};

pub const ALGORITHMS: [&str; 4] = ["gd", "heavy-ball", "nesterov", "ade"];

/// What a subcommand produced: the full file body and a one-line summary.
#[derive(Debug)]
pub struct Report {
    pub body: String,
    pub summary: String,
    /// Set when the run diverged or found nothing; the body is still written.
    pub failure: Option<CliError>,
}

/// Numbers in a fixed, locale-free style: plain decimals in the comfortable
/// range, exponent notation outside it.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn header(cmd: &str, cfg: &Config) -> String {
    format!("# conlaw {cmd} {}\n", cfg.to_json())
}

fn core_err(e: conlaw::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn vector(spec: &VectorSpec, dim: usize, what: &str) -> Result<DVector<f64>, CliError> {
    Ok(DVector::from_vec(spec.resolve(dim, what)?))
}

fn coords(x: &DVector<f64>) -> String {
    x.iter().map(|c| num(*c)).collect::<Vec<_>>().join(",")
}

fn coord_header(dim: usize) -> String {
    (1..=dim).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",")
}

struct Resolved {
    cfg: Config,
    f: Box<dyn Objective>,
    x0: DVector<f64>,
}

/// Builds the objective and fills the defaults shared by every subcommand.
fn resolve(mut cfg: Config) -> Result<Resolved, CliError> {
    let seed = *cfg.seed.get_or_insert(0);
    let f = objectives::build(&mut cfg.objective, seed)?;
    let x0_spec = cfg.x0.get_or_insert(VectorSpec::Scalar(0.0)).clone();
    let x0 = vector(&x0_spec, f.dim(), "x0")?;
    if cfg.h.is_none() {
        let h = default_step_size(&f, &x0).ok_or_else(|| {
            CliError::Config(format!(
                "no default step size for {} (no curvature information); pass --h",
                cfg.objective.name
            ))
        })?;
        cfg.h = Some(h);
    }
    Ok(Resolved { cfg, f, x0 })
}

pub fn run(cfg: Config) -> Result<Report, CliError> {
    let Resolved { mut cfg, f, x0 } = resolve(cfg)?;
    let algorithm = cfg.algorithm.get_or_insert_with(|| "ade".into()).clone();
    let h = cfg.h.unwrap_or_default();
    let eps = *cfg.eps.get_or_insert(DEFAULT_EPS);
    let maxiter = *cfg.maxiter.get_or_insert(DEFAULT_MAXITER);
    let every = *cfg.every.get_or_insert(1);
    if every == 0 {
        return Err(CliError::Config("--every must be at least 1".into()));
    }

    let trace: RunTrace = match algorithm.as_str() {
        "ade" => {
            let mut rc = RunConfig::new(h, maxiter, eps);
            if let Some(v0) = &cfg.v0 {
                rc = rc.with_v0(vector(v0, f.dim(), "v0")?);
            }
            ade_minimize(&f, &x0, &rc)
        }
        "gd" | "heavy-ball" | "nesterov" => {
            let mut bc = BaselineConfig::new(h, maxiter, eps);
            if let Some(g) = cfg.gamma {
                bc = bc.with_gamma(g);
            }
            if let Some(k) = cfg.kappa {
                bc = bc.with_kappa(k);
            }
            match algorithm.as_str() {
                "gd" => gradient_descent(&f, &x0, &bc),
                "heavy-ball" => heavy_ball(&f, &x0, &bc),
                _ => nesterov_agd(&f, &x0, &bc),
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown algorithm {other:?}; expected one of {}",
                ALGORITHMS.join(", ")
            )))
        }
    }
    .map_err(core_err)?;

    let mut body = header("run", &cfg);
    body.push_str("k,f,grad_norm,v_norm,reset\n");
    let last = trace.records.len().saturating_sub(1);
    for (i, r) in trace.records.iter().enumerate() {
        if r.k.is_multiple_of(every) || i == last {
            let _ = writeln!(
                body,
                "{},{},{},{},{}",
                r.k,
                num(r.f),
                num(r.grad_norm),
                num(r.v_norm),
                u8::from(r.reset)
            );
        }
    }
    let final_f = trace.last_record().map_or(f64::NAN, |r| r.f);
    let mut summary = format!(
        "{algorithm}: {} after {} iterations, final f {}",
        trace.termination,
        trace.iterations,
        num(final_f)
    );
    if let Some(d) = &trace.diagnostic {
        let _ = write!(summary, " ({d})");
    }
    let failure = (trace.termination == Termination::Diverged).then(|| CliError::Diverged(summary.clone()));
    Ok(Report { body, summary, failure })
}

pub fn detect(cfg: Config) -> Result<Report, CliError> {
    let Resolved { mut cfg, f, x0 } = resolve(cfg)?;
    let h = cfg.h.unwrap_or_default();
    let n = *cfg.n.get_or_insert(DEFAULT_STEPS);
    let mut rc = RunConfig::new(h, 1, cfg.eps.unwrap_or(DEFAULT_EPS)).with_seed(cfg.seed.unwrap_or(0));
    if let Some(v0) = &cfg.v0 {
        rc = rc.with_v0(vector(v0, f.dim(), "v0")?);
    }
    let set = ec_detect(&f, &x0, &rc, n).map_err(core_err)?;
    // echo the velocity actually used so the header alone reproduces the run
    if let Some(v0) = &set.source_run.v0 {
        cfg.v0 = Some(VectorSpec::List(v0.iter().copied().collect()));
    }

    let mut body = header("detect", &cfg);
    let _ = writeln!(body, "step_index,f,{}", coord_header(f.dim()));
    for c in &set.candidates {
        let _ = writeln!(body, "{},{},{}", c.step_index, num(c.f), coords(&c.position));
    }
    let mut summary = format!("detect: {} candidates in {} steps", set.len(), set.steps);
    if set.is_empty() {
        summary.push_str("; warning: no speed maxima found");
    }
    if let Some(d) = &set.diagnostic {
        let _ = write!(summary, "; stopped early: {d}");
    }
    let failure = set.diverged.then(|| CliError::Diverged(summary.clone()));
    Ok(Report { body, summary, failure })
}

pub fn combined(cfg: Config) -> Result<Report, CliError> {
    let Resolved { mut cfg, f, .. } = resolve(cfg)?;
    let h = cfg.h.unwrap_or_default();
    let eps = *cfg.eps.get_or_insert(DEFAULT_EPS);
    let maxiter = *cfg.maxiter.get_or_insert(DEFAULT_MAXITER);
    let n = *cfg.n.get_or_insert(DEFAULT_STEPS);
    let seed = cfg.seed.unwrap_or(0);
    // without explicit starts x0 is the only start; either way it is echoed
    // once, as a start
    let x0 = cfg.x0.take().unwrap_or(VectorSpec::Scalar(0.0));
    if cfg.starts.is_empty() {
        cfg.starts = vec![x0];
    }
    let starts = cfg.starts.iter().map(|s| vector(s, f.dim(), "start")).collect::<Result<Vec<_>, _>>()?;

    // every start is released from rest unless told otherwise
    let v0 = cfg.v0.get_or_insert(VectorSpec::Scalar(0.0)).clone();
    let detect = RunConfig::new(h, 1, eps).with_seed(seed).with_v0(vector(&v0, f.dim(), "v0")?);
    let local = RunConfig::new(h, maxiter, eps);
    detect.validate(f.dim()).and_then(|_| local.validate(f.dim())).map_err(core_err)?;
    if n < 2 {
        return Err(CliError::Config(format!("detection needs at least 2 steps, got {n}")));
    }
    // inputs are valid from here on, so any error is a failed search
    let result = match CombinedSearch::new(detect, n, local).run(&f, &starts) {
        Ok(r) => r,
        Err(conlaw::Error::NoCandidates) => {
            let body = header("combined", &cfg);
            let summary = "combined: no candidates from any start".to_string();
            return Ok(Report { failure: Some(CliError::Failed(summary.clone())), body, summary });
        }
        Err(e) => {
            let body = header("combined", &cfg);
            let summary = format!("combined: {e}");
            return Ok(Report { failure: Some(CliError::Diverged(summary.clone())), body, summary });
        }
    };

    let mut body = header("combined", &cfg);
    let _ = writeln!(body, "kind,source,index,f,{}", coord_header(f.dim()));
    for (s, set) in result.detections.iter().enumerate() {
        for c in &set.candidates {
            let _ = writeln!(body, "candidate,{s},{},{},{}", c.step_index, num(c.f), coords(&c.position));
        }
    }
    for (i, m) in result.minima.iter().enumerate() {
        let (s, c) = m.sources[0];
        let _ = writeln!(body, "minimum,{s},{c},{},{}", num(m.value), coords(&m.position));
        if i == result.best {
            let _ = writeln!(body, "global,{s},{c},{},{}", num(m.value), coords(&m.position));
        }
    }
    let best = result.best();
    let mut summary = format!(
        "combined: {} candidates, {} minima, global f {}",
        result.candidate_count(),
        result.minima.len(),
        num(best.value)
    );
    for w in &result.warnings {
        let _ = write!(summary, "; warning: {w}");
    }
    Ok(Report { body, summary, failure: None })
}

pub fn analyze(cfg: Config) -> Result<Report, CliError> {
    let Resolved { cfg, f, x0 } = resolve(cfg)?;
    let h = cfg.h.unwrap_or_default();
    let a = f
        .hessian(&x0)
        .ok_or_else(|| CliError::Config(format!("objective {} provides no Hessian", cfg.objective.name)))?;
    let bd = block_diagonalize(&build_transfer(&a, h).map_err(core_err)?).map_err(core_err)?;

    let mut body = header("analyze", &cfg);
    body.push_str("omega,theta,phi,first_reset_estimate\n");
    let mut drift = 0;
    for b in &bd.blocks {
        let (theta, phi) = match &b.angles {
            Some(p) => (num(p.theta), num(p.phi)),
            None => (String::new(), String::new()),
        };
        if b.omega == 0.0 {
            drift += 1;
        }
        let _ = writeln!(body, "{},{theta},{phi},{}", num(b.omega), num(b.first_reset_estimate()));
    }
    let mut summary = format!("analyze: {} modes at h {}", bd.blocks.len(), num(h));
    if drift > 0 {
        let _ = write!(summary, ", {drift} drift modes without phase angles");
    }
    Ok(Report { body, summary, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-2.5), "-2.5");
        assert_eq!(num(1e-7), "1e-7");
        assert_eq!(num(1.5e20), "1.5e20");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(-391.6617), "-391.6617");
    }
}
