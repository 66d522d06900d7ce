use nalgebra::DVector;

use crate::integrate::PhaseState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// `‖∇f‖ <= eps` at the last record.
    Converged,
    /// The iteration budget ran out first. Not an error.
    MaxIter,
    /// A non-finite iterate or an evaluation failure stopped the run.
    Diverged,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIter => "maxiter",
            Termination::Diverged => "diverged",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// State `x_k` as seen at the top of iteration `k`, before the update.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub k: usize,
    /// Only populated when the run was asked to keep positions.
    pub x: Option<DVector<f64>>,
    pub f: f64,
    pub grad_norm: f64,
    /// Speed `‖v_k‖`. For the baselines this is `‖x_k - x_{k-1}‖ / h`.
    pub v_norm: f64,
    /// The update that produced `x_k` zeroed the velocity.
    pub reset: bool,
}

/// Per-iteration record stream of one optimizer run.
///
/// A run that hits `maxiter` holds exactly `maxiter` records; a converged
/// run holds one more than its number of updates (the converged state itself).
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<Record>,
    pub final_state: PhaseState,
    pub termination: Termination,
    /// Number of updates applied.
    pub iterations: usize,
    /// Why the run diverged, when it did.
    pub diagnostic: Option<String>,
}

impl RunTrace {
    pub fn final_x(&self) -> &DVector<f64> {
        &self.final_state.x
    }

    pub fn last_record(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    /// Indices `k` of records flagged as velocity resets.
    pub fn reset_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.records.iter().filter(|r| r.reset).map(|r| r.k)
    }
}

/// Accumulates records and finishes into a [`RunTrace`].
pub(crate) struct TraceBuilder {
    records: Vec<Record>,
    keep_positions: bool,
}

impl TraceBuilder {
    pub(crate) fn new(keep_positions: bool) -> Self {
        TraceBuilder { records: Vec::new(), keep_positions }
    }

    pub(crate) fn push(
        &mut self,
        k: usize,
        x: &DVector<f64>,
        f: f64,
        grad_norm: f64,
        v_norm: f64,
        reset: bool,
    ) {
        let x = self.keep_positions.then(|| x.clone());
        self.records.push(Record { k, x, f, grad_norm, v_norm, reset });
    }

    pub(crate) fn finish(
        self,
        final_state: PhaseState,
        termination: Termination,
        iterations: usize,
        diagnostic: Option<String>,
    ) -> RunTrace {
        RunTrace { records: self.records, final_state, termination, iterations, diagnostic }
    }
}
