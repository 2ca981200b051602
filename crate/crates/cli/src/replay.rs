//! Re-executing a recorded run with its full time series.

use consensus_core::report::RunRecord;
use consensus_core::{run_simulation, CellConfig, RunResult, SweepSpec};

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("seed {0} does not belong to any cell of this configuration")]
    UnknownSeed(u64),
    #[error("record protocol `{record}` differs from configuration protocol `{config}`")]
    ProtocolMismatch { record: String, config: String },
    #[error("replayed run differs from the record: {0}")]
    Diverged(String),
    #[error(transparent)]
    Core(#[from] consensus_core::Error),
}

/// Finds the cell and run index that produced `seed`.
pub fn locate_seed(spec: &SweepSpec, seed: u64) -> Option<(CellConfig, usize)> {
    spec.cells().into_iter().find_map(|cell| {
        (0..spec.runs_per_cell)
            .find(|&run| spec.run_seed(&cell, run) == seed)
            .map(|run| (cell, run))
    })
}

/// Re-runs the recorded run with series recording switched on and checks
/// the outcome against the record.
pub fn replay(record: &RunRecord, spec: &SweepSpec) -> Result<RunResult, ReplayError> {
    if record.protocol != spec.protocol {
        return Err(ReplayError::ProtocolMismatch {
            record: record.protocol.to_string(),
            config: spec.protocol.to_string(),
        });
    }
    let (cell, _) = locate_seed(spec, record.seed).ok_or(ReplayError::UnknownSeed(record.seed))?;
    let config = spec.sim_config(&cell, record.seed, true)?;
    let result = run_simulation(&config)?;
    let replayed = RunRecord::from(&result);
    if &replayed != record {
        return Err(ReplayError::Diverged(format!(
            "recorded {record:?}, replayed {replayed:?}"
        )));
    }
    Ok(result)
}
