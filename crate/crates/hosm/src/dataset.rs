//! Reference-dataset generation over a (peak wavelength, steepness) grid.

use rayon::prelude::*;
use std::sync::Mutex;

use wavecore::{Grid, SpectrumParams, WaveField};

use crate::{HosmConfig, HosmError, HosmSolver, Result};

/// Identity and provenance of one generated sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub id: String,
    pub peak_wavelength: f64,
    pub steepness: f64,
    pub seed: u64,
    pub combo_index: usize,
    pub replicate: usize,
}

/// Sink for generated fields. Implementations must serialise manifest
/// updates internally; `generate_dataset` may call from multiple threads.
pub trait DatasetWriter: Send {
    fn write_sample(
        &mut self,
        record: &SampleRecord,
        field: &WaveField,
    ) -> std::result::Result<(), String>;
    fn write_failure(
        &mut self,
        record: &SampleRecord,
        reason: &str,
    ) -> std::result::Result<(), String>;
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenerationSummary {
    pub written: usize,
    pub failed: usize,
}

/// The paper's parameter grid: Lp in {100, 110, .., 200} m crossed with
/// eps in {0.02, 0.03, .., 0.13}.
pub fn paper_parameter_grid() -> Vec<(f64, f64)> {
    let mut combos = Vec::new();
    for i in 0..11 {
        for j in 0..12 {
            combos.push((100.0 + 10.0 * i as f64, 0.02 + 0.01 * j as f64));
        }
    }
    combos
}

/// Deterministic per-sample seed derivation (splitmix64 over the inputs).
pub fn derive_seed(base: u64, combo_index: usize, replicate: usize) -> u64 {
    let mut z = base
        .wrapping_add(0x9e37_79b9_7f4a_7c15_u64.wrapping_mul(1 + combo_index as u64))
        .wrapping_add(0x517c_c1b7_2722_0a95_u64.wrapping_mul(1 + replicate as u64));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generate `per_combo` samples for every (Lp, eps) combination: sample an
/// initial condition, relax it for the configured number of peak periods,
/// then record the full field. Diverged runs are reported to the writer and
/// generation continues.
pub fn generate_dataset(
    param_grid: &[(f64, f64)],
    per_combo: usize,
    grid: &Grid,
    cfg: &HosmConfig,
    base_seed: u64,
    writer: &mut dyn DatasetWriter,
) -> Result<GenerationSummary> {
    if param_grid.is_empty() || per_combo == 0 {
        return Err(HosmError::InvalidArgument(
            "empty parameter grid or zero samples per combination".into(),
        ));
    }
    let solver = HosmSolver::new(grid, cfg)?;
    let jobs: Vec<SampleRecord> = param_grid
        .iter()
        .enumerate()
        .flat_map(|(ci, &(lp, eps))| {
            (0..per_combo).map(move |rep| SampleRecord {
                id: format!("s{:05}", ci * per_combo + rep),
                peak_wavelength: lp,
                steepness: eps,
                seed: derive_seed(base_seed, ci, rep),
                combo_index: ci,
                replicate: rep,
            })
        })
        .collect();

    let shared = Mutex::new((writer, GenerationSummary::default()));
    let results: Vec<Result<()>> = jobs
        .par_iter()
        .map(|record| {
            let mut params =
                SpectrumParams::new(record.peak_wavelength, record.steepness, record.seed);
            params.depth = grid.depth;
            match solver.simulate_field(&params) {
                Ok(field) => {
                    let mut guard = shared.lock().expect("writer lock");
                    let (w, summary) = &mut *guard;
                    w.write_sample(record, &field).map_err(HosmError::Writer)?;
                    summary.written += 1;
                    Ok(())
                }
                Err(HosmError::SolverDiverged { time, step, reason }) => {
                    let mut guard = shared.lock().expect("writer lock");
                    let (w, summary) = &mut *guard;
                    w.write_failure(
                        record,
                        &format!("diverged at t={time:.3} step {step}: {reason}"),
                    )
                    .map_err(HosmError::Writer)?;
                    summary.failed += 1;
                    Ok(())
                }
                Err(e) => Err(e),
            }
        })
        .collect();
    for r in results {
        r?;
    }
    let (_, summary) = shared.into_inner().expect("writer lock");
    Ok(summary)
}
