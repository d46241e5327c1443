//! An uncertain experimentalist who knows the state is `|0>` or `|+>` with
//! equal odds. Average fidelity rewards reporting the top eigenvector of the
//! mean state (a pure state she knows may be wrong); the log score rewards
//! reporting the mean state itself.

use serde::Serialize;

use crate::error::Result;
use crate::ext::ExtReal;
use crate::game::{argmax, bloch_from_polar, bloch_grid, compass_search};
use crate::quantum::{eigendecompose, fidelity, DensityMatrix};
use crate::scoring::{ensemble_expected_reward, ScoringRule};

#[derive(Debug, Clone, Serialize)]
pub struct FidelityCounterexample {
    pub ensemble: Vec<(DensityMatrix, f64)>,
    pub mean_state: DensityMatrix,
    pub top_eigenvalue: f64,
    pub top_eigenprojector: DensityMatrix,
    pub grid_size: usize,
    /// Maximizer of the ensemble-average fidelity (grid, then refined).
    pub fidelity_optimum: DensityMatrix,
    pub fidelity_optimum_value: f64,
    /// `F(fidelity_optimum, top_eigenprojector)`.
    pub fidelity_optimum_overlap_with_top: f64,
    pub fidelity_of_mean: f64,
    /// Maximizer of the ensemble-average log-score reward (grid, then refined).
    pub hers_optimum: DensityMatrix,
    pub hers_optimum_value: ExtReal,
    pub hers_optimum_trace_distance_to_mean: f64,
    pub hers_reward_of_mean: ExtReal,
    pub hers_reward_of_fidelity_optimum: ExtReal,
}

fn average_fidelity(ensemble: &[(DensityMatrix, f64)], report: &DensityMatrix) -> Result<f64> {
    let mut acc = 0.0;
    for (state, w) in ensemble {
        acc += w * fidelity(report, state)?;
    }
    Ok(acc)
}

/// Runs the comparison on a Bloch-ball grid of `resolution^3` candidates
/// followed by a local compass search from the best grid point.
pub fn fidelity_counterexample(resolution: usize) -> Result<FidelityCounterexample> {
    let ensemble = vec![(DensityMatrix::basis_state(2, 0), 0.5), (DensityMatrix::plus(), 0.5)];
    let mean_state = DensityMatrix::convex_combination(ensemble.iter().map(|(s, w)| (s, *w)))?;
    let spec = eigendecompose(&mean_state)?;
    let top_eigenprojector = DensityMatrix::pure(&spec.basis.vector(0))?;
    let log = ScoringRule::log();

    let grid = bloch_grid(resolution);
    let fid_scores = grid
        .iter()
        .map(|s| average_fidelity(&ensemble, s).map(ExtReal::Finite))
        .collect::<Result<Vec<_>>>()?;
    let hers_scores = grid
        .iter()
        .map(|s| ensemble_expected_reward(&log, ensemble.iter().map(|(s, w)| (s, *w)), s))
        .collect::<Result<Vec<_>>>()?;

    // Average fidelity is linear in the report, so its maximum sits on the
    // sphere of pure states; refine over the two angles there.
    let start = grid[argmax(&fid_scores)].bloch().expect("qubit");
    let r = norm3(start).max(1e-12);
    let theta = (start[2] / r).clamp(-1.0, 1.0).acos();
    let phi = start[1].atan2(start[0]);
    let pure_at = |a: &[f64]| DensityMatrix::from_bloch(bloch_from_polar(1.0, a[0], a[1]));
    let fid_search = compass_search(
        |a| match pure_at(a).and_then(|s| average_fidelity(&ensemble, &s)) {
            Ok(v) => ExtReal::Finite(v),
            Err(_) => ExtReal::NegInfinity,
        },
        &[theta, phi],
        0.1,
        1e-12,
        200_000,
    );
    let fidelity_optimum = pure_at(&fid_search.point)?;

    let hers_start = grid[argmax(&hers_scores)].bloch().expect("qubit");
    let hers_search = compass_search(
        |v| {
            if norm3([v[0], v[1], v[2]]) >= 1.0 {
                return ExtReal::NegInfinity;
            }
            match DensityMatrix::from_bloch([v[0], v[1], v[2]])
                .and_then(|s| ensemble_expected_reward(&log, ensemble.iter().map(|(s, w)| (s, *w)), &s))
            {
                Ok(v) => v,
                Err(_) => ExtReal::NegInfinity,
            }
        },
        &hers_start,
        0.05,
        1e-12,
        200_000,
    );
    let p = &hers_search.point;
    let hers_optimum = DensityMatrix::from_bloch([p[0], p[1], p[2]])?;

    let reward = |s: &DensityMatrix| ensemble_expected_reward(&log, ensemble.iter().map(|(s, w)| (s, *w)), s);
    Ok(FidelityCounterexample {
        top_eigenvalue: spec.values[0],
        grid_size: grid.len(),
        fidelity_optimum_value: average_fidelity(&ensemble, &fidelity_optimum)?,
        fidelity_optimum_overlap_with_top: fidelity(&fidelity_optimum, &top_eigenprojector)?,
        fidelity_of_mean: average_fidelity(&ensemble, &mean_state)?,
        hers_optimum_value: hers_search.value,
        hers_optimum_trace_distance_to_mean: hers_optimum.trace_distance(&mean_state)?,
        hers_reward_of_mean: reward(&mean_state)?,
        hers_reward_of_fidelity_optimum: reward(&fidelity_optimum)?,
        fidelity_optimum,
        hers_optimum,
        top_eigenprojector,
        mean_state,
        ensemble,
    })
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
