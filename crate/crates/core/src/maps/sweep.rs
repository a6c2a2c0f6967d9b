use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MapGrid, MapRow, MapTable, MapsError, PointStatus};
use crate::model::{Frame, ModelParams};
use crate::observables::{translate_drive, EntropyConvention, ObservableSet};
use crate::solver::{mf_branches, solve_exact_with, SolverError, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    Exact,
    MeanField,
}

struct Solved {
    observables: ObservableSet,
    cutoff: Option<usize>,
    branches: Option<usize>,
    degenerate: bool,
}

fn status_of(err: &SolverError) -> PointStatus {
    match err {
        SolverError::NoConvergedBranch { .. } => PointStatus::Unconverged,
        other => PointStatus::Failed(other.to_string()),
    }
}

fn solve_point(
    p: &ModelParams,
    mode: SweepMode,
    opts: &SolverOptions,
    conv: EntropyConvention,
) -> Result<Solved, SolverError> {
    match mode {
        SweepMode::Exact => {
            let pt = solve_exact_with(p, opts, conv)?;
            Ok(Solved {
                degenerate: pt.ground.degenerate,
                observables: pt.observables,
                cutoff: Some(pt.cutoff),
                branches: None,
            })
        }
        SweepMode::MeanField => {
            let b = mf_branches(p, &[], opts)?;
            let mf = crate::solver::MeanField::new(p)?;
            Ok(Solved {
                observables: mf.observables(&b.selected, opts, conv)?,
                cutoff: None,
                branches: Some(b.count()),
                degenerate: false,
            })
        }
    }
}

fn row(v: f64, j: f64, v_tilde: f64, solved: &Result<Solved, SolverError>, translate: Option<&ModelParams>) -> MapRow {
    match solved {
        Ok(s) => MapRow {
            v_ext: v,
            j_ext: j,
            v_tilde,
            observables: Some(match translate {
                Some(p) => translate_drive(&s.observables, p.omega, p.lambda, j),
                None => s.observables.clone(),
            }),
            cutoff: s.cutoff,
            branches: s.branches,
            status: if s.degenerate {
                PointStatus::Degenerate
            } else {
                PointStatus::Ok
            },
        },
        Err(e) => MapRow {
            v_ext: v,
            j_ext: j,
            v_tilde,
            observables: None,
            cutoff: None,
            branches: None,
            status: status_of(e),
        },
    }
}

/// Solves every grid point with the model `template` (its `v_ext` and
/// `j_ext` are replaced per point).
///
/// Transformed-frame exact solves and mean-field solves depend on the
/// external pair only through `ṽ`, so each distinct `ṽ` is solved once at
/// zero drive and translated to every `j_ext` sharing it. Work runs on the
/// current rayon pool; rows are assembled in grid order, so the result does
/// not depend on the number of workers. Per-point failures are recorded in
/// the row status.
pub fn sweep(
    template: &ModelParams,
    grid: &MapGrid,
    mode: SweepMode,
    opts: &SolverOptions,
    conv: EntropyConvention,
) -> Result<MapTable, MapsError> {
    template.validate().map_err(SolverError::from)?;
    opts.validate().map_err(MapsError::Grid)?;
    let at = |v: f64, j: f64| template.clone().with_external(v, j);
    let collapse = mode == SweepMode::MeanField || opts.frame == Frame::Transformed;
    let rows = if collapse {
        let mut keys: BTreeMap<u64, f64> = BTreeMap::new();
        for (v, j) in grid.points() {
            let vt = at(v, j).v_tilde();
            keys.insert(vt.to_bits(), vt);
        }
        let unique: Vec<(u64, f64)> = keys.into_iter().collect();
        let solved: Vec<Result<Solved, SolverError>> = unique
            .par_iter()
            .map(|&(_, vt)| solve_point(&at(vt, 0.0), mode, opts, conv))
            .collect();
        let lookup: BTreeMap<u64, usize> = unique.iter().enumerate().map(|(i, &(k, _))| (k, i)).collect();
        grid.points()
            .map(|(v, j)| {
                let vt = at(v, j).v_tilde();
                let s = &solved[lookup[&vt.to_bits()]];
                row(v, j, vt, s, Some(template))
            })
            .collect()
    } else {
        let pts: Vec<(f64, f64)> = grid.points().collect();
        pts.par_iter()
            .map(|&(v, j)| {
                let p = at(v, j);
                row(v, j, p.v_tilde(), &solve_point(&p, mode, opts, conv), None)
            })
            .collect()
    };
    Ok(MapTable {
        grid: grid.clone(),
        mode,
        rows,
    })
}

/// One-dimensional map along `ṽ` at zero drive.
pub fn profile_sweep(
    template: &ModelParams,
    v_tilde: &[f64],
    mode: SweepMode,
    opts: &SolverOptions,
    conv: EntropyConvention,
) -> Result<MapTable, MapsError> {
    let grid = MapGrid::new(v_tilde.to_vec(), vec![0.0])?;
    sweep(template, &grid, mode, opts, conv)
}
