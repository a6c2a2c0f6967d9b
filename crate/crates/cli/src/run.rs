//! The six subcommands. Each writes its files into an [`OutputDir`] and
//! returns the per-point status summary.

use anyhow::{Context, Result};
use qedft_maps::maps::{
    find_peaks, format_float, invert_map, plateau_width, polarizability, profile_sweep, sweep, trapezoid, xc_map,
    MapTable, PointStatus, Profile, SweepMode, XcTable,
};
use qedft_maps::solver::converge_cutoff;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{heatmap_script, line_script, OutputDir, StatusSummary};

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), qedft_maps::maps::MapsError>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn map_summary(t: &MapTable) -> StatusSummary {
    StatusSummary::of(t.rows.iter().map(|r| &r.status))
}

/// Index of the drive value closest to zero.
fn zero_drive_column(t: &MapTable) -> usize {
    let j = t.grid.j_values();
    (0..j.len()).min_by(|&a, &b| j[a].abs().total_cmp(&j[b].abs())).unwrap_or(0)
}

pub fn run_sweep(cfg: &RunConfig, out: &mut OutputDir, plots: bool) -> Result<StatusSummary> {
    let grid = cfg.grid.build(cfg.model.lambda)?;
    let table = sweep(&cfg.model, &grid, cfg.sweep.mode, &cfg.solver, cfg.entropy())?;
    out.write("map.csv", &csv_bytes(|b| table.write_csv(b))?)?;
    if plots {
        out.write("plot_map.gp", heatmap_script("map.csv", ("v_ext", "j_ext"), "d", "d(v_ext, j_ext)").as_bytes())?;
    }
    Ok(map_summary(&table))
}

#[derive(Debug, Serialize)]
struct Comparison {
    max_abs_delta_d: f64,
    max_abs_delta_e_int: f64,
    /// Width of `ṽ` over which `|d − level| < half_width`, on the column
    /// nearest zero drive.
    plateau_level: f64,
    plateau_half_width: f64,
    plateau_width_exact: f64,
    plateau_width_mean_field: f64,
    /// The mean-field profile keeps a plateau the exact one has lost.
    residual_mean_field_plateau: bool,
    max_branches: usize,
    multi_branch_points: usize,
}

fn nan_max(xs: impl Iterator<Item = f64>) -> f64 {
    xs.filter(|x| !x.is_nan()).fold(0.0, f64::max)
}

pub fn run_mf_compare(cfg: &RunConfig, out: &mut OutputDir, plots: bool) -> Result<StatusSummary> {
    let grid = cfg.grid.build(cfg.model.lambda)?;
    let conv = cfg.entropy();
    let exact = sweep(&cfg.model, &grid, SweepMode::Exact, &cfg.solver, conv)?;
    let mf = sweep(&cfg.model, &grid, SweepMode::MeanField, &cfg.solver, conv)?;
    out.write("map.csv", &csv_bytes(|b| exact.write_csv(b))?)?;
    out.write("mf_map.csv", &csv_bytes(|b| mf.write_csv(b))?)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "v_ext", "j_ext", "v_tilde", "d_exact", "d_mf", "delta_d", "E_int_exact", "E_int_mf", "delta_E_int",
        "branches", "status",
    ])?;
    let mut deltas = Vec::with_capacity(exact.rows.len());
    for (a, b) in exact.rows.iter().zip(&mf.rows) {
        let (da, db) = (a.value(|o| o.d), b.value(|o| o.d));
        let (ea, eb) = (a.value(|o| o.e_int), b.value(|o| o.e_int));
        let status = if !a.status.has_values() { &a.status } else { &b.status };
        w.write_record([
            format_float(a.v_ext),
            format_float(a.j_ext),
            format_float(a.v_tilde),
            format_float(da),
            format_float(db),
            format_float(db - da),
            format_float(ea),
            format_float(eb),
            format_float(eb - ea),
            b.branches.map(|c| c.to_string()).unwrap_or_default(),
            status.label(),
        ])?;
        deltas.push(((db - da).abs(), (eb - ea).abs()));
    }
    out.write("diff.csv", &w.into_inner().context("flushing diff table")?)?;

    let ij = zero_drive_column(&exact);
    let level = cfg.mf_compare.plateau_level;
    let hw = cfg.mf_compare.plateau_half_width;
    let pe = plateau_width(&Profile::from_table(&exact, ij, |o| o.d)?, level, hw);
    let pm = plateau_width(&Profile::from_table(&mf, ij, |o| o.d)?, level, hw);
    let branches: Vec<usize> = mf.rows.iter().filter_map(|r| r.branches).collect();
    let cmp = Comparison {
        max_abs_delta_d: nan_max(deltas.iter().map(|d| d.0)),
        max_abs_delta_e_int: nan_max(deltas.iter().map(|d| d.1)),
        plateau_level: level,
        plateau_half_width: hw,
        plateau_width_exact: pe,
        plateau_width_mean_field: pm,
        residual_mean_field_plateau: pm > 2.0 * pe && pm > 0.0,
        max_branches: branches.iter().copied().max().unwrap_or(0),
        multi_branch_points: branches.iter().filter(|&&b| b >= 2).count(),
    };
    out.write_json("compare.json", &cmp)?;
    if plots {
        out.write("plot_map.gp", heatmap_script("map.csv", ("v_ext", "j_ext"), "d", "exact d(v_ext, j_ext)").as_bytes())?;
        out.write("plot_mf_map.gp", heatmap_script("mf_map.csv", ("v_ext", "j_ext"), "d", "mean-field d(v_ext, j_ext)").as_bytes())?;
        out.write("plot_diff.gp", heatmap_script("diff.csv", ("v_ext", "j_ext"), "delta_d", "d_mf - d_exact").as_bytes())?;
    }
    let mut s = map_summary(&exact);
    for r in &mf.rows {
        s.add(&r.status);
    }
    Ok(s)
}

fn xc_summary(t: &XcTable) -> StatusSummary {
    StatusSummary::of(t.rows.iter().map(|r| &r.status))
}

pub fn run_xc_map(cfg: &RunConfig, out: &mut OutputDir, plots: bool) -> Result<StatusSummary> {
    let d = cfg.xc.d_axis(&cfg.model).values();
    let q = cfg.xc.q.values();
    let table = xc_map(&cfg.model, &d, &q, &cfg.solver, &cfg.inversion)?;
    out.write("xc.csv", &csv_bytes(|b| table.write_csv(b))?)?;
    let cut = table.cut(cfg.xc.cut_q);
    out.write("xc_cut.csv", &csv_bytes(|b| cut.write_csv(b))?)?;
    if plots {
        out.write("plot_xc.gp", heatmap_script("xc.csv", ("d", "q"), "v_xc", "v_xc(d, q)").as_bytes())?;
        out.write("plot_xc_cut.gp", line_script("xc_cut.csv", "d", &["v_xc", "v_xc_ks"], "v_xc along d").as_bytes())?;
    }
    Ok(xc_summary(&table))
}

pub fn run_invert(cfg: &RunConfig, out: &mut OutputDir) -> Result<StatusSummary> {
    let targets: Vec<(f64, f64)> = cfg.invert.d.iter().copied().zip(cfg.invert.q.iter().copied()).collect();
    use rayon::prelude::*;
    let results: Vec<_> = targets
        .par_iter()
        .map(|&(d, q)| invert_map(&cfg.model, d, q, &cfg.solver, &cfg.inversion))
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "d", "q", "v_ext", "j_ext", "v_tilde", "d_achieved", "residual", "iterations", "cutoff", "status",
    ])?;
    let mut summary = StatusSummary::default();
    for (&(d, q), r) in targets.iter().zip(&results) {
        let nan = format_float(f64::NAN);
        match r {
            Ok(inv) => {
                w.write_record([
                    format_float(d),
                    format_float(q),
                    format_float(inv.v_ext),
                    format_float(inv.j_ext),
                    format_float(inv.v_tilde),
                    format_float(inv.d_achieved),
                    format_float(inv.d_achieved - d),
                    inv.root.iterations.to_string(),
                    inv.cutoff.map(|c| c.to_string()).unwrap_or_default(),
                    "ok".into(),
                ])?;
                summary.add(&PointStatus::Ok);
            }
            Err(e) => {
                let status = match e {
                    qedft_maps::maps::MapsError::Unattainable { .. } => PointStatus::Unattainable,
                    other => PointStatus::Failed(other.to_string()),
                };
                w.write_record([
                    format_float(d),
                    format_float(q),
                    nan.clone(),
                    nan.clone(),
                    nan.clone(),
                    nan.clone(),
                    nan,
                    String::new(),
                    String::new(),
                    status.label(),
                ])?;
                summary.add(&status);
            }
        }
    }
    out.write("inversion.csv", &w.into_inner().context("flushing inversion table")?)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
struct PeakReport {
    v_tilde: f64,
    alpha: f64,
}

#[derive(Debug, Serialize)]
struct Peaks {
    threshold: f64,
    peaks: Vec<PeakReport>,
    /// Distance between the outermost reported peaks.
    separation: Option<f64>,
    max_abs_alpha: f64,
    /// `∫α dṽ − (d(ṽ_max) − d(ṽ_min))` over the profile.
    integral_defect: f64,
}

pub fn run_polarizability(cfg: &RunConfig, out: &mut OutputDir, plots: bool) -> Result<StatusSummary> {
    let pc = &cfg.polarizability;
    let v = pc.v.values();
    let table = profile_sweep(&cfg.model, &v, pc.mode, &cfg.solver, cfg.entropy())?;
    let summary = map_summary(&table);
    let prof = Profile::from_table(&table, 0, |o| o.d)?;
    let alpha = polarizability(&prof)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["v_tilde", "d", "alpha", "status"])?;
    for ((x, y), (a, r)) in prof.v_tilde.iter().zip(&prof.values).zip(alpha.iter().zip(&table.rows)) {
        w.write_record([format_float(*x), format_float(*y), format_float(*a), r.status.label()])?;
    }
    out.write("profile.csv", &w.into_inner().context("flushing profile")?)?;

    let peaks = find_peaks(&prof.v_tilde, &alpha, pc.peak_threshold);
    let n = prof.len();
    let report = Peaks {
        threshold: pc.peak_threshold,
        separation: match (peaks.first(), peaks.last()) {
            (Some(a), Some(b)) if peaks.len() >= 2 => Some(b.v_tilde - a.v_tilde),
            _ => None,
        },
        max_abs_alpha: alpha.iter().map(|a| a.abs()).fold(0.0, f64::max),
        integral_defect: trapezoid(&prof.v_tilde, &alpha) - (prof.values[n - 1] - prof.values[0]),
        peaks: peaks
            .iter()
            .map(|p| PeakReport {
                v_tilde: p.v_tilde,
                alpha: p.alpha,
            })
            .collect(),
    };
    out.write_json("peaks.json", &report)?;
    if plots {
        out.write("plot_profile.gp", line_script("profile.csv", "v_tilde", &["d", "alpha"], "d and alpha").as_bytes())?;
    }
    Ok(summary)
}

pub fn run_convergence(cfg: &RunConfig, out: &mut OutputDir, plots: bool) -> Result<StatusSummary> {
    let conv = converge_cutoff(&cfg.model, &cfg.solver)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["cutoff", "E", "d", "q", "N_photon", "resolution", "converged"])?;
    for s in &conv.trace {
        w.write_record([
            s.cutoff.to_string(),
            format_float(s.energy),
            format_float(s.d),
            format_float(s.q),
            format_float(s.n_photon),
            format_float(s.resolution),
            (s.cutoff == conv.cutoff).to_string(),
        ])?;
    }
    out.write("convergence.csv", &w.into_inner().context("flushing convergence trace")?)?;
    if plots {
        let mut s = line_script("convergence.csv", "cutoff", &["E", "N_photon"], "cutoff convergence");
        s = s.replacen("set title", "set logscale x\nset title", 1);
        out.write("plot_convergence.gp", s.as_bytes())?;
    }
    let mut summary = StatusSummary::default();
    summary.add(&PointStatus::Ok);
    Ok(summary)
}
