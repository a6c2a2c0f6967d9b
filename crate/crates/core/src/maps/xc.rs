use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::invert::{invert_kohn_sham, invert_polaritonic};
use super::{format_float, Inversion, InversionOptions, MapsError, PointStatus};
use crate::model::ModelParams;
use crate::solver::SolverOptions;

/// Column contract of `xc.csv`.
pub const XC_HEADER: [&str; 11] = [
    "d", "q", "v_ext_lambda", "v_ext_zero", "v_M", "v_xc", "j_ext", "v_S", "v_xc_ks", "consistency",
    "status",
];

/// Exact xc potential at one `(d, q)`, assembled as
/// `v_xc = v_ext_zero − v_ext_lambda − v_M` with `v_M = −ωλq`, plus the
/// same quantity through the Kohn–Sham potential `v_S` of the photon-free
/// electrons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XcRecord {
    pub d_target: f64,
    pub q_target: f64,
    pub v_ext_lambda: f64,
    pub v_ext_zero: f64,
    pub v_m: f64,
    pub v_xc: f64,
    /// Drive of the coupled system at the target.
    pub j_ext: f64,
    pub v_s: f64,
    pub v_xc_ks: f64,
    pub lambda_inversion: Inversion,
    pub zero_inversion: Inversion,
    /// Spread `max − min` of `v_xc` over `q ± q_stencil`, when requested.
    pub q_spread: Option<f64>,
}

impl XcRecord {
    /// `|v_xc − v_xc_ks|`.
    pub fn consistency(&self) -> f64 {
        (self.v_xc - self.v_xc_ks).abs()
    }
}

/// The three inversions at one `d`; they do not depend on `q`.
struct DipoleInversions {
    lambda: Inversion,
    zero: Inversion,
    ks: Inversion,
}

fn invert_all(
    p: &ModelParams,
    d: f64,
    opts: &SolverOptions,
    inv: &InversionOptions,
) -> Result<DipoleInversions, MapsError> {
    let p0 = p.clone().with_lambda(0.0);
    Ok(DipoleInversions {
        lambda: invert_polaritonic(p, d, opts, inv)?,
        zero: invert_polaritonic(&p0, d, opts, inv)?,
        ks: invert_kohn_sham(&p0, d, opts, inv)?,
    })
}

fn assemble(p: &ModelParams, inv: &DipoleInversions, q: f64) -> XcRecord {
    let p0 = p.clone().with_lambda(0.0);
    let lambda = inv.lambda.at_displacement(p, q);
    let zero = inv.zero.at_displacement(&p0, q);
    let v_m = -p.omega * p.lambda * q;
    XcRecord {
        d_target: lambda.d_target,
        q_target: q,
        v_ext_lambda: lambda.v_ext,
        v_ext_zero: zero.v_ext,
        v_m,
        v_xc: zero.v_ext - lambda.v_ext - v_m,
        j_ext: lambda.j_ext,
        v_s: inv.ks.v_ext,
        v_xc_ks: inv.ks.v_ext - lambda.v_ext - v_m,
        lambda_inversion: lambda,
        zero_inversion: zero,
        q_spread: None,
    }
}

fn q_spread(p: &ModelParams, inv: &DipoleInversions, q: f64, h: f64) -> Option<f64> {
    if h == 0.0 {
        return None;
    }
    let vals = [-h, 0.0, h].map(|dq| assemble(p, inv, q + dq).v_xc);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(hi - lo)
}

/// Exact xc potential at `(d_target, q_target)`. The uncoupled reference
/// keeps the Hubbard interaction.
pub fn xc_potential(
    p: &ModelParams,
    d_target: f64,
    q_target: f64,
    opts: &SolverOptions,
    inv: &InversionOptions,
) -> Result<XcRecord, MapsError> {
    if !q_target.is_finite() {
        return Err(MapsError::Range(format!("q target {q_target} is not finite")));
    }
    let r = invert_all(p, d_target, opts, inv)?;
    let mut rec = assemble(p, &r, q_target);
    rec.q_spread = q_spread(p, &r, q_target, inv.q_stencil);
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XcRow {
    pub d: f64,
    pub q: f64,
    pub record: Option<XcRecord>,
    pub status: PointStatus,
}

/// `v_xc` over a `(d, q)` lattice, row-major in `(d index, q index)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XcTable {
    pub d_values: Vec<f64>,
    pub q_values: Vec<f64>,
    pub rows: Vec<XcRow>,
}

impl XcTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.record.is_none()).count()
    }

    /// Rows at the lattice `q` nearest to `q`.
    pub fn cut(&self, q: f64) -> XcTable {
        let iq = (0..self.q_values.len())
            .min_by(|&a, &b| (self.q_values[a] - q).abs().total_cmp(&(self.q_values[b] - q).abs()))
            .unwrap_or(0);
        let nq = self.q_values.len();
        XcTable {
            d_values: self.d_values.clone(),
            q_values: self.q_values.get(iq).copied().into_iter().collect(),
            rows: self.rows.iter().skip(iq).step_by(nq.max(1)).cloned().collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MapsError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(XC_HEADER)?;
        for r in &self.rows {
            let val = |f: fn(&XcRecord) -> f64| format_float(r.record.as_ref().map(f).unwrap_or(f64::NAN));
            w.write_record([
                format_float(r.d),
                format_float(r.q),
                val(|x| x.v_ext_lambda),
                val(|x| x.v_ext_zero),
                val(|x| x.v_m),
                val(|x| x.v_xc),
                val(|x| x.j_ext),
                val(|x| x.v_s),
                val(|x| x.v_xc_ks),
                val(|x| x.consistency()),
                r.status.label(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn status_of(err: &MapsError) -> PointStatus {
    match err {
        MapsError::Unattainable { .. } => PointStatus::Unattainable,
        other => PointStatus::Failed(other.to_string()),
    }
}

/// [`xc_potential`] over a lattice. The inversions depend on `d` only, so
/// each `d` is inverted once (in parallel) and combined with every `q`.
/// Failed targets are recorded in the row status.
pub fn xc_map(
    p: &ModelParams,
    d_values: &[f64],
    q_values: &[f64],
    opts: &SolverOptions,
    inv: &InversionOptions,
) -> Result<XcTable, MapsError> {
    p.validate().map_err(crate::solver::SolverError::from)?;
    inv.validate().map_err(MapsError::Grid)?;
    if d_values.is_empty() || q_values.is_empty() {
        return Err(MapsError::Grid("empty (d, q) lattice".into()));
    }
    let per_d: Vec<Result<DipoleInversions, MapsError>> =
        d_values.par_iter().map(|&d| invert_all(p, d, opts, inv)).collect();
    let mut rows = Vec::with_capacity(d_values.len() * q_values.len());
    for (&d, r) in d_values.iter().zip(&per_d) {
        for &q in q_values {
            rows.push(match r {
                Ok(r) => {
                    let mut rec = assemble(p, r, q);
                    rec.q_spread = q_spread(p, r, q, inv.q_stencil);
                    XcRow {
                        d,
                        q,
                        record: Some(rec),
                        status: PointStatus::Ok,
                    }
                }
                Err(e) => XcRow {
                    d,
                    q,
                    record: None,
                    status: status_of(e),
                },
            });
        }
    }
    Ok(XcTable {
        d_values: d_values.to_vec(),
        q_values: q_values.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncoupled_xc_vanishes() {
        let p = ModelParams::two_site(1, 1).with_u0(5.0);
        let t = xc_map(&p, &[-1.5, 0.0, 0.8], &[-1.0, 0.0, 2.0], &SolverOptions::default(), &InversionOptions::default())
            .unwrap();
        for r in &t.rows {
            assert!(r.record.as_ref().unwrap().v_xc.abs() < 1e-9);
        }
    }

    #[test]
    fn assembly_identity_and_dual_route() {
        let p = ModelParams::two_site(1, 0).with_lambda(0.5);
        let r = xc_potential(&p, 0.4, 0.1, &SolverOptions::default(), &InversionOptions::default()).unwrap();
        assert_eq!(r.v_xc, r.v_ext_zero - r.v_ext_lambda - r.v_m);
        assert!(r.consistency() < 1e-7, "{}", r.consistency());
    }

    #[test]
    fn out_of_range_rows_are_flagged() {
        let p = ModelParams::two_site(1, 0).with_lambda(0.1);
        let t = xc_map(&p, &[0.0, 1.0], &[0.0], &SolverOptions::default(), &InversionOptions::default()).unwrap();
        assert_eq!(t.rows[1].status, PointStatus::Unattainable);
        assert_eq!(t.failures(), 1);
        let csv = {
            let mut b = Vec::new();
            t.write_csv(&mut b).unwrap();
            String::from_utf8(b).unwrap()
        };
        assert!(csv.lines().nth(2).unwrap().ends_with("unattainable"));
    }

    #[test]
    fn cut_picks_nearest_column() {
        let p = ModelParams::two_site(1, 0).with_lambda(0.1);
        let t = xc_map(&p, &[-0.5, 0.5], &[-1.0, 0.0, 1.0], &SolverOptions::default(), &InversionOptions::default())
            .unwrap();
        let c = t.cut(0.01);
        assert_eq!(c.rows.len(), 2);
        assert!(c.rows.iter().all(|r| r.q == 0.0));
    }
}
