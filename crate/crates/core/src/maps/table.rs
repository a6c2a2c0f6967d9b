use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{MapGrid, MapsError, SweepMode};
use crate::observables::ObservableSet;

/// Column contract of `map.csv`.
pub const MAP_HEADER: [&str; 14] = [
    "v_ext", "j_ext", "v_tilde", "d", "q", "p", "N_photon", "E", "E_int", "qd_moment", "E_xc",
    "S_corr", "cutoff", "status",
];

/// 17 significant digits, round-trip exact.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    /// Ground state degenerate within the configured tolerance.
    Degenerate,
    /// No mean-field seed converged at this point.
    Unconverged,
    /// Target outside the attainable range of the map.
    Unattainable,
    Failed(String),
}

impl PointStatus {
    pub fn label(&self) -> String {
        match self {
            PointStatus::Ok => "ok".into(),
            PointStatus::Degenerate => "degenerate".into(),
            PointStatus::Unconverged => "unconverged".into(),
            PointStatus::Unattainable => "unattainable".into(),
            PointStatus::Failed(msg) => format!("failed: {msg}"),
        }
    }

    /// Whether the row carries observables.
    pub fn has_values(&self) -> bool {
        matches!(self, PointStatus::Ok | PointStatus::Degenerate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRow {
    pub v_ext: f64,
    pub j_ext: f64,
    pub v_tilde: f64,
    pub observables: Option<ObservableSet>,
    pub cutoff: Option<usize>,
    /// Number of distinct mean-field fixed points (mean-field mode only).
    pub branches: Option<usize>,
    pub status: PointStatus,
}

impl MapRow {
    /// `f` of the observables, NaN for failed points.
    pub fn value(&self, f: impl Fn(&ObservableSet) -> f64) -> f64 {
        self.observables.as_ref().map(f).unwrap_or(f64::NAN)
    }
}

/// One row per grid point, row-major in `(v index, j index)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapTable {
    pub grid: MapGrid,
    pub mode: SweepMode,
    pub rows: Vec<MapRow>,
}

impl MapTable {
    pub fn row(&self, iv: usize, ij: usize) -> &MapRow {
        &self.rows[self.grid.index(iv, ij)]
    }

    /// `f` at every grid point in row order.
    pub fn column(&self, f: impl Fn(&ObservableSet) -> f64 + Copy) -> Vec<f64> {
        self.rows.iter().map(|r| r.value(f)).collect()
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.status.has_values()).count()
    }

    /// Writes the `map.csv` contract; mean-field tables append a
    /// `branches` column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MapsError> {
        let mut w = csv::Writer::from_writer(out);
        let mf = self.mode == SweepMode::MeanField;
        let mut header: Vec<&str> = MAP_HEADER.to_vec();
        if mf {
            header.push("branches");
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![format_float(r.v_ext), format_float(r.j_ext), format_float(r.v_tilde)];
            let cols: [fn(&ObservableSet) -> f64; 9] = [
                |o| o.d,
                |o| o.q,
                |o| o.p,
                |o| o.n_photon,
                |o| o.energy,
                |o| o.e_int,
                |o| o.qd_moment,
                |o| o.e_xc,
                |o| o.s_corr,
            ];
            for f in &cols {
                rec.push(format_float(r.value(f)));
            }
            rec.push(r.cutoff.map(|c| c.to_string()).unwrap_or_default());
            rec.push(r.status.label());
            if mf {
                rec.push(r.branches.map(|c| c.to_string()).unwrap_or_default());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, MapsError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1250.0, 1e-300, -0.0] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn failed_row_has_nan_values() {
        let grid = MapGrid::new(vec![0.0], vec![0.0]).unwrap();
        let t = MapTable {
            grid,
            mode: SweepMode::Exact,
            rows: vec![MapRow {
                v_ext: 0.0,
                j_ext: 0.0,
                v_tilde: 0.0,
                observables: None,
                cutoff: None,
                branches: None,
                status: PointStatus::Failed("boom".into()),
            }],
        };
        let csv = t.to_csv_string().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), MAP_HEADER.join(","));
        let row = lines.next().unwrap();
        assert!(row.contains("NaN"));
        assert!(row.ends_with("failed: boom"));
        assert_eq!(t.failures(), 1);
    }
}
