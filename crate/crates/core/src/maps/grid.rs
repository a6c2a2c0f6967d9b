use serde::{Deserialize, Serialize};

use super::MapsError;

/// Rectangular grid of external pairs `(v_ext, j_ext)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapGrid {
    v_values: Vec<f64>,
    j_values: Vec<f64>,
}

fn check_axis(name: &'static str, values: &[f64]) -> Result<(), MapsError> {
    if values.is_empty() {
        return Err(MapsError::Grid(format!("{name} axis is empty")));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(MapsError::Grid(format!("{name} axis has non-finite values")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MapsError::Grid(format!("{name} axis is not strictly increasing")));
    }
    Ok(())
}

/// `n` evenly spaced points from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    max
                } else {
                    min + (max - min) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

impl MapGrid {
    pub fn new(v_values: Vec<f64>, j_values: Vec<f64>) -> Result<Self, MapsError> {
        check_axis("v", &v_values)?;
        check_axis("j", &j_values)?;
        Ok(Self { v_values, j_values })
    }

    /// Uniform grid; each axis needs at least one point and `min < max`
    /// whenever it has more than one.
    pub fn uniform(v: (f64, f64, usize), j: (f64, f64, usize)) -> Result<Self, MapsError> {
        Self::new(linspace(v.0, v.1, v.2), linspace(j.0, j.1, j.2))
    }

    pub fn v_values(&self) -> &[f64] {
        &self.v_values
    }

    pub fn j_values(&self) -> &[f64] {
        &self.j_values
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.v_values.len(), self.j_values.len())
    }

    pub fn len(&self) -> usize {
        self.v_values.len() * self.j_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major flat index of `(v index, j index)`.
    pub fn index(&self, iv: usize, ij: usize) -> usize {
        iv * self.j_values.len() + ij
    }

    /// All points in row-major order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.v_values
            .iter()
            .flat_map(move |&v| self.j_values.iter().map(move |&j| (v, j)))
    }

    /// Fails unless both axes have at least two points.
    pub fn require_2d(&self) -> Result<(), MapsError> {
        if self.v_values.len() < 2 || self.j_values.len() < 2 {
            return Err(MapsError::Grid("need at least 2 points per axis".into()));
        }
        Ok(())
    }
}
