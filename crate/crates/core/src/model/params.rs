use serde::{Deserialize, Serialize};

use super::ModelError;

/// Physical specification of one lattice-plus-photon model instance.
///
/// All quantities are in the dimensionless units of the model (ħ = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Number of lattice sites; 2 or 4.
    pub n_sites: usize,
    pub n_up: usize,
    pub n_down: usize,
    /// Nearest-neighbour hopping energy.
    #[serde(default = "default_t0")]
    pub t0: f64,
    /// On-site Hubbard repulsion.
    #[serde(default)]
    pub u0: f64,
    /// Photon frequency.
    #[serde(default = "default_omega")]
    pub omega: f64,
    /// Electron-photon coupling strength.
    #[serde(default)]
    pub lambda: f64,
    /// External potential conjugate to the dipole.
    #[serde(default)]
    pub v_ext: f64,
    /// External dipole driving the photon mode.
    #[serde(default)]
    pub j_ext: f64,
    /// Highest Fock state kept (and the first cutoff tried when the
    /// cutoff is converged automatically).
    #[serde(default = "default_cutoff")]
    pub fock_cutoff: usize,
    /// Dipole length scale of the four-site chain.
    #[serde(default = "default_d0")]
    pub d0: f64,
    /// Include `(λ d̂)²/2`. Defaults to off on two sites and on for four.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_self_energy: Option<bool>,
}

fn default_t0() -> f64 {
    0.5
}

fn default_omega() -> f64 {
    1.0
}

fn default_cutoff() -> usize {
    2
}

fn default_d0() -> f64 {
    0.5
}

impl ModelParams {
    /// Two-site chain with the default hopping and unit frequency.
    pub fn two_site(n_up: usize, n_down: usize) -> Self {
        Self {
            n_sites: 2,
            n_up,
            n_down,
            t0: default_t0(),
            u0: 0.0,
            omega: default_omega(),
            lambda: 0.0,
            v_ext: 0.0,
            j_ext: 0.0,
            fock_cutoff: default_cutoff(),
            d0: default_d0(),
            include_self_energy: None,
        }
    }

    /// Half-filled four-site chain.
    pub fn four_site() -> Self {
        Self {
            n_sites: 4,
            n_up: 2,
            n_down: 2,
            ..Self::two_site(0, 0)
        }
    }

    pub fn with_u0(mut self, u0: f64) -> Self {
        self.u0 = u0;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_external(mut self, v_ext: f64, j_ext: f64) -> Self {
        self.v_ext = v_ext;
        self.j_ext = j_ext;
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.fock_cutoff = cutoff;
        self
    }

    pub fn with_self_energy(mut self, on: bool) -> Self {
        self.include_self_energy = Some(on);
        self
    }

    pub fn self_energy(&self) -> bool {
        self.include_self_energy.unwrap_or(self.n_sites == 4)
    }

    pub fn n_electrons(&self) -> usize {
        self.n_up + self.n_down
    }

    /// Dipole weights per site: `(+1, −1)` on two sites, `d0·(3, 1, −1, −3)` on four.
    pub fn dipole_weights(&self) -> Vec<f64> {
        match self.n_sites {
            2 => vec![1.0, -1.0],
            4 => [3.0, 1.0, -1.0, -3.0].iter().map(|w| w * self.d0).collect(),
            _ => Vec::new(),
        }
    }

    /// Polaritonic potential `ṽ = v_ext + (λ/ω²) j_ext`.
    pub fn v_tilde(&self) -> f64 {
        self.v_ext + self.lambda / (self.omega * self.omega) * self.j_ext
    }

    /// Coherent shift of the displacement coordinate, `j_ext/ω³`.
    pub fn photon_shift(&self) -> f64 {
        self.j_ext / self.omega.powi(3)
    }

    /// Largest attainable `|d|`: every electron on the most weighted site
    /// allowed by the exclusion principle.
    pub fn max_dipole(&self) -> f64 {
        let mut w: Vec<f64> = self.dipole_weights();
        w.sort_by(|a, b| b.partial_cmp(a).expect("finite weights"));
        let up: f64 = w.iter().take(self.n_up).sum();
        let down: f64 = w.iter().take(self.n_down).sum();
        up + down
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |key: &'static str, reason: String| Err(ModelError::InvalidParameter { key, reason });
        if self.n_sites != 2 && self.n_sites != 4 {
            return Err(ModelError::UnsupportedLattice(self.n_sites));
        }
        if self.n_up > self.n_sites || self.n_down > self.n_sites {
            return bad(
                "n_up/n_down",
                format!("at most {} electrons per spin", self.n_sites),
            );
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return bad("t0", format!("must be positive, got {}", self.t0));
        }
        if !(self.u0 >= 0.0 && self.u0.is_finite()) {
            return bad("u0", format!("must be non-negative, got {}", self.u0));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad("omega", format!("must be positive, got {}", self.omega));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda", format!("must be non-negative, got {}", self.lambda));
        }
        if !self.v_ext.is_finite() {
            return bad("v_ext", "must be finite".into());
        }
        if !self.j_ext.is_finite() {
            return bad("j_ext", "must be finite".into());
        }
        if self.fock_cutoff < 1 {
            return bad("fock_cutoff", "must be at least 1".into());
        }
        if !(self.d0 > 0.0 && self.d0.is_finite()) {
            return bad("d0", format!("must be positive, got {}", self.d0));
        }
        let sum: f64 = self.dipole_weights().iter().sum();
        debug_assert!(sum.abs() < 1e-12);
        Ok(())
    }
}
