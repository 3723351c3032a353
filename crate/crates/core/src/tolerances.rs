//! Default numerical tolerances, collected in one place so commands and tests
//! agree on them.
//!
//! | field                     | default | used for                                          |
//! |---------------------------|---------|---------------------------------------------------|
//! | `anticommutator`          | 1e-12   | fermionic algebra of the Fock operators           |
//! | `hamiltonian`             | 1e-10   | many-body Hamiltonian, site vs mode construction  |
//! | `trace`                   | 1e-12   | trace preservation, normalization of weights      |
//! | `stationarity`            | 1e-10   | NESS residual relative to the dissipator norm     |
//! | `gibbs`                   | 1e-10   | trace distance NESS vs Gibbs at equal temperature |
//! | `current_relative`        | 1e-10   | oracle currents vs closed-form currents           |
//! | `current_balance`         | 1e-11   | `Q_L + Q_R` and `h_L + h_R`                       |
//! | `zero_current`            | 1e-12   | currents at equal temperature                     |
//! | `lindblad_reconstruction` | 1e-12   | jump operators summing back to the spin ladders   |
//! | `mirror_relative`         | 1e-9    | general vs mirror-form flows                      |
//! | `spectral_homogeneous`    | 1e-10   | numeric vs closed-form homogeneous wavefunctions  |
//! | `spectral_krawtchouk`     | 1e-8    | numeric vs closed-form Krawtchouk wavefunctions   |
//! | `transfer_fidelity`       | 1e-10   | perfect state transfer                            |
//! | `bound_slack`             | 1e-12   | flows below bounds                                |
//! | `fit_r_squared`           | 0.9     | minimum coefficient of determination of fits      |
//!
//! Any subset can be overridden from the `[tolerances]` section of a run
//! configuration.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub anticommutator: f64,
    pub hamiltonian: f64,
    pub trace: f64,
    pub stationarity: f64,
    pub gibbs: f64,
    pub current_relative: f64,
    pub current_balance: f64,
    pub zero_current: f64,
    pub lindblad_reconstruction: f64,
    pub mirror_relative: f64,
    pub spectral_homogeneous: f64,
    pub spectral_krawtchouk: f64,
    pub transfer_fidelity: f64,
    pub bound_slack: f64,
    pub fit_r_squared: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            anticommutator: 1e-12,
            hamiltonian: 1e-10,
            trace: 1e-12,
            stationarity: 1e-10,
            gibbs: 1e-10,
            current_relative: 1e-10,
            current_balance: 1e-11,
            zero_current: 1e-12,
            lindblad_reconstruction: 1e-12,
            mirror_relative: 1e-9,
            spectral_homogeneous: 1e-10,
            spectral_krawtchouk: 1e-8,
            transfer_fidelity: 1e-10,
            bound_slack: 1e-12,
            fit_r_squared: 0.9,
        }
    }
}
