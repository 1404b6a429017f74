//! Command implementations behind the `slapmap` binary. Each command returns
//! a serializable report, a CSV summary and a flag telling whether the
//! measured behaviour matched the prediction.

pub mod args;
pub mod commands;
pub mod output;

pub use args::{Cli, Command, Format, KiteAction, RunArgs};
pub use commands::{run, RunConfig};
pub use output::{CommandOutput, OutputFile};

use slapmap_core::ergodic::ErgodicError;
use slapmap_core::kite::KiteError;
use slapmap_core::lorenz::LorenzError;
use slapmap_core::nonergodic::NonergodicError;
use slapmap_core::regular::RegularError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("analysis mismatch: {0}")]
    Mismatch(String),
    #[error("non-expanding input: {0}")]
    NotExpanding(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Mismatch(_) => 2,
            CliError::NotExpanding(_) => 3,
        }
    }
}

fn failed_analysis(e: &slapmap_core::Error) -> bool {
    use slapmap_core::Error as E;
    matches!(
        e,
        E::Ergodic(ErgodicError::NoConvergence { .. })
            | E::Regular(RegularError::NotConstant { .. })
            | E::Regular(RegularError::Lorenz(LorenzError::TowerValidationFailed { .. }))
            | E::Lorenz(LorenzError::TowerValidationFailed { .. })
            | E::Kite(
                KiteError::NoConvergence { .. }
                    | KiteError::SingularJacobian { .. }
                    | KiteError::OrbitMismatch(_)
                    | KiteError::NoBifurcationFound { .. }
                    | KiteError::Ergodic(ErgodicError::NoConvergence { .. })
            )
            | E::Nonergodic(NonergodicError::ConstructionFailed { .. })
    )
}

impl From<slapmap_core::Error> for CliError {
    fn from(e: slapmap_core::Error) -> Self {
        if e.is_not_expanding() {
            CliError::NotExpanding(e.to_string())
        } else if failed_analysis(&e) {
            CliError::Mismatch(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

macro_rules! via_core_error {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                slapmap_core::Error::from(e).into()
            }
        })*
    };
}

via_core_error!(
    slapmap_core::GeometryError,
    slapmap_core::MapError,
    ErgodicError,
    KiteError,
    LorenzError,
    NonergodicError,
    RegularError,
    slapmap_core::triangles::TriangleError
);
