//! Library side of the `gridformer` command: case files, the five
//! commands as plain functions, and atomic output writing.

mod case;
mod commands;
mod output;

pub use case::{
    load_case, resolve_arch, BandSection, BranchEntry, BusEntry, BusKind, Case, CaseFile, DeviceEntry,
    SweepSection, SystemSection, BUNDLED, CASE_VERSION, MIN_SWEEP_POINTS,
};
pub use commands::{
    cscr, fi_curve, fi_csv, fi_sweep, inline_from_case, parse_range, parse_sweep_param, place, step, strength,
    CscrOutput, FiCurve, InlineDevice, PlaceMethod, PlaceOutput, StepOptions, StepOutput, StrengthOutput,
    SweepParam,
};
pub use output::{write_atomic, OutputDir};

use gridformer_placement::PlacementError;
use gridformer_strength::StrengthError;

/// Every failure maps to one process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Numeric(String),
    #[error("closed loop is unstable: {0}")]
    Unstable(String),
    #[error("{0}; rerun with --method greedy")]
    SearchSpace(String),
    #[error("{0}")]
    NoBracket(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Unstable(_) => 4,
            CliError::SearchSpace(_) => 5,
            CliError::NoBracket(_) => 6,
        }
    }
}

impl From<StrengthError> for CliError {
    fn from(e: StrengthError) -> Self {
        match e {
            StrengthError::NoBracket { .. } => CliError::NoBracket(e.to_string()),
            StrengthError::Invalid(m) => CliError::Parse(m),
            e => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<PlacementError> for CliError {
    fn from(e: PlacementError) -> Self {
        match e {
            PlacementError::SearchSpaceTooLarge { .. } => CliError::SearchSpace(e.to_string()),
            PlacementError::Invalid(m) => CliError::Parse(m),
            PlacementError::Strength(s) => s.into(),
        }
    }
}

macro_rules! numeric_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numeric(e.to_string())
            }
        }
    )*};
}
numeric_from!(
    gridformer_lti::LtiError,
    gridformer_converter::ConverterError,
    gridformer_device::DeviceError,
    gridformer_network::NetworkError
);
