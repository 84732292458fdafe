use thiserror::Error;

use crate::config::ConfigError;
use crate::extractor::ExtractError;
use crate::frontend::{DiscoveryError, ParseError};
use crate::macroeval::MacroError;
use crate::microeval::SuiteError;
use crate::model::{CsvError, ModelError};
use crate::resolver::{FixpointError, MroError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Fixpoint(#[from] FixpointError),
    #[error(transparent)]
    Mro(#[from] MroError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error(transparent)]
    Macro(#[from] MacroError),
}
