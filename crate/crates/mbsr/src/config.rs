//! Catalog override files: `[rule R10]`, `[attribute A34]`, `[characteristic C5]`,
//! `[pattern Iso2]` and `[options]` blocks applied over the default catalog.

use std::path::Path;

use mbsr_core::{Catalog, CatalogError};
use thiserror::Error;

use crate::block::{parse_blocks, SyntaxError};

/// Environment fallback for `--config`.
pub const CONFIG_ENV: &str = "MBSR_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("config line {line}: {source}")]
    Catalog {
        line: usize,
        #[source]
        source: CatalogError,
    },
    #[error("config: {0}")]
    Invalid(#[source] CatalogError),
}

pub fn parse_catalog(text: &str) -> Result<Catalog, ConfigError> {
    let mut catalog = Catalog::default();
    for block in parse_blocks(text)? {
        catalog
            .apply_override(&block.kind, &block.id, &block.pairs())
            .map_err(|source| ConfigError::Catalog {
                line: block.line,
                source,
            })?;
    }
    catalog.validate().map_err(ConfigError::Invalid)?;
    Ok(catalog)
}

/// The default catalog, or the default with the file's overrides applied.
pub fn load_catalog(path: Option<&Path>) -> Result<Catalog, ConfigError> {
    match path {
        None => Ok(Catalog::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.display().to_string(),
                source,
            })?;
            parse_catalog(&text)
        }
    }
}
