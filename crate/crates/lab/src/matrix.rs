// SPDX-License-Identifier: Apache-2.0

//! Headerless numeric CSV: one matrix row per line, `#` starts a comment.

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{LabError, Result};

pub fn read_matrix<T: DeserializeOwned>(path: &Path) -> Result<Vec<Vec<T>>> {
    let file = std::fs::File::open(path).map_err(LabError::io(path))?;
    parse_matrix(file).map_err(LabError::csv(path))
}

pub fn parse_matrix<T: DeserializeOwned, R: std::io::Read>(reader: R) -> csv::Result<Vec<Vec<T>>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
        .deserialize()
        .collect()
}
