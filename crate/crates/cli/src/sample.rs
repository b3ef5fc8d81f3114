//! `kmfix sample`: dump one synthetic dataset.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use kmfix_core::gmm::{sample_model, write_dataset};
use kmfix_core::rng::derive_stream;
use kmfix_core::{LabelMode, ModelParams};

use crate::{CliError, CliResult};

#[allow(clippy::too_many_arguments)]
pub fn cmd_sample(
    d: usize,
    n: usize,
    k: usize,
    tau: f64,
    sigma2: f64,
    seed: u64,
    stream: u64,
    mode: &str,
    out: Option<&Path>,
) -> CliResult<()> {
    let mode = match mode {
        "balanced" => LabelMode::Balanced,
        "iid_uniform" => LabelMode::IidUniform,
        other => return Err(CliError::config(format!("unknown label mode {other:?}; use balanced or iid_uniform"))),
    };
    if sigma2.is_nan() || sigma2 < 0.0 {
        return Err(CliError::config(format!("sigma2 must be nonnegative, got {sigma2}")));
    }
    let params = ModelParams::new(d, n, k, tau, sigma2.sqrt()).map_err(|e| CliError::config(e.to_string()))?;
    let mut rng = derive_stream(seed, stream);
    let dataset = sample_model(&mut rng, &params, mode).map_err(|e| CliError::internal(e.to_string()))?;

    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(File::create(p).map_err(|e| CliError::internal(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = BufWriter::new(sink);
    write_dataset(&mut w, &dataset).map_err(|e| CliError::internal(e.to_string()))?;
    w.flush().map_err(|e| CliError::internal(e.to_string()))
}
