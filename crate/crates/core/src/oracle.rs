//! Brute-force references for `E[ln Z]`, independent of the moment series.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::DisorderDistribution;
use crate::error::{Error, Result};
use crate::model::{log_partition_function, ModelParams};
use crate::moments::LogZCache;
use crate::numerics::{CompensatedSum, QuadratureConfig};

/// Samples drawn from each ChaCha8 stream. Shard `j` uses stream `j` of the
/// seeded generator, so the sample sequence does not depend on how many
/// worker threads process the shards.
pub const MC_SHARD_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// `E_μ[ln Z(h)]` by nested quadrature: outer over μ, inner over φ.
pub fn quenched_direct(
    params: &ModelParams,
    dist: &DisorderDistribution,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    params.validate()?;
    let cache = LogZCache::new(params, cfg);
    Ok(dist.try_expect(|h| cache.get(h), cfg)?.0)
}

/// Plain Monte Carlo mean of `ln Z(h_i)` over `n_samples` draws from μ.
///
/// Bit-reproducible per seed regardless of thread count: shards are
/// generated from fixed substreams and reduced in shard order.
pub fn quenched_mc(
    params: &ModelParams,
    dist: &DisorderDistribution,
    mc: &McConfig,
    cfg: &QuadratureConfig,
) -> Result<McEstimate> {
    params.validate()?;
    if mc.n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be >= 1"));
    }
    let n_shards = mc.n_samples.div_ceil(MC_SHARD_SIZE);
    let shards: Vec<Vec<f64>> = (0..n_shards)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(j as u64);
            let len = MC_SHARD_SIZE.min(mc.n_samples - j * MC_SHARD_SIZE);
            (0..len)
                .map(|_| log_partition_function(params, dist.sample(&mut rng), cfg))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    // shift by the first sample so identical draws give exactly zero spread
    let reference = shards[0][0];
    let n = mc.n_samples as f64;
    let deviations: CompensatedSum = shards.iter().flatten().map(|&x| x - reference).collect();
    let mean_dev = deviations.value() / n;
    let estimate = reference + mean_dev;
    let std_error = if mc.n_samples > 1 {
        let ss: CompensatedSum = shards
            .iter()
            .flatten()
            .map(|&x| {
                let d = x - reference - mean_dev;
                d * d
            })
            .collect();
        (ss.value() / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        estimate,
        std_error,
    })
}
