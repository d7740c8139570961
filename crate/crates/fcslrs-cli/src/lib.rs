//! File store, benchmark harness and helpers behind the `fcslrs` binary.

use anyhow::{bail, Result};
use fcslrs_core::arith::ParamMode;
use fcslrs_core::scheme::{self, EndorserKeyPair, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub mod bench;
pub mod json;
pub mod store;

/// Environment variable that pins all randomness for reproducible runs.
pub const SEED_ENV: &str = "FCSLRS_SEED";

/// Seeded generator: explicit seed wins, then `FCSLRS_SEED`, then entropy.
pub fn seeded_rng(explicit: Option<u64>) -> ChaCha20Rng {
    if let Some(seed) = explicit {
        return ChaCha20Rng::seed_from_u64(seed);
    }
    if let Ok(val) = std::env::var(SEED_ENV) {
        if let Ok(seed) = val.trim().parse::<u64>() {
            return ChaCha20Rng::seed_from_u64(seed);
        }
    }
    ChaCha20Rng::from_entropy()
}

/// Fills in `(l, mu)` with the conventional profile when flags omit them,
/// and picks the parameter mode: secure for `lambda >= 1024` unless toy was
/// requested explicitly.
pub fn params_profile(
    lambda: u32,
    l: Option<u32>,
    mu: Option<u32>,
    toy: bool,
) -> Result<(u32, u32, ParamMode)> {
    let (def_l, def_mu) = match scheme::standard_dimensions(lambda) {
        Ok(dims) => dims,
        Err(_) if l.is_some() && mu.is_some() => (0, 0), // unused
        Err(e) => bail!("{e}; pass --l and --mu explicitly"),
    };
    let l = l.unwrap_or(def_l);
    let mu = mu.unwrap_or(def_mu);
    let mode = if toy {
        ParamMode::Toy
    } else if lambda >= 1024 {
        ParamMode::Secure
    } else {
        bail!("modulus sizes below 1024 bits are for testing only; pass --toy to proceed");
    };
    Ok((l, mu, mode))
}

/// Generates `n` key pairs, fanning the work across available cores. Each
/// key derives its own stream from `(base_seed, index)`, so the result is
/// deterministic regardless of thread count.
pub fn generate_ring(
    params: &SystemParams,
    n: usize,
    rounds: u32,
    base_seed: u64,
) -> Result<Vec<EndorserKeyPair>> {
    let threads = std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1).min(n.max(1));
    let mut keys: Vec<Option<EndorserKeyPair>> = vec![None; n];
    let chunks: Vec<(usize, &mut [Option<EndorserKeyPair>])> = {
        let mut out = Vec::new();
        let chunk = n.div_ceil(threads.max(1)).max(1);
        let mut rest = keys.as_mut_slice();
        let mut start = 0;
        while !rest.is_empty() {
            let take = chunk.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            out.push((start, head));
            start += take;
            rest = tail;
        }
        out
    };
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for (start, slot) in chunks {
            handles.push(scope.spawn(move || -> Result<()> {
                for (offset, cell) in slot.iter_mut().enumerate() {
                    let index = (start + offset) as u64;
                    let mut rng =
                        ChaCha20Rng::seed_from_u64(base_seed ^ index.wrapping_mul(0x9e3779b97f4a7c15));
                    let key = scheme::keygen_with_certainty(params, rounds, &mut rng)?;
                    *cell = Some(key);
                }
                Ok(())
            }));
        }
        for handle in handles {
            handle.join().expect("keygen worker panicked")?;
        }
        Ok(())
    })?;
    Ok(keys.into_iter().map(|k| k.expect("all slots filled")).collect())
}
