//! Benchmark harness: measures signing, verification and tag generation
//! across modulus sizes, ring sizes and message lengths.
//!
//! Absolute times are hardware-specific; the reproducible claims this
//! harness checks are structural:
//!
//! 1. for a fixed modulus size, mean sign/verify time is flat across ring
//!    sizes (coefficient of variation below 10%),
//! 2. times grow with the modulus size,
//! 3. the serialized signature size is identical across ring sizes.

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{Context, Result};
use fcslrs_core::accumulator::{accumulate, gen_witness, AccumulatedValue, Witness};
use fcslrs_core::codec;
use fcslrs_core::scheme::{
    self, derive_gtid, gen_tag, sign, verify, EndorserKeyPair, SystemParams,
};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::{generate_ring, params_profile};

/// Time-CV claims are only meaningful at cryptographic sizes; toy runs
/// report measurements without gating on them.
pub const CHECK_MIN_LAMBDA: u32 = 512;
/// Flatness bound on sign/verify time across ring sizes.
pub const MAX_TIME_CV: f64 = 0.10;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub lambdas: Vec<u32>,
    pub rings: Vec<usize>,
    pub msg_lens: Vec<usize>,
    pub trials: usize,
    pub warmup: usize,
    pub seed: u64,
    /// Also exercise concurrent signing: several endorsers of the ring sign
    /// the same transaction from separate threads.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            lambdas: vec![1024],
            rings: vec![4, 16, 64, 256],
            msg_lens: vec![2048],
            trials: 20,
            warmup: 3,
            seed: 42,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OpStats {
    pub mean_ms: f64,
    pub stddev_ms: f64,
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub lambda: u32,
    pub n: usize,
    pub msg_len: usize,
    pub sign: OpStats,
    pub verify: OpStats,
    pub tag: OpStats,
    pub sig_bytes: usize,
    pub trials: usize,
}

/// Wall-clock cost of a batch of endorsers signing one transaction
/// concurrently from separate threads.
#[derive(Debug, Clone)]
pub struct ParallelRow {
    pub lambda: u32,
    pub n: usize,
    pub msg_len: usize,
    pub signers: usize,
    pub wall: OpStats,
    pub trials: usize,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub parallel_rows: Vec<ParallelRow>,
}

fn stats(samples: &[f64]) -> OpStats {
    let n = samples.len().max(1) as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    OpStats { mean_ms: mean, stddev_ms: var.sqrt() }
}

/// Times the three operations for one prepared signer against one ring.
/// Each trial uses a fresh transaction id; warmup iterations are discarded.
#[allow(clippy::too_many_arguments)]
pub fn measure_ring(
    params: &SystemParams,
    v: &AccumulatedValue,
    witness: &Witness,
    key: &EndorserKeyPair,
    msg_len: usize,
    trials: usize,
    warmup: usize,
    rng: &mut ChaCha20Rng,
) -> Result<(OpStats, OpStats, OpStats, usize)> {
    let mut message = vec![0u8; msg_len];
    rng.fill(&mut message[..]);

    let mut sign_ms = Vec::with_capacity(trials);
    let mut verify_ms = Vec::with_capacity(trials);
    let mut tag_ms = Vec::with_capacity(trials);
    let mut sig_bytes = 0usize;

    for round in 0..warmup + trials {
        let tid = format!("bench-tx-{round}-{}", rng.gen::<u64>());

        let t0 = Instant::now();
        let sig = sign(params, v, witness, key, &message, tid.as_bytes(), rng)?;
        let sign_elapsed = t0.elapsed();

        let t0 = Instant::now();
        let outcome = verify(params, v, &message, tid.as_bytes(), &sig);
        let verify_elapsed = t0.elapsed();
        anyhow::ensure!(outcome.is_accept(), "benchmark signature failed verification");

        let t0 = Instant::now();
        let ctx = derive_gtid(params, tid.as_bytes())?;
        let _tag = gen_tag(params, &ctx, key);
        let tag_elapsed = t0.elapsed();

        if round >= warmup {
            sign_ms.push(sign_elapsed.as_secs_f64() * 1e3);
            verify_ms.push(verify_elapsed.as_secs_f64() * 1e3);
            tag_ms.push(tag_elapsed.as_secs_f64() * 1e3);
            if sig_bytes == 0 {
                sig_bytes = codec::encode_signature(params, &sig)?.len();
            }
        }
    }
    Ok((stats(&sign_ms), stats(&verify_ms), stats(&tag_ms), sig_bytes))
}

/// Concurrent-endorser measurement: `signers` threads each produce one
/// signature on the same transaction per batch; the batch wall time is
/// recorded. All signatures are verified after the clock stops.
fn measure_parallel(
    params: &SystemParams,
    v: &AccumulatedValue,
    signers: &[(EndorserKeyPair, Witness)],
    msg_len: usize,
    trials: usize,
    warmup: usize,
    seed: u64,
) -> Result<OpStats> {
    let mut message = vec![0u8; msg_len];
    let mut seeder = ChaCha20Rng::seed_from_u64(seed);
    seeder.fill(&mut message[..]);

    let mut wall_ms = Vec::with_capacity(trials);
    for batch in 0..warmup + trials {
        let tid = format!("bench-parallel-{batch}");
        let t0 = Instant::now();
        let sigs = std::thread::scope(|scope| {
            let handles: Vec<_> = signers
                .iter()
                .enumerate()
                .map(|(i, (key, witness))| {
                    let (message, tid) = (&message, &tid);
                    scope.spawn(move || {
                        let mut rng =
                            ChaCha20Rng::seed_from_u64(seed ^ (batch as u64) << 8 ^ i as u64);
                        sign(params, v, witness, key, message, tid.as_bytes(), &mut rng)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("signer thread panicked"))
                .collect::<Result<Vec<_>, _>>()
        })?;
        let elapsed = t0.elapsed();
        for sig in &sigs {
            anyhow::ensure!(
                verify(params, v, &message, tid.as_bytes(), sig).is_accept(),
                "parallel signature failed verification"
            );
        }
        if batch >= warmup {
            wall_ms.push(elapsed.as_secs_f64() * 1e3);
        }
    }
    Ok(stats(&wall_ms))
}

/// Runs the full grid. `progress` receives one line per stage so long runs
/// stay observable.
pub fn run(config: &BenchConfig, mut progress: impl FnMut(&str)) -> Result<BenchReport> {
    let mut rows = Vec::new();
    let mut parallel_rows = Vec::new();
    let max_ring = config.rings.iter().copied().max().unwrap_or(4);

    for &lambda in &config.lambdas {
        let toy = lambda < 1024;
        let (l, mu, mode) = params_profile(lambda, None, None, toy)?;
        progress(&format!("[bench] setup: {lambda}-bit modulus"));
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed ^ u64::from(lambda));
        let params = scheme::init(lambda, l, mu, mode, &mut rng)
            .with_context(|| format!("setup failed at {lambda} bits"))?;

        progress(&format!("[bench] generating {max_ring} endorser keys ({lambda}-bit)"));
        let keys = generate_ring(&params, max_ring, 64, config.seed ^ (u64::from(lambda) << 16))?;
        let signer = &keys[0];

        for &n in &config.rings {
            anyhow::ensure!(n >= 1 && n <= keys.len(), "ring size {n} out of range");
            let ring: Vec<BigUint> = keys[..n].iter().map(|k| k.public_key().clone()).collect();
            let v = accumulate(params.accumulator(), &ring)?;
            let witness = gen_witness(params.accumulator(), &ring, signer.public_key())?;

            for &msg_len in &config.msg_lens {
                progress(&format!("[bench] lambda={lambda} n={n} msg={msg_len}B"));
                let (sign, verify, tag, sig_bytes) = measure_ring(
                    &params,
                    &v,
                    &witness,
                    signer,
                    msg_len,
                    config.trials,
                    config.warmup,
                    &mut rng,
                )?;
                rows.push(BenchRow {
                    lambda,
                    n,
                    msg_len,
                    sign,
                    verify,
                    tag,
                    sig_bytes,
                    trials: config.trials,
                });

                if config.parallel && n >= 2 {
                    let signer_count = n
                        .min(4)
                        .min(std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1));
                    if signer_count >= 2 {
                        let signers: Vec<(EndorserKeyPair, Witness)> = keys[..signer_count]
                            .iter()
                            .map(|k| {
                                let w = gen_witness(params.accumulator(), &ring, k.public_key())?;
                                Ok((k.clone(), w))
                            })
                            .collect::<Result<_>>()?;
                        progress(&format!(
                            "[bench] lambda={lambda} n={n} msg={msg_len}B parallel x{signer_count}"
                        ));
                        let wall = measure_parallel(
                            &params,
                            &v,
                            &signers,
                            msg_len,
                            config.trials,
                            config.warmup,
                            config.seed ^ 0x0a11e1,
                        )?;
                        parallel_rows.push(ParallelRow {
                            lambda,
                            n,
                            msg_len,
                            signers: signer_count,
                            wall,
                            trials: config.trials,
                        });
                    }
                }
            }
        }
    }
    Ok(BenchReport { rows, parallel_rows })
}

fn cv(values: &[f64]) -> f64 {
    let s = stats(values);
    if s.mean_ms == 0.0 {
        0.0
    } else {
        s.stddev_ms / s.mean_ms
    }
}

impl BenchReport {
    /// Long-format CSV: one row per (configuration, operation).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,lambda,msg_len,op,mean_ms,stddev_ms,sig_bytes,trials\n");
        for row in &self.rows {
            for (op, st) in [("sign", row.sign), ("verify", row.verify), ("tag", row.tag)] {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:.4},{:.4},{},{}",
                    row.n, row.lambda, row.msg_len, op, st.mean_ms, st.stddev_ms, row.sig_bytes,
                    row.trials
                );
            }
        }
        out
    }

    /// Human-readable table plus per-(lambda, msg) flatness figures.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>6} {:>5} {:>8} {:>12} {:>12} {:>12} {:>10} {:>7}",
            "lambda", "n", "msg", "sign ms", "verify ms", "tag ms", "sig bytes", "trials"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>6} {:>5} {:>8} {:>12.3} {:>12.3} {:>12.3} {:>10} {:>7}",
                r.lambda,
                r.n,
                r.msg_len,
                r.sign.mean_ms,
                r.verify.mean_ms,
                r.tag.mean_ms,
                r.sig_bytes,
                r.trials
            );
        }
        for ((lambda, msg_len), group) in self.groups() {
            if group.len() < 2 {
                continue;
            }
            let sign_cv = cv(&group.iter().map(|r| r.sign.mean_ms).collect::<Vec<_>>());
            let verify_cv = cv(&group.iter().map(|r| r.verify.mean_ms).collect::<Vec<_>>());
            let _ = writeln!(
                out,
                "lambda={lambda} msg={msg_len}B: sign CV across rings {:.2}%, verify CV {:.2}%",
                sign_cv * 100.0,
                verify_cv * 100.0
            );
        }
        for p in &self.parallel_rows {
            let _ = writeln!(
                out,
                "parallel signing lambda={} n={} msg={}B: {} signers, {:.3} ms wall per batch ({:.3} ms per signature)",
                p.lambda,
                p.n,
                p.msg_len,
                p.signers,
                p.wall.mean_ms,
                p.wall.mean_ms / p.signers as f64
            );
        }
        out
    }

    fn groups(&self) -> Vec<((u32, usize), Vec<&BenchRow>)> {
        let mut out: Vec<((u32, usize), Vec<&BenchRow>)> = Vec::new();
        for row in &self.rows {
            let key = (row.lambda, row.msg_len);
            match out.iter_mut().find(|(k, _)| *k == key) {
                Some((_, group)) => group.push(row),
                None => out.push((key, vec![row])),
            }
        }
        out
    }

    /// Checks the structural claims; returns one message per violation.
    pub fn check_claims(&self) -> Vec<String> {
        let mut failures = Vec::new();

        // (a) flat sign/verify time across ring sizes, per (lambda, msg).
        for ((lambda, msg_len), group) in self.groups() {
            if group.len() < 2 || lambda < CHECK_MIN_LAMBDA {
                continue;
            }
            let sign_cv = cv(&group.iter().map(|r| r.sign.mean_ms).collect::<Vec<_>>());
            let verify_cv = cv(&group.iter().map(|r| r.verify.mean_ms).collect::<Vec<_>>());
            if sign_cv >= MAX_TIME_CV {
                failures.push(format!(
                    "sign time varies {:.1}% across ring sizes at lambda={lambda} msg={msg_len}",
                    sign_cv * 100.0
                ));
            }
            if verify_cv >= MAX_TIME_CV {
                failures.push(format!(
                    "verify time varies {:.1}% across ring sizes at lambda={lambda} msg={msg_len}",
                    verify_cv * 100.0
                ));
            }
        }

        // (b) time grows with the modulus size.
        let mut lambdas: Vec<u32> = self.rows.iter().map(|r| r.lambda).collect();
        lambdas.sort_unstable();
        lambdas.dedup();
        for pair in lambdas.windows(2) {
            let mean_at = |lambda: u32| {
                let subset: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| r.lambda == lambda)
                    .map(|r| r.sign.mean_ms)
                    .collect();
                subset.iter().sum::<f64>() / subset.len().max(1) as f64
            };
            if mean_at(pair[1]) <= mean_at(pair[0]) {
                failures.push(format!(
                    "sign time did not grow from lambda={} to lambda={}",
                    pair[0], pair[1]
                ));
            }
        }

        // (c) signature size constant across ring sizes, per lambda — exact.
        for &lambda in &lambdas {
            let sizes: Vec<usize> = self
                .rows
                .iter()
                .filter(|r| r.lambda == lambda)
                .map(|r| r.sig_bytes)
                .collect();
            if sizes.windows(2).any(|w| w[0] != w[1]) {
                failures.push(format!("signature size varies across rings at lambda={lambda}"));
            }
        }
        failures
    }
}
