//! `fcslrs` — operator entry point: setup, key lifecycle, accumulation,
//! signing, verification, linking, the endorsement-flow demo and the
//! benchmark runner.
//!
//! Exit codes: 0 success / accept / linked / committed; 1 reject / unlinked
//! / policy unsatisfied; 2 usage or input error; 3 I/O, format or crypto
//! error; 4 benchmark claim violation. Errors print as
//! `error[<CODE>]: message` with codes USAGE, IO, FORMAT, CRYPTO or BENCH.

use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fcslrs_cli::bench::{self, BenchConfig};
use fcslrs_cli::store::StoreError;
use fcslrs_cli::{generate_ring, json, params_profile, seeded_rng, store};
use fcslrs_core::accumulator::{accumulate, gen_witness};
use fcslrs_core::endorsement::{
    EndorsementPolicy, EndorserBehavior, FlowEndorser, ProposeMessage, TxRequest,
    ValidatorBehavior,
};
use fcslrs_core::keydb::KeyDatabase;
use fcslrs_core::scheme::{self, link, verify, Linkage};
use num_bigint::BigUint;

#[derive(Parser)]
#[command(name = "fcslrs", version, about = "Anonymous endorsement toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trusted setup: generate public parameters.
    Init(InitArgs),
    /// Generate endorser key pairs and enroll them in the key database.
    Keygen(KeygenArgs),
    /// Accumulate the active keys of the database.
    Accumulate(AccumulateArgs),
    /// Compute a membership witness for one endorser.
    Witness(WitnessArgs),
    /// Sign a message for a transaction id.
    Sign(SignArgs),
    /// Verify a signature file.
    Verify(VerifyArgs),
    /// Link-test two signature files (same transaction).
    Link(LinkArgs),
    /// Simulate the full endorsement flow.
    Endorse(EndorseArgs),
    /// Run the benchmark grid and check the structural claims.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InitArgs {
    /// Modulus size in bits.
    #[arg(long)]
    lambda: u32,
    /// Key-size parameter; defaults to lambda/2.
    #[arg(long)]
    l: Option<u32>,
    /// Sphere radius exponent; defaults to lambda/4 - 2.
    #[arg(long)]
    mu: Option<u32>,
    /// Allow insecure test parameters (required below 1024 bits).
    #[arg(long)]
    toy: bool,
    #[arg(long, default_value = "params.bin")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long, default_value = "params.bin")]
    params: PathBuf,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Directory receiving key_<i>.sk files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value = "keys.db")]
    db: PathBuf,
    #[arg(long, default_value = "endorser")]
    label_prefix: String,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AccumulateArgs {
    #[arg(long, default_value = "params.bin")]
    params: PathBuf,
    #[arg(long, default_value = "keys.db")]
    db: PathBuf,
    #[arg(long, default_value = "v.bin")]
    out: PathBuf,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long, default_value = "params.bin")]
    params: PathBuf,
    #[arg(long, default_value = "keys.db")]
    db: PathBuf,
    /// Key file of the endorser the witness is for.
    #[arg(long)]
    key: PathBuf,
    #[arg(long, default_value = "w.bin")]
    out: PathBuf,
}

#[derive(Args)]
struct SignArgs {
    #[arg(long, default_value = "params.bin")]
    params: PathBuf,
    #[arg(long, default_value = "v.bin")]
    acc: PathBuf,
    #[arg(long, default_value = "w.bin")]
    witness: PathBuf,
    #[arg(long)]
    key: PathBuf,
    /// Transaction id (UTF-8 bytes).
    #[arg(long)]
    tid: String,
    #[arg(long, conflicts_with = "message_file")]
    message: Option<String>,
    #[arg(long)]
    message_file: Option<PathBuf>,
    #[arg(long, default_value = "sig.bin")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "params.bin")]
    params: PathBuf,
    #[arg(long, default_value = "v.bin")]
    acc: PathBuf,
    #[arg(long)]
    tid: String,
    #[arg(long, conflicts_with = "message_file")]
    message: Option<String>,
    #[arg(long)]
    message_file: Option<PathBuf>,
    #[arg(long)]
    sig: PathBuf,
}

#[derive(Args)]
struct LinkArgs {
    #[arg(long)]
    sig1: PathBuf,
    #[arg(long)]
    sig2: PathBuf,
}

#[derive(Args)]
struct EndorseArgs {
    #[arg(long, default_value = "params.bin")]
    params: PathBuf,
    #[arg(long, default_value_t = 1)]
    threshold: usize,
    /// Ring size; keys are generated for the run.
    #[arg(long, default_value_t = 4)]
    endorsers: usize,
    #[arg(long, default_value_t = 3)]
    validators: usize,
    /// Comma list of endorse|decline|double|corrupt, one per endorser;
    /// missing entries default to endorse.
    #[arg(long, default_value = "")]
    behaviors: String,
    /// Comma list of validator indices that reject without evaluating.
    #[arg(long, default_value = "")]
    malicious_validators: String,
    #[arg(long, conflicts_with = "payload_file")]
    payload: Option<String>,
    #[arg(long)]
    payload_file: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Modulus sizes, e.g. 1024,2048,3072
    #[arg(long, default_value = "1024")]
    lambdas: String,
    /// Ring sizes: comma list or a..b for powers of two, e.g. 4..256
    #[arg(long, default_value = "4,16,64,256")]
    rings: String,
    /// Message lengths, e.g. 2k,4k,8k
    #[arg(long, default_value = "2k")]
    msg: String,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 3)]
    warmup: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Also measure concurrent signing by several endorsers per ring.
    #[arg(long)]
    parallel: bool,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(err) => report(err),
    };
    std::process::exit(code);
}

fn report(err: anyhow::Error) -> i32 {
    let (code, exit) = classify(&err);
    eprintln!("error[{code}]: {err:#}");
    exit
}

fn classify(err: &anyhow::Error) -> (&'static str, i32) {
    if let Some(store_err) = err.downcast_ref::<StoreError>() {
        return match store_err {
            StoreError::Io { .. } => ("IO", 3),
            StoreError::Codec { .. } => ("FORMAT", 3),
        };
    }
    if err.downcast_ref::<fcslrs_core::scheme::SchemeError>().is_some()
        || err.downcast_ref::<fcslrs_core::accumulator::AccumulatorError>().is_some()
        || err.downcast_ref::<fcslrs_core::endorsement::FlowError>().is_some()
        || err.downcast_ref::<fcslrs_core::endorsement::PolicyError>().is_some()
    {
        return ("CRYPTO", 3);
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return ("IO", 3);
    }
    ("USAGE", 2)
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Init(args) => cmd_init(args),
        Command::Keygen(args) => cmd_keygen(args),
        Command::Accumulate(args) => cmd_accumulate(args),
        Command::Witness(args) => cmd_witness(args),
        Command::Sign(args) => cmd_sign(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Link(args) => cmd_link(args),
        Command::Endorse(args) => cmd_endorse(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn message_bytes(message: Option<String>, file: Option<PathBuf>) -> Result<Vec<u8>> {
    match (message, file) {
        (Some(m), None) => Ok(m.into_bytes()),
        (None, Some(path)) => {
            fs::read(&path).with_context(|| format!("reading {}", path.display()))
        }
        (None, None) => bail!("one of --message/--message-file (or --payload*) is required"),
        _ => unreachable!("clap enforces exclusivity"),
    }
}

fn cmd_init(args: InitArgs) -> Result<i32> {
    let (l, mu, mode) = params_profile(args.lambda, args.l, args.mu, args.toy)?;
    let mut rng = seeded_rng(args.seed);
    let params = scheme::init(args.lambda, l, mu, mode, &mut rng)?;
    store::save_params(&args.out, &params)?;
    println!(
        "wrote {} ({}-bit modulus, l={}, mu={}, {} mode)",
        args.out.display(),
        params.lambda(),
        params.l(),
        params.mu(),
        if params.mode().is_secure() { "secure" } else { "toy" },
    );
    Ok(0)
}

fn cmd_keygen(args: KeygenArgs) -> Result<i32> {
    let params = store::load_params(&args.params)?;
    let mut db = if args.db.exists() {
        let db = store::load_key_database(&args.db)?;
        if !db.matches_params(&params) {
            bail!("{} is bound to different parameters", args.db.display());
        }
        db
    } else {
        KeyDatabase::new(&params)
    };
    let start = db.entries().len();
    let seed = args.seed.unwrap_or_else(|| rand::Rng::gen(&mut seeded_rng(None)));
    let keys = generate_ring(&params, args.count, 64, seed)?;
    fs::create_dir_all(&args.out_dir)?;
    for (offset, key) in keys.iter().enumerate() {
        let index = start + offset;
        db.add(key.public_key().clone(), format!("{}-{index}", args.label_prefix))
            .map_err(|e| anyhow!("{e}"))?;
        let path = args.out_dir.join(format!("key_{index}.sk"));
        store::save_keypair(&path, key)?;
        println!("wrote {}", path.display());
    }
    store::save_key_database(&args.db, &db)?;
    println!("enrolled {} key(s) in {}", keys.len(), args.db.display());
    Ok(0)
}

fn cmd_accumulate(args: AccumulateArgs) -> Result<i32> {
    let params = store::load_params(&args.params)?;
    let db = store::load_key_database(&args.db)?;
    if !db.matches_params(&params) {
        bail!("{} is bound to different parameters", args.db.display());
    }
    let v = accumulate(params.accumulator(), &db.active_keys())?;
    store::save_accumulated(&args.out, &v)?;
    println!("accumulated {} active key(s) -> {}", v.member_count(), args.out.display());
    Ok(0)
}

fn cmd_witness(args: WitnessArgs) -> Result<i32> {
    let params = store::load_params(&args.params)?;
    let db = store::load_key_database(&args.db)?;
    let key = store::load_keypair(&args.key)?;
    let w = gen_witness(params.accumulator(), &db.active_keys(), key.public_key())?;
    store::save_witness(&args.out, &w)?;
    println!("wrote witness {}", args.out.display());
    Ok(0)
}

fn cmd_sign(args: SignArgs) -> Result<i32> {
    let params = store::load_params(&args.params)?;
    let v = store::load_accumulated(&args.acc)?;
    let w = store::load_witness(&args.witness)?;
    let key = store::load_keypair(&args.key)?;
    let message = message_bytes(args.message, args.message_file)?;
    let mut rng = seeded_rng(args.seed);
    let sig = scheme::sign(&params, &v, &w, &key, &message, args.tid.as_bytes(), &mut rng)?;
    store::save_signature(&args.out, &params, &sig)?;
    println!("wrote signature {}", args.out.display());
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let params = store::load_params(&args.params)?;
    let v = store::load_accumulated(&args.acc)?;
    let sig = store::load_signature(&args.sig)?;
    let message = message_bytes(args.message, args.message_file)?;
    let outcome = verify(&params, &v, &message, args.tid.as_bytes(), &sig);
    println!("{outcome}");
    Ok(if outcome.is_accept() { 0 } else { 1 })
}

fn cmd_link(args: LinkArgs) -> Result<i32> {
    let a = store::load_signature(&args.sig1)?;
    let b = store::load_signature(&args.sig2)?;
    let outcome = link(&a, &b);
    println!("{outcome}");
    Ok(if outcome == Linkage::Linked { 0 } else { 1 })
}

fn parse_behaviors(spec: &str, n: usize) -> Result<Vec<EndorserBehavior>> {
    let mut out = Vec::with_capacity(n);
    for token in spec.split(',').filter(|t| !t.trim().is_empty()) {
        out.push(match token.trim() {
            "endorse" => EndorserBehavior::Endorse,
            "decline" => EndorserBehavior::Decline,
            "double" => EndorserBehavior::DoubleSign,
            "corrupt" => EndorserBehavior::CorruptResponse,
            other => bail!("unknown behavior '{other}' (endorse|decline|double|corrupt)"),
        });
    }
    if out.len() > n {
        bail!("more behaviors than endorsers");
    }
    out.resize(n, EndorserBehavior::Endorse);
    Ok(out)
}

fn parse_index_set(spec: &str, limit: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for token in spec.split(',').filter(|t| !t.trim().is_empty()) {
        let idx: usize = token.trim().parse().context("validator index")?;
        if idx >= limit {
            bail!("validator index {idx} out of range (have {limit})");
        }
        out.push(idx);
    }
    Ok(out)
}

fn cmd_endorse(args: EndorseArgs) -> Result<i32> {
    let params = store::load_params(&args.params)?;
    let payload = message_bytes(args.payload, args.payload_file)?;
    let behaviors = parse_behaviors(&args.behaviors, args.endorsers)?;
    if args.validators == 0 {
        bail!("at least one validator is required");
    }
    let malicious = parse_index_set(&args.malicious_validators, args.validators)?;
    let validators: Vec<ValidatorBehavior> = (0..args.validators)
        .map(|i| {
            if malicious.contains(&i) {
                ValidatorBehavior::MaliciousReject
            } else {
                ValidatorBehavior::Honest
            }
        })
        .collect();

    let seed = args.seed.unwrap_or_else(|| rand::Rng::gen(&mut seeded_rng(None)));
    eprintln!("[endorse] generating {} endorser key(s)", args.endorsers);
    let keys = generate_ring(&params, args.endorsers, 64, seed)?;
    let ring: Vec<BigUint> = keys.iter().map(|k| k.public_key().clone()).collect();
    let policy = EndorsementPolicy::new(&params, ring, args.threshold)
        .map_err(|e| anyhow!("{e}"))?;
    let endorsers: Vec<FlowEndorser> = keys
        .into_iter()
        .zip(behaviors)
        .map(|(key, behavior)| FlowEndorser { key, behavior })
        .collect();

    let propose = ProposeMessage {
        tx: TxRequest {
            client_id: "client-0".into(),
            chaincode_id: "cc-demo".into(),
            payload,
            timestamp: 0,
            client_sig: vec![0; 4],
        },
        anchor: None,
    };

    let mut rng = seeded_rng(Some(seed ^ 0x5eed));
    let transcript =
        fcslrs_core::endorsement::run_flow(&params, &policy, &propose, &endorsers, &validators, &mut rng)?;

    fs::create_dir_all(&args.out_dir)?;
    let tid_hex = hex::encode(propose.tid(params.hash()));
    for (i, resp) in transcript.responses().iter().enumerate() {
        let path = args.out_dir.join(format!("sig_{tid_hex}_{i}.bin"));
        store::save_signature(&path, &params, &resp.signature)?;
    }
    let transcript_path = args.out_dir.join("transcript.json");
    let value = json::transcript_json(&params, &transcript)?;
    fs::write(&transcript_path, serde_json::to_string_pretty(&value)?)?;

    for (validator, verdict) in transcript.verdicts() {
        println!(
            "validator {validator}: {} (valid={}, distinct={})",
            verdict.decision, verdict.valid_count, verdict.distinct_count
        );
    }
    match transcript.committed_block() {
        Some(block) => {
            println!(
                "committed: tid={} endorsements={} -> {}",
                hex::encode(&block.tid),
                block.endorsement_count,
                transcript_path.display()
            );
            Ok(0)
        }
        None => {
            println!("policy unsatisfied: nothing ordered -> {}", transcript_path.display());
            Ok(1)
        }
    }
}

fn parse_u32_list(spec: &str) -> Result<Vec<u32>> {
    spec.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<u32>().with_context(|| format!("bad number '{t}'")))
        .collect()
}

fn parse_rings(spec: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().context("ring range start")?;
        let hi: usize = hi.trim().parse().context("ring range end")?;
        if lo == 0 || hi < lo {
            bail!("bad ring range");
        }
        let mut out = Vec::new();
        let mut n = lo;
        while n <= hi {
            out.push(n);
            n *= 2;
        }
        return Ok(out);
    }
    spec.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad ring size '{t}'")))
        .collect()
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let t = t.trim().to_ascii_lowercase();
            if let Some(kb) = t.strip_suffix('k') {
                Ok(kb.parse::<usize>().with_context(|| format!("bad size '{t}'"))? * 1024)
            } else {
                t.parse::<usize>().with_context(|| format!("bad size '{t}'"))
            }
        })
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<i32> {
    let config = BenchConfig {
        lambdas: parse_u32_list(&args.lambdas)?,
        rings: parse_rings(&args.rings)?,
        msg_lens: parse_sizes(&args.msg)?,
        trials: args.trials.max(1),
        warmup: args.warmup,
        seed: args.seed,
        parallel: args.parallel,
    };
    if config.lambdas.is_empty() || config.rings.is_empty() || config.msg_lens.is_empty() {
        bail!("benchmark grid is empty");
    }
    let report = bench::run(&config, |line| eprintln!("{line}"))?;

    let csv = report.to_csv();
    match &args.out {
        Some(path) => {
            fs::write(path, &csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    println!("{}", report.summary());

    let failures = report.check_claims();
    if failures.is_empty() {
        println!("claims: constant size across rings ok; timing checks ok where applicable");
        Ok(0)
    } else {
        for f in &failures {
            eprintln!("error[BENCH]: {f}");
        }
        Ok(4)
    }
}
