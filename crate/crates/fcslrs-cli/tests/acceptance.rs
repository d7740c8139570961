//! Acceptance suite: one test per release criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them on success).
//!
//! Tests share lazily-built fixtures and serialize on a global gate so the
//! timing-sensitive criteria measure an otherwise idle process. Every
//! tolerance is pinned in this file.

use std::sync::{LazyLock, Mutex, PoisonError};
use std::time::Instant;

use fcslrs_cli::bench;
use fcslrs_cli::generate_ring;
use fcslrs_core::accumulator::{accumulate, gen_witness, AccumulatedValue, Witness};
use fcslrs_core::arith::{ParamMode, SafePrime};
use fcslrs_core::codec;
use fcslrs_core::endorsement::{
    evaluate_policy, respond, run_flow, stub_chaincode, Decision, EndorsementPolicy,
    EndorserBehavior, FlowEndorser, ProposeMessage, TranProposal, TxRequest, ValidatorBehavior,
};
use fcslrs_core::scheme::{
    self, link, sign, standard_dimensions, verify, EndorserKeyPair, Linkage, RingSignature,
    SystemParams, Tag,
};
use num_bigint::{BigUint, RandBigInt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

static GATE: Mutex<()> = Mutex::new(());

fn serialized() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(PoisonError::into_inner)
}

fn report(criterion: u32, label: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[acceptance] criterion {criterion} ({label}): {verdict} — {detail}");
    assert!(pass, "criterion {criterion} ({label}) failed: {detail}");
}

struct Fixture {
    params: SystemParams,
    keys: Vec<EndorserKeyPair>,
}

impl Fixture {
    fn build(lambda: u32, mode: ParamMode, count: usize, seed: u64) -> Fixture {
        let (l, mu) = standard_dimensions(lambda).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let params = scheme::init(lambda, l, mu, mode, &mut rng).unwrap();
        let keys = generate_ring(&params, count, 64, seed ^ 0x0116).unwrap();
        Fixture { params, keys }
    }

    fn ring(&self, n: usize) -> Vec<BigUint> {
        self.keys[..n].iter().map(|k| k.public_key().clone()).collect()
    }

    fn acc(&self, n: usize) -> AccumulatedValue {
        accumulate(self.params.accumulator(), &self.ring(n)).unwrap()
    }

    fn witness(&self, n: usize, signer: usize) -> Witness {
        gen_witness(self.params.accumulator(), &self.ring(n), self.keys[signer].public_key())
            .unwrap()
    }
}

static F1024: LazyLock<Fixture> =
    LazyLock::new(|| Fixture::build(1024, ParamMode::Secure, 256, 0xACC0_1024));
static F512: LazyLock<Fixture> =
    LazyLock::new(|| Fixture::build(512, ParamMode::Toy, 64, 0xACC0_0512));
static F128: LazyLock<Fixture> =
    LazyLock::new(|| Fixture::build(128, ParamMode::Toy, 8, 0xACC0_0128));

/// Desk-scale fixture over N = 1081 = 23·47 with the four enumerated key
/// pairs whose public keys are accumulable primes.
static TOY: LazyLock<Fixture> = LazyLock::new(|| {
    let mut rng = ChaCha20Rng::seed_from_u64(0xACC0_1081);
    let p = SafePrime::from_value(BigUint::from(23u32), 16, &mut rng).unwrap();
    let q = SafePrime::from_value(BigUint::from(47u32), 16, &mut rng).unwrap();
    let params = scheme::init_from_safe_primes(p, q, 8, 2, ParamMode::Toy, &mut rng).unwrap();
    let keys = [(3u32, 5u32), (3, 7), (5, 7), (3, 11)]
        .into_iter()
        .map(|(p, q)| {
            EndorserKeyPair::from_parts(BigUint::from(p), BigUint::from(q), &params, 16, &mut rng)
                .unwrap()
        })
        .collect();
    Fixture { params, keys }
});

#[test]
fn criterion_01_verification_correctness() {
    let _gate = serialized();
    let started = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    let mut accepts = 0usize;
    let mut total = 0usize;

    for fixture in [&*F512, &*F1024] {
        for n in [4usize, 16, 64] {
            let v = fixture.acc(n);
            let signer_count = n.min(4);
            let witnesses: Vec<Witness> =
                (0..signer_count).map(|i| fixture.witness(n, i)).collect();
            for round in 0..50 {
                let signer = round % signer_count;
                let msg_len = (round * 37) % 2048;
                let mut message = vec![0u8; msg_len];
                rng.fill(&mut message[..]);
                let tid = format!("c1-{}-{n}-{round}", fixture.params.lambda());
                let sig = sign(
                    &fixture.params,
                    &v,
                    &witnesses[signer],
                    &fixture.keys[signer],
                    &message,
                    tid.as_bytes(),
                    &mut rng,
                )
                .unwrap();
                total += 1;
                if verify(&fixture.params, &v, &message, tid.as_bytes(), &sig).is_accept() {
                    accepts += 1;
                }
            }
        }
    }
    let elapsed = started.elapsed();
    report(
        1,
        "verification correctness",
        accepts == total && total == 300,
        &format!("{accepts}/{total} honest signatures accepted in {elapsed:.2?}"),
    );
}

#[test]
fn criterion_02_constant_signature_size() {
    let _gate = serialized();
    let fixture = &*F1024;
    let mut rng = ChaCha20Rng::seed_from_u64(102);
    let mut sizes = Vec::new();
    for n in [4usize, 256] {
        let v = fixture.acc(n);
        let w = fixture.witness(n, 0);
        let sig = sign(
            &fixture.params,
            &v,
            &w,
            &fixture.keys[0],
            b"size probe message",
            b"c2-tid",
            &mut rng,
        )
        .unwrap();
        assert!(verify(&fixture.params, &v, b"size probe message", b"c2-tid", &sig).is_accept());
        sizes.push(codec::encode_signature(&fixture.params, &sig).unwrap().len());
    }
    report(
        2,
        "constant signature size",
        sizes[0] == sizes[1],
        &format!("{} bytes at n=4 vs {} bytes at n=256 (lambda=1024)", sizes[0], sizes[1]),
    );
}

#[test]
fn criterion_03_constant_time_across_rings() {
    let _gate = serialized();
    let fixture = &*F1024;
    let mut rng = ChaCha20Rng::seed_from_u64(103);
    let mut sign_means = Vec::new();
    let mut verify_means = Vec::new();
    for n in [4usize, 16, 64, 256] {
        let v = fixture.acc(n);
        let w = fixture.witness(n, 0);
        let (sign_st, verify_st, _tag, _bytes) = bench::measure_ring(
            &fixture.params,
            &v,
            &w,
            &fixture.keys[0],
            2048,
            20,
            3,
            &mut rng,
        )
        .unwrap();
        sign_means.push(sign_st.mean_ms);
        verify_means.push(verify_st.mean_ms);
    }
    let cv = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
        var.sqrt() / mean
    };
    let sign_cv = cv(&sign_means);
    let verify_cv = cv(&verify_means);
    report(
        3,
        "constant-time trend",
        sign_cv < 0.10 && verify_cv < 0.10,
        &format!(
            "lambda=1024, n in {{4,16,64,256}}: sign means {:?} ms (CV {:.2}%), verify means {:?} ms (CV {:.2}%)",
            sign_means.iter().map(|m| (m * 100.0).round() / 100.0).collect::<Vec<_>>(),
            sign_cv * 100.0,
            verify_means.iter().map(|m| (m * 100.0).round() / 100.0).collect::<Vec<_>>(),
            verify_cv * 100.0
        ),
    );
}

#[test]
fn criterion_04_lambda_scaling() {
    let _gate = serialized();
    // Fresh measurements for both modulus sizes inside one test, so the
    // ratio compares like with like.
    let mut rng = ChaCha20Rng::seed_from_u64(104);
    let f1024 = &*F1024;
    let v = f1024.acc(4);
    let w = f1024.witness(4, 0);
    let (sign_1024, ..) =
        bench::measure_ring(&f1024.params, &v, &w, &f1024.keys[0], 2048, 20, 3, &mut rng).unwrap();

    let (l, mu) = standard_dimensions(2048).unwrap();
    let params = scheme::init(2048, l, mu, ParamMode::Secure, &mut rng).unwrap();
    let keys = generate_ring(&params, 4, 64, 0xACC0_2048).unwrap();
    let ring: Vec<BigUint> = keys.iter().map(|k| k.public_key().clone()).collect();
    let v = accumulate(params.accumulator(), &ring).unwrap();
    let w = gen_witness(params.accumulator(), &ring, keys[0].public_key()).unwrap();
    let (sign_2048, ..) =
        bench::measure_ring(&params, &v, &w, &keys[0], 2048, 20, 3, &mut rng).unwrap();

    let factor = sign_2048.mean_ms / sign_1024.mean_ms;
    report(
        4,
        "lambda scaling",
        (3.0..=12.0).contains(&factor),
        &format!(
            "mean sign {:.2} ms at 1024 bits vs {:.2} ms at 2048 bits: factor {factor:.2} (band [3, 12])",
            sign_1024.mean_ms, sign_2048.mean_ms
        ),
    );
}

#[test]
fn criterion_05_linking_correctness() {
    let _gate = serialized();
    let fixture = &*F128;
    let mut rng = ChaCha20Rng::seed_from_u64(105);
    let n = 4;
    let v = fixture.acc(n);
    let w0 = fixture.witness(n, 0);
    let w1 = fixture.witness(n, 1);

    let mut same_linked = 0;
    let mut cross_signer_linked = 0;
    let mut cross_tid_linked = 0;
    for trial in 0..100 {
        let tid_a = format!("c5-a-{trial}");
        let tid_b = format!("c5-b-{trial}");
        let s1 =
            sign(&fixture.params, &v, &w0, &fixture.keys[0], b"m1", tid_a.as_bytes(), &mut rng)
                .unwrap();
        let s2 =
            sign(&fixture.params, &v, &w0, &fixture.keys[0], b"m2", tid_a.as_bytes(), &mut rng)
                .unwrap();
        let s3 =
            sign(&fixture.params, &v, &w1, &fixture.keys[1], b"m3", tid_a.as_bytes(), &mut rng)
                .unwrap();
        let s4 =
            sign(&fixture.params, &v, &w0, &fixture.keys[0], b"m4", tid_b.as_bytes(), &mut rng)
                .unwrap();
        if link(&s1, &s2) == Linkage::Linked {
            same_linked += 1;
        }
        if link(&s1, &s3) == Linkage::Linked {
            cross_signer_linked += 1;
        }
        if link(&s1, &s4) == Linkage::Linked {
            cross_tid_linked += 1;
        }
    }
    report(
        5,
        "linking correctness",
        same_linked == 100 && cross_signer_linked == 0 && cross_tid_linked == 0,
        &format!(
            "same-signer/same-tid {same_linked}/100 linked; distinct-signer {cross_signer_linked}/100; same-signer/distinct-tid {cross_tid_linked}/100"
        ),
    );
}

#[test]
fn criterion_06_accumulator_properties() {
    let _gate = serialized();
    let fixture = &*TOY;
    let acc_params = fixture.params.accumulator();
    let pool: Vec<BigUint> = [
        3u32, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,
        89, 97, 101, 103,
    ]
    .iter()
    .map(|&x| BigUint::from(x))
    .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(106);

    let mut permutation_matches = 0usize;
    for _ in 0..1000 {
        let size = 1 + rng.gen_range(0..16usize);
        let mut shuffled = pool.clone();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        let mut ring: Vec<BigUint> = shuffled[..size].to_vec();
        let reference = accumulate(acc_params, &ring).unwrap();
        for i in (1..ring.len()).rev() {
            ring.swap(i, rng.gen_range(0..=i));
        }
        if accumulate(acc_params, &ring).unwrap().value() == reference.value() {
            permutation_matches += 1;
        }
    }

    let mut witness_checks = 0usize;
    let mut witness_ok = 0usize;
    for _ in 0..100 {
        let size = 1 + rng.gen_range(0..8usize);
        let mut shuffled = pool.clone();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        let ring: Vec<BigUint> = shuffled[..size].to_vec();
        let v = accumulate(acc_params, &ring).unwrap();
        for member in &ring {
            let w = gen_witness(acc_params, &ring, member).unwrap();
            witness_checks += 1;
            if w.verifies(acc_params, &v) {
                witness_ok += 1;
            }
        }
    }
    report(
        6,
        "accumulator properties",
        permutation_matches == 1000 && witness_ok == witness_checks,
        &format!(
            "quasi-commutativity {permutation_matches}/1000 permutations; witness completeness {witness_ok}/{witness_checks}"
        ),
    );
}

#[test]
fn criterion_07_tamper_suite() {
    let _gate = serialized();
    let fixture = &*F128;
    let n = 4;
    let v = fixture.acc(n);
    let w = fixture.witness(n, 0);
    let mut rng = ChaCha20Rng::seed_from_u64(107);
    let modulus = fixture.params.modulus().clone();

    type Mutation = Box<dyn Fn(&mut RingSignature, &mut Vec<u8>, &mut ChaCha20Rng, &BigUint)>;
    let mut classes: Vec<(String, Mutation)> = Vec::new();
    classes.push((
        "message bit-flip".into(),
        Box::new(|_sig, msg, rng, _n| {
            let byte = rng.gen_range(0..msg.len());
            let bit = rng.gen_range(0..8);
            msg[byte] ^= 1 << bit;
        }),
    ));
    classes.push((
        "tag substitution".into(),
        Box::new(|sig, _msg, rng, n| {
            sig.tag = Tag::from_value(rng.gen_biguint_range(&BigUint::from(1u32), n));
        }),
    ));
    for i in 0..5 {
        classes.push((
            format!("T{} substitution", i + 1),
            Box::new(move |sig, _msg, rng, n| {
                sig.t_vals[i] = rng.gen_biguint_range(&BigUint::from(1u32), n);
            }),
        ));
    }
    for i in 0..5 {
        classes.push((
            format!("response {} perturbation", i + 1),
            Box::new(move |sig, _msg, _rng, _n| {
                sig.responses[i] += 1u32;
            }),
        ));
    }
    for i in 0..9 {
        classes.push((
            format!("u{} substitution", i + 1),
            Box::new(move |sig, _msg, rng, n| {
                sig.u_vals[i] = rng.gen_biguint_range(&BigUint::from(1u32), n);
            }),
        ));
    }

    let mut all_ok = true;
    let mut summary = Vec::new();
    for (label, mutate) in &classes {
        let mut rejected = 0;
        for trial in 0..50 {
            let mut message = vec![0u8; 64];
            rng.fill(&mut message[..]);
            let tid = format!("c7-{label}-{trial}");
            let sig = sign(
                &fixture.params,
                &v,
                &w,
                &fixture.keys[0],
                &message,
                tid.as_bytes(),
                &mut rng,
            )
            .unwrap();
            let mut bad_sig = sig.clone();
            let mut bad_msg = message.clone();
            mutate(&mut bad_sig, &mut bad_msg, &mut rng, &modulus);
            if !verify(&fixture.params, &v, &bad_msg, tid.as_bytes(), &bad_sig).is_accept() {
                rejected += 1;
            }
        }
        if rejected != 50 {
            all_ok = false;
            summary.push(format!("{label}: {rejected}/50"));
        }
    }
    report(
        7,
        "tamper suite",
        all_ok,
        &if all_ok {
            format!("{} mutation classes x 50 trials: 100% rejection", classes.len())
        } else {
            format!("classes below 100% rejection: {}", summary.join("; "))
        },
    );
}

#[test]
fn criterion_08_threshold_policy_table() {
    let _gate = serialized();
    let fixture = &*F128;
    let params = &fixture.params;
    let mut rng = ChaCha20Rng::seed_from_u64(108);
    let ring = fixture.ring(4);
    let payload = b"threshold table payload".to_vec();
    let tid = params.hash().digest128(&[&payload]).to_vec();
    let (readset, writeset) = stub_chaincode(params.hash(), &payload);
    let proposal = TranProposal {
        tid: tid.clone(),
        chaincode_id: "cc".into(),
        tx_content_blob: payload.clone(),
        readset,
        writeset,
    };

    let make = |t: usize| EndorsementPolicy::new(params, ring.clone(), t).unwrap();
    let mut rows_ok = Vec::new();

    // (t=1, 1 valid) -> accept
    {
        let policy = make(1);
        let r0 = respond(params, &policy, &fixture.keys[0], &tid, proposal.clone(), &mut rng)
            .unwrap();
        let verdict = evaluate_policy(params, &policy, &tid, &[r0]).unwrap();
        rows_ok.push(verdict.decision == Decision::Accept && verdict.distinct_count == 1);
    }
    // (t=3, 3 distinct) -> accept
    {
        let policy = make(3);
        let responses: Vec<_> = (0..3)
            .map(|i| {
                respond(params, &policy, &fixture.keys[i], &tid, proposal.clone(), &mut rng)
                    .unwrap()
            })
            .collect();
        let verdict = evaluate_policy(params, &policy, &tid, &responses).unwrap();
        rows_ok.push(verdict.decision == Decision::Accept && verdict.distinct_count == 3);
    }
    // (t=3, 3 valid but 2 linked) -> reject
    {
        let policy = make(3);
        let responses = vec![
            respond(params, &policy, &fixture.keys[0], &tid, proposal.clone(), &mut rng).unwrap(),
            respond(params, &policy, &fixture.keys[1], &tid, proposal.clone(), &mut rng).unwrap(),
            respond(params, &policy, &fixture.keys[1], &tid, proposal.clone(), &mut rng).unwrap(),
        ];
        let verdict = evaluate_policy(params, &policy, &tid, &responses).unwrap();
        rows_ok.push(
            verdict.decision == Decision::Reject
                && verdict.valid_count == 3
                && verdict.distinct_count == 2
                && !verdict.link_pairs.is_empty(),
        );
    }
    // (t=2, 2 distinct but differing writesets) -> reject
    {
        let policy = make(2);
        let mut other = proposal.clone();
        other.writeset[0].value[0] ^= 0xff;
        let responses = vec![
            respond(params, &policy, &fixture.keys[0], &tid, proposal.clone(), &mut rng).unwrap(),
            respond(params, &policy, &fixture.keys[1], &tid, other, &mut rng).unwrap(),
        ];
        let verdict = evaluate_policy(params, &policy, &tid, &responses).unwrap();
        rows_ok.push(
            verdict.decision == Decision::Reject
                && verdict.valid_count == 2
                && verdict.distinct_count == 1,
        );
    }
    // NACKs never counted: one endorsement + three declines under t=2.
    {
        let policy = make(2);
        let endorsers: Vec<FlowEndorser> = fixture.keys[..4]
            .iter()
            .enumerate()
            .map(|(i, k)| FlowEndorser {
                key: k.clone(),
                behavior: if i == 0 {
                    EndorserBehavior::Endorse
                } else {
                    EndorserBehavior::Decline
                },
            })
            .collect();
        let propose = ProposeMessage {
            tx: TxRequest {
                client_id: "client".into(),
                chaincode_id: "cc".into(),
                payload: payload.clone(),
                timestamp: 7,
                client_sig: vec![1],
            },
            anchor: None,
        };
        let transcript = run_flow(
            params,
            &policy,
            &propose,
            &endorsers,
            &[ValidatorBehavior::Honest; 3],
            &mut rng,
        )
        .unwrap();
        let (_, verdict) = transcript.verdicts()[0];
        rows_ok.push(
            transcript.committed_block().is_none()
                && transcript.nack_count() == 3
                && verdict.distinct_count == 1,
        );
    }

    let pass = rows_ok.iter().all(|&ok| ok);
    report(
        8,
        "threshold policy table",
        pass,
        &format!(
            "rows [t1/1-valid, t3/3-distinct, t3/2-linked, t2/split-writeset, nacks-uncounted]: {rows_ok:?}"
        ),
    );
}

#[test]
fn criterion_09_forgery_smoke() {
    let _gate = serialized();
    let fixture = &*TOY;
    let params = &fixture.params;
    let n_el = params.modulus().clone();
    let one = BigUint::from(1u32);
    let v = fixture.acc(4);
    let single_bound = params.single_response_bound();
    let double_bound = params.double_response_bound();
    let mut rng = ChaCha20Rng::seed_from_u64(109);

    let trials = 100_000usize;
    let mut accepted = 0usize;
    for trial in 0..trials {
        let sig = RingSignature {
            t_vals: core::array::from_fn(|_| rng.gen_biguint_range(&one, &n_el)),
            u_vals: core::array::from_fn(|_| rng.gen_biguint_range(&one, &n_el)),
            responses: [
                rng.gen_biguint_below(&single_bound),
                rng.gen_biguint_below(&single_bound),
                rng.gen_biguint_below(&double_bound),
                rng.gen_biguint_below(&single_bound),
                rng.gen_biguint_below(&double_bound),
            ],
            tag: Tag::from_value(rng.gen_biguint_range(&one, &n_el)),
        };
        let message = (trial as u64).to_be_bytes();
        if verify(params, &v, &message, b"c9-forge", &sig).is_accept() {
            accepted += 1;
        }
    }
    report(
        9,
        "forgery smoke",
        accepted == 0,
        &format!("{accepted}/{trials} random transcripts accepted at toy scale"),
    );
}

#[test]
fn criterion_10_flow_anonymity() {
    let _gate = serialized();
    let fixture = &*F512;
    let params = &fixture.params;
    let ring = fixture.ring(4);
    let policy = EndorsementPolicy::new(params, ring.clone(), 2).unwrap();
    let behaviors = [
        EndorserBehavior::Endorse,
        EndorserBehavior::Endorse,
        EndorserBehavior::Endorse,
        EndorserBehavior::Decline,
    ];
    let endorsers: Vec<FlowEndorser> = fixture.keys[..4]
        .iter()
        .zip(behaviors)
        .map(|(k, behavior)| FlowEndorser { key: k.clone(), behavior })
        .collect();
    let propose = ProposeMessage {
        tx: TxRequest {
            client_id: "client".into(),
            chaincode_id: "cc".into(),
            payload: b"anonymity probe".to_vec(),
            timestamp: 1,
            client_sig: vec![2; 4],
        },
        anchor: None,
    };
    let mut rng = ChaCha20Rng::seed_from_u64(110);
    let transcript = run_flow(
        params,
        &policy,
        &propose,
        &endorsers,
        &[ValidatorBehavior::Honest; 3],
        &mut rng,
    )
    .unwrap();
    assert!(transcript.committed_block().is_some(), "flow must commit for the scan to matter");

    let contains = |hay: &[u8], needle: &[u8]| -> bool {
        !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
    };
    let width = params.element_width();
    let mut scans = 0usize;
    let mut hits = 0usize;
    for resp in transcript.responses() {
        let bytes = codec::encode_response(params, resp).unwrap();
        for pk in &ring {
            let minimal = pk.to_bytes_be();
            let mut padded = vec![0u8; width - minimal.len()];
            padded.extend_from_slice(&minimal);
            scans += 1;
            if contains(&bytes, &minimal) || contains(&bytes, &padded) {
                hits += 1;
            }
        }
    }
    report(
        10,
        "flow anonymity",
        hits == 0 && scans > 0,
        &format!(
            "{scans} byte-level scans of serialized responses against ring public keys: {hits} occurrences"
        ),
    );
}
