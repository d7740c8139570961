//! Threshold endorsement policy evaluation and an in-memory simulation of
//! the modified transaction flow.
//!
//! A transaction proposal is endorsed anonymously: each willing ring member
//! executes the (stubbed) chaincode, signs the canonical encoding of its
//! transaction proposal with the ring signature and emits a
//! [`ProposalResponse`] that carries no endorser identity — only the
//! signature and its tag. A validator accepts when at least `t` valid,
//! pairwise-unlinked signatures agree on the same read/write sets; linked
//! tags collapse to a single count, which is what defeats double-signing.
//! When at least half of the validators accept, the lowest-indexed accepting
//! validator forwards the transaction to the ordering service, which appends
//! a block to its in-memory log.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use rand::Rng;

use crate::accumulator::{self, AccumulatedValue, AccumulatorError};
use crate::codec;
use crate::scheme::{
    self, EndorserKeyPair, HashId, RejectReason, RingSignature, SchemeError, SystemParams, Tag,
};

/// A client's raw transaction request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxRequest {
    pub client_id: String,
    pub chaincode_id: String,
    pub payload: Vec<u8>,
    pub timestamp: u64,
    /// Opaque client credential bytes; the simulation carries but never
    /// inspects them.
    pub client_sig: Vec<u8>,
}

/// The message a client broadcasts to the endorsement set. The transaction
/// id is always derived as the digest of the payload, never supplied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProposeMessage {
    pub tx: TxRequest,
    /// Optional version anchor: read key → expected version.
    pub anchor: Option<BTreeMap<String, u64>>,
}

impl ProposeMessage {
    pub fn tid(&self, hash: HashId) -> Vec<u8> {
        hash.digest128(&[&self.tx.payload]).to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ReadItem {
    pub key: String,
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WriteItem {
    pub key: String,
    pub value: Vec<u8>,
}

/// The endorsed transaction content: what the signature covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranProposal {
    pub tid: Vec<u8>,
    pub chaincode_id: String,
    pub tx_content_blob: Vec<u8>,
    pub readset: Vec<ReadItem>,
    pub writeset: Vec<WriteItem>,
}

/// Identity-stripped endorsement reply: a proposal, a ring signature over
/// its canonical encoding and the linkability tag. No field identifies the
/// endorsing peer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProposalResponse {
    pub tid: Vec<u8>,
    pub tran_proposal: TranProposal,
    pub signature: RingSignature,
    pub tag: Tag,
}

/// Ring descriptor, its accumulated value and the threshold `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndorsementPolicy {
    ring: Vec<BigUint>,
    v: AccumulatedValue,
    threshold: usize,
}

impl EndorsementPolicy {
    /// Accumulates the ring and pins the threshold; `1 <= t <= n`.
    pub fn new(
        params: &SystemParams,
        ring: Vec<BigUint>,
        threshold: usize,
    ) -> Result<Self, PolicyError> {
        if threshold == 0 || threshold > ring.len() {
            return Err(PolicyError::BadThreshold);
        }
        let v = accumulator::accumulate(params.accumulator(), &ring)
            .map_err(PolicyError::Accumulator)?;
        Ok(EndorsementPolicy { ring, v, threshold })
    }

    pub fn ring(&self) -> &[BigUint] {
        &self.ring
    }

    pub fn accumulated(&self) -> &AccumulatedValue {
        &self.v
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyError {
    BadThreshold,
    /// Responses for different transaction ids were mixed in one evaluation.
    MixedTransactionIds,
    Accumulator(AccumulatorError),
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::BadThreshold => write!(f, "threshold must satisfy 1 <= t <= n"),
            PolicyError::MixedTransactionIds => {
                write!(f, "responses carry mixed transaction ids")
            }
            PolicyError::Accumulator(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PolicyError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Accept => write!(f, "accept"),
            Decision::Reject => write!(f, "reject"),
        }
    }
}

/// Per-response validity outcome inside a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseAssessment {
    Valid,
    InvalidSignature(RejectReason),
    /// Top-level tag differs from the signature's tag.
    TagMismatch,
}

/// Outcome of one validator's policy evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyVerdict {
    pub decision: Decision,
    /// Responses whose signature verified (tag-consistent, right tid).
    pub valid_count: usize,
    /// Highest count of pairwise-unlinked tags within any group of
    /// responses sharing identical read/write sets.
    pub distinct_count: usize,
    /// Pairs of response indices whose tags matched during link tests.
    pub link_pairs: Vec<(usize, usize)>,
    pub per_signature: Vec<ResponseAssessment>,
}

/// Evaluates a t-out-of-n endorsement policy over a batch of responses for
/// one transaction.
///
/// Every signature is verified individually; survivors are grouped by exact
/// equality of their (readset, writeset) encodings, and within each group
/// pairwise link tests collapse same-tag responses to one vote. The policy
/// is satisfied when any group reaches `t` distinct tags, so adding a valid
/// response from a new signer can never flip an accept into a reject.
pub fn evaluate_policy(
    params: &SystemParams,
    policy: &EndorsementPolicy,
    tid: &[u8],
    responses: &[ProposalResponse],
) -> Result<PolicyVerdict, PolicyError> {
    if responses.iter().any(|r| r.tid != tid) {
        return Err(PolicyError::MixedTransactionIds);
    }

    let mut per_signature = Vec::with_capacity(responses.len());
    let mut valid_indices: Vec<usize> = Vec::new();
    for (i, resp) in responses.iter().enumerate() {
        if resp.tag != resp.signature.tag || resp.tran_proposal.tid != resp.tid {
            per_signature.push(ResponseAssessment::TagMismatch);
            continue;
        }
        let message = codec::encode_tran_proposal(&resp.tran_proposal);
        match scheme::verify(params, policy.accumulated(), &message, tid, &resp.signature) {
            scheme::VerifyOutcome::Accept => {
                per_signature.push(ResponseAssessment::Valid);
                valid_indices.push(i);
            }
            scheme::VerifyOutcome::Reject(reason) => {
                per_signature.push(ResponseAssessment::InvalidSignature(reason));
            }
        }
    }

    // Group survivors by the exact bytes of their read/write sets.
    let mut groups: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
    for &i in &valid_indices {
        let tp = &responses[i].tran_proposal;
        let mut key = Vec::new();
        for item in &tp.readset {
            key.extend_from_slice(item.key.as_bytes());
            key.extend_from_slice(&item.version.to_be_bytes());
        }
        key.push(0xff); // separator between the two sets
        for item in &tp.writeset {
            key.extend_from_slice(item.key.as_bytes());
            key.extend_from_slice(&item.value);
        }
        groups.entry(key).or_default().push(i);
    }

    let mut link_pairs = Vec::new();
    let mut distinct_count = 0usize;
    for members in groups.values() {
        let mut distinct_tags: Vec<&Tag> = Vec::new();
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[..a] {
                if responses[i].tag == responses[j].tag {
                    link_pairs.push((j, i));
                }
            }
            if !distinct_tags.iter().any(|t| **t == responses[i].tag) {
                distinct_tags.push(&responses[i].tag);
            }
        }
        distinct_count = distinct_count.max(distinct_tags.len());
    }

    let decision = if distinct_count >= policy.threshold() {
        Decision::Accept
    } else {
        Decision::Reject
    };
    Ok(PolicyVerdict {
        decision,
        valid_count: valid_indices.len(),
        distinct_count,
        link_pairs,
        per_signature,
    })
}

/// Deterministic stand-in for chaincode execution: read/write sets are a
/// pure function of the payload, so every honest endorser produces
/// identical sets. The empty payload yields empty sets.
pub fn stub_chaincode(hash: HashId, payload: &[u8]) -> (Vec<ReadItem>, Vec<WriteItem>) {
    if payload.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let d = hash.digest128(&[payload]);
    let readset = (0..2)
        .map(|i| ReadItem {
            key: format!("r:{:02x}{:02x}", d[2 * i], d[2 * i + 1]),
            version: u64::from(d[4 + i]),
        })
        .collect();
    let writeset = (0..2)
        .map(|i| WriteItem {
            key: format!("w:{:02x}{:02x}", d[6 + 2 * i], d[7 + 2 * i]),
            value: d[10 + 3 * i..13 + 3 * i].to_vec(),
        })
        .collect();
    (readset, writeset)
}

/// Builds and signs an identity-free response for one endorser.
pub fn respond<R: Rng>(
    params: &SystemParams,
    policy: &EndorsementPolicy,
    key: &EndorserKeyPair,
    tid: &[u8],
    tran_proposal: TranProposal,
    rng: &mut R,
) -> Result<ProposalResponse, SchemeError> {
    let witness = accumulator::gen_witness(params.accumulator(), policy.ring(), key.public_key())?;
    let message = codec::encode_tran_proposal(&tran_proposal);
    let signature =
        scheme::sign(params, policy.accumulated(), &witness, key, &message, tid, rng)?;
    let tag = signature.tag.clone();
    Ok(ProposalResponse { tid: tid.to_vec(), tran_proposal, signature, tag })
}

/// What a ring member does when the proposal reaches it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndorserBehavior {
    Endorse,
    /// Sends a negative acknowledgment; never counts toward the threshold.
    Decline,
    /// Signs a proposal whose writeset was perturbed, so it groups apart.
    CorruptResponse,
    /// Submits two independently randomized responses for the same tid.
    DoubleSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidatorBehavior {
    Honest,
    /// Marks the transaction rejected without evaluating anything.
    MaliciousReject,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowEndorser {
    pub key: EndorserKeyPair,
    pub behavior: EndorserBehavior,
}

/// A block appended by the ordering service.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub sequence: u64,
    pub tid: Vec<u8>,
    pub tran_proposal: TranProposal,
    pub endorsement_count: usize,
}

/// Everything that happened during one flow run, in message order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowEvent {
    Proposed { tid: Vec<u8> },
    /// An endorsement reply; deliberately carries no ring index.
    Responded { response: ProposalResponse },
    /// Negative acknowledgment back to the client (not anonymous).
    Nacked { ring_index: usize },
    Evaluated { validator: usize, behavior: ValidatorBehavior, verdict: PolicyVerdict },
    /// The lowest-indexed accepting validator forwards to ordering.
    Forwarded { validator: usize },
    Committed { block: Block },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowTranscript {
    events: Vec<FlowEvent>,
}

impl FlowTranscript {
    pub fn events(&self) -> &[FlowEvent] {
        &self.events
    }

    pub fn responses(&self) -> Vec<&ProposalResponse> {
        self.events
            .iter()
            .filter_map(|e| match e {
                FlowEvent::Responded { response } => Some(response),
                _ => None,
            })
            .collect()
    }

    pub fn nack_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, FlowEvent::Nacked { .. })).count()
    }

    pub fn verdicts(&self) -> Vec<(usize, &PolicyVerdict)> {
        self.events
            .iter()
            .filter_map(|e| match e {
                FlowEvent::Evaluated { validator, verdict, .. } => Some((*validator, verdict)),
                _ => None,
            })
            .collect()
    }

    pub fn committed_block(&self) -> Option<&Block> {
        self.events.iter().find_map(|e| match e {
            FlowEvent::Committed { block } => Some(block),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowError {
    /// Behaviors must cover exactly the policy ring, in order.
    RingMismatch,
    NoValidators,
    Scheme(SchemeError),
    Policy(PolicyError),
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::RingMismatch => {
                write!(f, "endorser list does not match the policy ring")
            }
            FlowError::NoValidators => write!(f, "at least one validator is required"),
            FlowError::Scheme(e) => write!(f, "{e}"),
            FlowError::Policy(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FlowError {}

impl From<SchemeError> for FlowError {
    fn from(e: SchemeError) -> Self {
        FlowError::Scheme(e)
    }
}

/// Simulates the full flow: propose, per-endorser execution and signing,
/// independent validator evaluation, majority consensus, ordering and
/// commit. Every fault surfaces in the transcript rather than as an error.
pub fn run_flow<R: Rng>(
    params: &SystemParams,
    policy: &EndorsementPolicy,
    propose: &ProposeMessage,
    endorsers: &[FlowEndorser],
    validators: &[ValidatorBehavior],
    rng: &mut R,
) -> Result<FlowTranscript, FlowError> {
    if endorsers.len() != policy.ring().len()
        || endorsers
            .iter()
            .zip(policy.ring())
            .any(|(e, pk)| e.key.public_key() != pk)
    {
        return Err(FlowError::RingMismatch);
    }
    if validators.is_empty() {
        return Err(FlowError::NoValidators);
    }

    let tid = propose.tid(params.hash());
    let mut events = Vec::new();
    events.push(FlowEvent::Proposed { tid: tid.clone() });

    let (readset, writeset) = stub_chaincode(params.hash(), &propose.tx.payload);
    let honest_proposal = TranProposal {
        tid: tid.clone(),
        chaincode_id: propose.tx.chaincode_id.clone(),
        tx_content_blob: propose.tx.payload.clone(),
        readset,
        writeset,
    };

    let mut responses: Vec<ProposalResponse> = Vec::new();
    for (index, endorser) in endorsers.iter().enumerate() {
        match endorser.behavior {
            EndorserBehavior::Decline => {
                events.push(FlowEvent::Nacked { ring_index: index });
            }
            EndorserBehavior::Endorse => {
                let resp =
                    respond(params, policy, &endorser.key, &tid, honest_proposal.clone(), rng)?;
                responses.push(resp.clone());
                events.push(FlowEvent::Responded { response: resp });
            }
            EndorserBehavior::DoubleSign => {
                for _ in 0..2 {
                    let resp = respond(
                        params,
                        policy,
                        &endorser.key,
                        &tid,
                        honest_proposal.clone(),
                        rng,
                    )?;
                    responses.push(resp.clone());
                    events.push(FlowEvent::Responded { response: resp });
                }
            }
            EndorserBehavior::CorruptResponse => {
                let mut proposal = honest_proposal.clone();
                match proposal.writeset.first_mut() {
                    Some(item) if !item.value.is_empty() => item.value[0] ^= 0xff,
                    _ => proposal
                        .writeset
                        .push(WriteItem { key: String::from("w:corrupt"), value: alloc::vec![0xff] }),
                }
                let resp = respond(params, policy, &endorser.key, &tid, proposal, rng)?;
                responses.push(resp.clone());
                events.push(FlowEvent::Responded { response: resp });
            }
        }
    }

    let mut accepting: Vec<usize> = Vec::new();
    for (validator, behavior) in validators.iter().enumerate() {
        let verdict = match behavior {
            ValidatorBehavior::Honest => {
                evaluate_policy(params, policy, &tid, &responses).map_err(FlowError::Policy)?
            }
            ValidatorBehavior::MaliciousReject => PolicyVerdict {
                decision: Decision::Reject,
                valid_count: 0,
                distinct_count: 0,
                link_pairs: Vec::new(),
                per_signature: Vec::new(),
            },
        };
        if verdict.decision == Decision::Accept {
            accepting.push(validator);
        }
        events.push(FlowEvent::Evaluated { validator, behavior: *behavior, verdict });
    }

    // Majority consensus: at least ceil(|V| / 2) accepting validators.
    let quorum = validators.len().div_ceil(2);
    if accepting.len() >= quorum {
        let forwarder = accepting[0];
        events.push(FlowEvent::Forwarded { validator: forwarder });
        // Commit-time version re-validation is a stub: the simulator has no
        // concurrent state mutation, so the anchor always matches.
        let block = Block {
            sequence: 0,
            tid: tid.clone(),
            tran_proposal: honest_proposal,
            endorsement_count: responses.len(),
        };
        events.push(FlowEvent::Committed { block });
    }

    Ok(FlowTranscript { events })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::tests_support::{rng, toy_setup};
    use alloc::vec;

    fn policy_and_keys(
        threshold: usize,
    ) -> (SystemParams, Vec<EndorserKeyPair>, EndorsementPolicy) {
        let (params, keys, ring, _) = toy_setup();
        let policy = EndorsementPolicy::new(&params, ring, threshold).unwrap();
        (params, keys, policy)
    }

    fn honest_proposal(params: &SystemParams, payload: &[u8]) -> (Vec<u8>, TranProposal) {
        let tid = params.hash().digest128(&[payload]).to_vec();
        let (readset, writeset) = stub_chaincode(params.hash(), payload);
        let tp = TranProposal {
            tid: tid.clone(),
            chaincode_id: String::from("cc"),
            tx_content_blob: payload.to_vec(),
            readset,
            writeset,
        };
        (tid, tp)
    }

    fn propose(payload: &[u8]) -> ProposeMessage {
        ProposeMessage {
            tx: TxRequest {
                client_id: String::from("client-1"),
                chaincode_id: String::from("cc"),
                payload: payload.to_vec(),
                timestamp: 1_700_000_000,
                client_sig: vec![0xab; 8],
            },
            anchor: None,
        }
    }

    #[test]
    fn policy_threshold_bounds() {
        let (params, _, ring, _) = toy_setup();
        assert_eq!(
            EndorsementPolicy::new(&params, ring.clone(), 0),
            Err(PolicyError::BadThreshold)
        );
        assert_eq!(
            EndorsementPolicy::new(&params, ring.clone(), ring.len() + 1),
            Err(PolicyError::BadThreshold)
        );
        let policy = EndorsementPolicy::new(&params, ring.clone(), ring.len()).unwrap();
        // v is computed from the ring, so it is consistent by construction.
        let direct = crate::accumulator::accumulate(params.accumulator(), &ring).unwrap();
        assert_eq!(policy.accumulated(), &direct);
    }

    #[test]
    fn stub_chaincode_deterministic_and_empty() {
        let (params, ..) = toy_setup();
        let a = stub_chaincode(params.hash(), b"payload");
        let b = stub_chaincode(params.hash(), b"payload");
        assert_eq!(a, b);
        assert_ne!(a, stub_chaincode(params.hash(), b"other"));
        assert_eq!(stub_chaincode(params.hash(), b""), (vec![], vec![]));
    }

    #[test]
    fn policy_accepts_threshold_distinct_signers() {
        let (params, keys, policy) = policy_and_keys(3);
        let (tid, tp) = honest_proposal(&params, b"tx-payload");
        let mut r = rng(60);
        let responses: Vec<_> = (0..3)
            .map(|i| respond(&params, &policy, &keys[i], &tid, tp.clone(), &mut r).unwrap())
            .collect();
        let verdict = evaluate_policy(&params, &policy, &tid, &responses).unwrap();
        assert_eq!(verdict.decision, Decision::Accept);
        assert_eq!(verdict.valid_count, 3);
        assert_eq!(verdict.distinct_count, 3);
        assert!(verdict.link_pairs.is_empty());
    }

    #[test]
    fn policy_rejects_when_two_share_a_tag() {
        let (params, keys, policy) = policy_and_keys(3);
        let (tid, tp) = honest_proposal(&params, b"tx-payload");
        let mut r = rng(61);
        let mut responses = vec![
            respond(&params, &policy, &keys[0], &tid, tp.clone(), &mut r).unwrap(),
            respond(&params, &policy, &keys[1], &tid, tp.clone(), &mut r).unwrap(),
        ];
        // keys[1] signs again: fresh transcript, same tag.
        responses.push(respond(&params, &policy, &keys[1], &tid, tp, &mut r).unwrap());
        let verdict = evaluate_policy(&params, &policy, &tid, &responses).unwrap();
        assert_eq!(verdict.valid_count, 3);
        assert_eq!(verdict.distinct_count, 2);
        assert_eq!(verdict.decision, Decision::Reject);
        assert_eq!(verdict.link_pairs, vec![(1, 2)]);
    }

    #[test]
    fn policy_one_out_of_n() {
        let (params, keys, policy) = policy_and_keys(1);
        let (tid, tp) = honest_proposal(&params, b"solo");
        let mut r = rng(62);
        let responses = vec![respond(&params, &policy, &keys[2], &tid, tp, &mut r).unwrap()];
        let verdict = evaluate_policy(&params, &policy, &tid, &responses).unwrap();
        assert_eq!(verdict.decision, Decision::Accept);
        assert_eq!(verdict.distinct_count, 1);
    }

    #[test]
    fn policy_groups_by_read_write_sets() {
        let (params, keys, policy) = policy_and_keys(2);
        let (tid, tp) = honest_proposal(&params, b"tx");
        let mut r = rng(63);
        let mut perturbed = tp.clone();
        perturbed.writeset[0].value[0] ^= 0xff;
        let responses = vec![
            respond(&params, &policy, &keys[0], &tid, tp, &mut r).unwrap(),
            respond(&params, &policy, &keys[1], &tid, perturbed, &mut r).unwrap(),
        ];
        // Two distinct signers, but their write sets differ: no group reaches 2.
        let verdict = evaluate_policy(&params, &policy, &tid, &responses).unwrap();
        assert_eq!(verdict.valid_count, 2);
        assert_eq!(verdict.distinct_count, 1);
        assert_eq!(verdict.decision, Decision::Reject);
    }

    #[test]
    fn policy_rejects_mixed_tids_and_tag_mismatch() {
        let (params, keys, policy) = policy_and_keys(1);
        let (tid, tp) = honest_proposal(&params, b"one");
        let (tid2, tp2) = honest_proposal(&params, b"two");
        let mut r = rng(64);
        let r1 = respond(&params, &policy, &keys[0], &tid, tp, &mut r).unwrap();
        let r2 = respond(&params, &policy, &keys[1], &tid2, tp2, &mut r).unwrap();
        assert_eq!(
            evaluate_policy(&params, &policy, &tid, &[r1.clone(), r2]),
            Err(PolicyError::MixedTransactionIds)
        );
        // Forged top-level tag is flagged, not counted.
        let mut forged = r1;
        forged.tag = Tag::from_value(BigUint::from(99u32));
        let verdict = evaluate_policy(&params, &policy, &tid, &[forged]).unwrap();
        assert_eq!(verdict.per_signature, vec![ResponseAssessment::TagMismatch]);
        assert_eq!(verdict.decision, Decision::Reject);
    }

    #[test]
    fn verdict_monotone_under_new_distinct_signer() {
        let (params, keys, policy) = policy_and_keys(2);
        let (tid, tp) = honest_proposal(&params, b"mono");
        let mut r = rng(65);
        let mut responses = vec![
            respond(&params, &policy, &keys[0], &tid, tp.clone(), &mut r).unwrap(),
            respond(&params, &policy, &keys[1], &tid, tp.clone(), &mut r).unwrap(),
        ];
        let before = evaluate_policy(&params, &policy, &tid, &responses).unwrap();
        assert_eq!(before.decision, Decision::Accept);
        // A third signer with a *different* writeset cannot flip the verdict.
        let mut other = tp.clone();
        other.writeset[0].value[0] ^= 0x55;
        responses.push(respond(&params, &policy, &keys[2], &tid, other, &mut r).unwrap());
        let after = evaluate_policy(&params, &policy, &tid, &responses).unwrap();
        assert_eq!(after.decision, Decision::Accept);
        // And one with the same sets only grows the count.
        responses.push(respond(&params, &policy, &keys[3], &tid, tp, &mut r).unwrap());
        let after = evaluate_policy(&params, &policy, &tid, &responses).unwrap();
        assert_eq!(after.decision, Decision::Accept);
        assert_eq!(after.distinct_count, 3);
    }

    #[test]
    fn cross_transaction_responses_stay_unlinked() {
        let (params, keys, policy) = policy_and_keys(1);
        let mut r = rng(66);
        let mut collisions = 0;
        for i in 0..50u32 {
            let (tid1, tp1) = honest_proposal(&params, &i.to_be_bytes());
            let (tid2, tp2) = honest_proposal(&params, &(i + 50).to_be_bytes());
            let a = match respond(&params, &policy, &keys[0], &tid1, tp1, &mut r) {
                Ok(resp) => resp,
                Err(SchemeError::DegenerateContext) => continue,
                Err(e) => panic!("{e}"),
            };
            let b = match respond(&params, &policy, &keys[0], &tid2, tp2, &mut r) {
                Ok(resp) => resp,
                Err(SchemeError::DegenerateContext) => continue,
                Err(e) => panic!("{e}"),
            };
            if scheme::link(&a.signature, &b.signature) == scheme::Linkage::Linked {
                collisions += 1;
            }
        }
        // The toy group has order 253, so rare accidental collisions exist;
        // the policy-layer property is that cross-tid tags are not
        // systematically linked.
        assert!(collisions <= 2, "cross-tid tags collided {collisions}/50 times");
    }

    #[test]
    fn flow_one_honest_endorser_commits() {
        let (params, keys, policy) = policy_and_keys(1);
        let endorsers: Vec<FlowEndorser> = keys
            .iter()
            .enumerate()
            .map(|(i, k)| FlowEndorser {
                key: k.clone(),
                behavior: if i == 1 { EndorserBehavior::Endorse } else { EndorserBehavior::Decline },
            })
            .collect();
        let transcript = run_flow(
            &params,
            &policy,
            &propose(b"commit me"),
            &endorsers,
            &[ValidatorBehavior::Honest; 3],
            &mut rng(67),
        )
        .unwrap();
        assert!(transcript.committed_block().is_some());
        assert_eq!(transcript.responses().len(), 1);
        assert_eq!(transcript.nack_count(), 3);
        assert_eq!(transcript.committed_block().unwrap().endorsement_count, 1);
    }

    #[test]
    fn flow_double_sign_detected_nothing_ordered() {
        let (params, keys, policy) = policy_and_keys(3);
        let behaviors = [
            EndorserBehavior::DoubleSign,
            EndorserBehavior::Endorse,
            EndorserBehavior::Decline,
            EndorserBehavior::Decline,
        ];
        let endorsers: Vec<FlowEndorser> = keys
            .iter()
            .zip(behaviors)
            .map(|(k, behavior)| FlowEndorser { key: k.clone(), behavior })
            .collect();
        let transcript = run_flow(
            &params,
            &policy,
            &propose(b"double"),
            &endorsers,
            &[ValidatorBehavior::Honest; 3],
            &mut rng(68),
        )
        .unwrap();
        // Three valid responses, but the doubled tag collapses to 2 < t.
        assert!(transcript.committed_block().is_none());
        let (_, verdict) = transcript.verdicts()[0];
        assert_eq!(verdict.valid_count, 3);
        assert_eq!(verdict.distinct_count, 2);
        assert!(!verdict.link_pairs.is_empty());
    }

    #[test]
    fn flow_majority_of_validators_suffices() {
        let (params, keys, policy) = policy_and_keys(2);
        let behaviors = [
            EndorserBehavior::Endorse,
            EndorserBehavior::Endorse,
            EndorserBehavior::Decline,
            EndorserBehavior::Decline,
        ];
        let endorsers: Vec<FlowEndorser> = keys
            .iter()
            .zip(behaviors)
            .map(|(k, behavior)| FlowEndorser { key: k.clone(), behavior })
            .collect();
        let validators =
            [ValidatorBehavior::Honest, ValidatorBehavior::MaliciousReject, ValidatorBehavior::Honest];
        let transcript = run_flow(
            &params,
            &policy,
            &propose(b"majority"),
            &endorsers,
            &validators,
            &mut rng(69),
        )
        .unwrap();
        // 2 of 3 validators accept, so the transaction is ordered; the
        // forwarder is the lowest-indexed accepting validator.
        assert!(transcript.committed_block().is_some());
        assert!(matches!(
            transcript.events().iter().find(|e| matches!(e, FlowEvent::Forwarded { .. })),
            Some(FlowEvent::Forwarded { validator: 0 })
        ));
    }

    #[test]
    fn flow_corrupt_response_groups_apart() {
        let (params, keys, policy) = policy_and_keys(2);
        let behaviors = [
            EndorserBehavior::Endorse,
            EndorserBehavior::CorruptResponse,
            EndorserBehavior::Decline,
            EndorserBehavior::Decline,
        ];
        let endorsers: Vec<FlowEndorser> = keys
            .iter()
            .zip(behaviors)
            .map(|(k, behavior)| FlowEndorser { key: k.clone(), behavior })
            .collect();
        let transcript = run_flow(
            &params,
            &policy,
            &propose(b"corrupt"),
            &endorsers,
            &[ValidatorBehavior::Honest],
            &mut rng(70),
        )
        .unwrap();
        assert!(transcript.committed_block().is_none());
        let (_, verdict) = transcript.verdicts()[0];
        assert_eq!(verdict.valid_count, 2);
        assert_eq!(verdict.distinct_count, 1);
    }

    #[test]
    fn flow_rejects_mismatched_ring() {
        let (params, keys, policy) = policy_and_keys(1);
        let endorsers = vec![FlowEndorser {
            key: keys[0].clone(),
            behavior: EndorserBehavior::Endorse,
        }];
        assert_eq!(
            run_flow(
                &params,
                &policy,
                &propose(b"x"),
                &endorsers,
                &[ValidatorBehavior::Honest],
                &mut rng(71),
            ),
            Err(FlowError::RingMismatch)
        );
    }
}
