//! JSON export of endorsement-flow transcripts.
//!
//! Byte fields are hex-encoded; the full wire form of each response rides
//! along under `response_hex`, so a transcript is self-contained evidence
//! of what crossed the simulated network.

use anyhow::Result;
use fcslrs_core::codec;
use fcslrs_core::endorsement::{
    Decision, FlowEvent, FlowTranscript, PolicyVerdict, ProposalResponse, ResponseAssessment,
    TranProposal, ValidatorBehavior,
};
use fcslrs_core::scheme::SystemParams;
use serde_json::{json, Value};

fn tran_proposal_json(tp: &TranProposal) -> Value {
    json!({
        "tid": hex::encode(&tp.tid),
        "chaincode_id": tp.chaincode_id,
        "tx_content_blob": hex::encode(&tp.tx_content_blob),
        "readset": tp.readset.iter().map(|r| json!({
            "key": r.key,
            "version": r.version,
        })).collect::<Vec<_>>(),
        "writeset": tp.writeset.iter().map(|w| json!({
            "key": w.key,
            "value": hex::encode(&w.value),
        })).collect::<Vec<_>>(),
    })
}

fn response_json(params: &SystemParams, resp: &ProposalResponse) -> Result<Value> {
    Ok(json!({
        "tid": hex::encode(&resp.tid),
        "tran_proposal": tran_proposal_json(&resp.tran_proposal),
        "tag": resp.tag.value().to_str_radix(16),
        "response_hex": hex::encode(codec::encode_response(params, resp)?),
    }))
}

fn assessment_str(a: &ResponseAssessment) -> String {
    match a {
        ResponseAssessment::Valid => "valid".into(),
        ResponseAssessment::InvalidSignature(reason) => format!("invalid: {reason}"),
        ResponseAssessment::TagMismatch => "invalid: tag mismatch".into(),
    }
}

fn verdict_json(verdict: &PolicyVerdict) -> Value {
    json!({
        "decision": match verdict.decision { Decision::Accept => "accept", Decision::Reject => "reject" },
        "valid_count": verdict.valid_count,
        "distinct_count": verdict.distinct_count,
        "link_pairs": verdict.link_pairs,
        "per_signature": verdict.per_signature.iter().map(assessment_str).collect::<Vec<_>>(),
    })
}

pub fn transcript_json(params: &SystemParams, transcript: &FlowTranscript) -> Result<Value> {
    let mut events = Vec::new();
    for event in transcript.events() {
        let value = match event {
            FlowEvent::Proposed { tid } => json!({
                "event": "propose",
                "tid": hex::encode(tid),
            }),
            FlowEvent::Responded { response } => json!({
                "event": "proposal-response",
                "message": response_json(params, response)?,
            }),
            FlowEvent::Nacked { ring_index } => json!({
                "event": "nack",
                "ring_index": ring_index,
            }),
            FlowEvent::Evaluated { validator, behavior, verdict } => json!({
                "event": "validator-verdict",
                "validator": validator,
                "behavior": match behavior {
                    ValidatorBehavior::Honest => "honest",
                    ValidatorBehavior::MaliciousReject => "malicious-reject",
                },
                "verdict": verdict_json(verdict),
            }),
            FlowEvent::Forwarded { validator } => json!({
                "event": "forward-to-ordering",
                "validator": validator,
            }),
            FlowEvent::Committed { block } => json!({
                "event": "block-committed",
                "block": {
                    "sequence": block.sequence,
                    "tid": hex::encode(&block.tid),
                    "tran_proposal": tran_proposal_json(&block.tran_proposal),
                    "endorsement_count": block.endorsement_count,
                },
            }),
        };
        events.push(value);
    }
    Ok(json!({
        "format": "fcslrs-transcript",
        "version": 1,
        "events": events,
    }))
}
