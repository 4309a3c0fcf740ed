//! CSV and JSON forms of a [`SearchTrace`].

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::rational::fmt;
use crate::search::{Outcome, SearchTrace};

pub const CSV_HEADER: [&str; 9] = [
    "stage",
    "n_t",
    "candidates",
    "chosen_restriction",
    "est_bias_num",
    "est_bias_den",
    "audited_bias_num",
    "audited_bias_den",
    "counter_calls",
];

#[derive(Serialize)]
struct Row {
    stage: usize,
    n_t: usize,
    candidates: u64,
    chosen_restriction: String,
    est_bias_num: String,
    est_bias_den: String,
    audited_bias_num: String,
    audited_bias_den: String,
    counter_calls: u64,
}

pub fn write_csv<W: Write>(trace: &SearchTrace, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if trace.stages.is_empty() {
        out.write_record(CSV_HEADER)?;
    }
    for s in &trace.stages {
        let (an, ad) = match &s.audited_bias {
            Some(b) => (b.numer().to_string(), b.denom().to_string()),
            None => (String::new(), String::new()),
        };
        out.serialize(Row {
            stage: s.stage,
            n_t: s.n_t,
            candidates: s.candidates,
            chosen_restriction: s.prefix.to_string(),
            est_bias_num: s.estimate.value.numer().to_string(),
            est_bias_den: s.estimate.value.denom().to_string(),
            audited_bias_num: an,
            audited_bias_den: ad,
            counter_calls: s.counter_calls,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn csv_string(trace: &SearchTrace) -> String {
    let mut buf = Vec::new();
    write_csv(trace, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8")
}

pub fn summary_json(trace: &SearchTrace) -> Value {
    let (outcome, assignment, failure) = match &trace.outcome {
        Outcome::Found(x) => ("found", Some(x.to_string()), None),
        Outcome::Failed(e) => ("failed", None, Some(serde_json::to_value(e).expect("serializable"))),
    };
    json!({
        "driver": trace.driver,
        "eps": trace.eps.as_ref().map(fmt),
        "outcome": outcome,
        "assignment": assignment,
        "failure": failure,
        "exit_code": trace.outcome.exit_code(),
        "stages": trace.stages.len(),
        "counter_calls": trace.cost.counter_calls,
        "candidates_examined": trace.cost.candidates_examined,
        "assignments_enumerated": trace.cost.assignments_enumerated,
        "attempts": trace.attempts.iter().map(fmt).collect::<Vec<_>>(),
        "audits_skipped": trace.stages.iter().filter(|s| s.audited_bias.is_none()).count(),
    })
}
