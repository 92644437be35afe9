use std::fmt;

use crate::bpdec::{bp_decode, IntrinsicState};
use crate::error::Result;
use crate::ldpc::example;
use crate::prob::ProbMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct DemoCheck {
    pub name: &'static str,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

/// Outcome table of the binary single-feedback example.
#[derive(Clone, Debug, PartialEq)]
pub struct DemoReport {
    pub checks: Vec<DemoCheck>,
}

impl DemoReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for DemoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<34} {:<24} {:<24} result", "check", "expected", "observed")?;
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            writeln!(f, "{:<34} {:<24} {:<24} {verdict}", c.name, c.expected, c.observed)?;
        }
        Ok(())
    }
}

fn bits(v: &[impl Into<u64> + Copy]) -> String {
    v.iter().map(|&b| char::from(b'0' + b.into() as u8)).collect()
}

fn bsc_row(bit: u8, p: f64) -> Vec<f64> {
    if bit == 0 {
        vec![1.0 - p, p]
    } else {
        vec![p, 1.0 - p]
    }
}

/// Runs the 5x10 binary example: first-round failure detection and the
/// two single-bit retransmission alternatives.
pub fn appendix_demo() -> Result<DemoReport> {
    const ITERS: usize = 5;
    let code = example::code();
    let c = example::symbols(&example::CODEWORD);
    let mut checks = Vec::new();
    let mut check = |name, expected: String, observed: String| {
        let pass = expected == observed;
        checks.push(DemoCheck { name, expected, observed, pass });
    };

    let syn: Vec<u8> = code.syndrome(&c)?.iter().map(|s| s.0).collect();
    check("syndrome of codeword", "00000".into(), bits(&syn));
    let enc: Vec<u8> = code.encode_symbols(&example::symbols(&example::MESSAGE)).iter().map(|s| s.0).collect();
    check("encoded message", bits(&example::CODEWORD), bits(&enc));

    let rows: Vec<Vec<f64>> = example::RECEIVED.iter().map(|&b| bsc_row(b, example::CROSSOVER)).collect();
    let mut first = IntrinsicState::uniform(code.len(), 2);
    let positions: Vec<usize> = (0..example::TRANSMITTED).collect();
    first.observe(&ProbMatrix::from_rows(&rows)?, &positions)?;
    let r0 = bp_decode(&code, &first, ITERS)?;
    let d0: Vec<u8> = r0.hard_decision.iter().map(|s| s.0).collect();
    check("first-round decision", bits(&example::FIRST_ROUND_DECISION), bits(&d0));
    check("first-round error detected", "invalid".into(), if r0.valid { "valid" } else { "invalid" }.into());

    let retransmit = |pos: usize| -> Result<(bool, bool)> {
        let mut st = first.clone();
        st.observe(&ProbMatrix::one_hot(&[example::CODEWORD[pos]], 2), &[pos])?;
        let r = bp_decode(&code, &st, ITERS)?;
        Ok((r.valid, r.hard_decision == c))
    };
    let verdict = |(valid, right): (bool, bool)| match (valid, right) {
        (true, true) => "decoded",
        (true, false) => "wrong codeword",
        _ => "still undecodable",
    };
    check("retransmit v10", "decoded".into(), verdict(retransmit(9)?).into());
    check("retransmit v9", "still undecodable".into(), verdict(retransmit(8)?).into());

    Ok(DemoReport { checks })
}
