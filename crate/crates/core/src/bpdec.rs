//! q-ary belief propagation on the mother code.
//!
//! Messages live in the probability domain and are renormalized after every
//! update. A check node enforcing `sum_j h_j s_j = 0` sees each neighbour
//! through the substitution `u_j = h_j s_j`, so its output is an XOR
//! convolution of the other incoming messages. Two interchangeable rules
//! compute that convolution: a Walsh-Hadamard transform (the default) and a
//! direct `O(q^2)` sum kept as a reference.

use crate::error::{Error, Result};
use crate::galois::{GaloisField, GfSymbol};
use crate::ldpc::{MotherCode, MrExtension, PuncturePattern};
use crate::prob::{argmax, normalize_floored, ProbMatrix};

/// Accumulated channel evidence about each mother-code symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct IntrinsicState {
    probs: ProbMatrix,
    rounds: usize,
}

impl IntrinsicState {
    /// No evidence yet: every symbol uniform (punctured / erased).
    pub fn uniform(len: usize, q: usize) -> Self {
        IntrinsicState {
            probs: ProbMatrix::uniform(len, q),
            rounds: 0,
        }
    }

    pub fn from_probs(probs: ProbMatrix) -> Self {
        IntrinsicState { probs, rounds: 1 }
    }

    pub fn probs(&self) -> &ProbMatrix {
        &self.probs
    }

    /// Number of observations combined so far.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Folds in one round of MR observations.
    ///
    /// Row `k` of `mr_like` is the likelihood of the `k`-th selected
    /// symbol `s' = z_i s_i`; since `s -> z s` is a bijection, the update is
    /// `state_i(s) <- state_i(s) * mr_like_k(z_i s)` followed by renormalization.
    pub fn combine(
        &mut self,
        field: &GaloisField,
        mr_like: &ProbMatrix,
        ext: &MrExtension,
        pattern: &PuncturePattern,
    ) -> Result<()> {
        let len = self.probs.rows();
        if pattern.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: pattern.len(),
            });
        }
        if ext.multipliers().len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: ext.multipliers().len(),
            });
        }
        if mr_like.rows() != pattern.count() {
            return Err(Error::LengthMismatch {
                expected: pattern.count(),
                got: mr_like.rows(),
            });
        }
        if mr_like.rows() > 0 && mr_like.q() != self.probs.q() {
            return Err(Error::LengthMismatch {
                expected: self.probs.q(),
                got: mr_like.q(),
            });
        }
        for (k, i) in pattern.indices().enumerate() {
            let perm = field.mul_row(ext.multipliers()[i]);
            let obs = mr_like.row(k);
            let row = self.probs.row_mut(i);
            for (v, &p) in row.iter_mut().zip(perm) {
                *v *= obs[p as usize];
            }
            normalize_floored(row);
        }
        self.rounds += 1;
        Ok(())
    }

    /// Folds in direct observations of the mother symbols at `positions`.
    pub fn observe(&mut self, like: &ProbMatrix, positions: &[usize]) -> Result<()> {
        if like.rows() != positions.len() {
            return Err(Error::LengthMismatch {
                expected: positions.len(),
                got: like.rows(),
            });
        }
        for (k, &i) in positions.iter().enumerate() {
            if i >= self.probs.rows() {
                return Err(Error::invalid(format!("position {i} outside code")));
            }
            let obs = like.row(k);
            let row = self.probs.row_mut(i);
            for (v, &o) in row.iter_mut().zip(obs) {
                *v *= o;
            }
            normalize_floored(row);
        }
        self.rounds += 1;
        Ok(())
    }
}

/// Output of one decoding attempt.
#[derive(Clone, Debug)]
pub struct DecodeResult {
    pub hard_decision: Vec<GfSymbol>,
    /// `true` iff the hard decision has zero syndrome.
    pub valid: bool,
    pub posterior: ProbMatrix,
    pub entropy: Vec<f64>,
    pub iterations_used: usize,
}

/// How check-node messages are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CheckRule {
    #[default]
    Hadamard,
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecoderOptions {
    pub max_iters: usize,
    pub rule: CheckRule,
    /// Stop as soon as the hard decision is a codeword.
    pub early_stop: bool,
}

impl DecoderOptions {
    pub fn new(max_iters: usize) -> Self {
        DecoderOptions {
            max_iters,
            rule: CheckRule::Hadamard,
            early_stop: true,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Edge {
    var: usize,
    coef: GfSymbol,
}

/// Reusable flooding-schedule sum-product decoder bound to one code.
pub struct BpDecoder<'a> {
    code: &'a MotherCode,
    q: usize,
    edges: Vec<Edge>,
    check_edges: Vec<Vec<usize>>,
    var_edges: Vec<Vec<usize>>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    transformed: Vec<f64>,
    scratch: Vec<f64>,
    conv: Vec<f64>,
}

impl<'a> BpDecoder<'a> {
    pub fn new(code: &'a MotherCode) -> Self {
        let q = code.field().order();
        let mut edges = Vec::new();
        let mut check_edges = Vec::with_capacity(code.num_checks());
        let mut var_edges = vec![Vec::new(); code.len()];
        for row in code.rows() {
            let mut ids = Vec::with_capacity(row.len());
            for &(var, coef) in row {
                var_edges[var].push(edges.len());
                ids.push(edges.len());
                edges.push(Edge { var, coef });
            }
            check_edges.push(ids);
        }
        let n = edges.len();
        let max_deg = check_edges.iter().map(Vec::len).max().unwrap_or(0);
        BpDecoder {
            code,
            q,
            edges,
            check_edges,
            var_edges,
            v2c: vec![0.0; n * q],
            c2v: vec![0.0; n * q],
            transformed: vec![0.0; max_deg * q],
            scratch: vec![0.0; q],
            conv: vec![0.0; q],
        }
    }

    pub fn code(&self) -> &MotherCode {
        self.code
    }

    /// Runs at most `opts.max_iters` iterations from the given intrinsic rows.
    pub fn decode(&mut self, intrinsic: &ProbMatrix, opts: DecoderOptions) -> Result<DecodeResult> {
        let q = self.q;
        let len = self.code.len();
        if intrinsic.rows() != len || intrinsic.q() != q {
            return Err(Error::LengthMismatch {
                expected: len,
                got: intrinsic.rows(),
            });
        }

        let mut posterior = intrinsic.clone();
        let mut hard = to_symbols(&posterior.hard_decision());
        let mut valid = self.code.is_codeword(&hard);
        let mut used = 0;

        if !(valid && opts.early_stop) && opts.max_iters > 0 {
            for (e, edge) in self.edges.iter().enumerate() {
                self.v2c[e * q..(e + 1) * q].copy_from_slice(intrinsic.row(edge.var));
            }
            for it in 1..=opts.max_iters {
                used = it;
                match opts.rule {
                    CheckRule::Hadamard => self.check_pass_hadamard(),
                    CheckRule::Direct => self.check_pass_direct(),
                }
                self.variable_pass(intrinsic, &mut posterior);
                hard = to_symbols(&posterior.hard_decision());
                valid = self.code.is_codeword(&hard);
                if valid && opts.early_stop {
                    break;
                }
            }
        }

        let entropy = entropy(&posterior);
        Ok(DecodeResult {
            hard_decision: hard,
            valid,
            posterior,
            entropy,
            iterations_used: used,
        })
    }

    fn check_pass_hadamard(&mut self) {
        let q = self.q;
        let field = self.code.field();
        let inv_q = 1.0 / q as f64;
        for ids in &self.check_edges {
            let d = ids.len();
            for (slot, &e) in ids.iter().enumerate() {
                let perm = field.mul_row(self.edges[e].coef);
                let t = &mut self.transformed[slot * q..(slot + 1) * q];
                let msg = &self.v2c[e * q..(e + 1) * q];
                for (s, &p) in msg.iter().zip(perm) {
                    t[p as usize] = *s;
                }
                walsh_hadamard(t);
            }
            for (slot, &e) in ids.iter().enumerate() {
                self.scratch.fill(inv_q);
                for other in (0..d).filter(|&o| o != slot) {
                    let t = &self.transformed[other * q..(other + 1) * q];
                    for (a, &b) in self.scratch.iter_mut().zip(t) {
                        *a *= b;
                    }
                }
                walsh_hadamard(&mut self.scratch);
                let perm = field.mul_row(self.edges[e].coef);
                let out = &mut self.c2v[e * q..(e + 1) * q];
                for (o, &p) in out.iter_mut().zip(perm) {
                    *o = self.scratch[p as usize].max(0.0);
                }
                normalize_floored(out);
            }
        }
    }

    fn check_pass_direct(&mut self) {
        let q = self.q;
        let field = self.code.field();
        for ids in &self.check_edges {
            for &e in ids {
                self.conv.fill(0.0);
                self.conv[0] = 1.0;
                for &o in ids.iter().filter(|&&o| o != e) {
                    let perm = field.mul_row(self.edges[o].coef);
                    let msg = &self.v2c[o * q..(o + 1) * q];
                    self.scratch.fill(0.0);
                    for (a, &pa) in self.conv.iter().enumerate() {
                        if pa == 0.0 {
                            continue;
                        }
                        for (s, &ps) in msg.iter().enumerate() {
                            self.scratch[a ^ perm[s] as usize] += pa * ps;
                        }
                    }
                    std::mem::swap(&mut self.conv, &mut self.scratch);
                }
                let perm = field.mul_row(self.edges[e].coef);
                let out = &mut self.c2v[e * q..(e + 1) * q];
                for (o, &p) in out.iter_mut().zip(perm) {
                    *o = self.conv[p as usize];
                }
                normalize_floored(out);
            }
        }
    }

    fn variable_pass(&mut self, intrinsic: &ProbMatrix, posterior: &mut ProbMatrix) {
        let q = self.q;
        for (v, ids) in self.var_edges.iter().enumerate() {
            let post = posterior.row_mut(v);
            post.copy_from_slice(intrinsic.row(v));
            for &e in ids {
                for (p, &m) in post.iter_mut().zip(&self.c2v[e * q..(e + 1) * q]) {
                    *p *= m;
                }
                // keep the running product in range for high-degree nodes
                normalize_floored(post);
            }
            for &e in ids {
                let out = &mut self.v2c[e * q..(e + 1) * q];
                out.copy_from_slice(intrinsic.row(v));
                for &o in ids.iter().filter(|&&o| o != e) {
                    for (x, &m) in out.iter_mut().zip(&self.c2v[o * q..(o + 1) * q]) {
                        *x *= m;
                    }
                }
                normalize_floored(out);
            }
        }
    }
}

/// In-place unnormalized Walsh-Hadamard transform; `len` must be a power of two.
pub fn walsh_hadamard(a: &mut [f64]) {
    let n = a.len();
    if n < 4 {
        if n == 2 {
            let (u, v) = (a[0], a[1]);
            a[0] = u + v;
            a[1] = u - v;
        }
        return;
    }
    // first two stages fused as radix-4 butterflies
    for c in a.chunks_exact_mut(4) {
        let (s0, d0) = (c[0] + c[1], c[0] - c[1]);
        let (s1, d1) = (c[2] + c[3], c[2] - c[3]);
        c[0] = s0 + s1;
        c[1] = d0 + d1;
        c[2] = s0 - s1;
        c[3] = d0 - d1;
    }
    let mut h = 4;
    while h < n {
        for block in a.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*x, *y);
                *x = u + v;
                *y = u - v;
            }
        }
        h *= 2;
    }
}

/// One-shot decode from an intrinsic state.
pub fn bp_decode(code: &MotherCode, state: &IntrinsicState, max_iters: usize) -> Result<DecodeResult> {
    BpDecoder::new(code).decode(state.probs(), DecoderOptions::new(max_iters))
}

/// Shannon entropy in bits of every row, clamped to `[0, log2 q]`.
pub fn entropy(p: &ProbMatrix) -> Vec<f64> {
    let cap = (p.q() as f64).log2();
    p.iter_rows()
        .map(|row| {
            let h: f64 = row
                .iter()
                .filter(|&&v| v > 0.0)
                .map(|&v| -v * v.log2())
                .sum();
            h.clamp(0.0, cap)
        })
        .collect()
}

fn to_symbols(v: &[u8]) -> Vec<GfSymbol> {
    v.iter().map(|&s| GfSymbol(s)).collect()
}

/// Row-wise argmax of a posterior as field symbols.
pub fn hard_decision(p: &ProbMatrix) -> Vec<GfSymbol> {
    p.iter_rows().map(|r| GfSymbol(argmax(r) as u8)).collect()
}
