//! Non-binary LDPC mother code, multiplicative-repetition (MR) extension and
//! puncturing.
//!
//! The mother code is the null space of a sparse `(L0 - Q) x L0` parity-check
//! matrix over GF(q). Every retransmission round draws a fresh vector of
//! nonzero multipliers `z` and offers the symbols `z_i * c_i`; a puncturing
//! pattern then picks which of those are actually sent.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::galois::{GaloisField, GfSymbol};
use crate::rng::{self, domain};

/// Maximum number of construction attempts before giving up.
const MAX_CONSTRUCTION_ATTEMPTS: u64 = 100;

/// Binary mask over the `L0` candidate symbols of one round.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PuncturePattern {
    bits: Vec<bool>,
}

impl PuncturePattern {
    pub fn new(bits: Vec<bool>) -> Self {
        PuncturePattern { bits }
    }

    pub fn all_ones(len: usize) -> Self {
        PuncturePattern {
            bits: vec![true; len],
        }
    }

    pub fn zeros(len: usize) -> Self {
        PuncturePattern {
            bits: vec![false; len],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bits = vec![false; len];
        for i in indices {
            *bits
                .get_mut(i)
                .ok_or_else(|| Error::invalid(format!("index {i} outside pattern of length {len}")))? =
                true;
        }
        Ok(PuncturePattern { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of selected symbols, `L_t`.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Selected positions in increasing order (0-based).
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    /// Compact `0/1` string, position 0 first.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Keeps the positions selected by `pattern`, in order.
///
/// Returns the kept symbols and their 0-based positions in the input.
pub fn puncture<T: Copy>(symbols: &[T], pattern: &PuncturePattern) -> Result<(Vec<T>, Vec<usize>)> {
    if symbols.len() != pattern.len() {
        return Err(Error::LengthMismatch {
            expected: pattern.len(),
            got: symbols.len(),
        });
    }
    let map: Vec<usize> = pattern.indices().collect();
    Ok((map.iter().map(|&i| symbols[i]).collect(), map))
}

/// Per-round multipliers of the MR extension.
///
/// The multipliers are a deterministic function of the episode seed and the
/// round index, so transmitter and receiver regenerate identical values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MrExtension {
    round: usize,
    seed: u64,
    multipliers: Vec<GfSymbol>,
}

impl MrExtension {
    pub fn new(field: &GaloisField, len: usize, seed: u64, round: usize) -> Self {
        let mut rng = rng::stream(seed, &[domain::MR, round as u64]);
        let top = field.order() - 1;
        let multipliers = (0..len)
            .map(|_| GfSymbol(rng.random_range(1..=top) as u8))
            .collect();
        MrExtension {
            round,
            seed,
            multipliers,
        }
    }

    /// Extension with explicit multipliers; all must be nonzero.
    pub fn with_multipliers(multipliers: Vec<GfSymbol>) -> Result<Self> {
        if multipliers.iter().any(|z| z.is_zero()) {
            return Err(Error::invalid("MR multipliers must be nonzero"));
        }
        Ok(MrExtension {
            round: 0,
            seed: 0,
            multipliers,
        })
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn multipliers(&self) -> &[GfSymbol] {
        &self.multipliers
    }
}

/// The `L0` candidate symbols of an MR round: `out[i] = z_i * c_i`.
pub fn mr_symbols(field: &GaloisField, codeword: &[GfSymbol], ext: &MrExtension) -> Result<Vec<GfSymbol>> {
    if codeword.len() != ext.multipliers.len() {
        return Err(Error::LengthMismatch {
            expected: ext.multipliers.len(),
            got: codeword.len(),
        });
    }
    Ok(codeword
        .iter()
        .zip(&ext.multipliers)
        .map(|(&c, &z)| field.mul(z, c))
        .collect())
}

/// Non-binary LDPC mother code with a precomputed systematic encoder.
#[derive(Clone, Debug)]
pub struct MotherCode {
    field: GaloisField,
    len: usize,
    dim: usize,
    seed: u64,
    /// Sparse rows of H: `(column, coefficient)` sorted by column.
    rows: Vec<Vec<(usize, GfSymbol)>>,
    /// Dense generator, `dim x len`.
    generator: Vec<Vec<GfSymbol>>,
    /// Codeword positions carrying the message symbols.
    info_positions: Vec<usize>,
}

impl MotherCode {
    /// Builds a random column-weight-2 code with balanced row weights.
    ///
    /// The Tanner graph is grown edge by edge, each new edge attaching to the
    /// check farthest from the current variable node, which maximises girth
    /// greedily. Coefficients are uniform on the nonzero field elements. A
    /// rank-deficient draw is retried with the next sub-seed.
    pub fn construct(seed: u64, len: usize, dim: usize, field: GaloisField) -> Result<Self> {
        if !(len > dim && dim > 0) {
            return Err(Error::invalid(format!(
                "need L0 > Q > 0, got L0={len}, Q={dim}"
            )));
        }
        let checks = len - dim;
        if checks < 2 {
            return Err(Error::invalid("column weight 2 needs at least two checks"));
        }
        for attempt in 0..MAX_CONSTRUCTION_ATTEMPTS {
            let mut rng = rng::stream(seed, &[domain::CODE, attempt]);
            let Some(columns) = grow_graph(len, checks, &mut rng) else {
                continue;
            };
            let mut rows = vec![Vec::new(); checks];
            for (col, rs) in columns.iter().enumerate() {
                for &r in rs {
                    let coef = GfSymbol(rng.random_range(1..field.order()) as u8);
                    rows[r].push((col, coef));
                }
            }
            if let Ok(mut code) = Self::from_sparse_rows(field.clone(), len, rows) {
                code.seed = seed;
                return Ok(code);
            }
        }
        Err(Error::CodeConstruction(format!(
            "no full-rank parity-check matrix after {MAX_CONSTRUCTION_ATTEMPTS} attempts (seed {seed}, L0={len}, Q={dim})"
        )))
    }

    /// Code defined by an explicit dense parity-check matrix of full row rank.
    pub fn from_parity_check(field: GaloisField, h: &[Vec<u8>]) -> Result<Self> {
        let len = h.first().map_or(0, |r| r.len());
        let mut rows = Vec::with_capacity(h.len());
        for row in h {
            if row.len() != len {
                return Err(Error::LengthMismatch {
                    expected: len,
                    got: row.len(),
                });
            }
            let mut sparse = Vec::new();
            for (c, &v) in row.iter().enumerate() {
                let s = field.symbol(v as u32)?;
                if !s.is_zero() {
                    sparse.push((c, s));
                }
            }
            rows.push(sparse);
        }
        Self::from_sparse_rows(field, len, rows)
    }

    fn from_sparse_rows(field: GaloisField, len: usize, mut rows: Vec<Vec<(usize, GfSymbol)>>) -> Result<Self> {
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            if row.iter().any(|&(c, _)| c >= len) {
                return Err(Error::invalid("column index outside code length"));
            }
        }
        let checks = rows.len();
        let mut dense = vec![vec![GfSymbol::ZERO; len]; checks];
        for (r, row) in rows.iter().enumerate() {
            for &(c, v) in row {
                dense[r][c] = field.add(dense[r][c], v);
            }
        }

        // Reduce to row echelon form choosing pivots from the rightmost
        // columns, so parity sits on the right and the message on the left.
        let mut pivots: Vec<(usize, usize)> = Vec::with_capacity(checks);
        let mut used = vec![false; checks];
        for col in (0..len).rev() {
            let Some(p) = (0..checks).find(|&r| !used[r] && !dense[r][col].is_zero()) else {
                continue;
            };
            let inv = field.inv(dense[p][col])?;
            for v in dense[p].iter_mut() {
                *v = field.mul(*v, inv);
            }
            for r in 0..checks {
                if r != p && !dense[r][col].is_zero() {
                    let f = dense[r][col];
                    for c in 0..len {
                        let t = field.mul(f, dense[p][c]);
                        dense[r][c] = field.add(dense[r][c], t);
                    }
                }
            }
            used[p] = true;
            pivots.push((p, col));
            if pivots.len() == checks {
                break;
            }
        }
        if pivots.len() < checks {
            return Err(Error::CodeConstruction(format!(
                "parity-check matrix has rank {} < {checks}",
                pivots.len()
            )));
        }

        let mut is_pivot = vec![false; len];
        for &(_, c) in &pivots {
            is_pivot[c] = true;
        }
        let info_positions: Vec<usize> = (0..len).filter(|&c| !is_pivot[c]).collect();
        let generator = info_positions
            .iter()
            .map(|&f| {
                let mut g = vec![GfSymbol::ZERO; len];
                g[f] = GfSymbol::ONE;
                for &(r, p) in &pivots {
                    g[p] = dense[r][f];
                }
                g
            })
            .collect();

        Ok(MotherCode {
            field,
            len,
            dim: len - checks,
            seed: 0,
            rows,
            generator,
            info_positions,
        })
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    /// Codeword length `L0` in symbols.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of information symbols `Q`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_checks(&self) -> usize {
        self.rows.len()
    }

    /// Message length in bits, `K = Q log2 q`.
    pub fn message_bits(&self) -> usize {
        self.dim * self.field.bits() as usize
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rows(&self) -> &[Vec<(usize, GfSymbol)>] {
        &self.rows
    }

    pub fn generator(&self) -> &[Vec<GfSymbol>] {
        &self.generator
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Dense copy of H as raw symbol values.
    pub fn dense_parity_check(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![0u8; self.len];
                for &(c, v) in row {
                    d[c] = v.0;
                }
                d
            })
            .collect()
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.len];
        for row in &self.rows {
            for &(c, _) in row {
                w[c] += 1;
            }
        }
        w
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    /// Packs `K` bits (big-endian within each symbol) into `Q` symbols.
    pub fn pack_bits(&self, bits: &[bool]) -> Result<Vec<GfSymbol>> {
        let m = self.field.bits() as usize;
        if bits.len() != self.message_bits() {
            return Err(Error::LengthMismatch {
                expected: self.message_bits(),
                got: bits.len(),
            });
        }
        Ok(bits
            .chunks(m)
            .map(|chunk| GfSymbol(chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8)))
            .collect())
    }

    /// Encodes a `K`-bit message into `L0` code symbols.
    pub fn encode(&self, bits: &[bool]) -> Result<Vec<GfSymbol>> {
        let message = self.pack_bits(bits)?;
        Ok(self.encode_symbols(&message))
    }

    /// Encodes `Q` message symbols directly.
    pub fn encode_symbols(&self, message: &[GfSymbol]) -> Vec<GfSymbol> {
        let mut c = vec![GfSymbol::ZERO; self.len];
        for (&m, g) in message.iter().zip(&self.generator) {
            if m.is_zero() {
                continue;
            }
            for (ci, &gi) in c.iter_mut().zip(g) {
                *ci = self.field.add(*ci, self.field.mul(m, gi));
            }
        }
        c
    }

    /// `H * word^T`.
    pub fn syndrome(&self, word: &[GfSymbol]) -> Result<Vec<GfSymbol>> {
        if word.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                got: word.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                row.iter().fold(GfSymbol::ZERO, |acc, &(c, h)| {
                    self.field.add(acc, self.field.mul(h, word[c]))
                })
            })
            .collect())
    }

    pub fn is_codeword(&self, word: &[GfSymbol]) -> bool {
        word.len() == self.len
            && self.rows.iter().all(|row| {
                row.iter()
                    .fold(GfSymbol::ZERO, |acc, &(c, h)| {
                        self.field.add(acc, self.field.mul(h, word[c]))
                    })
                    .is_zero()
            })
    }

    /// Length of the shortest cycle in the Tanner graph, `None` if acyclic.
    pub fn girth(&self) -> Option<usize> {
        let n = self.len;
        let nodes = n + self.rows.len();
        let mut adj = vec![Vec::new(); nodes];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, _) in row {
                adj[c].push(n + r);
                adj[n + r].push(c);
            }
        }
        let mut best: Option<usize> = None;
        for root in 0..nodes {
            let mut dist = vec![usize::MAX; nodes];
            let mut parent = vec![usize::MAX; nodes];
            dist[root] = 0;
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = u;
                        queue.push_back(v);
                    } else if parent[u] != v {
                        let cycle = dist[u] + dist[v] + 1;
                        best = Some(best.map_or(cycle, |b| b.min(cycle)));
                    }
                }
            }
        }
        best
    }

    /// Text form: a header line, then one line of `column:coef` pairs per row.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "q={} L0={} Q={} seed={} poly={:#x}\n",
            self.field.order(),
            self.len,
            self.dim,
            self.seed,
            self.field.poly()
        );
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|(c, v)| format!("{c}:{v:02x}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty code file".into()))?;
        let (mut q, mut len, mut dim, mut seed, mut poly) = (None, None, None, 0u64, None);
        for tok in header.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
            let bad = |_| Error::Parse(format!("bad header value {tok:?}"));
            match key {
                "q" => q = Some(val.parse::<usize>().map_err(bad)?),
                "L0" => len = Some(val.parse::<usize>().map_err(bad)?),
                "Q" => dim = Some(val.parse::<usize>().map_err(bad)?),
                "seed" => seed = val.parse::<u64>().map_err(bad)?,
                "poly" => {
                    let hex = val.trim_start_matches("0x");
                    poly = Some(u32::from_str_radix(hex, 16).map_err(|_| Error::Parse(format!("bad poly {val:?}")))?)
                }
                _ => return Err(Error::Parse(format!("unknown header key {key:?}"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("header missing {k}"));
        let q = q.ok_or_else(|| missing("q"))?;
        let len = len.ok_or_else(|| missing("L0"))?;
        let dim = dim.ok_or_else(|| missing("Q"))?;
        let field = match poly {
            Some(p) => GaloisField::with_poly(q, p)?,
            None => GaloisField::new(q)?,
        };
        let mut rows = Vec::new();
        for line in lines {
            let mut row = Vec::new();
            for tok in line.split_whitespace() {
                let (c, v) = tok
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("bad entry {tok:?}")))?;
                let c: usize = c.parse().map_err(|_| Error::Parse(format!("bad column {c:?}")))?;
                let v = u32::from_str_radix(v, 16).map_err(|_| Error::Parse(format!("bad coefficient {v:?}")))?;
                let v = field.symbol(v)?;
                if v.is_zero() {
                    return Err(Error::Parse(format!("zero coefficient in {tok:?}")));
                }
                row.push((c, v));
            }
            rows.push(row);
        }
        if rows.len() + dim != len {
            return Err(Error::Parse(format!(
                "{} rows do not match L0={len}, Q={dim}",
                rows.len()
            )));
        }
        let mut code = Self::from_sparse_rows(field, len, rows)?;
        code.seed = seed;
        Ok(code)
    }
}

/// Grows a column-weight-2 bipartite graph; returns the two check indices
/// of every column, or `None` if the greedy placement got stuck.
fn grow_graph<R: Rng>(len: usize, checks: usize, rng: &mut R) -> Option<Vec<[usize; 2]>> {
    let edges = 2 * len;
    let capacity: Vec<usize> = (0..checks)
        .map(|r| edges / checks + usize::from(r < edges % checks))
        .collect();
    let mut degree = vec![0usize; checks];
    let mut check_cols: Vec<Vec<usize>> = vec![Vec::new(); checks];
    let mut columns: Vec<[usize; 2]> = Vec::with_capacity(len);

    for col in 0..len {
        let open: Vec<usize> = (0..checks).filter(|&r| degree[r] < capacity[r]).collect();
        let first = pick_lowest_degree(&open, &degree, rng)?;
        degree[first] += 1;

        // Distance (in check hops) from `first` to every check through
        // the columns placed so far.
        let mut dist = vec![usize::MAX; checks];
        dist[first] = 0;
        let mut queue = VecDeque::from([first]);
        while let Some(r) = queue.pop_front() {
            for &c in &check_cols[r] {
                for &r2 in &columns[c] {
                    if dist[r2] == usize::MAX {
                        dist[r2] = dist[r] + 1;
                        queue.push_back(r2);
                    }
                }
            }
        }
        let open: Vec<usize> = (0..checks)
            .filter(|&r| r != first && degree[r] < capacity[r])
            .collect();
        let far = open.iter().map(|&r| dist[r]).max()?;
        let farthest: Vec<usize> = open.into_iter().filter(|&r| dist[r] == far).collect();
        let second = pick_lowest_degree(&farthest, &degree, rng)?;
        degree[second] += 1;

        check_cols[first].push(col);
        check_cols[second].push(col);
        columns.push([first, second]);
    }
    Some(columns)
}

fn pick_lowest_degree<R: Rng>(candidates: &[usize], degree: &[usize], rng: &mut R) -> Option<usize> {
    let low = candidates.iter().map(|&r| degree[r]).min()?;
    let tied: Vec<usize> = candidates.iter().copied().filter(|&r| degree[r] == low).collect();
    tied.choose(rng).copied()
}

/// The 5x10 binary example code with two punctured parity bits.
pub mod example {
    use super::*;

    pub const H: [[u8; 10]; 5] = [
        [0, 1, 1, 1, 0, 1, 0, 0, 0, 0],
        [1, 0, 1, 0, 0, 0, 1, 0, 0, 0],
        [1, 0, 1, 0, 1, 0, 0, 1, 0, 0],
        [0, 0, 1, 1, 1, 0, 0, 0, 1, 0],
        [1, 1, 0, 0, 1, 0, 0, 0, 0, 1],
    ];
    pub const MESSAGE: [u8; 5] = [0, 0, 1, 0, 1];
    pub const CODEWORD: [u8; 10] = [0, 0, 1, 0, 1, 1, 1, 0, 0, 1];
    /// Output of a binary symmetric channel for the first eight bits.
    pub const RECEIVED: [u8; 8] = [0, 1, 1, 0, 1, 1, 1, 0];
    /// Hard decision obtained from the first round.
    pub const FIRST_ROUND_DECISION: [u8; 10] = [0, 1, 1, 0, 1, 1, 1, 0, 0, 0];
    pub const CROSSOVER: f64 = 0.1;
    /// Number of initially transmitted bits; the rest are punctured.
    pub const TRANSMITTED: usize = 8;

    pub fn code() -> MotherCode {
        let rows: Vec<Vec<u8>> = H.iter().map(|r| r.to_vec()).collect();
        MotherCode::from_parity_check(GaloisField::new(2).expect("GF(2)"), &rows)
            .expect("example parity-check matrix has full rank")
    }

    pub fn symbols(bits: &[u8]) -> Vec<GfSymbol> {
        bits.iter().map(|&b| GfSymbol(b)).collect()
    }
}
