//! Checks shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use raf_harq::deeprl::{Adam, QNetwork};
use raf_harq::galois::{GaloisField, GfSymbol};
use raf_harq::ldpc::{mr_symbols, MotherCode, MrExtension};

/// Schoolbook carry-less product reduced modulo `poly`.
pub fn poly_mul(a: u32, b: u32, poly: u32, bits: u32) -> u32 {
    let mut acc = 0u32;
    for i in 0..bits {
        if b >> i & 1 == 1 {
            acc ^= a << i;
        }
    }
    for i in (bits..2 * bits).rev() {
        if acc >> i & 1 == 1 {
            acc ^= poly << (i - bits);
        }
    }
    acc
}

fn check_triple(f: &GaloisField, a: GfSymbol, b: GfSymbol, c: GfSymbol) -> Result<(), String> {
    let fail = |what: &str| Err(format!("{what} fails at ({}, {}, {})", a.0, b.0, c.0));
    if f.add(a, f.add(b, c)) != f.add(f.add(a, b), c) {
        return fail("additive associativity");
    }
    if f.mul(a, f.mul(b, c)) != f.mul(f.mul(a, b), c) {
        return fail("multiplicative associativity");
    }
    if f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c)) {
        return fail("distributivity");
    }
    if f.add(a, b) != f.add(b, a) || f.mul(a, b) != f.mul(b, a) {
        return fail("commutativity");
    }
    if f.mul(a, b).0 as u32 != poly_mul(a.0 as u32, b.0 as u32, f.poly(), f.bits()) {
        return fail("polynomial product");
    }
    Ok(())
}

fn check_unary(f: &GaloisField, a: GfSymbol) -> Result<(), String> {
    if f.add(a, GfSymbol::ZERO) != a || f.mul(a, GfSymbol::ONE) != a || f.add(a, a) != GfSymbol::ZERO {
        return Err(format!("identity or additive inverse fails at {}", a.0));
    }
    if !a.is_zero() {
        let inv = f.inv(a).map_err(|e| e.to_string())?;
        if f.mul(a, inv) != GfSymbol::ONE {
            return Err(format!("multiplicative inverse fails at {}", a.0));
        }
    } else if f.inv(a).is_ok() {
        return Err("zero has an inverse".into());
    }
    Ok(())
}

/// Every field axiom over all element triples.
pub fn gf_axioms_exhaustive(order: usize) -> Result<usize, String> {
    let f = GaloisField::new(order).map_err(|e| e.to_string())?;
    let mut n = 0;
    for a in f.elements() {
        check_unary(&f, a)?;
        for b in f.elements() {
            for c in f.elements() {
                check_triple(&f, a, b, c)?;
                n += 1;
            }
        }
    }
    Ok(n)
}

/// Field axioms on `trials` random triples.
pub fn gf_axioms_random(order: usize, trials: usize, seed: u64) -> Result<usize, String> {
    let f = GaloisField::new(order).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || GfSymbol(rng.random_range(0..order) as u8);
    for _ in 0..trials {
        let (a, b, c) = (draw(), draw(), draw());
        check_unary(&f, a)?;
        check_triple(&f, a, b, c)?;
    }
    Ok(trials)
}

/// Encodes random messages and checks each syndrome vanishes.
pub fn encode_syndrome(code: &MotherCode, messages: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..messages {
        let bits: Vec<bool> = (0..code.message_bits()).map(|_| rng.random()).collect();
        let word = code.encode(&bits).map_err(|e| e.to_string())?;
        let s = code.syndrome(&word).map_err(|e| e.to_string())?;
        if s.iter().any(|x| !x.is_zero()) {
            return Err(format!("message {i} encodes to a non-codeword"));
        }
        let packed = code.pack_bits(&bits).map_err(|e| e.to_string())?;
        let systematic: Vec<GfSymbol> = code.info_positions().iter().map(|&p| word[p]).collect();
        if systematic != packed {
            return Err(format!("message {i} is not carried systematically"));
        }
    }
    Ok(messages)
}

/// Multiplicative repetition must be invertible symbol by symbol and must
/// separate distinct symbols, for many seeds and rounds.
pub fn mr_bijection(code: &MotherCode, seeds: u64, rounds: usize) -> Result<usize, String> {
    let f = code.field();
    let n = code.len();
    let mut checked = 0;
    for seed in 0..seeds {
        for round in 0..rounds {
            let ext = MrExtension::new(f, n, seed, round);
            if ext.multipliers().iter().any(|z| z.is_zero()) {
                return Err(format!("zero multiplier for seed {seed} round {round}"));
            }
            for (j, &z) in ext.multipliers().iter().enumerate() {
                let mut seen = vec![false; f.order()];
                for s in f.elements() {
                    let mut word = vec![GfSymbol::ZERO; n];
                    word[j] = s;
                    let y = mr_symbols(f, &word, &ext).map_err(|e| e.to_string())?[j];
                    if seen[y.value()] {
                        return Err(format!("multiplier {} at position {j} is not injective", z.0));
                    }
                    seen[y.value()] = true;
                    if f.div(y, z).map_err(|e| e.to_string())? != s {
                        return Err(format!("division does not undo multiplier {}", z.0));
                    }
                }
            }
            checked += 1;
        }
    }
    Ok(checked)
}

fn toy_batch(seed: u64, n: usize, dim: usize, actions: usize) -> (Vec<Vec<f64>>, Vec<usize>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let acts = (0..n).map(|_| rng.random_range(0..actions)).collect();
    let targets = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    (states, acts, targets)
}

/// Largest relative error between backpropagation and central differences
/// on a network with three weight layers.
pub fn gradient_check(step: f64) -> f64 {
    let widths = [5, 8, 6, 4];
    let net = QNetwork::new(&widths, 11).unwrap();
    let (states, actions, targets) = toy_batch(12, 6, 5, 4);
    let refs: Vec<&[f64]> = states.iter().map(Vec::as_slice).collect();
    let (_, grads) = net.loss_and_gradient(&refs, &actions, &targets);
    let analytic = grads.flatten();
    let params = net.params();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (i, &g) in analytic.iter().enumerate() {
        let mut p = params.clone();
        p[i] = params[i] + step;
        probe.set_params(&p).unwrap();
        let plus = probe.loss_and_gradient(&refs, &actions, &targets).0;
        p[i] = params[i] - step;
        probe.set_params(&p).unwrap();
        let minus = probe.loss_and_gradient(&refs, &actions, &targets).0;
        let numeric = (plus - minus) / (2.0 * step);
        let scale = g.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((g - numeric).abs() / scale);
    }
    worst
}

/// Loss on a fixed regression batch before each of `steps` Adam updates,
/// followed by the final loss.
pub fn fixed_batch_losses(steps: usize) -> Vec<f64> {
    let mut net = QNetwork::new(&[15, 64, 32, 16, 15], 5).unwrap();
    let (states, actions, targets) = toy_batch(6, 64, 15, 15);
    let refs: Vec<&[f64]> = states.iter().map(Vec::as_slice).collect();
    let mut adam = Adam::new(&net, 1e-3);
    let mut losses = Vec::with_capacity(steps + 1);
    for _ in 0..steps {
        let (loss, mut grads) = net.loss_and_gradient(&refs, &actions, &targets);
        grads.clip_norm(5.0);
        adam.apply(&mut net, &grads);
        losses.push(loss);
    }
    losses.push(net.loss_and_gradient(&refs, &actions, &targets).0);
    losses
}
