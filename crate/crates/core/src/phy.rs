//! Square QAM with Gray labels, AWGN / block-Rayleigh channel, and soft
//! demodulation into per-code-symbol likelihood rows.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::GfSymbol;
use crate::prob::{normalize_log_row, ProbMatrix};

/// Gray-labelled square QAM constellation with unit mean energy.
///
/// A label's high half of bits selects the in-phase level, the low half the
/// quadrature level; each half is a reflected Gray code over the PAM levels
/// `-(2^k - 1), ..., 2^k - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulationSpec {
    order: usize,
    bits_per_point: u32,
    points: Vec<Complex64>,
}

fn gray_to_index(g: usize) -> usize {
    let mut b = g;
    let mut shift = g >> 1;
    while shift != 0 {
        b ^= shift;
        shift >>= 1;
    }
    b
}

impl ModulationSpec {
    /// Square QAM of order `M = 4^k` (4, 16, 64, 256).
    pub fn qam(order: usize) -> Result<Self> {
        let bits = order.trailing_zeros();
        if !order.is_power_of_two() || bits == 0 || bits % 2 != 0 || order > 256 {
            return Err(Error::invalid(format!("unsupported modulation order {order}")));
        }
        let k = bits / 2;
        let side = 1usize << k;
        let half = (side - 1) as f64;
        // mean of level^2 over one dimension is (4^k - 1) / 3
        let scale = 1.0 / (2.0 * ((side * side - 1) as f64) / 3.0).sqrt();
        let points = (0..order)
            .map(|label| {
                let i = gray_to_index(label >> k) as f64;
                let q = gray_to_index(label & (side - 1)) as f64;
                Complex64::new((2.0 * i - half) * scale, (2.0 * q - half) * scale)
            })
            .collect();
        Ok(ModulationSpec {
            order,
            bits_per_point: bits,
            points,
        })
    }

    pub fn qpsk() -> Self {
        Self::qam(4).expect("QPSK")
    }

    pub fn qam256() -> Self {
        Self::qam(256).expect("256-QAM")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_point(&self) -> u32 {
        self.bits_per_point
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Channel uses per code symbol, `log2 q / log2 M`.
    pub fn uses_per_symbol(&self, field_bits: u32) -> Result<usize> {
        if field_bits == 0 || field_bits % self.bits_per_point != 0 {
            return Err(Error::invalid(format!(
                "{field_bits}-bit code symbols cannot be split into {}-bit constellation labels",
                self.bits_per_point
            )));
        }
        Ok((field_bits / self.bits_per_point) as usize)
    }

    /// Label of the `use_idx`-th constellation point carrying `symbol`
    /// (most significant bits first).
    #[inline]
    fn label(&self, symbol: usize, use_idx: usize, uses: usize) -> usize {
        let shift = (uses - 1 - use_idx) as u32 * self.bits_per_point;
        (symbol >> shift) & (self.order - 1)
    }
}

/// Maps code symbols to constellation points, `uses` points per symbol.
pub fn map_symbols(symbols: &[GfSymbol], spec: &ModulationSpec, field_bits: u32) -> Result<Vec<Complex64>> {
    let uses = spec.uses_per_symbol(field_bits)?;
    let mut out = Vec::with_capacity(symbols.len() * uses);
    for s in symbols {
        for u in 0..uses {
            out.push(spec.points[spec.label(s.value(), u, uses)]);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Awgn,
    Rayleigh,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::Rayleigh => "rayleigh",
        })
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(ChannelKind::Awgn),
            "rayleigh" | "rayleigh-block" | "fading" => Ok(ChannelKind::Rayleigh),
            other => Err(Error::invalid(format!("unknown channel kind {other:?}"))),
        }
    }
}

/// Channel model for one transmission round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    /// Mean SNR, referenced to unit symbol energy and `E|beta|^2 = 1`.
    pub snr_db: f64,
}

impl ChannelSpec {
    pub fn awgn(snr_db: f64) -> Self {
        ChannelSpec {
            kind: ChannelKind::Awgn,
            snr_db,
        }
    }

    pub fn rayleigh(snr_db: f64) -> Self {
        ChannelSpec {
            kind: ChannelKind::Rayleigh,
            snr_db,
        }
    }

    pub fn noise_var(&self) -> f64 {
        snr_to_noise_var(self.snr_db)
    }
}

/// Complex noise variance `sigma^2 = 10^(-snr_db / 10)`.
pub fn snr_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Circularly-symmetric complex Gaussian sample with variance `var`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// `y = beta x + w` with one gain `beta` for the whole block.
pub fn apply_channel<R: Rng + ?Sized>(x: &[Complex64], spec: &ChannelSpec, rng: &mut R) -> (Vec<Complex64>, Complex64) {
    let beta = match spec.kind {
        ChannelKind::Awgn => Complex64::new(1.0, 0.0),
        ChannelKind::Rayleigh => complex_normal(rng, 1.0),
    };
    let var = spec.noise_var();
    let y = x.iter().map(|&xi| beta * xi + complex_normal(rng, var)).collect();
    (y, beta)
}

/// Per-code-symbol likelihood rows given perfect knowledge of `beta` and
/// `sigma^2`: `row(z) ~ exp(-sum_u |y_u - beta x_u(z)|^2 / sigma^2)`.
pub fn demodulate(
    y: &[Complex64],
    beta: Complex64,
    noise_var: f64,
    spec: &ModulationSpec,
    field_bits: u32,
) -> Result<ProbMatrix> {
    let uses = spec.uses_per_symbol(field_bits)?;
    if y.len() % uses != 0 {
        return Err(Error::LengthMismatch {
            expected: y.len().div_ceil(uses) * uses,
            got: y.len(),
        });
    }
    if !(noise_var > 0.0) {
        return Err(Error::invalid("noise variance must be positive"));
    }
    let q = 1usize << field_bits;
    let n = y.len() / uses;
    let inv_var = 1.0 / noise_var;
    let faded: Vec<Complex64> = spec.points.iter().map(|&p| beta * p).collect();
    let mut data = vec![0.0; n * q];
    let mut metric = vec![0.0; uses * spec.order];

    for (i, row) in data.chunks_exact_mut(q).enumerate() {
        for u in 0..uses {
            let yu = y[i * uses + u];
            for (p, m) in faded.iter().zip(&mut metric[u * spec.order..(u + 1) * spec.order]) {
                *m = -(yu - p).norm_sqr() * inv_var;
            }
        }
        for (z, v) in row.iter_mut().enumerate() {
            *v = (0..uses)
                .map(|u| metric[u * spec.order + spec.label(z, u, uses)])
                .sum();
        }
        normalize_log_row(row);
    }
    Ok(ProbMatrix::from_raw(q, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_energy_and_gray_neighbours() {
        for m in [4usize, 16, 64, 256] {
            let spec = ModulationSpec::qam(m).unwrap();
            let e: f64 = spec.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
            assert!((e - 1.0).abs() < 1e-12, "M={m}: {e}");
            let pts = spec.points();
            let dmin = (0..m)
                .flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b)))
                .map(|(a, b)| (pts[a] - pts[b]).norm())
                .fold(f64::INFINITY, f64::min);
            for a in 0..m {
                for b in 0..m {
                    if a != b && (pts[a] - pts[b]).norm() < dmin * (1.0 + 1e-9) {
                        assert_eq!((a ^ b).count_ones(), 1, "M={m}: {a} vs {b}");
                    }
                }
            }
        }
        assert!(ModulationSpec::qam(8).is_err());
        assert!(ModulationSpec::qam(512).is_err());
    }

    #[test]
    fn qam256_levels_scale() {
        let spec = ModulationSpec::qam256();
        let s = 1.0 / 170f64.sqrt();
        let mut levels: Vec<f64> = spec.points().iter().map(|p| (p.re / s).round()).collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        assert_eq!(levels, (0..16).map(|i| (2 * i - 15) as f64).collect::<Vec<_>>());
    }

    #[test]
    fn sample_counts() {
        let syms = vec![GfSymbol(0xa5); 15];
        assert_eq!(map_symbols(&syms, &ModulationSpec::qam256(), 8).unwrap().len(), 15);
        assert_eq!(map_symbols(&syms, &ModulationSpec::qpsk(), 8).unwrap().len(), 60);
        assert!(map_symbols(&syms, &ModulationSpec::qam256(), 2).is_err());
    }

    #[test]
    fn noise_variance() {
        assert_eq!(snr_to_noise_var(0.0), 1.0);
        assert!((snr_to_noise_var(6.0) - 0.251_188_643_150_958).abs() < 1e-12);
        assert!((snr_to_noise_var(-3.0) - 1.995_262_314_968_88).abs() < 1e-12);
    }

    #[test]
    fn noiseless_channel_is_identity() {
        let x = map_symbols(&[GfSymbol(3), GfSymbol(200)], &ModulationSpec::qam256(), 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (y, beta) = apply_channel(&x, &ChannelSpec::awgn(400.0), &mut rng);
        assert_eq!(beta, Complex64::new(1.0, 0.0));
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn noise_moment() {
        let spec = ChannelSpec::awgn(6.0);
        let x = vec![Complex64::new(0.3, -0.1); 1_000_000];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (y, beta) = apply_channel(&x, &spec, &mut rng);
        let var = y.iter().zip(&x).map(|(y, x)| (y - beta * x).norm_sqr()).sum::<f64>() / x.len() as f64;
        assert!((var / spec.noise_var() - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn fading_power() {
        let spec = ChannelSpec::rayleigh(6.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let p: f64 = (0..n)
            .map(|_| apply_channel(&[], &spec, &mut rng).1.norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((p - 1.0).abs() < 0.02, "{p}");
    }

    #[test]
    fn noiseless_demod_is_one_hot() {
        let spec = ModulationSpec::qam256();
        let syms: Vec<GfSymbol> = (0..=255).map(GfSymbol).collect();
        let x = map_symbols(&syms, &spec, 8).unwrap();
        let l = demodulate(&x, Complex64::new(1.0, 0.0), 1e-6, &spec, 8).unwrap();
        for (i, row) in l.iter_rows().enumerate() {
            assert!(row[i] >= 1.0 - 256.0 * crate::prob::PROB_FLOOR);
            assert_eq!(crate::prob::argmax(row), i);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn qpsk_likelihood_factorises_over_dibits() {
        let spec = ModulationSpec::qpsk();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sent = [GfSymbol(0x6c), GfSymbol(0x01)];
        let x = map_symbols(&sent, &spec, 8).unwrap();
        let ch = ChannelSpec::rayleigh(-3.0);
        let (y, beta) = apply_channel(&x, &ch, &mut rng);
        let l = demodulate(&y, beta, ch.noise_var(), &spec, 8).unwrap();
        for s in 0..2 {
            // brute force: map every hypothesis to its four points
            let mut direct: Vec<f64> = (0..256u32)
                .map(|z| {
                    let pts = map_symbols(&[GfSymbol(z as u8)], &spec, 8).unwrap();
                    let d: f64 = pts
                        .iter()
                        .zip(&y[4 * s..4 * s + 4])
                        .map(|(p, yy)| (yy - beta * p).norm_sqr())
                        .sum();
                    (-d / ch.noise_var()).exp()
                })
                .collect();
            let total: f64 = direct.iter().sum();
            direct.iter_mut().for_each(|v| *v /= total);
            for z in 0..256 {
                assert!((l.row(s)[z] - direct[z]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn argmax_is_minimum_distance() {
        let spec = ModulationSpec::qam256();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let syms: Vec<GfSymbol> = (0..500).map(|_| GfSymbol(rng.random())).collect();
        let x = map_symbols(&syms, &spec, 8).unwrap();
        let ch = ChannelSpec::awgn(10.0);
        let (y, beta) = apply_channel(&x, &ch, &mut rng);
        let l = demodulate(&y, beta, ch.noise_var(), &spec, 8).unwrap();
        for (i, yi) in y.iter().enumerate() {
            let nearest = (0..256)
                .min_by(|&a, &b| {
                    (yi - spec.points()[a]).norm().partial_cmp(&(yi - spec.points()[b]).norm()).unwrap()
                })
                .unwrap();
            assert_eq!(l.hard_decision()[i] as usize, nearest);
        }
    }
}
