//! C ABI over the `raf-harq` simulator.
//!
//! Objects are opaque heap handles created by `*_new`/`*_load` and released
//! by the matching `*_free`. Every fallible call returns a [`RafStatus`];
//! on failure, [`raf_last_error_message`] describes the most recent error on
//! the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;
use std::sync::Arc;

use raf_harq::deeprl::{Checkpoint, QNetwork};
use raf_harq::experiment::{evaluate, ExperimentConfig};
use raf_harq::galois::{GaloisField, GfSymbol};
use raf_harq::ldpc::MotherCode;
use raf_harq::policies::Policy;
use raf_harq::protocol::{run_episode, EpisodeConfig, Outcome};
use raf_harq::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RafStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Config = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RafOutcome {
    Success = 0,
    Undetected = 1,
    Dropped = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RafPolicyKind {
    Harq = 0,
    Dharq = 1,
    St = 2,
    Ta = 3,
    Raf = 4,
    Naive = 5,
}

/// Scalars of one simulated episode.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RafEpisode {
    pub outcome: RafOutcome,
    pub t_rounds: u32,
    pub e_tot_mj: f64,
    pub e_b: f64,
    pub latency_ms: f64,
    pub reward: f64,
}

/// Monte Carlo averages over a batch of episodes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RafSummary {
    pub episodes: u64,
    pub latency_ms: f64,
    pub latency_se: f64,
    pub e_b: f64,
    pub e_b_se: f64,
    pub uder: f64,
    pub uder_lo: f64,
    pub uder_hi: f64,
    pub drop_rate: f64,
    pub objective: f64,
    pub objective_se: f64,
    pub mean_retx: f64,
}

pub struct RafCode(MotherCode);

pub struct RafSimulator {
    config: ExperimentConfig,
    env: EpisodeConfig,
    policy: Policy,
}

pub struct RafAgent(Arc<QNetwork>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RafStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io { .. } => RafStatus::Io,
            Error::Parse(_) | Error::Csv(_) | Error::Checkpoint(_) => RafStatus::Parse,
            Error::Config(_) => RafStatus::Config,
            _ => RafStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: RafStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RafStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RafStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            RafStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(RafStatus::NullPointer, format!("{what} is null")))
}

unsafe fn as_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(RafStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn as_mut_slice<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(RafStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(RafStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(RafStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(RafStatus::NullPointer, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    write_out(out, Box::into_raw(Box::new(value)), "output handle")
}

/// Copies `text` plus a terminating NUL into `buf` if it fits.
unsafe fn copy_string(text: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Failure> {
    let bytes = text.as_bytes();
    if !needed.is_null() {
        needed.write(bytes.len() + 1);
    }
    if len < bytes.len() + 1 {
        return Err(fail(RafStatus::BufferTooSmall, format!("need {} bytes", bytes.len() + 1)));
    }
    let dst = as_mut_slice(buf.cast::<u8>(), len, "buffer")?;
    dst[..bytes.len()].copy_from_slice(bytes);
    dst[bytes.len()] = 0;
    Ok(())
}

fn outcome(o: Outcome) -> RafOutcome {
    match o {
        Outcome::Success => RafOutcome::Success,
        Outcome::UndetectedError => RafOutcome::Undetected,
        Outcome::Dropped => RafOutcome::Dropped,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn raf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf`.
///
/// Returns the buffer size needed (message plus NUL), or 0 if no error has
/// been recorded. The message is truncated to fit when `len` is too small.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn raf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(msg) = slot.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Builds a `(2,3)`-regular mother code with `dim` information symbols.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn raf_code_new(
    seed: u64,
    len: usize,
    dim: usize,
    field_order: u32,
    out: *mut *mut RafCode,
) -> RafStatus {
    guard(|| {
        let field = GaloisField::new(field_order as usize)?;
        put_handle(out, RafCode(MotherCode::construct(seed, len, dim, field)?))
    })
}

/// Parses a mother code from its text form.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn raf_code_from_text(text: *const c_char, out: *mut *mut RafCode) -> RafStatus {
    guard(|| {
        let code = MotherCode::from_text(as_str(text, "text")?)?;
        put_handle(out, RafCode(code))
    })
}

/// Writes the text form of the code; `needed` receives the size including NUL.
///
/// # Safety
/// `code` must come from this library; `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn raf_code_to_text(
    code: *const RafCode,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> RafStatus {
    guard(|| copy_string(&as_ref(code, "code")?.0.to_text(), buf, len, needed))
}

/// Codeword length in symbols, or 0 for a null handle.
///
/// # Safety
/// `code` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn raf_code_len(code: *const RafCode) -> usize {
    code.as_ref().map_or(0, |c| c.0.len())
}

/// Number of message bits, or 0 for a null handle.
///
/// # Safety
/// `code` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn raf_code_message_bits(code: *const RafCode) -> usize {
    code.as_ref().map_or(0, |c| c.0.message_bits())
}

/// Encodes `nbits` message bits (one per byte, 0 or 1) into `out_len` symbols.
///
/// # Safety
/// Pointers must reference buffers of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn raf_code_encode(
    code: *const RafCode,
    bits: *const u8,
    nbits: usize,
    out: *mut u8,
    out_len: usize,
) -> RafStatus {
    guard(|| {
        let code = &as_ref(code, "code")?.0;
        let bits = as_slice(bits, nbits, "bits")?;
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(fail(RafStatus::InvalidArgument, format!("bit value {b} is not 0 or 1")));
        }
        let word = code.encode(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>())?;
        let out = as_mut_slice(out, out_len, "out")?;
        if out.len() != word.len() {
            return Err(fail(
                RafStatus::BufferTooSmall,
                format!("codeword has {} symbols, buffer {}", word.len(), out.len()),
            ));
        }
        for (o, s) in out.iter_mut().zip(word) {
            *o = s.0;
        }
        Ok(())
    })
}

/// Sets `*valid` to whether the word satisfies every parity check.
///
/// # Safety
/// `symbols` must hold `len` bytes; `valid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn raf_code_is_codeword(
    code: *const RafCode,
    symbols: *const u8,
    len: usize,
    valid: *mut bool,
) -> RafStatus {
    guard(|| {
        let code = &as_ref(code, "code")?.0;
        let word: Vec<GfSymbol> = as_slice(symbols, len, "symbols")?.iter().map(|&s| GfSymbol(s)).collect();
        code.syndrome(&word)?;
        write_out(valid, code.is_codeword(&word), "valid")
    })
}

/// # Safety
/// `code` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn raf_code_free(code: *mut RafCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Creates a simulator from TOML config text; null or empty text selects the
/// reference scenario. The initial policy is the one named in the config
/// (RAF needs a later [`raf_simulator_set_policy`] call).
///
/// # Safety
/// `config_toml` must be null or NUL-terminated; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn raf_simulator_new(config_toml: *const c_char, out: *mut *mut RafSimulator) -> RafStatus {
    guard(|| {
        let config = if config_toml.is_null() {
            ExperimentConfig::default()
        } else {
            ExperimentConfig::from_toml_str(as_str(config_toml, "config")?)?
        };
        let env = config.episode_config()?;
        let policy = config.policy().unwrap_or(Policy::Naive);
        put_handle(out, RafSimulator { config, env, policy })
    })
}

/// Selects the feedback policy. `param` is `L_static` for HARQ/ST and the
/// entropy threshold for D-HARQ/TA; `agent` is required for RAF only.
///
/// # Safety
/// Handles must come from this library; `agent` may be null unless `kind` is RAF.
#[no_mangle]
pub unsafe extern "C" fn raf_simulator_set_policy(
    sim: *mut RafSimulator,
    kind: RafPolicyKind,
    param: f64,
    agent: *const RafAgent,
) -> RafStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| fail(RafStatus::NullPointer, "simulator is null"))?;
        let as_count = || {
            if param.fract() != 0.0 || param < 1.0 {
                Err(fail(RafStatus::InvalidArgument, format!("L_static must be a positive integer, got {param}")))
            } else {
                Ok(param as usize)
            }
        };
        let policy = match kind {
            RafPolicyKind::Harq => Policy::Harq { l_static: as_count()? },
            RafPolicyKind::St => Policy::St { l_static: as_count()? },
            RafPolicyKind::Dharq => Policy::Dharq { threshold: param },
            RafPolicyKind::Ta => Policy::Ta { threshold: param },
            RafPolicyKind::Naive => Policy::Naive,
            RafPolicyKind::Raf => Policy::Raf {
                agent: Arc::clone(&as_ref(agent, "agent")?.0),
                epsilon: 0.0,
            },
        };
        policy.validate(sim.env.code.len(), sim.env.code.field().bits())?;
        sim.policy = policy;
        Ok(())
    })
}

/// Simulates one episode.
///
/// # Safety
/// `sim` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn raf_simulator_run_episode(
    sim: *const RafSimulator,
    seed: u64,
    out: *mut RafEpisode,
) -> RafStatus {
    guard(|| {
        let sim = as_ref(sim, "simulator")?;
        let t = run_episode(&sim.env, &sim.policy, seed)?.trace;
        write_out(
            out,
            RafEpisode {
                outcome: outcome(t.outcome),
                t_rounds: t.t_rounds as u32,
                e_tot_mj: t.e_tot,
                e_b: t.e_b,
                latency_ms: t.latency_ms,
                reward: t.reward,
            },
            "out",
        )
    })
}

/// Averages `episodes` episodes with seeds derived from `seed`.
///
/// # Safety
/// `sim` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn raf_simulator_evaluate(
    sim: *const RafSimulator,
    episodes: usize,
    seed: u64,
    out: *mut RafSummary,
) -> RafStatus {
    guard(|| {
        let sim = as_ref(sim, "simulator")?;
        let r = evaluate(&sim.env, &sim.policy, episodes, seed, sim.config.objective_gamma)?;
        write_out(
            out,
            RafSummary {
                episodes: r.episodes as u64,
                latency_ms: r.latency_ms,
                latency_se: r.latency_se,
                e_b: r.e_b,
                e_b_se: r.e_b_se,
                uder: r.uder,
                uder_lo: r.uder_lo,
                uder_hi: r.uder_hi,
                drop_rate: r.drop_rate,
                objective: r.objective,
                objective_se: r.objective_se,
                mean_retx: r.mean_retx,
            },
            "out",
        )
    })
}

/// # Safety
/// `sim` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn raf_simulator_free(sim: *mut RafSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Loads a Q-network checkpoint.
///
/// # Safety
/// `path` must be NUL-terminated; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn raf_agent_load(path: *const c_char, out: *mut *mut RafAgent) -> RafStatus {
    guard(|| {
        let net = Checkpoint::load(Path::new(as_str(path, "path")?))?.network()?;
        put_handle(out, RafAgent(Arc::new(net)))
    })
}

/// Input (and output) width of the agent, or 0 for a null handle.
///
/// # Safety
/// `agent` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn raf_agent_input_dim(agent: *const RafAgent) -> usize {
    agent.as_ref().map_or(0, |a| a.0.input_dim())
}

/// Q-values for an entropy vector.
///
/// # Safety
/// `h` must hold `len` doubles and `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn raf_agent_q_values(
    agent: *const RafAgent,
    h: *const f64,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> RafStatus {
    guard(|| {
        let net = &as_ref(agent, "agent")?.0;
        let h = as_slice(h, len, "h")?;
        if h.len() != net.input_dim() {
            return Err(Error::LengthMismatch { expected: net.input_dim(), got: h.len() }.into());
        }
        let out = as_mut_slice(out, out_len, "out")?;
        if out.len() != net.output_dim() {
            return Err(fail(RafStatus::BufferTooSmall, format!("need {} outputs", net.output_dim())));
        }
        out.copy_from_slice(&net.forward(h));
        Ok(())
    })
}

/// Greedy number of symbols to request, in `1..=L0`.
///
/// # Safety
/// `h` must hold `len` doubles; `action` must be writable.
#[no_mangle]
pub unsafe extern "C" fn raf_agent_action(
    agent: *const RafAgent,
    h: *const f64,
    len: usize,
    action: *mut usize,
) -> RafStatus {
    guard(|| {
        let net = &as_ref(agent, "agent")?.0;
        let h = as_slice(h, len, "h")?;
        if h.len() != net.input_dim() {
            return Err(Error::LengthMismatch { expected: net.input_dim(), got: h.len() }.into());
        }
        write_out(action, net.greedy(h) + 1, "action")
    })
}

/// # Safety
/// `agent` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn raf_agent_free(agent: *mut RafAgent) {
    if !agent.is_null() {
        drop(Box::from_raw(agent));
    }
}
