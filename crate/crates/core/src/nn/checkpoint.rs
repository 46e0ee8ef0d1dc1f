//! Versioned binary checkpoint format.
//!
//! Little-endian layout:
//!
//! ```text
//! magic    8 bytes  b"SAFERLCK"
//! version  u32      1
//! width    u8       scalar width in bytes (4 or 8)
//! act      u8       activation (0 tanh, 1 relu)
//! obs_dim  u32
//! act_dim  u32
//! n_hidden u32, then hidden widths as u32
//! params   u64 count, then raw scalar bits (u32 per f32, u64 per f64)
//! opt flag u8       0 absent / 1 present: three Adam blocks
//!                   (actor, reward critic, cost critic), each
//!                   step u64, lr/beta1/beta2/eps f64, m vec, v vec
//! ext flag u8       0 absent / 1 present: lambda, nu,
//!                   pid integral, pid prev_error (f64 each)
//! ```
//!
//! Scalars round-trip bit-exactly.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Activation, AdamState, PolicyParams};
use crate::scalar::Real;

const MAGIC: &[u8; 8] = b"SAFERLCK";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic bytes, not a checkpoint file")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("checkpoint scalar width {file} does not match requested width {requested}")]
    ScalarWidth { file: u8, requested: u8 },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(&'static str),
}

/// Optimizer and multiplier state carried alongside the parameters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainerExtras {
    pub lambda: f64,
    pub nu: f64,
    pub pid_integral: f64,
    pub pid_prev_error: f64,
}

/// Everything needed to resume or evaluate a policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<S: Real> {
    pub params: PolicyParams<S>,
    pub adam: Option<[AdamState<S>; 3]>,
    pub extras: Option<TrainerExtras>,
}

fn scalar_width<S: Real>() -> u8 {
    std::mem::size_of::<S>() as u8
}

fn write_scalar<S: Real, W: Write>(w: &mut W, x: S) -> io::Result<()> {
    match scalar_width::<S>() {
        4 => w.write_all(&(x.to_f64_c() as f32).to_bits().to_le_bytes()),
        8 => w.write_all(&x.to_f64_c().to_bits().to_le_bytes()),
        _ => unreachable!("unsupported scalar width"),
    }
}

fn read_scalar<S: Real, R: Read>(r: &mut R) -> Result<S, CheckpointError> {
    Ok(match scalar_width::<S>() {
        4 => {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            S::c(f32::from_bits(u32::from_le_bytes(b)) as f64)
        }
        8 => {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            S::c(f64::from_bits(u64::from_le_bytes(b)))
        }
        _ => unreachable!("unsupported scalar width"),
    })
}

fn write_vec<S: Real, W: Write>(w: &mut W, v: &[S]) -> io::Result<()> {
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    for &x in v {
        write_scalar(w, x)?;
    }
    Ok(())
}

fn read_vec<S: Real, R: Read>(r: &mut R) -> Result<Vec<S>, CheckpointError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let n = u64::from_le_bytes(b) as usize;
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        v.push(read_scalar(r)?);
    }
    Ok(v)
}

fn write_f64<W: Write>(w: &mut W, x: f64) -> io::Result<()> {
    w.write_all(&x.to_bits().to_le_bytes())
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, CheckpointError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_bits(u64::from_le_bytes(b)))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn save_checkpoint<S: Real>(path: &Path, ckpt: &Checkpoint<S>) -> Result<(), CheckpointError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[scalar_width::<S>()])?;
    let activation = match ckpt.params.actor.spec.activation {
        Activation::Tanh => 0u8,
        Activation::Relu => 1u8,
    };
    w.write_all(&[activation])?;
    let widths = &ckpt.params.actor.spec.widths;
    let obs_dim = widths[0] as u32;
    let act_dim = *widths.last().unwrap() as u32;
    let hidden = &widths[1..widths.len() - 1];
    w.write_all(&obs_dim.to_le_bytes())?;
    w.write_all(&act_dim.to_le_bytes())?;
    w.write_all(&(hidden.len() as u32).to_le_bytes())?;
    for &h in hidden {
        w.write_all(&(h as u32).to_le_bytes())?;
    }
    write_vec(&mut w, &ckpt.params.flatten())?;

    match &ckpt.adam {
        None => w.write_all(&[0u8])?,
        Some(states) => {
            w.write_all(&[1u8])?;
            for st in states {
                w.write_all(&st.step.to_le_bytes())?;
                write_f64(&mut w, st.lr.to_f64_c())?;
                write_f64(&mut w, st.beta1.to_f64_c())?;
                write_f64(&mut w, st.beta2.to_f64_c())?;
                write_f64(&mut w, st.epsilon.to_f64_c())?;
                write_vec(&mut w, &st.m)?;
                write_vec(&mut w, &st.v)?;
            }
        }
    }
    match &ckpt.extras {
        None => w.write_all(&[0u8])?,
        Some(e) => {
            w.write_all(&[1u8])?;
            write_f64(&mut w, e.lambda)?;
            write_f64(&mut w, e.nu)?;
            write_f64(&mut w, e.pid_integral)?;
            write_f64(&mut w, e.pid_prev_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint<S: Real>(path: &Path) -> Result<Checkpoint<S>, CheckpointError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let mut bytes = [0u8; 2];
    r.read_exact(&mut bytes)?;
    let width = bytes[0];
    if width != scalar_width::<S>() {
        return Err(CheckpointError::ScalarWidth { file: width, requested: scalar_width::<S>() });
    }
    let activation = match bytes[1] {
        0 => Activation::Tanh,
        1 => Activation::Relu,
        _ => return Err(CheckpointError::Corrupt("unknown activation tag")),
    };
    let obs_dim = read_u32(&mut r)? as usize;
    let act_dim = read_u32(&mut r)? as usize;
    let n_hidden = read_u32(&mut r)? as usize;
    if n_hidden > 64 {
        return Err(CheckpointError::Corrupt("implausible hidden layer count"));
    }
    let mut hidden = Vec::with_capacity(n_hidden);
    for _ in 0..n_hidden {
        hidden.push(read_u32(&mut r)? as usize);
    }
    // Shapes first, then overwrite with the stored parameters.
    let mut seed_rng = ChaCha8Rng::seed_from_u64(0);
    let mut params = PolicyParams::<S>::new(obs_dim, act_dim, &hidden, activation, &mut seed_rng);
    let flat = read_vec::<S, _>(&mut r)?;
    if flat.len() != params.n_params() {
        return Err(CheckpointError::Corrupt("parameter count mismatch"));
    }
    params.unflatten(&flat);

    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let adam = if flag[0] == 1 {
        let mut states = Vec::with_capacity(3);
        for _ in 0..3 {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            let step = u64::from_le_bytes(b);
            let lr = S::c(read_f64(&mut r)?);
            let beta1 = S::c(read_f64(&mut r)?);
            let beta2 = S::c(read_f64(&mut r)?);
            let epsilon = S::c(read_f64(&mut r)?);
            let m = read_vec::<S, _>(&mut r)?;
            let v = read_vec::<S, _>(&mut r)?;
            states.push(AdamState { m, v, step, lr, beta1, beta2, epsilon });
        }
        Some([states.remove(0), states.remove(0), states.remove(0)])
    } else {
        None
    };

    r.read_exact(&mut flag)?;
    let extras = if flag[0] == 1 {
        Some(TrainerExtras {
            lambda: read_f64(&mut r)?,
            nu: read_f64(&mut r)?,
            pid_integral: read_f64(&mut r)?,
            pid_prev_error: read_f64(&mut r)?,
        })
    } else {
        None
    };

    Ok(Checkpoint { params, adam, extras })
}
