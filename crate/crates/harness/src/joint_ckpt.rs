//! Binary checkpoint for multi-agent policies: per-agent actors plus the
//! centralized critics, little-endian and bit-exact like the single-agent
//! format.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use saferl_core::multi::JointPolicy;
use saferl_core::nn::{ActorNet, Activation, CheckpointError, ValueNet};

const MAGIC: &[u8; 8] = b"SAFERLMA";
const VERSION: u32 = 1;

fn write_f64_vec<W: Write>(w: &mut W, v: &[f64]) -> std::io::Result<()> {
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    for &x in v {
        w.write_all(&x.to_bits().to_le_bytes())?;
    }
    Ok(())
}

fn read_f64_vec<R: Read>(r: &mut R) -> Result<Vec<f64>, CheckpointError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let n = u64::from_le_bytes(b) as usize;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut b)?;
        out.push(f64::from_bits(u64::from_le_bytes(b)));
    }
    Ok(out)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn save_joint_checkpoint(path: &Path, policy: &JointPolicy<f64>) -> Result<(), CheckpointError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let first = &policy.actors[0].spec;
    let hidden = &first.widths[1..first.widths.len() - 1];
    let activation = match first.activation {
        Activation::Tanh => 0u8,
        Activation::Relu => 1u8,
    };
    w.write_all(&[activation])?;
    w.write_all(&(hidden.len() as u32).to_le_bytes())?;
    for &h in hidden {
        w.write_all(&(h as u32).to_le_bytes())?;
    }
    w.write_all(&(policy.actors.len() as u32).to_le_bytes())?;
    for actor in &policy.actors {
        w.write_all(&(actor.spec.input_dim() as u32).to_le_bytes())?;
        w.write_all(&(actor.act_dim() as u32).to_le_bytes())?;
        write_f64_vec(&mut w, &actor.data)?;
    }
    w.write_all(&(policy.critic_r.spec.input_dim() as u32).to_le_bytes())?;
    write_f64_vec(&mut w, &policy.critic_r.data)?;
    for critic in &policy.critic_c {
        write_f64_vec(&mut w, &critic.data)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_joint_checkpoint(path: &Path) -> Result<JointPolicy<f64>, CheckpointError> {
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
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    let activation = match b[0] {
        0 => Activation::Tanh,
        1 => Activation::Relu,
        _ => return Err(CheckpointError::Corrupt("unknown activation tag")),
    };
    let n_hidden = read_u32(&mut r)? as usize;
    let mut hidden = Vec::with_capacity(n_hidden);
    for _ in 0..n_hidden {
        hidden.push(read_u32(&mut r)? as usize);
    }
    let n_agents = read_u32(&mut r)? as usize;
    if n_agents == 0 || n_agents > 1024 {
        return Err(CheckpointError::Corrupt("implausible agent count"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut actors = Vec::with_capacity(n_agents);
    for _ in 0..n_agents {
        let obs_dim = read_u32(&mut r)? as usize;
        let act_dim = read_u32(&mut r)? as usize;
        let mut actor = ActorNet::<f64>::new(obs_dim, act_dim, &hidden, activation, &mut rng);
        let data = read_f64_vec(&mut r)?;
        if data.len() != actor.n_params() {
            return Err(CheckpointError::Corrupt("actor parameter count mismatch"));
        }
        actor.data = data;
        actors.push(actor);
    }
    let central_dim = read_u32(&mut r)? as usize;
    let mut critic_r = ValueNet::<f64>::new(central_dim, &hidden, activation, &mut rng);
    let data = read_f64_vec(&mut r)?;
    if data.len() != critic_r.n_params() {
        return Err(CheckpointError::Corrupt("critic parameter count mismatch"));
    }
    critic_r.data = data;
    let mut critic_c = Vec::with_capacity(n_agents);
    for _ in 0..n_agents {
        let mut critic = ValueNet::<f64>::new(central_dim, &hidden, activation, &mut rng);
        let data = read_f64_vec(&mut r)?;
        if data.len() != critic.n_params() {
            return Err(CheckpointError::Corrupt("critic parameter count mismatch"));
        }
        critic.data = data;
        critic_c.push(critic);
    }
    Ok(JointPolicy { actors, critic_r, critic_c })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let policy = JointPolicy::<f64>::new(&[2, 2], &[1, 1], &[8, 8], Activation::Relu, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("joint.bin");
        save_joint_checkpoint(&path, &policy).unwrap();
        let loaded = load_joint_checkpoint(&path).unwrap();
        assert_eq!(loaded, policy);
    }
}
