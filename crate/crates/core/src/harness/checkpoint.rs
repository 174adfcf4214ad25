//! Versioned binary parameter checkpoints with an integrity checksum.
//!
//! Layout (little-endian): magic, format version, actor variant, scenario
//! shape (K, U), then every network's named shaped arrays, then an FNV-1a64
//! checksum of all preceding bytes. Round-trips are bit-exact because values
//! are stored as raw f64 bits.

use std::path::Path;

use thiserror::Error;

use crate::config::SimConfig;
use crate::happo::AgentNets;
use crate::nn::{ActorVariant, ParameterSet};

const MAGIC: &[u8; 8] = b"SKYSNCKP";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checksum mismatch: file corrupted")]
    Checksum,
    #[error("truncated checkpoint")]
    Truncated,
    #[error(
        "checkpoint was written for variant={variant} K={users} U={uavs}, \
         incompatible with the requested config"
    )]
    ConfigMismatch { variant: String, users: u32, uavs: u32 },
    #[error("array `{name}`: checkpoint shape {got:?} does not match expected {expected:?}")]
    ShapeMismatch { name: String, expected: Vec<usize>, got: Vec<usize> },
    #[error("array `{0}` missing from checkpoint")]
    MissingArray(String),
    #[error("checkpoint contains unexpected array `{0}`")]
    UnexpectedArray(String),
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

fn variant_tag(v: ActorVariant) -> u8 {
    match v {
        ActorVariant::Ckan => 0,
        ActorVariant::Cnn => 1,
        ActorVariant::Mlp => 2,
    }
}

fn variant_from_tag(t: u8) -> Option<ActorVariant> {
    match t {
        0 => Some(ActorVariant::Ckan),
        1 => Some(ActorVariant::Cnn),
        2 => Some(ActorVariant::Mlp),
        _ => None,
    }
}

fn push_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

fn push_params(buf: &mut Vec<u8>, net_name: &str, ps: &ParameterSet) {
    push_str(buf, net_name);
    buf.extend_from_slice(&(ps.len() as u32).to_le_bytes());
    for e in ps.entries() {
        push_str(buf, &e.name);
        buf.extend_from_slice(&(e.shape.len() as u32).to_le_bytes());
        for &d in &e.shape {
            buf.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in &e.value {
            buf.extend_from_slice(&v.to_bits().to_le_bytes());
        }
    }
}

/// Serializes every agent's actor and critic parameters.
pub fn save_checkpoint(
    path: &Path,
    agents: &[AgentNets],
    variant: ActorVariant,
    cfg: &SimConfig,
) -> Result<(), CheckpointError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(variant_tag(variant));
    buf.extend_from_slice(&(cfg.num_users as u32).to_le_bytes());
    buf.extend_from_slice(&(cfg.num_uavs as u32).to_le_bytes());
    buf.extend_from_slice(&(2 * agents.len() as u32).to_le_bytes());
    for (i, a) in agents.iter().enumerate() {
        push_params(&mut buf, &format!("agent{i}.actor"), &a.actor.params);
        push_params(&mut buf, &format!("agent{i}.critic"), &a.critic.params);
    }
    let checksum = fnv1a64(&buf);
    buf.extend_from_slice(&checksum.to_le_bytes());
    std::fs::write(path, buf)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.bytes.len() {
            return Err(CheckpointError::Truncated);
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, CheckpointError> {
        let n = self.u32()? as usize;
        let raw = self.take(n)?;
        String::from_utf8(raw.to_vec()).map_err(|_| CheckpointError::Truncated)
    }
}

fn read_into_params(r: &mut Reader, ps: &mut ParameterSet) -> Result<(), CheckpointError> {
    let entries = r.u32()? as usize;
    if entries != ps.len() {
        // Walk what we can to produce a precise error.
        if entries < ps.len() {
            let mut seen = Vec::new();
            for _ in 0..entries {
                seen.push(r.string()?);
                let ndims = r.u32()? as usize;
                let mut n = 1usize;
                for _ in 0..ndims {
                    n *= r.u64()? as usize;
                }
                r.take(8 * n)?;
            }
            for e in ps.entries() {
                if !seen.contains(&e.name) {
                    return Err(CheckpointError::MissingArray(e.name.clone()));
                }
            }
        }
        return Err(CheckpointError::UnexpectedArray(format!("{entries} arrays, expected a different set")));
    }
    for i in 0..entries {
        let name = r.string()?;
        let ndims = r.u32()? as usize;
        let mut shape = Vec::with_capacity(ndims);
        for _ in 0..ndims {
            shape.push(r.u64()? as usize);
        }
        let n: usize = shape.iter().product();
        let mut value = Vec::with_capacity(n);
        for _ in 0..n {
            value.push(f64::from_bits(r.u64()?));
        }
        let expected = {
            let e = ps.entries().nth(i).expect("entry count checked");
            if e.name != name {
                return Err(CheckpointError::MissingArray(e.name.clone()));
            }
            e.shape.clone()
        };
        if expected != shape {
            return Err(CheckpointError::ShapeMismatch { name, expected, got: shape });
        }
        ps.entries_mut().nth(i).unwrap().value = value;
    }
    Ok(())
}

/// Loads a checkpoint saved by [`save_checkpoint`] into freshly built
/// networks for `cfg`, verifying the checksum, the scenario shape, and every
/// array's name and shape.
pub fn load_checkpoint(
    path: &Path,
    variant: ActorVariant,
    cfg: &SimConfig,
    agents: &mut [AgentNets],
) -> Result<(), CheckpointError> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < MAGIC.len() + 8 {
        return Err(CheckpointError::Truncated);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    if fnv1a64(body) != stored {
        return Err(CheckpointError::Checksum);
    }

    let mut r = Reader { bytes: body, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let tag = r.take(1)?[0];
    let file_variant = variant_from_tag(tag).ok_or(CheckpointError::BadMagic)?;
    let users = r.u32()?;
    let uavs = r.u32()?;
    let nets = r.u32()? as usize;
    if file_variant != variant
        || users as usize != cfg.num_users
        || uavs as usize != cfg.num_uavs
        || nets != 2 * agents.len()
    {
        return Err(CheckpointError::ConfigMismatch {
            variant: file_variant.name().to_string(),
            users,
            uavs,
        });
    }
    for (i, a) in agents.iter_mut().enumerate() {
        let actor_name = r.string()?;
        if actor_name != format!("agent{i}.actor") {
            return Err(CheckpointError::MissingArray(actor_name));
        }
        read_into_params(&mut r, &mut a.actor.params)?;
        let critic_name = r.string()?;
        if critic_name != format!("agent{i}.critic") {
            return Err(CheckpointError::MissingArray(critic_name));
        }
        read_into_params(&mut r, &mut a.critic.params)?;
    }
    Ok(())
}
