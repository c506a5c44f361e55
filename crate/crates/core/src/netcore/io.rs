//! Binary parameter dump for layer stacks.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic    8 bytes  "VGANSTK1"
//! has_seed u8       0 or 1
//! seed     u64
//! layers   u32
//! per layer: kind u8, in_dim u32, out_dim u32
//! per parameterized layer, in order: weights (in*out f64, row-major), bias (out f64)
//! ```
//!
//! Floats are written bit-for-bit so a round trip is exact.

use std::io::{Read, Write};
use std::path::Path;

use super::layer::{DenseLayer, LayerKind};
use super::stack::LayerStack;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"VGANSTK1";

pub fn write_stack<W: Write>(stack: &LayerStack, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[u8::from(stack.seed().is_some())])?;
    w.write_all(&stack.seed().unwrap_or(0).to_le_bytes())?;
    w.write_all(&(stack.layers().len() as u32).to_le_bytes())?;
    for l in stack.layers() {
        w.write_all(&[l.kind().code()])?;
        w.write_all(&(l.in_dim() as u32).to_le_bytes())?;
        w.write_all(&(l.out_dim() as u32).to_le_bytes())?;
    }
    for s in stack.slices() {
        for v in s {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated model file: {e}")))?;
    Ok(buf)
}

pub fn read_stack<R: Read>(mut r: R) -> Result<LayerStack> {
    let magic: [u8; 8] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a layer-stack file (bad magic)".into()));
    }
    let [has_seed] = read_array::<1, _>(&mut r)?;
    let seed = u64::from_le_bytes(read_array(&mut r)?);
    let count = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let mut layers = Vec::with_capacity(count);
    for i in 0..count {
        let [code] = read_array::<1, _>(&mut r)?;
        let in_dim = u32::from_le_bytes(read_array(&mut r)?) as usize;
        let out_dim = u32::from_le_bytes(read_array(&mut r)?) as usize;
        let kind = LayerKind::from_code(code)
            .ok_or_else(|| Error::Format(format!("layer {i}: unknown kind code {code}")))?;
        let layer = if kind == LayerKind::Sampler {
            if in_dim != 2 * out_dim {
                return Err(Error::Format(format!(
                    "layer {i}: sampler dims {in_dim}->{out_dim} are inconsistent"
                )));
            }
            DenseLayer::sampler(out_dim)?
        } else {
            DenseLayer::new(kind, in_dim, out_dim)?
        };
        layers.push(layer);
    }
    let mut stack = LayerStack::new(layers)?;
    for s in stack.slices_mut() {
        for v in s.iter_mut() {
            *v = f64::from_le_bytes(read_array(&mut r)?);
        }
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!(
            "{} trailing bytes after parameters",
            rest.len()
        )));
    }
    stack.set_seed((has_seed == 1).then_some(seed));
    Ok(stack)
}

pub fn save_stack(stack: &LayerStack, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_stack(stack, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_stack(path: impl AsRef<Path>) -> Result<LayerStack> {
    let bytes = std::fs::read(path)?;
    read_stack(bytes.as_slice())
}
