//! Self-describing binary model container.
//!
//! Layout (all multi-byte integers and floats little-endian):
//!
//! ```text
//! magic            8 bytes  "GLABNET\0"
//! version          u32      1
//! precision        u8       1 = single, 2 = double
//! inference temp   f64
//! training temp    f64
//! class count      u32
//! input shape      3 x u32  (h, w, c)
//! layer count      u32
//! per layer        tag u8 + tag-specific fields + raw parameter buffers
//! ```
//!
//! Parameter buffers are written as `u64` element count followed by raw
//! scalars in the container precision, so a save/load/save cycle is
//! byte-identical.

use std::fs;
use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use gradlab_tensor::{Precision, Tensor};

use crate::error::NnError;
use crate::layer::{Layer, LayerSpec};
use crate::network::Network;
use crate::Result;

const MAGIC: &[u8; 8] = b"GLABNET\0";
const VERSION: u32 = 1;

const TAG_CONV2D: u8 = 1;
const TAG_RELU: u8 = 2;
const TAG_MAXPOOL: u8 = 3;
const TAG_DROPOUT: u8 = 4;
const TAG_FLATTEN: u8 = 5;
const TAG_DENSE: u8 = 6;

pub fn to_bytes(net: &Network) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.write_u32::<LittleEndian>(VERSION).expect("vec write");
    out.push(match net.precision() {
        Precision::Single => 1,
        Precision::Double => 2,
    });
    out.write_f64::<LittleEndian>(net.inference_temperature())
        .expect("vec write");
    out.write_f64::<LittleEndian>(net.training_temperature())
        .expect("vec write");
    out.write_u32::<LittleEndian>(net.class_count() as u32)
        .expect("vec write");
    for dim in net.input_shape() {
        out.write_u32::<LittleEndian>(dim as u32).expect("vec write");
    }
    out.write_u32::<LittleEndian>(net.layers().len() as u32)
        .expect("vec write");
    for layer in net.layers() {
        match &layer.spec {
            LayerSpec::Conv2d {
                out_channels,
                kernel,
            } => {
                out.push(TAG_CONV2D);
                out.write_u32::<LittleEndian>(*out_channels as u32)
                    .expect("vec write");
                out.write_u32::<LittleEndian>(kernel.0 as u32)
                    .expect("vec write");
                out.write_u32::<LittleEndian>(kernel.1 as u32)
                    .expect("vec write");
                write_buffer(&mut out, layer.weight.as_ref().expect("conv weight"))?;
                write_buffer(&mut out, layer.bias.as_ref().expect("conv bias"))?;
            }
            LayerSpec::Relu => out.push(TAG_RELU),
            LayerSpec::MaxPool2x2 => out.push(TAG_MAXPOOL),
            LayerSpec::Dropout { rate } => {
                out.push(TAG_DROPOUT);
                out.write_f64::<LittleEndian>(*rate).expect("vec write");
            }
            LayerSpec::Flatten => out.push(TAG_FLATTEN),
            LayerSpec::Dense { units } => {
                out.push(TAG_DENSE);
                out.write_u32::<LittleEndian>(*units as u32)
                    .expect("vec write");
                write_buffer(&mut out, layer.weight.as_ref().expect("dense weight"))?;
                write_buffer(&mut out, layer.bias.as_ref().expect("dense bias"))?;
            }
        }
    }
    Ok(out)
}

pub fn from_bytes(bytes: &[u8], origin: &str) -> Result<Network> {
    let bad = |reason: &str| NnError::Model {
        path: origin.to_string(),
        reason: reason.to_string(),
    };
    let mut cur = Cursor::new(bytes);
    let mut magic = [0u8; 8];
    cur.read_exact(&mut magic).map_err(|_| bad("truncated magic"))?;
    if &magic != MAGIC {
        return Err(bad("bad magic, not a model file"));
    }
    let version = cur
        .read_u32::<LittleEndian>()
        .map_err(|_| bad("truncated header"))?;
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let precision = match cur.read_u8().map_err(|_| bad("truncated header"))? {
        1 => Precision::Single,
        2 => Precision::Double,
        other => return Err(bad(&format!("unknown precision tag {other}"))),
    };
    let inference_temperature = cur
        .read_f64::<LittleEndian>()
        .map_err(|_| bad("truncated header"))?;
    let training_temperature = cur
        .read_f64::<LittleEndian>()
        .map_err(|_| bad("truncated header"))?;
    let class_count = cur
        .read_u32::<LittleEndian>()
        .map_err(|_| bad("truncated header"))? as usize;
    let mut input_shape = [0usize; 3];
    for dim in &mut input_shape {
        *dim = cur
            .read_u32::<LittleEndian>()
            .map_err(|_| bad("truncated header"))? as usize;
    }
    let layer_count = cur
        .read_u32::<LittleEndian>()
        .map_err(|_| bad("truncated header"))? as usize;

    let mut layers = Vec::with_capacity(layer_count);
    let mut shape = input_shape.to_vec();
    for index in 0..layer_count {
        let tag = cur
            .read_u8()
            .map_err(|_| bad(&format!("truncated at layer {index}")))?;
        let layer = match tag {
            TAG_CONV2D => {
                let oc = read_u32(&mut cur, origin, index)? as usize;
                let kh = read_u32(&mut cur, origin, index)? as usize;
                let kw = read_u32(&mut cur, origin, index)? as usize;
                let in_c = *shape.get(2).ok_or_else(|| bad("conv on non-image shape"))?;
                let weight = read_buffer(
                    &mut cur,
                    vec![oc, kh, kw, in_c],
                    precision,
                    origin,
                    index,
                )?;
                let bias = read_buffer(&mut cur, vec![oc], precision, origin, index)?;
                Layer {
                    spec: LayerSpec::Conv2d {
                        out_channels: oc,
                        kernel: (kh, kw),
                    },
                    weight: Some(weight),
                    bias: Some(bias),
                }
            }
            TAG_RELU => Layer {
                spec: LayerSpec::Relu,
                weight: None,
                bias: None,
            },
            TAG_MAXPOOL => Layer {
                spec: LayerSpec::MaxPool2x2,
                weight: None,
                bias: None,
            },
            TAG_DROPOUT => {
                let rate = cur
                    .read_f64::<LittleEndian>()
                    .map_err(|_| bad(&format!("truncated at layer {index}")))?;
                Layer {
                    spec: LayerSpec::Dropout { rate },
                    weight: None,
                    bias: None,
                }
            }
            TAG_FLATTEN => Layer {
                spec: LayerSpec::Flatten,
                weight: None,
                bias: None,
            },
            TAG_DENSE => {
                let units = read_u32(&mut cur, origin, index)? as usize;
                let fan_in = *shape.first().ok_or_else(|| bad("dense on empty shape"))?;
                if shape.len() != 1 {
                    return Err(bad(&format!("layer {index}: dense on non-flat shape")));
                }
                let weight = read_buffer(&mut cur, vec![units, fan_in], precision, origin, index)?;
                let bias = read_buffer(&mut cur, vec![units], precision, origin, index)?;
                Layer {
                    spec: LayerSpec::Dense { units },
                    weight: Some(weight),
                    bias: Some(bias),
                }
            }
            other => return Err(bad(&format!("layer {index}: unknown tag {other}"))),
        };
        shape = crate::layer::output_shape(&layer.spec, &shape)?;
        layers.push(layer);
    }
    if cur.position() != bytes.len() as u64 {
        return Err(bad("trailing bytes after the layer list"));
    }

    Network::from_parts(
        layers,
        input_shape,
        class_count,
        inference_temperature,
        training_temperature,
        precision,
    )
}

/// Saves atomically: write to a sibling temp file, then rename into place.
pub fn save(net: &Network, path: &Path) -> Result<()> {
    let bytes = to_bytes(net)?;
    let tmp = path.with_extension("tmp-write");
    let io_err = |source| NnError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(&bytes).map_err(io_err)?;
    f.sync_all().map_err(io_err)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Network> {
    let bytes = fs::read(path).map_err(|source| NnError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_bytes(&bytes, &path.display().to_string())
}

fn read_u32(cur: &mut Cursor<&[u8]>, origin: &str, index: usize) -> Result<u32> {
    cur.read_u32::<LittleEndian>().map_err(|_| NnError::Model {
        path: origin.to_string(),
        reason: format!("truncated at layer {index}"),
    })
}

fn write_buffer(out: &mut Vec<u8>, t: &Tensor) -> Result<()> {
    out.write_u64::<LittleEndian>(t.len() as u64).expect("vec write");
    match t.precision() {
        Precision::Single => {
            for &v in t.as_f32()? {
                out.write_f32::<LittleEndian>(v).expect("vec write");
            }
        }
        Precision::Double => {
            for &v in t.as_f64()? {
                out.write_f64::<LittleEndian>(v).expect("vec write");
            }
        }
    }
    Ok(())
}

fn read_buffer(
    cur: &mut Cursor<&[u8]>,
    shape: Vec<usize>,
    precision: Precision,
    origin: &str,
    index: usize,
) -> Result<Tensor> {
    let bad = |reason: String| NnError::Model {
        path: origin.to_string(),
        reason,
    };
    let len = cur
        .read_u64::<LittleEndian>()
        .map_err(|_| bad(format!("truncated at layer {index}")))? as usize;
    let expected: usize = shape.iter().product();
    if len != expected {
        return Err(bad(format!(
            "layer {index}: buffer holds {len} scalars, shape {shape:?} needs {expected}"
        )));
    }
    match precision {
        Precision::Single => {
            let mut data = vec![0f32; len];
            cur.read_f32_into::<LittleEndian>(&mut data)
                .map_err(|_| bad(format!("truncated buffer at layer {index}")))?;
            Ok(Tensor::from_f32(shape, data)?)
        }
        Precision::Double => {
            let mut data = vec![0f64; len];
            cur.read_f64_into::<LittleEndian>(&mut data)
                .map_err(|_| bad(format!("truncated buffer at layer {index}")))?;
            Ok(Tensor::from_f64(shape, data)?)
        }
    }
}
