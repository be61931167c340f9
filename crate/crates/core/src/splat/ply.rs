//! PLY interchange in the layout used by 3DGS checkpoints: log scales, logit opacity and
//! spherical-harmonic DC color. Higher-order SH coefficients are dropped on load and written
//! as zeros.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use super::{Gaussian3D, GaussianScene};
use crate::error::{Error, Result};
use crate::Real;

/// Zeroth-order real spherical-harmonic basis constant.
pub const SH_C0: f64 = 0.282_094_791_773_878_14;
const REST_COEFFS: usize = 45;

const REQUIRED: [&str; 14] = [
    "x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2",
    "rot_3",
];

#[derive(Debug, Clone, Copy, PartialEq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F64 => f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]]),
        }
    }
}

#[derive(Debug, PartialEq)]
enum Encoding {
    BinaryLe,
    Ascii,
}

struct Element {
    name: String,
    count: usize,
    props: Vec<(String, ScalarType)>,
}

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::format("ply", msg)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn read_ply<T: Real, R: BufRead>(mut reader: R) -> Result<GaussianScene<T>> {
    let mut line = String::new();
    let mut next_line = |reader: &mut R| -> Result<String> {
        line.clear();
        let n = reader.read_line(&mut line).map_err(|e| fmt_err(e.to_string()))?;
        if n == 0 {
            return Err(fmt_err("unexpected end of header"));
        }
        Ok(line.trim_end().to_string())
    };
    if next_line(&mut reader)? != "ply" {
        return Err(fmt_err("missing `ply` magic"));
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let l = next_line(&mut reader)?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["end_header"] => break,
            ["format", "binary_little_endian", _] => encoding = Some(Encoding::BinaryLe),
            ["format", "ascii", _] => encoding = Some(Encoding::Ascii),
            ["format", other, _] => return Err(fmt_err(format!("unsupported format {other}"))),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| fmt_err("bad element count"))?,
                props: Vec::new(),
            }),
            ["property", "list", ..] => {
                let el = elements.last().ok_or_else(|| fmt_err("property before element"))?;
                if el.name == "vertex" {
                    return Err(fmt_err("list properties on vertices are not supported"));
                }
                // Lists are only tolerated on elements after the vertices (never read).
            }
            ["property", ty, name] => {
                let ty = ScalarType::parse(ty).ok_or_else(|| fmt_err(format!("unknown property type {ty}")))?;
                elements
                    .last_mut()
                    .ok_or_else(|| fmt_err("property before element"))?
                    .props
                    .push((name.to_string(), ty));
            }
            _ => return Err(fmt_err(format!("unrecognized header line `{l}`"))),
        }
    }
    let encoding = encoding.ok_or_else(|| fmt_err("missing format line"))?;
    let vpos = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| fmt_err("no vertex element"))?;
    let vertex = &elements[vpos];
    let mut col = [0usize; REQUIRED.len()];
    for (k, name) in REQUIRED.iter().enumerate() {
        col[k] = vertex
            .props
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::MissingProperty(name.to_string()))?;
    }

    let mut values = vec![0.0f64; vertex.props.len()];
    let mut gaussians = Vec::with_capacity(vertex.count);
    match encoding {
        Encoding::BinaryLe => {
            // Skip fixed-size elements that precede the vertices.
            for el in &elements[..vpos] {
                let stride: usize = el.props.iter().map(|(_, t)| t.size()).sum();
                let mut skip = vec![0u8; stride * el.count];
                reader.read_exact(&mut skip).map_err(|e| fmt_err(e.to_string()))?;
            }
            let stride: usize = vertex.props.iter().map(|(_, t)| t.size()).sum();
            let mut buf = vec![0u8; stride];
            for _ in 0..vertex.count {
                reader.read_exact(&mut buf).map_err(|_| fmt_err("truncated vertex data"))?;
                let mut off = 0;
                for (v, (_, ty)) in values.iter_mut().zip(&vertex.props) {
                    *v = ty.read_le(&buf[off..]);
                    off += ty.size();
                }
                gaussians.push(decode(&values, &col));
            }
        }
        Encoding::Ascii => {
            let mut body = String::new();
            reader.read_to_string(&mut body).map_err(|e| fmt_err(e.to_string()))?;
            let mut lines = body.lines().filter(|l| !l.trim().is_empty());
            for el in &elements[..vpos] {
                for _ in 0..el.count {
                    lines.next();
                }
            }
            for _ in 0..vertex.count {
                let l = lines.next().ok_or_else(|| fmt_err("truncated vertex data"))?;
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.len() < values.len() {
                    return Err(fmt_err("short vertex line"));
                }
                for (v, t) in values.iter_mut().zip(toks) {
                    *v = t.parse().map_err(|_| fmt_err("bad vertex value"))?;
                }
                gaussians.push(decode(&values, &col));
            }
        }
    }
    Ok(GaussianScene { gaussians })
}

fn decode<T: Real>(v: &[f64], col: &[usize; REQUIRED.len()]) -> Gaussian3D<T> {
    let g = |k: usize| v[col[k]];
    let color = |k: usize| T::of((0.5 + SH_C0 * g(k)).clamp(0.0, 1.0));
    let q = Quaternion::new(g(10), g(11), g(12), g(13));
    let rotation = if q.norm() > 0.0 {
        UnitQuaternion::from_quaternion(q)
    } else {
        UnitQuaternion::identity()
    };
    Gaussian3D {
        mean: Vector3::new(T::of(g(0)), T::of(g(1)), T::of(g(2))),
        scale: Vector3::new(T::of(g(7).exp()), T::of(g(8).exp()), T::of(g(9).exp())),
        rotation: rotation.cast::<T>(),
        opacity: T::of(sigmoid(g(6))),
        color: Vector3::new(color(3), color(4), color(5)),
    }
}

pub fn write_ply<T: Real, W: Write>(scene: &GaussianScene<T>, mut w: W) -> Result<()> {
    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    header.push_str(&format!("element vertex {}\n", scene.len()));
    let mut names: Vec<String> = ["x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.extend((0..REST_COEFFS).map(|i| format!("f_rest_{i}")));
    names.extend(
        ["opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]
            .iter()
            .map(|s| s.to_string()),
    );
    for n in &names {
        header.push_str(&format!("property float {n}\n"));
    }
    header.push_str("end_header\n");
    let io = |e: std::io::Error| fmt_err(e.to_string());
    w.write_all(header.as_bytes()).map_err(io)?;
    let mut row: Vec<f32> = Vec::with_capacity(names.len());
    for g in &scene.gaussians {
        row.clear();
        row.extend([g.mean.x, g.mean.y, g.mean.z].iter().map(|v| v.as_f64() as f32));
        row.extend([0.0f32; 3]);
        row.extend(g.color.iter().map(|c| ((c.as_f64() - 0.5) / SH_C0) as f32));
        row.extend(std::iter::repeat_n(0.0f32, REST_COEFFS));
        row.push(logit(g.opacity.as_f64()) as f32);
        row.extend(g.scale.iter().map(|s| s.as_f64().ln() as f32));
        let q = g.rotation.quaternion();
        row.extend([q.w, q.i, q.j, q.k].iter().map(|v| v.as_f64() as f32));
        for v in &row {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn load_ply<T: Real>(path: &Path) -> Result<GaussianScene<T>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_ply(BufReader::new(f))
}

pub fn save_ply<T: Real>(scene: &GaussianScene<T>, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_ply(scene, BufWriter::new(f))
}
