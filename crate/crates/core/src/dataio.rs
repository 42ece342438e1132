//! Binary serialization for datasets, statistical profiles, and model
//! checkpoints.
//!
//! Dataset layout (all integers little-endian):
//!
//! ```text
//! "CSID" | version u32 | kind u8 | dims (u32 x K) | count u64 | payload
//! ```
//!
//! The payload is a flat stream of `f64` little-endian `(re, im)` pairs in
//! row-major order, one fixed-size record per item. Record kinds:
//!
//! * kind 0, dims `[rows, cols]` - CSI matrices.
//! * kind 1, dims `[n_r, n_t, n_d]` - time channels; each record leads with
//!   `(scenario_id, 0)` followed by the `n_d` tap matrices.
//! * kind 2, dims `[n_r, n_t, n_d]` - statistical profiles; each record
//!   leads with `(ue_id, 0)` followed per delay by `(power, 0)`, the
//!   transmit covariance, and the receive covariance.
//!
//! An optional trailer `"CSIX" | groups u64 | (start u64, len u64) x groups`
//! records record-range boundaries (task extents in a meta environment,
//! per-UE extents in a seed set). Round trips are bit-exact.
//!
//! Checkpoint layout: `"CSIM" | version u32 | model config | parameter
//! arrays` in declaration order.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use crate::augment::{DelayStats, StatProfile};
use crate::autoencoder::{Activation, Model, ModelConfig, ModelParams, ParamBlock, QuantizerMode};
use crate::channel::TimeChannel;
use crate::cmatrix::{C64, CMatrix};
use crate::csi::CsiMatrix;
use crate::error::{Error, Result};

const DATASET_MAGIC: &[u8; 4] = b"CSID";
const TRAILER_MAGIC: &[u8; 4] = b"CSIX";
const CHECKPOINT_MAGIC: &[u8; 4] = b"CSIM";
const FORMAT_VERSION: u32 = 1;

/// Record kind stored in a dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    CsiSet = 0,
    TimeChannelSet = 1,
    ProfileSet = 2,
}

impl RecordKind {
    fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(RecordKind::CsiSet),
            1 => Ok(RecordKind::TimeChannelSet),
            2 => Ok(RecordKind::ProfileSet),
            other => Err(Error::format(format!("unknown record kind {other}"))),
        }
    }

    fn dim_count(self) -> usize {
        match self {
            RecordKind::CsiSet => 2,
            RecordKind::TimeChannelSet => 3,
            RecordKind::ProfileSet => 3,
        }
    }
}

struct Sink<W: Write> {
    w: W,
}

impl<W: Write> Sink<W> {
    fn u32(&mut self, v: u32) -> Result<()> {
        self.w.write_all(&v.to_le_bytes())?;
        Ok(())
    }

    fn u64(&mut self, v: u64) -> Result<()> {
        self.w.write_all(&v.to_le_bytes())?;
        Ok(())
    }

    fn f64(&mut self, v: f64) -> Result<()> {
        self.w.write_all(&v.to_le_bytes())?;
        Ok(())
    }

    fn complex(&mut self, z: C64) -> Result<()> {
        self.f64(z.re)?;
        self.f64(z.im)
    }

    fn matrix(&mut self, m: &CMatrix) -> Result<()> {
        for z in m.entries() {
            self.complex(*z)?;
        }
        Ok(())
    }
}

struct Source<R: Read> {
    r: R,
}

impl<R: Read> Source<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.r.read_exact(&mut buf).map_err(|e| {
            if e.kind() == ErrorKind::UnexpectedEof {
                Error::format("unexpected end of file")
            } else {
                Error::Io(e)
            }
        })?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes::<4>()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes::<8>()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes::<8>()?))
    }

    fn complex(&mut self) -> Result<C64> {
        Ok(C64::new(self.f64()?, self.f64()?))
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<CMatrix> {
        let mut entries = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            entries.push(self.complex()?);
        }
        CMatrix::new(rows, cols, entries)
    }

    /// Reads the optional group trailer; `None` at clean end of file.
    fn trailer(&mut self) -> Result<Option<Vec<(u64, u64)>>> {
        let mut magic = [0u8; 4];
        match self.r.read(&mut magic)? {
            0 => return Ok(None),
            4 if &magic == TRAILER_MAGIC => {}
            _ => return Err(Error::format("trailing bytes are not a group table")),
        }
        let count = self.u64()? as usize;
        let mut groups = Vec::with_capacity(count);
        for _ in 0..count {
            groups.push((self.u64()?, self.u64()?));
        }
        Ok(Some(groups))
    }
}

fn open_sink(path: &Path) -> Result<Sink<BufWriter<File>>> {
    Ok(Sink {
        w: BufWriter::new(File::create(path)?),
    })
}

fn open_source(path: &Path) -> Result<Source<BufReader<File>>> {
    Ok(Source {
        r: BufReader::new(File::open(path)?),
    })
}

fn write_header<W: Write>(sink: &mut Sink<W>, kind: RecordKind, dims: &[u32], count: u64) -> Result<()> {
    sink.w.write_all(DATASET_MAGIC)?;
    sink.u32(FORMAT_VERSION)?;
    sink.w.write_all(&[kind as u8])?;
    debug_assert_eq!(dims.len(), kind.dim_count());
    for &d in dims {
        sink.u32(d)?;
    }
    sink.u64(count)
}

fn read_header<R: Read>(source: &mut Source<R>, expect: RecordKind) -> Result<(Vec<u32>, u64)> {
    let magic = source.bytes::<4>()?;
    if &magic != DATASET_MAGIC {
        return Err(Error::format("bad dataset magic"));
    }
    let version = source.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::format(format!("unsupported dataset version {version}")));
    }
    let kind = RecordKind::from_u8(source.bytes::<1>()?[0])?;
    if kind != expect {
        return Err(Error::format(format!("expected kind {:?}, found {:?}", expect, kind)));
    }
    let mut dims = Vec::with_capacity(kind.dim_count());
    for _ in 0..kind.dim_count() {
        dims.push(source.u32()?);
    }
    let count = source.u64()?;
    Ok((dims, count))
}

fn write_trailer<W: Write>(sink: &mut Sink<W>, groups: Option<&[(u64, u64)]>) -> Result<()> {
    if let Some(groups) = groups {
        sink.w.write_all(TRAILER_MAGIC)?;
        sink.u64(groups.len() as u64)?;
        for &(start, len) in groups {
            sink.u64(start)?;
            sink.u64(len)?;
        }
    }
    sink.w.flush()?;
    Ok(())
}

/// Writes a CSI-matrix dataset (kind 0), optionally with a group table.
pub fn write_csi_dataset(
    path: impl AsRef<Path>,
    samples: &[CsiMatrix],
    groups: Option<&[(u64, u64)]>,
) -> Result<()> {
    let first = samples
        .first()
        .ok_or_else(|| Error::invalid_argument("refusing to write an empty dataset"))?;
    let (rows, cols) = (first.n_tx(), first.n_subbands());
    let mut sink = open_sink(path.as_ref())?;
    write_header(&mut sink, RecordKind::CsiSet, &[rows as u32, cols as u32], samples.len() as u64)?;
    for s in samples {
        if s.n_tx() != rows || s.n_subbands() != cols {
            return Err(Error::invalid_argument("mixed record shapes in dataset"));
        }
        sink.matrix(s.matrix())?;
    }
    write_trailer(&mut sink, groups)
}

/// Reads a kind-0 dataset and its optional group table.
pub fn read_csi_dataset(path: impl AsRef<Path>) -> Result<(Vec<CsiMatrix>, Option<Vec<(u64, u64)>>)> {
    let mut source = open_source(path.as_ref())?;
    let (dims, count) = read_header(&mut source, RecordKind::CsiSet)?;
    let (rows, cols) = (dims[0] as usize, dims[1] as usize);
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        out.push(CsiMatrix::new(source.matrix(rows, cols)?)?);
    }
    let groups = source.trailer()?;
    Ok((out, groups))
}

/// Writes a time-channel dataset (kind 1), optionally with a group table.
pub fn write_channel_dataset(
    path: impl AsRef<Path>,
    channels: &[TimeChannel],
    groups: Option<&[(u64, u64)]>,
) -> Result<()> {
    let first = channels
        .first()
        .ok_or_else(|| Error::invalid_argument("refusing to write an empty dataset"))?;
    let (n_r, n_t, n_d) = (first.n_r(), first.n_t(), first.n_delays());
    let mut sink = open_sink(path.as_ref())?;
    write_header(
        &mut sink,
        RecordKind::TimeChannelSet,
        &[n_r as u32, n_t as u32, n_d as u32],
        channels.len() as u64,
    )?;
    for ch in channels {
        if ch.n_r() != n_r || ch.n_t() != n_t || ch.n_delays() != n_d {
            return Err(Error::invalid_argument("mixed record shapes in dataset"));
        }
        sink.complex(C64::new(ch.scenario_id as f64, 0.0))?;
        for tap in &ch.taps {
            sink.matrix(tap)?;
        }
    }
    write_trailer(&mut sink, groups)
}

/// Reads a kind-1 dataset and its optional group table.
pub fn read_channel_dataset(
    path: impl AsRef<Path>,
) -> Result<(Vec<TimeChannel>, Option<Vec<(u64, u64)>>)> {
    let mut source = open_source(path.as_ref())?;
    let (dims, count) = read_header(&mut source, RecordKind::TimeChannelSet)?;
    let (n_r, n_t, n_d) = (dims[0] as usize, dims[1] as usize, dims[2] as usize);
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let id = source.complex()?;
        let mut taps = Vec::with_capacity(n_d);
        for _ in 0..n_d {
            taps.push(source.matrix(n_r, n_t)?);
        }
        out.push(TimeChannel {
            taps,
            scenario_id: id.re as u64,
        });
    }
    let groups = source.trailer()?;
    Ok((out, groups))
}

/// Writes statistical profiles (kind 2). Only the estimated quantities
/// (power, covariance factors) are stored; eigenfactors are recomputed
/// deterministically on load.
pub fn write_profiles(path: impl AsRef<Path>, profiles: &[StatProfile]) -> Result<()> {
    let first = profiles
        .first()
        .ok_or_else(|| Error::invalid_argument("refusing to write an empty profile set"))?;
    let (n_r, n_t, n_d) = (first.n_r(), first.n_t(), first.n_delays());
    let mut sink = open_sink(path.as_ref())?;
    write_header(
        &mut sink,
        RecordKind::ProfileSet,
        &[n_r as u32, n_t as u32, n_d as u32],
        profiles.len() as u64,
    )?;
    for p in profiles {
        if p.n_r() != n_r || p.n_t() != n_t || p.n_delays() != n_d {
            return Err(Error::invalid_argument("mixed record shapes in profile set"));
        }
        sink.complex(C64::new(p.ue_id as f64, 0.0))?;
        for d in &p.delays {
            sink.complex(C64::new(d.power, 0.0))?;
            sink.matrix(&d.r_tx)?;
            sink.matrix(&d.r_rx)?;
        }
    }
    write_trailer(&mut sink, None)
}

/// Reads a kind-2 profile set, rebuilding the eigenfactors.
pub fn read_profiles(path: impl AsRef<Path>) -> Result<Vec<StatProfile>> {
    let mut source = open_source(path.as_ref())?;
    let (dims, count) = read_header(&mut source, RecordKind::ProfileSet)?;
    let (n_r, n_t, n_d) = (dims[0] as usize, dims[1] as usize, dims[2] as usize);
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let ue_id = source.complex()?.re as u64;
        let mut delays = Vec::with_capacity(n_d);
        for _ in 0..n_d {
            let power = source.complex()?.re;
            let r_tx = source.matrix(n_t, n_t)?;
            let r_rx = source.matrix(n_r, n_r)?;
            delays.push(DelayStats::from_covariances(power, r_tx, r_rx, power == 0.0)?);
        }
        out.push(StatProfile { ue_id, delays });
    }
    source.trailer()?;
    Ok(out)
}

fn activation_tag(a: Activation) -> u8 {
    match a {
        Activation::Tanh => 0,
        Activation::Relu => 1,
    }
}

fn quantizer_tag(q: QuantizerMode) -> u8 {
    match q {
        QuantizerMode::Uniform => 0,
        QuantizerMode::Identity => 1,
    }
}

/// Writes a model checkpoint.
pub fn write_checkpoint(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    let mut sink = open_sink(path.as_ref())?;
    sink.w.write_all(CHECKPOINT_MAGIC)?;
    sink.u32(FORMAT_VERSION)?;
    let cfg = &model.cfg;
    sink.u32(cfg.n_tx as u32)?;
    sink.u32(cfg.n_subbands as u32)?;
    sink.u32(cfg.hidden.len() as u32)?;
    for &h in &cfg.hidden {
        sink.u32(h as u32)?;
    }
    sink.u32(cfg.feedback_bits as u32)?;
    sink.u32(cfg.bits_per_dim as u32)?;
    sink.w.write_all(&[activation_tag(cfg.activation), quantizer_tag(cfg.quantizer)])?;
    for stack in [&model.params.encoder, &model.params.decoder] {
        sink.u32(stack.len() as u32)?;
        for block in stack {
            sink.u32(block.in_dim as u32)?;
            sink.u32(block.out_dim as u32)?;
            for &w in &block.w {
                sink.f64(w)?;
            }
            for &b in &block.b {
                sink.f64(b)?;
            }
        }
    }
    sink.w.flush()?;
    Ok(())
}

/// Reads a model checkpoint.
pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Model> {
    let mut source = open_source(path.as_ref())?;
    let magic = source.bytes::<4>()?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::format("bad checkpoint magic"));
    }
    let version = source.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::format(format!("unsupported checkpoint version {version}")));
    }
    let n_tx = source.u32()? as usize;
    let n_subbands = source.u32()? as usize;
    let n_hidden = source.u32()? as usize;
    let mut hidden = Vec::with_capacity(n_hidden);
    for _ in 0..n_hidden {
        hidden.push(source.u32()? as usize);
    }
    let feedback_bits = source.u32()? as usize;
    let bits_per_dim = source.u32()? as usize;
    let tags = source.bytes::<2>()?;
    let activation = match tags[0] {
        0 => Activation::Tanh,
        1 => Activation::Relu,
        other => return Err(Error::format(format!("unknown activation tag {other}"))),
    };
    let quantizer = match tags[1] {
        0 => QuantizerMode::Uniform,
        1 => QuantizerMode::Identity,
        other => return Err(Error::format(format!("unknown quantizer tag {other}"))),
    };
    let cfg = ModelConfig {
        n_tx,
        n_subbands,
        hidden,
        feedback_bits,
        bits_per_dim,
        activation,
        quantizer,
    };
    cfg.validate().map_err(|e| Error::format(format!("checkpoint config invalid: {e}")))?;
    let mut stacks: Vec<Vec<ParamBlock>> = Vec::with_capacity(2);
    for _ in 0..2 {
        let n_layers = source.u32()? as usize;
        let mut stack = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let in_dim = source.u32()? as usize;
            let out_dim = source.u32()? as usize;
            if in_dim == 0 || out_dim == 0 || in_dim * out_dim > 1 << 28 {
                return Err(Error::format("implausible layer dimensions"));
            }
            let mut block = ParamBlock {
                w: Vec::with_capacity(in_dim * out_dim),
                b: Vec::with_capacity(out_dim),
                in_dim,
                out_dim,
            };
            for _ in 0..in_dim * out_dim {
                block.w.push(source.f64()?);
            }
            for _ in 0..out_dim {
                block.b.push(source.f64()?);
            }
            stack.push(block);
        }
        stacks.push(stack);
    }
    let decoder = stacks.pop().unwrap();
    let encoder = stacks.pop().unwrap();
    Ok(Model {
        cfg,
        params: ModelParams { encoder, decoder },
    })
}
