//! The TGPC cache file.
//!
//! All integers are little-endian, reals are IEEE-754 `f64` little-endian.
//!
//! ```text
//! file    := magic:u32 = 0x54475043  version:u16  count:u64  record*
//! record  := len:u64  payload[len]  crc32(payload):u32
//! payload := graph_id:u64  fingerprint:u64  status:u8
//!            (status = 0) select  matrix
//!            (status = 1) nothing; the pooler did not converge
//! select  := n:u64  k:u64  tag:u8
//!            (tag = 0) nnz:u64 (node:u64 cluster:u64 value:f64)*
//!            (tag = 1) (value:f64){n·k}, row-major
//!            has_kept:u8 [len:u64 (node:u64)*]
//!            has_extra:u8 [(gate:f64){n}]
//! matrix  := nrows:u64 ncols:u64 nnz:u64 (i:u64 j:u64 v:f64)*  sorted row-major
//! ```

use nalgebra::DMatrix;

use crate::error::{PoolError, Result};
use crate::select::{Assignment, SelectOutput};
use crate::sparse::CooMatrix;

pub const MAGIC: u32 = 0x5447_5043;
pub const VERSION: u16 = 1;

const STATUS_OK: u8 = 0;
const STATUS_NOT_CONVERGED: u8 = 1;

/// One graph's pre-coarsened Select and Connect result.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheRecord {
    pub graph_id: u64,
    pub fingerprint: u64,
    /// `None` when the selector did not converge on this graph.
    pub pooled: Option<(SelectOutput, CooMatrix)>,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    record: usize,
}

impl<'a> Reader<'a> {
    fn corrupt(&self, reason: &str) -> PoolError {
        PoolError::CorruptRecord {
            index: self.record,
            reason: reason.to_string(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| self.corrupt("truncated"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    /// A count or index that must fit in memory; `limit` bounds it.
    fn usize(&mut self, limit: usize) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v)
            .ok()
            .filter(|&v| v <= limit)
            .ok_or_else(|| self.corrupt("count out of range"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

fn write_matrix(w: &mut Writer, m: &CooMatrix) {
    w.usize(m.nrows());
    w.usize(m.ncols());
    w.usize(m.nnz());
    for &(i, j, v) in m.entries() {
        w.usize(i);
        w.usize(j);
        w.f64(v);
    }
}

fn read_matrix(r: &mut Reader<'_>) -> Result<CooMatrix> {
    let nrows = r.usize(usize::MAX / 2)?;
    let ncols = r.usize(usize::MAX / 2)?;
    let nnz = r.usize(r.remaining() / 24)?;
    let mut triples = Vec::with_capacity(nnz);
    let mut prev: Option<(usize, usize)> = None;
    for _ in 0..nnz {
        let i = r.usize(nrows.saturating_sub(1))?;
        let j = r.usize(ncols.saturating_sub(1))?;
        if prev.is_some_and(|p| p >= (i, j)) {
            return Err(r.corrupt("matrix entries not sorted"));
        }
        prev = Some((i, j));
        triples.push((i, j, r.f64()?));
    }
    if nrows == 0 || ncols == 0 {
        if nnz > 0 {
            return Err(r.corrupt("entries in an empty matrix"));
        }
        return Ok(CooMatrix::zeros(nrows, ncols));
    }
    Ok(CooMatrix::from_triples(nrows, ncols, triples))
}

fn write_select(w: &mut Writer, so: &SelectOutput) {
    w.usize(so.num_nodes);
    w.usize(so.num_clusters);
    match &so.assignment {
        Assignment::Sparse(entries) => {
            w.u8(0);
            w.usize(entries.len());
            for &(i, c, v) in entries {
                w.usize(i);
                w.usize(c);
                w.f64(v);
            }
        }
        Assignment::Dense(s) => {
            w.u8(1);
            for i in 0..s.nrows() {
                for c in 0..s.ncols() {
                    w.f64(s[(i, c)]);
                }
            }
        }
    }
    match &so.kept_nodes {
        Some(kept) => {
            w.u8(1);
            w.usize(kept.len());
            kept.iter().for_each(|&k| w.usize(k));
        }
        None => w.u8(0),
    }
    match &so.extra {
        Some(extra) => {
            w.u8(1);
            extra.iter().for_each(|&g| w.f64(g));
        }
        None => w.u8(0),
    }
}

fn read_select(r: &mut Reader<'_>) -> Result<SelectOutput> {
    let n = r.usize(r.remaining())?;
    let k = r.usize(usize::MAX / 2)?;
    let assignment = match r.u8()? {
        0 => {
            let nnz = r.usize(r.remaining() / 24)?;
            let mut entries = Vec::with_capacity(nnz);
            for _ in 0..nnz {
                let i = r.usize(n.saturating_sub(1))?;
                let c = r.usize(k.saturating_sub(1))?;
                entries.push((i, c, r.f64()?));
            }
            Assignment::Sparse(entries)
        }
        1 => {
            let cells = n.checked_mul(k).filter(|&c| c <= r.remaining() / 8);
            let cells = cells.ok_or_else(|| r.corrupt("dense assignment too large"))?;
            let mut data = Vec::with_capacity(cells);
            for _ in 0..cells {
                data.push(r.f64()?);
            }
            Assignment::Dense(DMatrix::from_row_slice(n, k, &data))
        }
        _ => return Err(r.corrupt("unknown assignment tag")),
    };
    let kept_nodes = match r.u8()? {
        0 => None,
        1 => {
            let len = r.usize(n)?;
            let mut kept = Vec::with_capacity(len);
            for _ in 0..len {
                kept.push(r.usize(n.saturating_sub(1))?);
            }
            Some(kept)
        }
        _ => return Err(r.corrupt("bad kept-node flag")),
    };
    let extra = match r.u8()? {
        0 => None,
        1 => {
            if n > r.remaining() / 8 {
                return Err(r.corrupt("gate vector truncated"));
            }
            let mut g = Vec::with_capacity(n);
            for _ in 0..n {
                g.push(r.f64()?);
            }
            Some(g)
        }
        _ => return Err(r.corrupt("bad gate flag")),
    };
    let so = SelectOutput {
        num_nodes: n,
        num_clusters: k,
        assignment,
        kept_nodes,
        extra,
    };
    so.validate().map_err(|e| r.corrupt(&e.to_string()))?;
    Ok(so)
}

/// Encodes one record, length prefix and CRC included.
pub fn encode_record(rec: &CacheRecord) -> Vec<u8> {
    let mut p = Writer(Vec::new());
    p.u64(rec.graph_id);
    p.u64(rec.fingerprint);
    match &rec.pooled {
        Some((so, adj)) => {
            p.u8(STATUS_OK);
            write_select(&mut p, so);
            write_matrix(&mut p, adj);
        }
        None => p.u8(STATUS_NOT_CONVERGED),
    }
    let payload = p.0;
    let mut out = Vec::with_capacity(payload.len() + 12);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out
}

pub fn encode_file(records: impl ExactSizeIterator<Item = Vec<u8>>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC.to_le_bytes());
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(records.len() as u64).to_le_bytes());
    for r in records {
        out.extend_from_slice(&r);
    }
    out
}

pub fn decode_file(bytes: &[u8]) -> Result<Vec<CacheRecord>> {
    let mut r = Reader {
        buf: bytes,
        pos: 0,
        record: 0,
    };
    let header = |reason: &str| PoolError::CorruptRecord {
        index: 0,
        reason: format!("file header: {reason}"),
    };
    if r.u32().map_err(|_| header("truncated"))? != MAGIC {
        return Err(header("bad magic"));
    }
    if r.u16().map_err(|_| header("truncated"))? != VERSION {
        return Err(header("unsupported version"));
    }
    let count = r.u64().map_err(|_| header("truncated"))?;
    let mut records = Vec::new();
    for index in 0..count {
        r.record = index as usize;
        let len = r.usize(r.remaining())?;
        let payload = r.take(len)?;
        let crc = r.u32()?;
        if crc32fast::hash(payload) != crc {
            return Err(r.corrupt("checksum mismatch"));
        }
        let mut p = Reader {
            buf: payload,
            pos: 0,
            record: index as usize,
        };
        let graph_id = p.u64()?;
        let fingerprint = p.u64()?;
        let pooled = match p.u8()? {
            STATUS_OK => {
                let so = read_select(&mut p)?;
                let adj = read_matrix(&mut p)?;
                if adj.nrows() != so.num_clusters || adj.ncols() != so.num_clusters {
                    return Err(p.corrupt("pooled adjacency shape mismatch"));
                }
                Some((so, adj))
            }
            STATUS_NOT_CONVERGED => None,
            _ => return Err(p.corrupt("unknown status")),
        };
        if p.remaining() != 0 {
            return Err(p.corrupt("trailing payload bytes"));
        }
        records.push(CacheRecord {
            graph_id,
            fingerprint,
            pooled,
        });
    }
    if r.remaining() != 0 {
        return Err(PoolError::CorruptRecord {
            index: count as usize,
            reason: "trailing bytes after last record".into(),
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<CacheRecord> {
        let mut so = SelectOutput::from_labels(&[0, 1, 1], 2);
        so.kept_nodes = Some(vec![0, 2]);
        so.extra = Some(vec![0.5, -0.25, 1.0]);
        let adj = CooMatrix::from_triples(2, 2, vec![(0, 1, 1.5), (1, 0, 1.5)]);
        let dense = SelectOutput::dense(DMatrix::from_row_slice(2, 2, &[0.25, 0.75, 1.0, 0.0]));
        vec![
            CacheRecord {
                graph_id: 0,
                fingerprint: 7,
                pooled: Some((so, adj.clone())),
            },
            CacheRecord {
                graph_id: 1,
                fingerprint: 7,
                pooled: None,
            },
            CacheRecord {
                graph_id: 2,
                fingerprint: 7,
                pooled: Some((dense, adj)),
            },
        ]
    }

    fn encode(records: &[CacheRecord]) -> Vec<u8> {
        encode_file(records.iter().map(encode_record).collect::<Vec<_>>().into_iter())
    }

    #[test]
    fn round_trip() {
        let recs = sample();
        let bytes = encode(&recs);
        assert_eq!(&bytes[..4], &[0x43, 0x50, 0x47, 0x54]);
        let back = decode_file(&bytes).unwrap();
        assert_eq!(back, recs);
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn flipped_byte_is_detected() {
        let bytes = encode(&sample());
        for pos in [20, 40, bytes.len() - 1] {
            let mut bad = bytes.clone();
            bad[pos] ^= 0x10;
            assert!(matches!(decode_file(&bad), Err(PoolError::CorruptRecord { .. })));
        }
    }

    #[test]
    fn bad_magic_and_truncation() {
        let bytes = encode(&sample());
        let mut bad = bytes.clone();
        bad[0] = 0;
        assert!(decode_file(&bad).is_err());
        assert!(decode_file(&bytes[..bytes.len() - 3]).is_err());
        assert!(decode_file(&[]).is_err());
    }
}
