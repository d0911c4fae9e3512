//! Binary index file: `GZIX`, one version byte, the bincode payload, then
//! the 32-byte SHA-256 of the payload.

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::index::{checksum_hex, IndexPayload};
use super::{GazetteerError, GazetteerIndex};

pub const MAGIC: &[u8; 4] = b"GZIX";
pub const FORMAT_VERSION: u8 = 1;

const DIGEST_LEN: usize = 32;

fn io_err(path: &Path, source: std::io::Error) -> GazetteerError {
    GazetteerError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn encode(index: &GazetteerIndex) -> Vec<u8> {
    let payload = index.to_payload().encode();
    let mut out = Vec::with_capacity(MAGIC.len() + 1 + payload.len() + DIGEST_LEN);
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&Sha256::digest(&payload));
    out
}

pub(crate) fn decode(bytes: &[u8]) -> Result<GazetteerIndex, GazetteerError> {
    if bytes.len() < MAGIC.len() + 1 {
        return Err(GazetteerError::Truncated);
    }
    if &bytes[..4] != MAGIC {
        return Err(GazetteerError::BadMagic);
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(GazetteerError::UnsupportedVersion {
            found: bytes[4],
            expected: FORMAT_VERSION,
        });
    }
    let body = &bytes[5..];
    if body.len() < DIGEST_LEN {
        return Err(GazetteerError::Truncated);
    }
    let (payload, digest) = body.split_at(body.len() - DIGEST_LEN);
    if Sha256::digest(payload).as_slice() != digest {
        return Err(GazetteerError::ChecksumMismatch);
    }
    let decoded: IndexPayload =
        bincode::deserialize(payload).map_err(|e| GazetteerError::Corrupt(e.to_string()))?;
    GazetteerIndex::from_payload(decoded, checksum_hex(payload))
}

/// Writes the index atomically: a sibling temp file is renamed into place.
pub fn persist_index(index: &GazetteerIndex, path: &Path) -> Result<(), GazetteerError> {
    let bytes = encode(index);
    let tmp = path.with_extension("gzix.tmp");
    let mut file = std::fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    file.write_all(&bytes).map_err(|e| io_err(&tmp, e))?;
    file.sync_all().map_err(|e| io_err(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn restore_index(path: &Path) -> Result<GazetteerIndex, GazetteerError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    decode(&bytes)
}
