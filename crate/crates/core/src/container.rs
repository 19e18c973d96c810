//! Binary artifact container: a JSON header followed by a raw blob of
//! little-endian IEEE-754 float32 tensors. Used by the windowed dataset and
//! by model checkpoints.

use crate::error::{CoreError, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"BRC1";

pub fn write_container<H: Serialize>(path: &Path, header: &H, blob: &[u8]) -> Result<()> {
    let header_bytes = serde_json::to_vec(header)?;
    let mut out = fs::File::create(path)?;
    out.write_all(MAGIC)?;
    out.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    out.write_all(&header_bytes)?;
    out.write_all(blob)?;
    Ok(())
}

pub fn read_container<H: DeserializeOwned>(path: &Path) -> Result<(H, Vec<u8>)> {
    if !path.exists() {
        return Err(CoreError::MissingInput(path.display().to_string()));
    }
    let mut file = fs::File::open(path)?;
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoreError::Domain(format!(
            "{} is not a recognized container file",
            path.display()
        )));
    }
    let mut len = [0u8; 4];
    file.read_exact(&mut len)?;
    let header_len = u32::from_le_bytes(len) as usize;
    let mut header_bytes = vec![0u8; header_len];
    file.read_exact(&mut header_bytes)?;
    let header: H = serde_json::from_slice(&header_bytes)?;
    let mut blob = Vec::new();
    file.read_to_end(&mut blob)?;
    Ok((header, blob))
}

pub fn f32s_to_bytes(values: &[f32]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(values.len() * 4);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

pub fn bytes_to_f32s(bytes: &[u8]) -> Result<Vec<f32>> {
    if bytes.len() % 4 != 0 {
        return Err(CoreError::Shape(format!(
            "blob length {} is not a multiple of 4",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Header {
        n: usize,
        tag: String,
    }

    #[test]
    fn container_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bin");
        let header = Header { n: 3, tag: "abc".into() };
        let blob = f32s_to_bytes(&[1.0, -2.5, 3.25]);
        write_container(&path, &header, &blob).unwrap();
        let (h2, b2): (Header, Vec<u8>) = read_container(&path).unwrap();
        assert_eq!(header, h2);
        assert_eq!(bytes_to_f32s(&b2).unwrap(), vec![1.0, -2.5, 3.25]);
    }
}
