//! Golden bitstream files: a raw `.bits` payload (bit-packed, big-endian
//! within bytes, final byte zero-padded) plus a sidecar text file listing
//! the encoded symbols and the model ids used per position. The format is
//! versioned; any change requires regenerating the goldens.

use super::{Bitstream, CoderError};
use std::path::Path;

pub const GOLDEN_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenRecord {
    pub stream: Bitstream,
    pub symbols: Vec<usize>,
    pub model_ids: Vec<usize>,
}

/// Writes `<name>.bits` and `<name>.sidecar.txt` under `dir`.
pub fn write_golden(dir: &Path, name: &str, record: &GoldenRecord) -> Result<(), CoderError> {
    std::fs::create_dir_all(dir).map_err(|e| CoderError::Golden(e.to_string()))?;
    let bits_path = dir.join(format!("{name}.bits"));
    std::fs::write(&bits_path, record.stream.bytes())
        .map_err(|e| CoderError::Golden(format!("{}: {e}", bits_path.display())))?;
    let sidecar = format!(
        "rdcp-bits v{}\nbits {}\nmodels {}\nsymbols {}\n",
        GOLDEN_FORMAT_VERSION,
        record.stream.len_bits(),
        join(&record.model_ids),
        join(&record.symbols),
    );
    let side_path = dir.join(format!("{name}.sidecar.txt"));
    std::fs::write(&side_path, sidecar)
        .map_err(|e| CoderError::Golden(format!("{}: {e}", side_path.display())))?;
    Ok(())
}

pub fn read_golden(dir: &Path, name: &str) -> Result<GoldenRecord, CoderError> {
    let bits_path = dir.join(format!("{name}.bits"));
    let bytes = std::fs::read(&bits_path)
        .map_err(|e| CoderError::Golden(format!("{}: {e}", bits_path.display())))?;
    let side_path = dir.join(format!("{name}.sidecar.txt"));
    let text = std::fs::read_to_string(&side_path)
        .map_err(|e| CoderError::Golden(format!("{}: {e}", side_path.display())))?;

    let mut len_bits = None;
    let mut model_ids = Vec::new();
    let mut symbols = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            let expect = format!("rdcp-bits v{GOLDEN_FORMAT_VERSION}");
            if line != expect {
                return Err(CoderError::Golden(format!(
                    "sidecar version line `{line}`, expected `{expect}`"
                )));
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("bits") => {
                len_bits = Some(
                    parts
                        .next()
                        .and_then(|v| v.parse::<usize>().ok())
                        .ok_or_else(|| CoderError::Golden("bad bits line".into()))?,
                )
            }
            Some("models") => {
                model_ids = parse_ids(parts)?;
            }
            Some("symbols") => {
                symbols = parse_ids(parts)?;
            }
            Some(other) => {
                return Err(CoderError::Golden(format!("unknown sidecar field `{other}`")))
            }
            None => {}
        }
    }
    let len = len_bits.ok_or_else(|| CoderError::Golden("missing bits line".into()))?;
    if len > bytes.len() * 8 || bytes.len() * 8 >= len + 8 {
        return Err(CoderError::Golden(format!(
            "payload of {} bytes inconsistent with {len} bits",
            bytes.len()
        )));
    }
    Ok(GoldenRecord { stream: Bitstream::from_bytes(bytes, len), symbols, model_ids })
}

fn join(ids: &[usize]) -> String {
    ids.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_ids<'a>(parts: impl Iterator<Item = &'a str>) -> Result<Vec<usize>, CoderError> {
    parts
        .map(|v| {
            v.parse::<usize>()
                .map_err(|e| CoderError::Golden(format!("bad id `{v}`: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_roundtrip_on_disk() {
        let dir = std::env::temp_dir().join(format!("rdcp-golden-test-{}", std::process::id()));
        let mut stream = Bitstream::new();
        stream.push_bits(0b1011001, 7);
        let record = GoldenRecord { stream, symbols: vec![1, 0, 3], model_ids: vec![0, 0, 1] };
        write_golden(&dir, "sample", &record).unwrap();
        let back = read_golden(&dir, "sample").unwrap();
        assert_eq!(back, record);
        std::fs::remove_dir_all(&dir).ok();
    }
}
