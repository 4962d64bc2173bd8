//! Secret files: length-prefixed binary records (`u32` big-endian length,
//! then the bytes) or, in text mode, one secret per line.

use std::fs;
use std::path::Path;

use knot::sealing::Secret;

use crate::failure::Failure;

pub fn read(path: &Path, text: bool) -> Result<Vec<Secret>, Failure> {
    let raw = fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let payloads = if text {
        split_lines(&raw)
    } else {
        split_records(&raw)?
    };
    if payloads.is_empty() {
        return Err(Failure::Usage(format!("{}: no secrets", path.display())));
    }
    payloads
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            Secret::new(p)
                .map_err(|e| Failure::Usage(format!("{}: secret {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn write<'a>(
    path: &Path,
    secrets: impl IntoIterator<Item = &'a [u8]>,
    text: bool,
) -> Result<(), Failure> {
    let mut out = Vec::new();
    for s in secrets {
        if text {
            out.extend_from_slice(s);
            out.push(b'\n');
        } else {
            out.extend_from_slice(&(s.len() as u32).to_be_bytes());
            out.extend_from_slice(s);
        }
    }
    fs::write(path, out).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn split_lines(raw: &[u8]) -> Vec<Vec<u8>> {
    let raw = raw.strip_suffix(b"\n").unwrap_or(raw);
    if raw.is_empty() {
        return Vec::new();
    }
    raw.split(|&b| b == b'\n')
        .map(|line| line.strip_suffix(b"\r").unwrap_or(line).to_vec())
        .collect()
}

fn split_records(mut raw: &[u8]) -> Result<Vec<Vec<u8>>, Failure> {
    let mut out = Vec::new();
    while !raw.is_empty() {
        let Some((len, rest)) = raw.split_first_chunk::<4>() else {
            return Err(Failure::Usage("truncated record length".into()));
        };
        let len = u32::from_be_bytes(*len) as usize;
        if rest.len() < len {
            return Err(Failure::Usage(format!(
                "record {} truncated",
                out.len() + 1
            )));
        }
        out.push(rest[..len].to_vec());
        raw = &rest[len..];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for text in [false, true] {
            let path = dir.path().join(format!("s-{text}"));
            let items: [&[u8]; 3] = [b"alpha", b"b", b"gamma delta"];
            write(&path, items, text).unwrap();
            let back = read(&path, text).unwrap();
            let bytes: Vec<&[u8]> = back.iter().map(|s| s.as_bytes()).collect();
            assert_eq!(bytes, items);
        }
    }

    #[test]
    fn text_mode_handles_crlf_and_missing_newline() {
        assert_eq!(split_lines(b"a\r\nb"), vec![b"a".to_vec(), b"b".to_vec()]);
        assert!(split_lines(b"").is_empty());
    }

    #[test]
    fn truncated_binary_is_rejected() {
        assert!(split_records(&[0, 0, 0, 5, b'a']).is_err());
        assert!(split_records(&[0, 0]).is_err());
    }

    #[test]
    fn blank_text_line_is_an_empty_secret() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s");
        std::fs::write(&path, "a\n\nb\n").unwrap();
        assert!(matches!(read(&path, true), Err(Failure::Usage(_))));
    }
}
