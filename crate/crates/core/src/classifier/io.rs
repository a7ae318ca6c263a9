//! Little-endian binary model format:
//!
//! ```text
//! magic "LTC1" | u32 version | u32 dim | u32 |V| | u32 labels | u64 seed
//! | f32 lr | u32 epochs | u32 min_count
//! | |V| x (u16 len, UTF-8 entity ID, u64 count)
//! | labels x (u16 len, UTF-8 topic id)
//! | input matrix, row-major f32 | output matrix, one f32 column per label
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{Hyperparams, Model, Vocabulary};
use crate::{Error, Qid, Result};

pub const MAGIC: [u8; 4] = *b"LTC1";
pub const FORMAT_VERSION: u32 = 1;

fn write_str<W: Write>(out: &mut W, s: &str) -> Result<()> {
    let len =
        u16::try_from(s.len()).map_err(|_| Error::Format(format!("string too long: {s:?}")))?;
    out.write_u16::<LittleEndian>(len)?;
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn to_u32(value: usize, what: &str) -> Result<u32> {
    u32::try_from(value).map_err(|_| Error::Format(format!("{what} {value} does not fit in u32")))
}

pub fn write_model<W: Write>(mut out: W, model: &Model) -> Result<()> {
    let hyper = &model.hyper;
    out.write_all(&MAGIC)?;
    out.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    out.write_u32::<LittleEndian>(to_u32(model.dim(), "dim")?)?;
    out.write_u32::<LittleEndian>(to_u32(model.vocab().len(), "vocabulary size")?)?;
    out.write_u32::<LittleEndian>(to_u32(model.label_count(), "label count")?)?;
    out.write_u64::<LittleEndian>(hyper.seed)?;
    out.write_f32::<LittleEndian>(hyper.lr)?;
    out.write_u32::<LittleEndian>(hyper.epochs)?;
    out.write_u32::<LittleEndian>(hyper.min_count)?;
    for (qid, count) in model.vocab().iter() {
        write_str(&mut out, &qid.to_string())?;
        out.write_u64::<LittleEndian>(count)?;
    }
    for label in model.labels() {
        write_str(&mut out, label)?;
    }
    for &x in model.input().iter().chain(model.output()) {
        out.write_f32::<LittleEndian>(x)?;
    }
    out.flush()?;
    Ok(())
}

fn truncated(e: io::Error) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::Format("truncated file".into())
    } else {
        Error::Io(e)
    }
}

fn read_str<R: Read>(input: &mut R) -> Result<String> {
    let len = input.read_u16::<LittleEndian>().map_err(truncated)?;
    let mut buf = vec![0; len as usize];
    input.read_exact(&mut buf).map_err(truncated)?;
    String::from_utf8(buf).map_err(|_| Error::Format("invalid UTF-8 string".into()))
}

fn read_f32s<R: Read>(input: &mut R, count: usize) -> Result<Vec<f32>> {
    // Grow as data arrives rather than trusting the header for allocation.
    let mut values = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        values.push(input.read_f32::<LittleEndian>().map_err(truncated)?);
    }
    Ok(values)
}

pub fn read_model<R: Read>(mut input: R) -> Result<Model> {
    let mut magic = [0; 4];
    input.read_exact(&mut magic).map_err(truncated)?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = input.read_u32::<LittleEndian>().map_err(truncated)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut header = [0u32; 3];
    for h in &mut header {
        *h = input.read_u32::<LittleEndian>().map_err(truncated)?;
    }
    let [dim, vocab_len, label_count] = header.map(|h| h as usize);
    if dim == 0 || vocab_len == 0 {
        return Err(Error::Format(format!(
            "bad shape: dim {dim}, vocabulary {vocab_len}"
        )));
    }
    let seed = input.read_u64::<LittleEndian>().map_err(truncated)?;
    let lr = input.read_f32::<LittleEndian>().map_err(truncated)?;
    let epochs = input.read_u32::<LittleEndian>().map_err(truncated)?;
    let min_count = input.read_u32::<LittleEndian>().map_err(truncated)?;

    let mut entries = Vec::with_capacity(vocab_len.min(1 << 20));
    for _ in 0..vocab_len {
        let token = read_str(&mut input)?;
        let qid: Qid = token.parse().map_err(|e| Error::Format(format!("{e}")))?;
        let count = input.read_u64::<LittleEndian>().map_err(truncated)?;
        entries.push((qid, count));
    }
    let vocab = Vocabulary::from_entries(entries)?;
    let labels = (0..label_count)
        .map(|_| read_str(&mut input))
        .collect::<Result<Vec<_>>>()?;

    let input_len = vocab_len
        .checked_mul(dim)
        .ok_or_else(|| Error::Format("input matrix size overflows".into()))?;
    let output_len = label_count
        .checked_mul(dim)
        .ok_or_else(|| Error::Format("output matrix size overflows".into()))?;
    let input_matrix = read_f32s(&mut input, input_len)?;
    let output_matrix = read_f32s(&mut input, output_len)?;
    if input.read(&mut [0u8; 1])? != 0 {
        return Err(Error::Format("trailing bytes after output matrix".into()));
    }

    let hyper = Hyperparams {
        dim,
        lr,
        epochs,
        min_count,
        seed,
        ..Hyperparams::default()
    };
    Model::from_parts(hyper, vocab, labels, input_matrix, output_matrix)
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    write_model(BufWriter::new(File::create(path)?), model)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    read_model(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_model() -> Model {
        let vocab = Vocabulary::from_entries(vec![(Qid(10), 3), (Qid(9), 2)]).unwrap();
        let hyper = Hyperparams {
            dim: 2,
            seed: 5,
            ..Default::default()
        };
        let labels = vec!["a".to_owned(), "b-c".to_owned()];
        Model::from_parts(
            hyper,
            vocab,
            labels,
            vec![1.0, -0.5, 0.25, 0.0],
            vec![2.0, 3.0, -1.0, 0.5],
        )
        .unwrap()
    }

    fn bytes(model: &Model) -> Vec<u8> {
        let mut buf = Vec::new();
        write_model(&mut buf, model).unwrap();
        buf
    }

    #[test]
    fn layout() {
        let buf = bytes(&small_model());
        let mut expected = Vec::new();
        expected.extend_from_slice(b"LTC1");
        for v in [1u32, 2, 2, 2] {
            expected.extend_from_slice(&v.to_le_bytes());
        }
        expected.extend_from_slice(&5u64.to_le_bytes());
        expected.extend_from_slice(&0.1f32.to_le_bytes());
        expected.extend_from_slice(&2u32.to_le_bytes());
        expected.extend_from_slice(&20u32.to_le_bytes());
        for (s, c) in [("Q10", 3u64), ("Q9", 2)] {
            expected.extend_from_slice(&(s.len() as u16).to_le_bytes());
            expected.extend_from_slice(s.as_bytes());
            expected.extend_from_slice(&c.to_le_bytes());
        }
        for s in ["a", "b-c"] {
            expected.extend_from_slice(&(s.len() as u16).to_le_bytes());
            expected.extend_from_slice(s.as_bytes());
        }
        for x in [1.0f32, -0.5, 0.25, 0.0, 2.0, 3.0, -1.0, 0.5] {
            expected.extend_from_slice(&x.to_le_bytes());
        }
        assert_eq!(buf, expected);
    }

    #[test]
    fn round_trip() {
        let m = small_model();
        let back = read_model(bytes(&m).as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn every_truncation_fails() {
        let buf = bytes(&small_model());
        for len in 0..buf.len() {
            let err = read_model(&buf[..len]).unwrap_err();
            assert!(matches!(err, Error::Format(_)), "len {len}: {err}");
        }
    }

    #[test]
    fn corrupt_headers() {
        let good = bytes(&small_model());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(read_model(bad.as_slice())
            .unwrap_err()
            .to_string()
            .contains("magic"));
        let mut bad = good.clone();
        bad[4] = 9;
        assert!(read_model(bad.as_slice())
            .unwrap_err()
            .to_string()
            .contains("version"));
        let mut bad = good.clone();
        bad[8..12].copy_from_slice(&0u32.to_le_bytes());
        assert!(read_model(bad.as_slice()).is_err());
        let mut bad = good.clone();
        bad.push(0);
        assert!(read_model(bad.as_slice())
            .unwrap_err()
            .to_string()
            .contains("trailing"));
        let mut bad = good;
        let n = bad.len();
        bad[n - 4..].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(read_model(bad.as_slice()).is_err());
    }
}
