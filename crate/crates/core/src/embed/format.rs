//! Embedding file formats: a binary container and a CSV import path.
//!
//! Binary layout, little-endian throughout:
//!
//! ```text
//! magic   [u8; 4] = "MAIV"
//! version u16     = 1
//! modality u8     (0 = audio, 1 = video)
//! reserved u8     = 0
//! count   u32     number of records
//! rows    u32     per-record rows   (audio 1, video 25)
//! cols    u32     per-record cols   (audio 1536, video 1024)
//! records: id_len u16, id bytes (UTF-8), rows*cols f32 values
//! ```

use std::collections::HashSet;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{
    AudioEmbedding, EmbedError, VideoEmbedding, AUDIO_EMBED_DIM, VIDEO_FEATURE_DIM, VIDEO_SEGMENTS,
};

const MAGIC: [u8; 4] = *b"MAIV";
const VERSION: u16 = 1;

/// Which modality a file stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Audio,
    Video,
}

impl Modality {
    fn tag(self) -> u8 {
        match self {
            Modality::Audio => 0,
            Modality::Video => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self, EmbedError> {
        match tag {
            0 => Ok(Modality::Audio),
            1 => Ok(Modality::Video),
            other => Err(EmbedError::Malformed(format!("unknown modality tag {other}"))),
        }
    }

    pub fn record_shape(self) -> (usize, usize) {
        match self {
            Modality::Audio => (1, AUDIO_EMBED_DIM),
            Modality::Video => (VIDEO_SEGMENTS, VIDEO_FEATURE_DIM),
        }
    }
}

/// In-memory image of one embedding file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub modality: Modality,
    records: Vec<(String, Vec<f32>)>,
}

impl EmbeddingFile {
    pub fn new(modality: Modality) -> Self {
        Self {
            modality,
            records: Vec::new(),
        }
    }

    pub fn from_audio(records: Vec<AudioEmbedding>) -> Result<Self, EmbedError> {
        let mut file = Self::new(Modality::Audio);
        for r in records {
            file.push(r.clip_id.clone(), r.values().to_vec())?;
        }
        Ok(file)
    }

    pub fn from_video(records: Vec<VideoEmbedding>) -> Result<Self, EmbedError> {
        let mut file = Self::new(Modality::Video);
        for r in records {
            file.push(r.clip_id.clone(), r.values().to_vec())?;
        }
        Ok(file)
    }

    /// Appends a record, enforcing the modality shape and id uniqueness.
    pub fn push(&mut self, clip_id: String, values: Vec<f32>) -> Result<(), EmbedError> {
        let (rows, cols) = self.modality.record_shape();
        if values.len() != rows * cols {
            return match self.modality {
                Modality::Audio => Err(EmbedError::AudioShape(values.len())),
                Modality::Video => Err(EmbedError::VideoShape(values.len())),
            };
        }
        if self.records.iter().any(|(id, _)| *id == clip_id) {
            return Err(EmbedError::DuplicateClipId(clip_id));
        }
        self.records.push((clip_id, values));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.records.iter().map(|(id, v)| (id.as_str(), v.as_slice()))
    }

    pub fn get(&self, clip_id: &str) -> Option<&[f32]> {
        self.records
            .iter()
            .find(|(id, _)| id == clip_id)
            .map(|(_, v)| v.as_slice())
    }

    pub fn into_audio(self) -> Result<Vec<AudioEmbedding>, EmbedError> {
        if self.modality != Modality::Audio {
            let (rows, cols) = self.modality.record_shape();
            return Err(EmbedError::ShapeMismatch {
                want_rows: 1,
                want_cols: AUDIO_EMBED_DIM,
                got_rows: rows,
                got_cols: cols,
            });
        }
        self.records
            .into_iter()
            .map(|(id, v)| AudioEmbedding::new(id, v))
            .collect()
    }

    pub fn into_video(self) -> Result<Vec<VideoEmbedding>, EmbedError> {
        if self.modality != Modality::Video {
            let (rows, cols) = self.modality.record_shape();
            return Err(EmbedError::ShapeMismatch {
                want_rows: VIDEO_SEGMENTS,
                want_cols: VIDEO_FEATURE_DIM,
                got_rows: rows,
                got_cols: cols,
            });
        }
        self.records
            .into_iter()
            .map(|(id, v)| VideoEmbedding::new(id, v))
            .collect()
    }
}

/// Writes an embedding file; values round-trip losslessly as f32.
pub fn write_embeddings(file: &EmbeddingFile, path: &Path) -> Result<(), EmbedError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let (rows, cols) = file.modality.record_shape();
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[file.modality.tag(), 0])?;
    w.write_all(&(file.records.len() as u32).to_le_bytes())?;
    w.write_all(&(rows as u32).to_le_bytes())?;
    w.write_all(&(cols as u32).to_le_bytes())?;
    for (id, values) in &file.records {
        let id_bytes = id.as_bytes();
        w.write_all(&(id_bytes.len() as u16).to_le_bytes())?;
        w.write_all(id_bytes)?;
        for v in values {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact_buf<R: Read>(r: &mut R, n: usize) -> Result<Vec<u8>, EmbedError> {
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)
        .map_err(|_| EmbedError::Malformed("file truncated".into()))?;
    Ok(buf)
}

/// Reads an embedding file, checking magic, version, modality and shapes.
pub fn read_embeddings(path: &Path, expect: Modality) -> Result<EmbeddingFile, EmbedError> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let magic = read_exact_buf(&mut r, 4)?;
    if magic != MAGIC {
        return Err(EmbedError::BadMagic);
    }
    let version = u16::from_le_bytes(read_exact_buf(&mut r, 2)?.try_into().unwrap());
    if version != VERSION {
        return Err(EmbedError::UnsupportedVersion(version));
    }
    let head = read_exact_buf(&mut r, 2)?;
    let modality = Modality::from_tag(head[0])?;
    let count = u32::from_le_bytes(read_exact_buf(&mut r, 4)?.try_into().unwrap()) as usize;
    let rows = u32::from_le_bytes(read_exact_buf(&mut r, 4)?.try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(read_exact_buf(&mut r, 4)?.try_into().unwrap()) as usize;
    let (want_rows, want_cols) = expect.record_shape();
    if modality != expect || rows != want_rows || cols != want_cols {
        return Err(EmbedError::ShapeMismatch {
            want_rows,
            want_cols,
            got_rows: rows,
            got_cols: cols,
        });
    }

    let mut file = EmbeddingFile::new(modality);
    let mut seen = HashSet::new();
    for _ in 0..count {
        let id_len = u16::from_le_bytes(read_exact_buf(&mut r, 2)?.try_into().unwrap()) as usize;
        let id = String::from_utf8(read_exact_buf(&mut r, id_len)?)
            .map_err(|_| EmbedError::Malformed("record id is not UTF-8".into()))?;
        if !seen.insert(id.clone()) {
            return Err(EmbedError::DuplicateClipId(id));
        }
        let raw = read_exact_buf(&mut r, rows * cols * 4)?;
        let values = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        file.records.push((id, values));
    }
    Ok(file)
}

/// Imports embeddings from CSV rows `clip_id, v0, ..., vN`: 1536 values
/// per row for audio, 25600 (row-major 25x1024) for video. No quoting;
/// ids must not contain commas.
pub fn read_embeddings_csv(path: &Path, modality: Modality) -> Result<EmbeddingFile, EmbedError> {
    let text = std::fs::read_to_string(path)?;
    let mut file = EmbeddingFile::new(modality);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let id = parts
            .next()
            .ok_or_else(|| EmbedError::Malformed(format!("line {}: empty", lineno + 1)))?
            .trim()
            .to_string();
        let values: Vec<f32> = parts
            .map(|p| {
                p.trim()
                    .parse::<f32>()
                    .map_err(|e| EmbedError::Malformed(format!("line {}: {e}", lineno + 1)))
            })
            .collect::<Result<_, _>>()?;
        file.push(id, values)?;
    }
    Ok(file)
}
