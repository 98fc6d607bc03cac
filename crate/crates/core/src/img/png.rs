//! Lossless PNG round trip for audio-images (8-bit RGB, no alpha).

use std::path::Path;

use super::{AudioImage, ImageError, IMAGE_SIZE};
use crate::dsp::TrackKind;

/// Writes the image as an 8-bit RGB PNG.
pub fn write_png(img: &AudioImage, path: &Path) -> Result<(), ImageError> {
    let buf = image::RgbImage::from_raw(
        IMAGE_SIZE as u32,
        IMAGE_SIZE as u32,
        img.pixels().to_vec(),
    )
    .expect("pixel buffer length is enforced by AudioImage");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => ImageError::Io(io),
            other => ImageError::MalformedImage(other.to_string()),
        })
}

/// Reads a 224x224 RGB PNG back into an [`AudioImage`].
pub fn read_png(path: &Path, clip_id: &str, kind: TrackKind) -> Result<AudioImage, ImageError> {
    let dynimg = image::ImageReader::open(path)?
        .decode()
        .map_err(|e| ImageError::MalformedImage(e.to_string()))?;
    let rgb = dynimg.to_rgb8();
    if rgb.width() != IMAGE_SIZE as u32 || rgb.height() != IMAGE_SIZE as u32 {
        return Err(ImageError::DimensionMismatch {
            got_w: rgb.width(),
            got_h: rgb.height(),
            want: IMAGE_SIZE as u32,
        });
    }
    AudioImage::new(clip_id, kind, rgb.into_raw())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_is_byte_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut img = AudioImage::black("rt", TrackKind::Waveplot);
        for y in 0..IMAGE_SIZE {
            for x in 0..IMAGE_SIZE {
                img.set(y, x, [(x * y % 256) as u8, (x % 256) as u8, (y % 256) as u8]);
            }
        }
        let path = dir.path().join(img.file_name());
        write_png(&img, &path).unwrap();
        let back = read_png(&path, "rt", TrackKind::Waveplot).unwrap();
        assert_eq!(img.pixels(), back.pixels());
    }

    #[test]
    fn png_rewrite_is_byte_identical_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let img = AudioImage::black("twice", TrackKind::Mfcc);
        let p1 = dir.path().join("a.png");
        let p2 = dir.path().join("b.png");
        write_png(&img, &p1).unwrap();
        write_png(&img, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn truncated_file_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.png");
        let img = AudioImage::black("t", TrackKind::Mfcc);
        write_png(&img, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(
            read_png(&path, "t", TrackKind::Mfcc),
            Err(ImageError::MalformedImage(_))
        ));
    }

    #[test]
    fn wrong_dimensions_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("small.png");
        let small = image::RgbImage::new(100, 100);
        small.save(&path).unwrap();
        assert!(matches!(
            read_png(&path, "s", TrackKind::Mfcc),
            Err(ImageError::DimensionMismatch {
                got_w: 100,
                got_h: 100,
                ..
            })
        ));
    }
}
