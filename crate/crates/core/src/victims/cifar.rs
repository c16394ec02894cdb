//! Reader for the CIFAR-10 binary batch format: fixed 3073-byte records of
//! one label byte followed by 1024 red, 1024 green and 1024 blue bytes,
//! each plane row-major over 32x32.

use std::path::Path;

use super::VictimError;
use crate::domain::{InputVector, Label, Shape};

pub const RECORD_LEN: usize = 1 + PIXELS;
pub const PIXELS: usize = 3 * 32 * 32;
pub const IMAGE_SHAPE: Shape = Shape::Chw(3, 32, 32);
pub const CLASSES: usize = 10;

pub fn load_cifar10_batch(
    path: impl AsRef<Path>,
) -> Result<Vec<(InputVector, Label)>, VictimError> {
    let bytes = std::fs::read(path.as_ref())?;
    parse_cifar10_batch(&bytes)
}

pub fn parse_cifar10_batch(bytes: &[u8]) -> Result<Vec<(InputVector, Label)>, VictimError> {
    if !bytes.len().is_multiple_of(RECORD_LEN) {
        return Err(VictimError::MalformedFile(format!(
            "{} bytes is not a whole number of {RECORD_LEN}-byte records",
            bytes.len()
        )));
    }
    bytes
        .chunks_exact(RECORD_LEN)
        .enumerate()
        .map(|(i, record)| {
            let label = record[0] as usize;
            if label >= CLASSES {
                return Err(VictimError::LabelOutOfRange { record: i, label });
            }
            let pixels = record[1..].iter().map(|&b| f64::from(b) / 255.0).collect();
            let image = InputVector::new(pixels, IMAGE_SHAPE).expect("record length is fixed");
            Ok((image, Label(label)))
        })
        .collect()
}
