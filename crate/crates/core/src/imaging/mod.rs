//! Grayscale rasters and the operators the pipeline applies to them.
//!
//! All operators are pure: they take images by reference and return new
//! ones. Every [`Image`] holds finite intensities in `[0, 1]`.

mod bones;
mod components;
mod geometry;
mod image;
mod pgm;
mod segment;

pub use bones::{gaussian_blur, suppress_bones, BoneSuppression, BoneSuppressor};
pub use components::{connected_components, lung_bounding_box, Region};
pub use geometry::{crop, five_crop, five_crop_boxes, horizontal_flip, resize, rotate};
pub use image::{BoundingBox, Image, Mask};
pub use pgm::{
    decode_pgm, load_image, save_image_pgm8, save_image_pgm16, save_mask_pgm, encode_pgm8,
};
pub use segment::{otsu_threshold, segment_lung_fields, LungSegmentation, LungSegmenter};
