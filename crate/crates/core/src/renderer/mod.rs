//! Novel-view rendering by forward splatting with a z-buffer, and the bilinear
//! backward warp used by every photometric comparison.

mod image;
mod render;
pub(crate) mod sample;
mod warp;

pub use image::ImageBuffer;
pub use render::{forward_render, RenderResult};
pub use warp::backward_warp;
