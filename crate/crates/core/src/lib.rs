//! Gaussian-kernel extension of delta-monotone mappings `R^n -> R^n` to
//! `R^{n+1}`, and numerical tools that certify the extension's properties.
//!
//! Given `f`, the extension is
//!
//! ```text
//! F^i(x, t)     = ∫ f^i(x + t y) φ(y) dy,        i = 1..n
//! F^{n+1}(x, t) = ∫ <f(x + t y), y> φ(y) dy
//! ```
//!
//! for `t > 0`, with `φ` the standard Gaussian density, `F(x, 0) = (f(x), 0)`,
//! and reflection (`F^i` even, `F^{n+1}` odd in `t`) below the hyperplane.

pub mod certify;
pub mod differential;
pub mod error;
pub mod extension;
pub mod geometry;
pub mod hyperbolic;
pub mod map;
pub mod measure;
pub mod quadrature;
pub mod sampling;

pub use error::{Error, Result};
pub use extension::ExtensionField;
pub use geometry::{HalfSpacePoint, Point, SquareMatrix};
pub use map::{parse_map_spec, MapKind, MapSpec};
pub use quadrature::{build_scheme, integrate_gaussian, Method, QuadratureScheme, SchemeParams};
