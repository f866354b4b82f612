//! The fractal arc: template, square tree, approximating curves, Cantor points.

pub mod address;
pub mod cantor;
pub mod curve;
pub mod export;
pub mod template;
pub mod tree;

pub use address::Address;
pub use cantor::{
    coord_of, exact_coord, separation_bound, separation_for_depth, CantorPoint, Resolved, Tail,
};
pub use curve::{area_en, area_en_by_squares, area_en_product, build_j, PolylineCurve};
pub use export::{render_arc, Svg};
pub use template::{alpha, side_len, Frame, Rect, Template};
pub use tree::{locate, ArcTree, PathKind, SquareNode, Templates};
