//! Newton polygons, Hensel lifting of roots, and factorization along the
//! faces of the Newton polygon.

mod hensel;
mod polygon;
mod roots;
mod split;

pub use hensel::{is_hensel_liftable, HenselOutcome};
pub use polygon::{newton_polygon, newton_polygon_at, Face, NewtonPolygon, Point, PolygonPair, Slope};
pub use split::{cuts, lift_factor, segment_split, Cut, Factorization, SegmentSplit};
pub use roots::{roots, RootSearch};
