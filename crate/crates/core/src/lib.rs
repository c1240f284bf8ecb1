//! Regularizing triangles by repeatedly replacing each inner angle with the
//! mean of the other two.
//!
//! * [`angle_dynamics`]: the map on angle triples, its closed-form powers and
//!   quality prediction.
//! * [`plane_geometry`]: the same map realized on coordinates (excentral
//!   triangle), edge growth and rescaling.
//! * [`simple_mesh`]: the constrained variant for meshes with one inner vertex.
//! * [`mesh_io`]: OFF/OBJ meshes, quality reports and SVG rendering.

pub mod angle_dynamics;
pub mod mesh_io;
pub mod plane_geometry;
pub mod simple_mesh;

pub use angle_dynamics::{AngleError, AngleTriple, QualityValue, Tolerances};
pub use mesh_io::{Colormap, MeshFormat, MeshIoError, MeshModel, QualityReport};
pub use plane_geometry::{GeometryError, Point2, TrianglePoints};
pub use simple_mesh::{MeshError, SimpleMeshAngles};
