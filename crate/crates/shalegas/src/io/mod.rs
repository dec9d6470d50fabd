//! File formats: Matrix Market, legacy VTK, fracture JSON and raster grids.

mod fractures;
mod mtx;
mod raster;
mod vtk;

pub use fractures::{fractures_to_json, parse_fractures, read_fractures, FractureFile, GeneratorFile};
pub use mtx::{parse_matrix_market, read_matrix_market, to_matrix_market, write_matrix_market};
pub use raster::{parse_raster, raster_to_text, read_raster};
pub use vtk::{to_vtk, write_vtk};
