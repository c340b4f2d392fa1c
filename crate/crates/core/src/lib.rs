pub mod linalg;
pub mod lie_structure;
pub mod decompositions;
pub mod oshima_atlas;
pub mod vector_fields;
pub mod kernel_lab;
pub mod cli_io;
