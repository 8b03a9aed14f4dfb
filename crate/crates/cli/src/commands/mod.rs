pub mod bench;
pub mod fov;
pub mod gen;
pub mod solve;
