pub mod detect;
pub mod eval;
pub mod model;
pub mod track;
pub mod train;
