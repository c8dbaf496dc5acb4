pub mod cascade;
pub mod drowsiness;
pub mod eval;
pub mod haarboost;
pub mod imaging;
pub mod synth;
