pub mod classifier;
pub mod contexts;
pub mod forcing;
pub mod format;
pub mod gluing;
pub mod lp;
pub mod proposition;
pub mod rational;
pub mod spindyn;
