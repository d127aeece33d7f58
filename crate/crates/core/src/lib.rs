pub mod binary_info;
pub mod error;
pub mod oneshot;
pub mod solver;
pub mod dc_region;
pub mod oracle;
pub mod sweep;
pub mod universal;
pub mod verify;
