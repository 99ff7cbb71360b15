pub mod bounds;
pub mod oracle;
pub mod phase;
pub mod verify;
