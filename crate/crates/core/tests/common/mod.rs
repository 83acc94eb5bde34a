pub mod kripke;
pub mod oracle;
