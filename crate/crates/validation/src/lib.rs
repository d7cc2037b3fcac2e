//! Holds the acceptance gate in `tests/acceptance.rs`.
