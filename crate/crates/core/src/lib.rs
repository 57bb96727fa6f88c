//! Sensing with channel-coded communications signals.
//!
//! The crate simulates radars that reuse their coded data payload as the
//! sensing waveform, in both single-carrier and OFDM form, and measures how
//! well that works when several such radars interfere with each other.
//!
//! Pipeline overview:
//!
//! ```text
//! message bits ─► encoder ─► interleaver ─► mapper ─► CcsBlock s[n]
//!                                                        │
//!                 correlation / bounds ◄─────────────────┤
//!                                                        ▼
//!                              scene (frame synthesis + radar channel)
//!                                                        │
//!                                                        ▼
//!                               receiver (range-Doppler maps) ─► detection
//! ```
//!
//! The `harness` module ties everything into reproducible experiments with a
//! CLI (`ccs-radar`).

pub mod bounds;
pub mod coding;
pub mod correlation;
pub mod detection;
pub mod error;
pub mod fft;
pub mod harness;
pub mod modulation;
pub mod receiver;
pub mod scene;

pub use error::{Error, Result};
pub use num_complex::Complex64;
