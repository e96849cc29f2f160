//! Evaluation (populated below).
