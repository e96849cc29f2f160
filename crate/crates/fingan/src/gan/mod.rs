//! GAN assembly (populated below).
