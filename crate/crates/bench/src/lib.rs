//! Nothing lives here: this crate only exists to host the criterion
//! benchmark targets under benches/.
