//! Certified computation of Galois/monodromy groups of parametrized
//! polynomial systems.
//!
//! The pipeline: interval-arithmetic Krawczyk certification of roots,
//! certified predictor-corrector path tracking of parameter homotopies,
//! a homotopy graph whose saturated edge correspondences yield monodromy
//! permutations via spanning trees, and permutation-group analysis
//! (order, orbits, blocks, Galois width).

// Arbitrary-precision interval arithmetic allocates one small buffer per
// operation; a thread-caching allocator recovers a large constant factor.
#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

// GMP/MPFR limb buffers bypass the Rust global allocator and go through
// GMP's own hooks, so point those at the same allocator. Installed before
// main so no GMP-owned buffer ever crosses an allocator change.
extern "C" fn gmp_alloc(size: usize) -> *mut core::ffi::c_void {
    unsafe { libmimalloc_sys::mi_malloc(size) }
}
extern "C" fn gmp_realloc(
    ptr: *mut core::ffi::c_void,
    _old: usize,
    new: usize,
) -> *mut core::ffi::c_void {
    unsafe { libmimalloc_sys::mi_realloc(ptr, new) }
}
extern "C" fn gmp_free(ptr: *mut core::ffi::c_void, _size: usize) {
    unsafe { libmimalloc_sys::mi_free(ptr) }
}

#[ctor::ctor(unsafe)]
fn install_gmp_allocator() {
    unsafe {
        gmp_mpfr_sys::gmp::set_memory_functions(
            Some(gmp_alloc),
            Some(gmp_realloc),
            Some(gmp_free),
        );
    }
}

pub mod certify;
pub mod error;
pub mod expr;
pub mod fiber_graph;
pub mod interval;
pub mod permgroup;
pub mod problems;
pub mod tracker;

pub use error::{Error, Result};
