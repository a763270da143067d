//! Benchmarks for the numerical kernels live under `benches/`.

use fracsmooth_core::gallery::{build_gallery, GalleryParams, Witness};
use fracsmooth_core::Majorant;
use fracsmooth_core::TrigPoly;

/// Lacunary witness F1 with ω(δ) = δ^{1/2} truncated at 2^depth.
pub fn lacunary_witness(depth: usize) -> TrigPoly {
    build_gallery(
        Witness::F1,
        &GalleryParams::with_omega(Majorant::power(0.5), 1.0, 0.0, 2.0),
        depth,
    )
    .expect("valid gallery parameters")
    .poly
}

/// Dense witness F7 with ε_ν = ν^{−1/2} truncated at `degree`.
pub fn dense_witness(degree: usize) -> TrigPoly {
    let eps = (1..=degree).map(|n| (n as f64).powf(-0.5)).collect();
    build_gallery(Witness::F7, &GalleryParams::with_eps(eps), degree)
        .expect("valid gallery parameters")
        .poly
}
