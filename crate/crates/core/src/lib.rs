//! Exact density-to-potential maps of few-site Hubbard chains coupled to a
//! single cavity photon mode.

pub mod hilbert;
pub mod maps;
pub mod model;
pub mod observables;
pub mod solver;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    struct Readme;
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/model.md")]
    struct Model;
    #[doc = include_str!("../../../book/src/solving.md")]
    struct Solving;
    #[doc = include_str!("../../../book/src/maps.md")]
    struct Maps;
    #[doc = include_str!("../../../book/src/inversion.md")]
    struct Inversion;
    #[doc = include_str!("../../../book/src/xc.md")]
    struct Xc;
    #[doc = include_str!("../../../book/src/mean_field.md")]
    struct MeanField;
    #[doc = include_str!("../../../book/src/polarizability.md")]
    struct Polarizability;
}
