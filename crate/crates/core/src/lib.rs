//! Numerical toolkit for copula asymmetry on the unit square.
//!
//! The pipeline: represent copulas and subcopulas symbolically
//! ([`copula::CopulaSpec`], [`copula::SubcopulaSpec`]), render them onto
//! dyadic grids ([`grid`]), verify the copula axioms ([`copula::axioms`]),
//! quantify asymmetry through the bracket |C - C^T| and its L^p norms
//! ([`asymmetry`]), split brackets into good and bad parts with a dyadic
//! stopping-time decomposition ([`cz`]), and compare subcopulas under the
//! tolerance order built on good-part norms. [`empirical`] feeds observed
//! samples into the same pipeline; [`families`] provides the built-in
//! parametric families.

pub mod asymmetry;
pub mod copula;
pub mod cz;
pub mod empirical;
pub mod error;
pub mod families;
pub mod grid;

pub use asymmetry::{
    compare_order, distinct_classes, equivalent, most_symmetric, mu_p, mu_p_with_threshold,
    ClassPartition, OrderVerdict, Relation, SweepResult,
};
pub use copula::axioms::{verify_axioms, verify_axioms_seeded, AxiomReport};
pub use copula::sklar::{sklar_construct, sklar_extract, SklarBox};
pub use copula::{
    bracket, convex_combine, AnySpec, CopulaSpec, Measurable, NullPart, ProductDomain,
    SubcopulaSpec,
};
pub use cz::{cz_decompose, tolerance_compare, CzDecomposition, DyadicSquare, ToleranceVerdict};
pub use empirical::{empirical_copula, load_csv, ColumnSelector, SampleSet};
pub use error::{Error, Result};
pub use families::{
    make_archimedean, make_cobb_douglas_c, make_cobb_douglas_d, make_generalized_archimedean,
    make_mixture, FamilyInfo, GeneratorSpec, ParamFamily, ParamMap,
};
pub use grid::{Grid, GridFunction, PExponent};
