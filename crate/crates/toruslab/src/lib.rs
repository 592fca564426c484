//! Compact torus orbits on spaces of unimodular lattices, computed from the
//! arithmetic of orders in number fields of degree 2 and 3.
//!
//! The library is organized in layers:
//!
//! * exact arithmetic: [`zmat`] (integer/rational matrices, HNF/SNF),
//!   [`poly`] (monic integer polynomials), [`numfield`] (elements of
//!   K = Q[t]/P), [`order`] / [`ideal`] (orders and fractional ideals as
//!   exact row-HNF lattices);
//! * reduction theory: [`reduce`] (reduced-ideal cycles, the renormalized
//!   lattice walk, unit groups, canonical class representatives),
//!   [`classes`] (class sets, Picard groups, characters), [`latimer`]
//!   (integer matrices with fixed characteristic polynomial ↔ ideal classes);
//! * orbit geometry and statistics: [`embed`], [`lattice`] (f64 LLL and
//!   Fincke–Pohst), [`orbit`] (embedded orbits and sampling), [`testfn`],
//!   [`equidist`] (Siegel transforms, Weyl averages, cusp/ball statistics,
//!   the torus-period unfolding check), [`charsum`], [`zeta`];
//! * local theory: [`padic`] (Hensel lifting, valuations), [`building`]
//!   (norm model of the building, local discriminants, unit densities,
//!   local integrals, the local functional equation check);
//! * plumbing: [`exec`] (deterministic parallel/sequential execution),
//!   [`rng`] (counter-based seeding), [`fit`] (log-log fits with bootstrap
//!   intervals), [`report`] (CSV/JSON/binary emission).

pub mod building;
pub mod charsum;
pub mod classes;
pub mod embed;
pub mod equidist;
pub mod error;
pub mod exec;
pub mod fit;
pub mod ideal;
pub mod latimer;
pub mod lattice;
pub mod numfield;
pub mod orbit;
pub mod order;
pub mod padic;
pub mod poly;
pub mod reduce;
pub mod report;
pub mod rng;
pub mod testfn;
pub mod zeta;
pub mod zmat;

pub use error::{Error, Result};
