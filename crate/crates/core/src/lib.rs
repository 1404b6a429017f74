//! Slap maps of convex polygons and the ergodic theory of the resulting
//! piecewise affine circle maps.
//!
//! The slap map sends a boundary point to the first boundary point hit by
//! the inward normal through it. Parametrized by arc length it is piecewise
//! affine, and its invariant densities and mixing behaviour are estimated
//! with an orbit-refined Ulam discretization.

pub mod ergodic;
pub mod geometry;
pub mod kite;
pub mod lorenz;
pub mod nonergodic;
pub mod pwamap;
pub mod regular;
pub mod triangles;

pub use ergodic::{analyze, analyze_with, ErgodicComponent, ErgodicError, ErgodicReport, UlamConfig};
pub use geometry::{extract_slap_map, GeometryError, Point2, Polygon, SlapMap};
pub use pwamap::{AffineBranch, MapError, PiecewiseAffineMap, Side};

use thiserror::Error;

/// Any failure raised by this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lorenz(#[from] lorenz::LorenzError),
    #[error(transparent)]
    Regular(#[from] regular::RegularError),
    #[error(transparent)]
    Ergodic(#[from] ErgodicError),
    #[error(transparent)]
    Triangle(#[from] triangles::TriangleError),
    #[error(transparent)]
    Kite(#[from] kite::KiteError),
    #[error(transparent)]
    Nonergodic(#[from] nonergodic::NonergodicError),
}

impl Error {
    /// True when the input map or polygon fails to be expanding.
    pub fn is_not_expanding(&self) -> bool {
        use kite::KiteError as K;
        use nonergodic::NonergodicError as N;
        let geom = |g: &GeometryError| matches!(g, GeometryError::NotExpanding);
        let erg = |e: &ErgodicError| matches!(e, ErgodicError::NotExpanding(_));
        match self {
            Error::Geometry(g) => geom(g),
            Error::Ergodic(e) => erg(e),
            Error::Triangle(triangles::TriangleError::Geometry(g)) => geom(g),
            Error::Kite(K::Geometry(g)) => geom(g),
            Error::Kite(K::Ergodic(e)) => erg(e),
            Error::Nonergodic(N::Geometry(g)) => geom(g),
            Error::Nonergodic(N::Ergodic(e)) => erg(e),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
