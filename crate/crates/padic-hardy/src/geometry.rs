//! Vectors, balls and spheres in the n-fold product space under the
//! supremum norm, with exact rational Haar measures.
//!
//! A ball `B(c, p^gamma)` is the set of points within distance `p^gamma` of
//! `c`; the sphere `S_gamma(c)` is the set at distance exactly `p^gamma`.
//! Every measure here is normalized so the unit ball about the origin has
//! measure one, giving `|B| = p^{gamma n}` and `|S| = p^{gamma n}(1 - p^{-n})`.

use crate::error::{Error, Result};
use crate::rational::{ppow, rat_valuation, Rat};
use crate::scalar::PAdicScalar;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct PAdicVector {
    prime: u32,
    coords: Vec<PAdicScalar>,
}

impl PAdicVector {
    pub fn new(coords: Vec<PAdicScalar>) -> Result<Self> {
        let first = coords.first().ok_or_else(|| {
            Error::InvalidConfig("vector needs at least one coordinate".to_string())
        })?;
        let prime = first.prime();
        for c in &coords {
            if c.prime() != prime {
                return Err(Error::PrimeMismatch(prime, c.prime()));
            }
        }
        Ok(PAdicVector { prime, coords })
    }

    pub fn from_integers(prime: u32, values: &[u64]) -> Result<Self> {
        let coords = values
            .iter()
            .map(|&v| PAdicScalar::from_integer(prime, v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }

    pub fn zero(prime: u32, dim: u32) -> Result<Self> {
        Self::new(vec![PAdicScalar::zero(prime)?; dim.max(1) as usize])
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn dim(&self) -> u32 {
        self.coords.len() as u32
    }

    pub fn coords(&self) -> &[PAdicScalar] {
        &self.coords
    }

    pub fn is_exact(&self) -> bool {
        self.coords.iter().all(|c| c.is_exact())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Supremum of the coordinate norms.
    pub fn sup_norm(&self) -> Rat {
        self.coords
            .iter()
            .map(|c| c.norm())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    /// `log_p` of the sup norm; `None` for the zero vector.
    pub fn norm_log(&self) -> Option<i64> {
        self.coords.iter().filter_map(|c| c.valuation()).min().map(|v| -v)
    }

    /// Exact coordinates as rationals, when every coordinate is exact.
    pub fn to_rationals(&self) -> Option<Vec<Rat>> {
        self.coords.iter().map(|c| c.to_rational()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: PAdicVector,
    log_radius: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sphere {
    center: PAdicVector,
    log_radius: i64,
}

/// How two balls in an ultrametric space can sit relative to each other.
/// Partial overlap cannot occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallRelation {
    Disjoint,
    Equal,
    FirstInsideSecond,
    SecondInsideFirst,
}

impl Ball {
    /// Ball of radius `p^log_radius` about an exact center.
    pub fn new(center: PAdicVector, log_radius: i64) -> Result<Self> {
        if !center.is_exact() {
            return Err(Error::InexactCenter);
        }
        Ok(Ball { center, log_radius })
    }

    pub fn center(&self) -> &PAdicVector {
        &self.center
    }

    pub fn log_radius(&self) -> i64 {
        self.log_radius
    }

    pub fn prime(&self) -> u32 {
        self.center.prime()
    }

    pub fn dim(&self) -> u32 {
        self.center.dim()
    }

    /// Haar measure `p^{log_radius * n}`.
    pub fn measure(&self) -> Rat {
        ppow(self.prime(), self.log_radius * self.dim() as i64)
    }

    pub fn contains_origin(&self) -> bool {
        match self.center.norm_log() {
            None => true,
            Some(l) => l <= self.log_radius,
        }
    }

    /// Exact membership test for a point given in rational coordinates.
    pub fn contains_point(&self, point: &[Rat]) -> bool {
        if point.len() != self.center.dim() as usize {
            return false;
        }
        let centers = self.center.to_rationals().expect("exact center");
        let p = self.prime();
        centers.iter().zip(point).all(|(c, x)| {
            match rat_valuation(p, &(x - c)) {
                None => true,
                Some(v) => -v <= self.log_radius
            }
        })
    }
}

impl Sphere {
    pub fn new(center: PAdicVector, log_radius: i64) -> Result<Self> {
        if !center.is_exact() {
            return Err(Error::InexactCenter);
        }
        Ok(Sphere { center, log_radius })
    }

    pub fn center(&self) -> &PAdicVector {
        &self.center
    }

    pub fn log_radius(&self) -> i64 {
        self.log_radius
    }

    pub fn prime(&self) -> u32 {
        self.center.prime()
    }

    pub fn dim(&self) -> u32 {
        self.center.dim()
    }

    /// Haar measure `p^{log_radius * n} (1 - p^{-n})`.
    pub fn measure(&self) -> Rat {
        let n = self.dim() as i64;
        ppow(self.prime(), self.log_radius * n) * (Rat::one() - ppow(self.prime(), -n))
    }
}

/// `log_p` of the distance between two exact centers; `None` when equal.
fn center_distance_log(a: &Ball, b: &Ball) -> Option<i64> {
    let p = a.prime();
    let ca = a.center.to_rationals().expect("exact center");
    let cb = b.center.to_rationals().expect("exact center");
    ca.iter()
        .zip(&cb)
        .filter_map(|(x, y)| rat_valuation(p, &(x - y)).map(|v| -v))
        .max()
}

/// Classifies two balls: in an ultrametric space they are equal, nested, or
/// disjoint, and two balls of the same radius that meet coincide.
pub fn ball_relation(a: &Ball, b: &Ball) -> Result<BallRelation> {
    if a.prime() != b.prime() {
        return Err(Error::PrimeMismatch(a.prime(), b.prime()));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let dist_within = |g: i64| center_distance_log(a, b).map(|l| l <= g).unwrap_or(true);
    let (ga, gb) = (a.log_radius, b.log_radius);
    Ok(if ga == gb {
        if dist_within(ga) {
            BallRelation::Equal
        } else {
            BallRelation::Disjoint
        }
    } else if ga < gb {
        if dist_within(gb) {
            BallRelation::FirstInsideSecond
        } else {
            BallRelation::Disjoint
        }
    } else if dist_within(ga) {
        BallRelation::SecondInsideFirst
    } else {
        BallRelation::Disjoint
    })
}

/// Haar measure of `ball` intersected with the origin-centered sphere of
/// radius `p^sphere_log_radius`.
///
/// If the ball misses the origin, all its points share the norm of its
/// center, so the intersection is all of the ball or nothing. If the ball
/// contains the origin it is origin-centered, and it meets exactly the
/// spheres of radius up to its own.
pub fn ball_sphere_intersection_measure(ball: &Ball, sphere_log_radius: i64) -> Rat {
    let n = ball.dim() as i64;
    let p = ball.prime();
    match ball.center.norm_log() {
        Some(cl) if cl > ball.log_radius => {
            if sphere_log_radius == cl {
                ball.measure()
            } else {
                Rat::zero()
            }
        }
        _ => {
            if sphere_log_radius <= ball.log_radius {
                ppow(p, sphere_log_radius * n) * (Rat::one() - ppow(p, -n))
            } else {
                Rat::zero()
            }
        }
    }
}
