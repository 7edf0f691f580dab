//! Distances and divergences between floret probability vectors.
//!
//! | name | form |
//! |------|------|
//! | `kl` | KL(p‖q) + KL(q‖p) |
//! | `tv` | ½ Σ \|p − q\| |
//! | `hl` | √(1 − Σ √(p q)) |
//! | `bh` | −ln Σ √(p q) |
//! | `lp:<p>` | (Σ \|p − q\|^p)^(1/p) |
//! | `ry:<α>` | D_α(p‖q) + D_α(q‖p), D_α = ln(Σ p^α q^(1−α)) / (α − 1) |
//! | `cd` | ln max(p/q) − ln min(p/q) |
//!
//! Zero entries follow `0·ln(0/x) = 0`, `x·ln(x/0) = +∞` and `0/0 = 1`; the
//! divergences that are not bounded may return `+∞` when supports differ.

use crate::error::{Error, Result};
use crate::num::Real;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub type DistanceFn<T> = Arc<dyn Fn(&[T], &[T]) -> T + Send + Sync>;

#[derive(Clone, Default)]
pub enum Divergence<T: Real = f64> {
    #[default]
    KlSym,
    TotalVariation,
    Hellinger,
    Bhattacharyya,
    Lp(T),
    RenyiSym(T),
    ChanDarwiche,
    Custom(DistanceFn<T>),
}

impl<T: Real> fmt::Debug for Divergence<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl<T: Real> fmt::Display for Divergence<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::KlSym => write!(f, "kl"),
            Divergence::TotalVariation => write!(f, "tv"),
            Divergence::Hellinger => write!(f, "hl"),
            Divergence::Bhattacharyya => write!(f, "bh"),
            Divergence::Lp(p) => write!(f, "lp:{}", p),
            Divergence::RenyiSym(a) => write!(f, "ry:{}", a),
            Divergence::ChanDarwiche => write!(f, "cd"),
            Divergence::Custom(_) => write!(f, "custom"),
        }
    }
}

impl<T: Real> FromStr for Divergence<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let param = |default: Option<f64>| -> Result<T> {
            match (arg, default) {
                (Some(a), _) => a
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::InvalidArgument(format!("bad divergence parameter `{}`", a))),
                (None, Some(d)) => Ok(T::lit(d)),
                (None, None) => Err(Error::InvalidArgument(format!("divergence `{}` needs a parameter", name))),
            }
        };
        let d = match name {
            "kl" | "kullback" => Divergence::KlSym,
            "tv" | "total-variation" => Divergence::TotalVariation,
            "hl" | "hellinger" => Divergence::Hellinger,
            "bh" | "bhattacharyya" => Divergence::Bhattacharyya,
            "lp" => Divergence::Lp(param(Some(2.0))?),
            "ry" | "renyi" => Divergence::RenyiSym(param(Some(2.0))?),
            "cd" | "chan-darwiche" => Divergence::ChanDarwiche,
            _ => return Err(Error::InvalidArgument(format!("unknown divergence `{}`", s))),
        };
        if arg.is_some() && !matches!(d, Divergence::Lp(_) | Divergence::RenyiSym(_)) {
            return Err(Error::InvalidArgument(format!("divergence `{}` takes no parameter", name)));
        }
        d.check()?;
        Ok(d)
    }
}

impl<T: Real> Divergence<T> {
    fn check(&self) -> Result<()> {
        match self {
            Divergence::Lp(p) if !(*p >= T::one()) => {
                Err(Error::InvalidArgument(format!("lp order must be >= 1, got {}", p)))
            }
            Divergence::RenyiSym(a) if !(*a > T::zero()) || *a == T::one() => {
                Err(Error::InvalidArgument(format!("renyi order must be > 0 and != 1, got {}", a)))
            }
            _ => Ok(()),
        }
    }

    /// Divergence between two probability vectors of equal length.
    pub fn between(&self, p: &[T], q: &[T]) -> Result<T> {
        self.check()?;
        if p.len() != q.len() {
            return Err(Error::InvalidArgument(format!(
                "vectors of different lengths ({} and {})",
                p.len(),
                q.len()
            )));
        }
        if p.len() < 2 {
            return Err(Error::InvalidArgument("vectors need at least two entries".into()));
        }
        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(64.0));
        for v in [p, q] {
            let s: T = v.iter().copied().sum();
            if (s - T::one()).abs() > tol || v.iter().any(|x| !(*x >= T::zero())) {
                return Err(Error::InvalidArgument("not a probability vector".into()));
            }
        }
        Ok(self.eval(p, q))
    }

    /// Evaluates without validating the inputs.
    pub fn eval(&self, p: &[T], q: &[T]) -> T {
        match self {
            Divergence::KlSym => kl_sym(p, q),
            Divergence::TotalVariation => total_variation(p, q),
            Divergence::Hellinger => hellinger(p, q),
            Divergence::Bhattacharyya => bhattacharyya(p, q),
            Divergence::Lp(o) => lp(p, q, *o),
            Divergence::RenyiSym(a) => renyi(p, q, *a) + renyi(q, p, *a),
            Divergence::ChanDarwiche => chan_darwiche(p, q),
            Divergence::Custom(f) => f(p, q),
        }
    }
}

pub fn divergence<T: Real>(spec: &Divergence<T>, p: &[T], q: &[T]) -> Result<T> {
    spec.between(p, q)
}

#[inline]
fn kl_term<T: Real>(a: T, b: T) -> T {
    if a == T::zero() {
        T::zero()
    } else if b == T::zero() {
        T::infinity()
    } else {
        a * (a / b).ln()
    }
}

fn kl_sym<T: Real>(p: &[T], q: &[T]) -> T {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| kl_term(a, b) + kl_term(b, a))
        .sum::<T>()
        .max(T::zero())
}

fn total_variation<T: Real>(p: &[T], q: &[T]) -> T {
    T::lit(0.5) * p.iter().zip(q).map(|(&a, &b)| (a - b).abs()).sum::<T>()
}

fn bhattacharyya_coefficient<T: Real>(p: &[T], q: &[T]) -> T {
    p.iter().zip(q).map(|(&a, &b)| (a * b).sqrt()).sum()
}

fn hellinger<T: Real>(p: &[T], q: &[T]) -> T {
    (T::one() - bhattacharyya_coefficient(p, q)).max(T::zero()).sqrt()
}

fn bhattacharyya<T: Real>(p: &[T], q: &[T]) -> T {
    (-bhattacharyya_coefficient(p, q).ln()).max(T::zero())
}

fn lp<T: Real>(p: &[T], q: &[T], order: T) -> T {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| (a - b).abs().powf(order))
        .sum::<T>()
        .powf(order.recip())
}

fn renyi<T: Real>(p: &[T], q: &[T], alpha: T) -> T {
    let s: T = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            if a == T::zero() {
                T::zero()
            } else if b == T::zero() {
                if alpha > T::one() {
                    T::infinity()
                } else {
                    T::zero()
                }
            } else {
                a.powf(alpha) * b.powf(T::one() - alpha)
            }
        })
        .sum();
    (s.ln() / (alpha - T::one())).max(T::zero())
}

fn chan_darwiche<T: Real>(p: &[T], q: &[T]) -> T {
    let mut hi = T::neg_infinity();
    let mut lo = T::infinity();
    for (&a, &b) in p.iter().zip(q) {
        let x = match (a == T::zero(), b == T::zero()) {
            (true, true) => T::zero(),
            (false, true) => T::infinity(),
            (true, false) => T::neg_infinity(),
            (false, false) => a.ln() - b.ln(),
        };
        hi = hi.max(x);
        lo = lo.min(x);
    }
    (hi - lo).max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: [f64; 2] = [0.5, 0.5];
    const Q: [f64; 2] = [0.25, 0.75];

    fn all() -> Vec<Divergence> {
        vec![
            Divergence::KlSym,
            Divergence::TotalVariation,
            Divergence::Hellinger,
            Divergence::Bhattacharyya,
            Divergence::Lp(1.0),
            Divergence::Lp(3.0),
            Divergence::RenyiSym(2.0),
            Divergence::RenyiSym(0.5),
            Divergence::ChanDarwiche,
        ]
    }

    #[test]
    fn identical_vectors_are_at_zero() {
        for d in all() {
            assert_eq!(d.between(&[0.2, 0.3, 0.5], &[0.2, 0.3, 0.5]).unwrap(), 0.0, "{}", d);
            assert_eq!(d.between(&[0.0, 1.0], &[0.0, 1.0]).unwrap(), 0.0, "{}", d);
        }
    }

    #[test]
    fn disjoint_support() {
        let tv = Divergence::<f64>::TotalVariation.between(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(tv, 1.0);
        assert!(Divergence::<f64>::KlSym.between(&[1.0, 0.0], &[0.0, 1.0]).unwrap().is_infinite());
        assert!(Divergence::<f64>::ChanDarwiche.between(&[1.0, 0.0], &[0.5, 0.5]).unwrap().is_infinite());
        assert!(Divergence::<f64>::RenyiSym(2.0).between(&[1.0, 0.0], &[0.0, 1.0]).unwrap().is_infinite());
        assert_eq!(Divergence::<f64>::Hellinger.between(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn reference_values() {
        // direct evaluation of KL(p||q) + KL(q||p)
        let oracle: f64 = P.iter().zip(&Q).map(|(a, b)| a * (a / b).ln() + b * (b / a).ln()).sum();
        let kl = Divergence::KlSym.between(&P, &Q).unwrap();
        assert!((kl - oracle).abs() < 1e-15);
        assert!((kl - 0.274653).abs() < 1e-6);
        let cd = Divergence::ChanDarwiche.between(&P, &Q).unwrap();
        assert!((cd - 3f64.ln()).abs() < 1e-12);
        let bh = Divergence::Bhattacharyya.between(&P, &Q).unwrap();
        let bc = (0.5f64 * 0.25).sqrt() + (0.5f64 * 0.75).sqrt();
        assert!((bh + bc.ln()).abs() < 1e-15);
        let ry = Divergence::RenyiSym(2.0).between(&P, &Q).unwrap();
        let d_pq = (0.25f64 / 0.25 + 0.25 / 0.75).ln();
        let d_qp = (0.0625f64 / 0.5 + 0.5625 / 0.5).ln();
        assert!((ry - d_pq - d_qp).abs() < 1e-12);
    }

    #[test]
    fn l1_is_twice_tv() {
        let l1 = Divergence::Lp(1.0).between(&P, &Q).unwrap();
        let tv = Divergence::TotalVariation.between(&P, &Q).unwrap();
        assert!((l1 - 2.0 * tv).abs() < 1e-15);
    }

    #[test]
    fn parsing() {
        let d: Divergence = "ry".parse().unwrap();
        assert!(matches!(d, Divergence::RenyiSym(a) if a == 2.0));
        let d: Divergence = "lp:1".parse().unwrap();
        assert!(matches!(d, Divergence::Lp(p) if p == 1.0));
        for bad in ["lp:0.5", "ry:1", "ry:-2", "kl:3", "xx", "lp:abc"] {
            assert!(bad.parse::<Divergence>().is_err(), "{}", bad);
        }
        for name in ["kl", "tv", "hl", "bh", "lp:2", "ry:0.5", "cd"] {
            let d: Divergence = name.parse().unwrap();
            assert_eq!(d.to_string(), name);
        }
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(Divergence::KlSym.between(&[0.5, 0.5], &[1.0 / 3.0; 3]).is_err());
        assert!(Divergence::KlSym.between(&[1.0], &[1.0]).is_err());
        assert!(Divergence::KlSym.between(&[0.5, 0.6], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn custom_function() {
        let d: Divergence = Divergence::Custom(Arc::new(|p: &[f64], q: &[f64]| (p[0] - q[0]).abs()));
        assert_eq!(d.between(&P, &Q).unwrap(), 0.25);
    }

    #[test]
    fn single_precision() {
        let kl = Divergence::<f32>::KlSym.between(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert!((kl - 0.274653).abs() < 1e-5);
    }
}
