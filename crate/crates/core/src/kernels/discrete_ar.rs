//! Discrete auto-regression on `[0, 1)`: `X_t = X_{t-1}/γ + ξ_t`, with `ξ_t`
//! uniform on `{0, 1/γ, …, (γ-1)/γ}`.

use crate::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Largest support the exact law enumeration will build.
pub const DISCRETE_AR_MAX_ATOMS: usize = 1 << 22;

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

fn check_state(x: f64) -> Result<()> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::DomainError(format!("state {x} outside [0, 1)")));
    }
    Ok(())
}

#[inline]
fn update(x: f64, gamma: f64, k: f64) -> f64 {
    (x / gamma + k / gamma).min(BELOW_ONE)
}

pub(super) fn apply(x: f64, gamma: u32, u: f64) -> Result<f64> {
    check_state(x)?;
    if gamma < 2 {
        return Err(Error::DomainError(format!("discrete base {gamma} < 2")));
    }
    let g = gamma as f64;
    let k = (u * g).floor().min(g - 1.0);
    Ok(update(x, g, k))
}

/// One step of the discrete auto-regression with base `gamma`.
pub fn discrete_ar_step(x: f64, gamma: u32, stream: &mut RngStream) -> Result<f64> {
    apply(x, gamma, stream.uniform())
}

/// Exact law of `X_t` started at `x`: `γ^t` atoms of mass `γ^{-t}`, returned
/// in increasing order.
pub fn discrete_ar_law(x: f64, gamma: u32, t: u32) -> Result<EmpiricalMeasure> {
    check_state(x)?;
    if gamma < 2 {
        return Err(Error::DomainError(format!("discrete base {gamma} < 2")));
    }
    let size = (gamma as u128).checked_pow(t).unwrap_or(u128::MAX);
    if size > DISCRETE_AR_MAX_ATOMS as u128 {
        return Err(Error::DomainError(format!(
            "law of {gamma}^{t} atoms exceeds the enumeration cap {DISCRETE_AR_MAX_ATOMS}"
        )));
    }
    let g = gamma as f64;
    let mut atoms = vec![x];
    for _ in 0..t {
        let mut next = Vec::with_capacity(atoms.len() * gamma as usize);
        for k in 0..gamma {
            let k = k as f64;
            next.extend(atoms.iter().map(|&a| update(a, g, k)));
        }
        atoms = next;
    }
    let n = atoms.len();
    let w = 1.0 / n as f64;
    EmpiricalMeasure::weighted_1d(&atoms, vec![w; n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::make_stream;

    #[test]
    fn zero_case() {
        assert_eq!(apply(0.0, 2, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn direct_update() {
        assert_eq!(apply(0.5, 2, 0.7).unwrap(), 0.75);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(matches!(apply(1.0, 2, 0.1), Err(Error::DomainError(_))));
        assert!(matches!(apply(-0.1, 2, 0.1), Err(Error::DomainError(_))));
        let mut rng = make_stream(0, 0);
        assert!(discrete_ar_step(1.5, 3, &mut rng).is_err());
    }

    #[test]
    fn stays_in_unit_interval() {
        let mut rng = make_stream(2, 0);
        let mut x = 1.0 - 1e-16;
        for g in [2, 3, 7] {
            for _ in 0..1000 {
                x = discrete_ar_step(x, g, &mut rng).unwrap();
                assert!((0.0..1.0).contains(&x));
            }
        }
        assert!(apply(BELOW_ONE, 3, BELOW_ONE).unwrap() < 1.0);
    }

    // brute-force oracle: enumerate every k-sequence and collect the endpoints
    fn enumerate(t: u32) -> Vec<f64> {
        let mut out = Vec::new();
        for code in 0u64..(1 << t) {
            let mut x = 0.0f64;
            for s in 0..t {
                let k = ((code >> s) & 1) as f64;
                x = x / 2.0 + k / 2.0;
            }
            out.push(x);
        }
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn law_from_zero_is_dyadic_grid() {
        for t in 0..=10u32 {
            let law = discrete_ar_law(0.0, 2, t).unwrap();
            let atoms = law.values_1d().unwrap();
            let expected = enumerate(t);
            assert_eq!(atoms.len(), 1 << t);
            for (j, (a, e)) in atoms.iter().zip(&expected).enumerate() {
                assert_eq!(*a, *e);
                assert_eq!(*a, j as f64 / (1u64 << t) as f64);
            }
            assert!(law.weights().iter().all(|&w| w == 1.0 / (1u64 << t) as f64));
        }
    }

    #[test]
    fn law_is_sorted() {
        let law = discrete_ar_law(0.3, 3, 6).unwrap();
        let a = law.values_1d().unwrap();
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn enumeration_cap() {
        assert!(discrete_ar_law(0.0, 2, 23).is_err());
    }
}
