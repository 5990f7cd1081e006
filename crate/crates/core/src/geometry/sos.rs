use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::Result;
use crate::manifold::{Manifold, Tangent};
use crate::par::{map_range, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SosVerdict {
    /// At least one hypothesis fails; nothing is asserted.
    HypothesesFail,
    /// Both hypotheses hold and `||c|| <= ||a||`.
    Certified,
    /// Both hypotheses hold but `||c|| > ||a|| + 1e-10`.
    Counterexample,
}

/// Checks the extragradient norm certificate on a triple of vectors at one point.
///
/// With `a = F(z_t)`, `b = F(z~_t)`, `c = F(z_{t+1})`: if `<a - c, b> >= 0` and
/// `||b - c||^2 <= (L eta)^2 ||b - a||^2` with `L eta <= 1`, then `||c|| <= ||a||`.
pub fn sos_certificate_check(
    m: &Manifold,
    a: &Tangent,
    b: &Tangent,
    c: &Tangent,
    l_eta: f64,
) -> Result<SosVerdict> {
    let a_minus_c = a.sub(c)?;
    let b_minus_c = b.sub(c)?;
    let b_minus_a = b.sub(a)?;
    let first = m.inner(&a_minus_c, b)? >= -1e-12;
    let lhs = m.inner(&b_minus_c, &b_minus_c)?;
    let second = lhs <= l_eta * l_eta * m.inner(&b_minus_a, &b_minus_a)? + 1e-12;
    if !(first && second && (0.0..=1.0).contains(&l_eta)) {
        return Ok(SosVerdict::HypothesesFail);
    }
    if m.norm(c) <= m.norm(a) + 1e-10 {
        Ok(SosVerdict::Certified)
    } else {
        Ok(SosVerdict::Counterexample)
    }
}

/// Tally of a randomized certificate search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SosSearch {
    pub drawn: u64,
    pub certified: u64,
    pub counterexamples: u64,
}

/// Draws triples in `R^dim` biased toward the hypotheses' boundary until
/// `target` of them satisfy both hypotheses.
pub fn sos_random_search(target: u64, dim: usize, seed: u64, exec: Execution) -> SosSearch {
    const CHUNK: u64 = 4096;
    let m = Manifold::euclidean(dim);
    let o = m.origin();
    let chunks = target.div_ceil(CHUNK) as usize;
    let parts = map_range(exec, chunks, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut tally = SosSearch::default();
        let quota = CHUNK.min(target - k as u64 * CHUNK);
        while tally.certified + tally.counterexamples < quota {
            tally.drawn += 1;
            let mut gauss = || nalgebra::DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let a = gauss();
            let b = gauss();
            let dir = gauss();
            let l_eta: f64 = rng.random();
            // c = b + r * dir with ||c - b|| at most L eta ||b - a||
            let radius = l_eta * (&b - &a).norm() * rng.random::<f64>().sqrt();
            let c = &b + dir.normalize() * radius;
            let t = |v: nalgebra::DVector<f64>| Tangent::from_raw(o.clone(), v);
            match sos_certificate_check(&m, &t(a), &t(b), &t(c), l_eta).expect("common base") {
                SosVerdict::HypothesesFail => {}
                SosVerdict::Certified => tally.certified += 1,
                SosVerdict::Counterexample => tally.counterexamples += 1,
            }
        }
        tally
    });
    parts.into_iter().fold(SosSearch::default(), |acc, p| SosSearch {
        drawn: acc.drawn + p.drawn,
        certified: acc.certified + p.certified,
        counterexamples: acc.counterexamples + p.counterexamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vecs(m: &Manifold, v: &[&[f64]]) -> Vec<Tangent> {
        let o = m.origin();
        v.iter().map(|c| m.tangent(&o, c.to_vec()).unwrap()).collect()
    }

    #[test]
    fn identity_triple_is_certified() {
        let m = Manifold::euclidean(2);
        let t = vecs(&m, &[&[0.4, -1.0]]);
        let v = sos_certificate_check(&m, &t[0], &t[0], &t[0], 0.3).unwrap();
        assert_eq!(v, SosVerdict::Certified);
    }

    #[test]
    fn hand_substituted_example() {
        let m = Manifold::euclidean(2);
        let t = vecs(&m, &[&[1.0, 0.0], &[0.5, 0.0], &[0.6, 0.0]]);
        let v = sos_certificate_check(&m, &t[0], &t[1], &t[2], 0.5).unwrap();
        assert_eq!(v, SosVerdict::Certified);
    }

    #[test]
    fn failing_hypothesis_asserts_nothing() {
        let m = Manifold::euclidean(1);
        // <a - c, b> = <-1, 1> < 0
        let t = vecs(&m, &[&[1.0], &[1.0], &[2.0]]);
        let v = sos_certificate_check(&m, &t[0], &t[1], &t[2], 1.0).unwrap();
        assert_eq!(v, SosVerdict::HypothesesFail);
    }

    #[test]
    fn c_equal_b_with_unit_l_eta() {
        let m = Manifold::euclidean(3);
        let mut found = 0;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        while found < 2000 {
            let g = |rng: &mut ChaCha8Rng| (0..3).map(|_| rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>();
            let (a, b) = (g(&mut rng), g(&mut rng));
            let t = vecs(&m, &[&a, &b]);
            match sos_certificate_check(&m, &t[0], &t[1], &t[1], 1.0).unwrap() {
                SosVerdict::Counterexample => panic!("counterexample {a:?} {b:?}"),
                SosVerdict::Certified => found += 1,
                SosVerdict::HypothesesFail => {}
            }
        }
    }

    #[test]
    fn mixed_bases_are_rejected() {
        let m = Manifold::euclidean(1);
        let a = m.tangent(&m.point(vec![0.0]).unwrap(), vec![1.0]).unwrap();
        let b = m.tangent(&m.point(vec![1.0]).unwrap(), vec![1.0]).unwrap();
        assert!(sos_certificate_check(&m, &a, &b, &a, 0.5).is_err());
    }

    #[test]
    fn search_is_deterministic_across_execution_modes() {
        let s = sos_random_search(10_000, 3, 5, Execution::Sequential);
        let p = sos_random_search(10_000, 3, 5, Execution::Parallel);
        assert_eq!(s, p);
        assert_eq!(s.certified, 10_000);
        assert_eq!(s.counterexamples, 0);
    }
}
