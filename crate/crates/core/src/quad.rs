//! One-dimensional quadrature helpers built on Gauss-Legendre rules.

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// Composite Gauss-Legendre rule: `panels` equal subintervals, `degree` nodes each.
#[derive(Debug, Clone)]
pub struct Composite {
    rule: GaussLegendre,
    panels: usize,
}

impl Composite {
    pub fn new(degree: usize, panels: usize) -> Result<Self> {
        let rule = GaussLegendre::new(degree)
            .map_err(|e| Error::InvalidArgument(format!("Gauss-Legendre degree {degree}: {e}")))?;
        if panels == 0 {
            return Err(Error::InvalidArgument("need at least one panel".into()));
        }
        Ok(Self { rule, panels })
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let w = (b - a) / self.panels as f64;
        (0..self.panels)
            .map(|i| {
                let lo = a + i as f64 * w;
                self.rule.integrate(lo, lo + w, &mut f)
            })
            .sum()
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping once the bracket is
/// narrower than `xtol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket(format!(
            "f({lo}) = {flo} and f({hi}) = {fhi} have the same sign"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_integrates_polynomials_exactly() {
        let q = Composite::new(5, 3).unwrap();
        let v = q.integrate(0.0, 2.0, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-10);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-14).is_err());
    }
}
