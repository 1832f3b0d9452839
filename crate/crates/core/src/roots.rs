//! Bracketed root finding for monotone functions that carry an expensive
//! by-product (the block spectra) along with each evaluation.

use std::rc::Rc;

use crate::error::{BdgError, Result};

/// One evaluation: abscissa, residual and its payload.
pub(crate) struct Sample<P> {
    pub x: f64,
    pub f: f64,
    pub payload: Rc<P>,
}

impl<P> Clone for Sample<P> {
    fn clone(&self) -> Self {
        Sample {
            x: self.x,
            f: self.f,
            payload: Rc::clone(&self.payload),
        }
    }
}

pub(crate) struct Found<P> {
    pub best: Sample<P>,
    /// Secant slope between the last two distinct evaluations, if any.
    pub slope: Option<f64>,
    pub evaluations: usize,
}

/// Root of an increasing function, starting from `x0` with a slope guess.
///
/// A secant walk (overshooting by half a step) brackets the root, then
/// Brent's method refines it until `|f| <= ftol`.
pub(crate) fn solve_increasing<P, F>(
    mut eval: F,
    x0: f64,
    slope_guess: f64,
    ftol: f64,
    max_evaluations: usize,
) -> Result<Found<P>>
where
    F: FnMut(f64) -> Result<(f64, P)>,
{
    let mut count = 0usize;
    let mut sample = |x: f64, count: &mut usize| -> Result<Sample<P>> {
        *count += 1;
        let (f, p) = eval(x)?;
        Ok(Sample { x, f, payload: Rc::new(p) })
    };
    let mut a = sample(x0, &mut count)?;
    if a.f.abs() <= ftol {
        return Ok(Found { best: a, slope: None, evaluations: count });
    }
    let mut slope = if slope_guess > 0.0 && slope_guess.is_finite() { slope_guess } else { 1.0 };
    let mut step = -a.f / slope;
    loop {
        if count >= max_evaluations {
            return Err(BdgError::BracketFailure { lo: a.x, hi: a.x + step, residual: a.f });
        }
        let b = sample(a.x + step, &mut count)?;
        if b.f.abs() <= ftol {
            let s = secant(&a, &b);
            return Ok(Found { best: b, slope: s, evaluations: count });
        }
        if (a.f < 0.0) != (b.f < 0.0) {
            let (lo, hi) = if a.x < b.x { (a, b) } else { (b, a) };
            return brent(&mut |x| sample(x, &mut count), lo, hi, ftol, max_evaluations)
                .map(|mut found| {
                    found.evaluations = count;
                    found
                });
        }
        match secant(&a, &b) {
            Some(s) => {
                slope = s;
                step = -1.5 * b.f / slope;
            }
            None => step *= 2.0,
        }
        a = b;
    }
}

fn secant<P>(a: &Sample<P>, b: &Sample<P>) -> Option<f64> {
    let s = (b.f - a.f) / (b.x - a.x);
    (s > 0.0 && s.is_finite()).then_some(s)
}

/// Brent's method on a sign-changing bracket.
fn brent<P>(
    eval: &mut dyn FnMut(f64) -> Result<Sample<P>>,
    lo: Sample<P>,
    hi: Sample<P>,
    ftol: f64,
    max_evaluations: usize,
) -> Result<Found<P>> {
    let mut a = lo;
    let mut b = hi;
    let mut c = b.clone();
    let mut d = b.x - a.x;
    let mut e = d;
    let mut prev: Option<Sample<P>> = None;
    for _ in 0..max_evaluations {
        if (b.f > 0.0) == (c.f > 0.0) {
            c = a.clone();
            d = b.x - a.x;
            e = d;
        }
        if c.f.abs() < b.f.abs() {
            a = b;
            b = c.clone();
            c = a.clone();
        }
        let tol1 = 2.0 * f64::EPSILON * b.x.abs();
        let xm = 0.5 * (c.x - b.x);
        if b.f.abs() <= ftol || xm.abs() <= tol1 {
            let slope = prev.as_ref().and_then(|p| secant(p, &b)).or_else(|| secant(&a, &b));
            return if b.f.abs() <= ftol {
                Ok(Found { best: b, slope, evaluations: 0 })
            } else {
                Err(BdgError::NumberNotAttained { residual: b.f.abs(), tolerance: ftol })
            };
        }
        if e.abs() >= tol1 && a.f.abs() > b.f.abs() {
            let s = b.f / a.f;
            let (mut p, mut q);
            if a.x == c.x {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = a.f / c.f;
                let r = b.f / c.f;
                p = s * (2.0 * xm * qq * (qq - r) - (b.x - a.x) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        prev = Some(b.clone());
        a = b.clone();
        let x = if d.abs() > tol1 { b.x + d } else { b.x + tol1.copysign(xm) };
        b = eval(x)?;
    }
    Err(BdgError::NumberNotAttained { residual: b.f.abs(), tolerance: ftol })
}
