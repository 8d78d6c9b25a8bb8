//! Rational recognition of real numbers by continued-fraction convergents.

use rug::{Float, Integer, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum Recognition {
    Accepted(Rational),
    /// No convergent passed; carries the closest candidate seen and its error.
    Rejected {
        best: Rational,
        error: f64,
    },
}

/// Parameters of the acceptance test.
#[derive(Clone, Debug)]
pub struct RecognizeParams {
    pub max_den: Integer,
    pub tol: Float,
    /// Minimal ratio between the next convergent's denominator and the accepted one.
    pub guard: Integer,
}

impl RecognizeParams {
    /// Defaults tied to the working precision: tol = 2^(-bits/2), guard = 2^(bits/8).
    pub fn for_bits(bits: u32, max_den: Integer) -> Self {
        RecognizeParams {
            max_den,
            tol: Float::with_val(64, Float::i_exp(1, -((bits / 2) as i32))),
            guard: Integer::from(1) << (bits / 8),
        }
    }
}

/// Best rational approximation of `x` that passes the tolerance and gap tests.
pub fn recognize(x: &Float, params: &RecognizeParams) -> Recognition {
    let Some(exact) = x.to_rational() else {
        return Recognition::Rejected {
            best: Rational::new(),
            error: f64::INFINITY,
        };
    };
    let (mut num, mut den) = exact.into_numer_denom();
    // convergents h_k / k_k
    let (mut h_prev, mut h) = (Integer::from(0), Integer::from(1));
    let (mut k_prev, mut k) = (Integer::from(1), Integer::from(0));
    let mut best: Option<(Rational, Float)> = None;
    let mut pending: Option<(Rational, Float)> = None;
    loop {
        if den == 0 {
            // expansion terminated: the last convergent equals x exactly
            return match pending {
                Some((r, _)) => Recognition::Accepted(r),
                None => reject(best),
            };
        }
        let (a, r) = num.clone().div_rem_floor(den.clone());
        num = std::mem::replace(&mut den, r);
        let h_next = Integer::from(&a * &h) + &h_prev;
        let k_next = Integer::from(&a * &k) + &k_prev;
        if let Some((cand, _)) = pending.take() {
            if k_next >= Integer::from(&k * &params.guard) {
                return Recognition::Accepted(cand);
            }
        }
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        if k > params.max_den {
            return reject(best);
        }
        let cand = Rational::from((h.clone(), k.clone()));
        let err = Float::with_val(x.prec(), x - &cand).abs();
        if best.as_ref().is_none_or(|(_, e)| err < *e) {
            best = Some((cand.clone(), err.clone()));
        }
        if err < params.tol {
            pending = Some((cand, err));
        }
    }
}

fn reject(best: Option<(Rational, Float)>) -> Recognition {
    match best {
        Some((r, e)) => Recognition::Rejected {
            best: r,
            error: e.to_f64(),
        },
        None => Recognition::Rejected {
            best: Rational::new(),
            error: f64::INFINITY,
        },
    }
}
