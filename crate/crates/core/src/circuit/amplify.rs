use crate::error::{Error, Result};

/// Probability that a strict majority of `k` independent Bernoulli(`p`)
/// trials succeed: sum over j > k/2 of C(k, j) p^j (1 - p)^(k - j).
pub fn amplify(p: f64, k: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::Domain(format!("repetition count {k} must be odd and positive")));
    }
    // Sum whichever tail is small, so results near 1 do not lose precision.
    if p > 0.5 {
        return Ok((1.0 - majority_tail(1.0 - p, k)).clamp(0.0, 1.0));
    }
    Ok(majority_tail(p, k).clamp(0.0, 1.0))
}

fn majority_tail(p: f64, k: u32) -> f64 {
    let q = 1.0 - p;
    let mut coeff = 1.0f64; // C(k, 0)
    let mut total = 0.0;
    for j in 0..=k {
        if j > 0 {
            coeff = coeff * f64::from(k - j + 1) / f64::from(j);
        }
        if 2 * j > k {
            total += coeff * p.powi(j as i32) * q.powi((k - j) as i32);
        }
    }
    total
}
