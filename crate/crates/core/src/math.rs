/// `base^exp` by repeated squaring; `core` has no `powi` without `std`.
pub(crate) fn powi(base: f64, exp: u32) -> f64 {
    let (mut acc, mut b, mut e) = (1.0, base, exp);
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

pub(crate) fn abs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_repeated_product() {
        let mut p = 1.0;
        for e in 0..40 {
            assert!(abs(powi(0.99, e) - p) < 1e-15);
            p *= 0.99;
        }
    }
}
