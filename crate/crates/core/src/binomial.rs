/// `C(n, k)` by the multiplicative recurrence, in double precision.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// `base^exp` with `0^0 = 1`.
pub(crate) fn pow(base: f64, exp: usize) -> f64 {
    base.powi(exp as i32)
}

/// Kahan-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(n: u64, k: u64) -> u128 {
        let mut c: u128 = 1;
        for i in 0..k as u128 {
            c = c * (n as u128 - i) / (i + 1);
        }
        c
    }

    #[test]
    fn matches_integer_binomials_up_to_sixty() {
        for n in 0..=60usize {
            for k in 0..=n {
                let want = exact(n as u64, k as u64) as f64;
                let got = binomial(n, k);
                assert!(
                    (got - want).abs() <= want * 1e-15,
                    "C({n},{k}): {got} vs {want}"
                );
            }
        }
        assert_eq!(binomial(3, 5), 0.0);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = Compensated::default();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-20);
    }
}
