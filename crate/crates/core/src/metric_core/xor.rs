//! Distances of the form `table[code(x) ^ code(y)]` on binary word spaces.
//!
//! Set diameters and set-to-set distances only need the difference set
//! `{code(x) ^ code(y)}`, which is an XOR convolution of two indicators and
//! is computed exactly with an integer Walsh–Hadamard transform.

/// Largest code width for the transform path; counts stay below `2^63`.
pub const MAX_XOR_BITS: usize = 20;

#[derive(Clone, Copy)]
pub struct XorView<'a> {
    pub bits: usize,
    pub codes: &'a [u32],
    pub table: &'a [f64],
}

fn fwht(a: &mut [i64]) {
    let n = a.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (x, y) = (a[i], a[i + h]);
                a[i] = x + y;
                a[i + h] = x - y;
            }
        }
        h *= 2;
    }
}

impl XorView<'_> {
    fn transformed(&self, pts: &[usize]) -> Vec<i64> {
        let mut v = vec![0i64; 1 << self.bits];
        for &i in pts {
            v[self.codes[i] as usize] = 1;
        }
        fwht(&mut v);
        v
    }

    /// `out[z]` is true when `z = code(x) ^ code(y)` for some `x ∈ a`, `y ∈ b`.
    pub fn difference_set(&self, a: &[usize], b: &[usize]) -> Vec<bool> {
        let mut fa = self.transformed(a);
        let fb = self.transformed(b);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x *= y;
        }
        fwht(&mut fa);
        fa.iter().map(|&c| c > 0).collect()
    }

    pub fn set_diameter(&self, set: &[usize]) -> f64 {
        if set.len() < 2 {
            return 0.0;
        }
        self.difference_set(set, set)
            .iter()
            .zip(self.table)
            .filter(|(hit, _)| **hit)
            .map(|(_, &t)| t)
            .fold(0.0, f64::max)
    }

    /// `min_{x ∈ a, y ∈ b} d(x, y)`; infinite when either side is empty.
    pub fn min_distance(&self, a: &[usize], b: &[usize]) -> f64 {
        if a.is_empty() || b.is_empty() {
            return f64::INFINITY;
        }
        self.difference_set(a, b)
            .iter()
            .zip(self.table)
            .filter(|(hit, _)| **hit)
            .map(|(_, &t)| t)
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_is_an_involution_up_to_scale() {
        let mut a: Vec<i64> = (0..16).map(|i| (i * 7 % 5) as i64).collect();
        let orig = a.clone();
        fwht(&mut a);
        fwht(&mut a);
        assert!(a.iter().zip(&orig).all(|(x, y)| *x == 16 * y));
    }

    #[test]
    fn difference_set_matches_pairs() {
        let codes = [0b000u32, 0b011, 0b101, 0b110];
        let table: Vec<f64> = (0..8).map(|z: u32| z.count_ones() as f64).collect();
        let v = XorView { bits: 3, codes: &codes, table: &table };
        let d = v.difference_set(&[0, 1], &[2]);
        let expect: Vec<bool> = (0..8).map(|z| z == 0b101 || z == 0b110).collect();
        assert_eq!(d, expect);
        assert_eq!(v.set_diameter(&[0, 1, 2, 3]), 2.0);
        assert_eq!(v.min_distance(&[0], &[1, 2]), 2.0);
    }
}
