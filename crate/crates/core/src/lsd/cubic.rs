//! Roots of a cubic with complex coefficients: Cardano followed by Newton
//! polishing of each root against the original coefficients.

use num_complex::Complex64;

/// Coefficients of `c3·z³ + c2·z² + c1·z + c0`.
#[derive(Debug, Clone, Copy)]
pub struct Cubic {
    pub c3: Complex64,
    pub c2: Complex64,
    pub c1: Complex64,
    pub c0: Complex64,
}

impl Cubic {
    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        ((self.c3 * z + self.c2) * z + self.c1) * z + self.c0
    }

    #[inline]
    fn derivative(&self, z: Complex64) -> Complex64 {
        (self.c3 * 3.0 * z + self.c2 * 2.0) * z + self.c1
    }

    /// All three roots, with multiplicity. `c3` must be nonzero.
    pub fn roots(&self) -> [Complex64; 3] {
        let a = self.c2 / self.c3;
        let b = self.c1 / self.c3;
        let c = self.c0 / self.c3;
        // z = w − a/3 gives w³ + p·w + q = 0.
        let shift = a / 3.0;
        let p = b - a * a / 3.0;
        let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
        let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let u3_plus = -q / 2.0 + disc;
        let u3_minus = -q / 2.0 - disc;
        let u3 = if u3_plus.norm() >= u3_minus.norm() { u3_plus } else { u3_minus };
        let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        let mut roots = [Complex64::new(0.0, 0.0); 3];
        if u3.norm() == 0.0 {
            // p = q = 0: triple root.
            roots = [-shift; 3];
        } else {
            let u = u3.powf(1.0 / 3.0);
            let mut rot = Complex64::new(1.0, 0.0);
            for r in roots.iter_mut() {
                let uk = u * rot;
                *r = uk - p / (3.0 * uk) - shift;
                rot *= omega;
            }
        }
        for r in roots.iter_mut() {
            *r = self.polish(*r);
        }
        roots
    }

    fn polish(&self, mut z: Complex64) -> Complex64 {
        let mut best = self.eval(z).norm();
        for _ in 0..8 {
            let d = self.derivative(z);
            if d.norm() == 0.0 || best == 0.0 {
                break;
            }
            let next = z - self.eval(z) / d;
            let res = self.eval(next).norm();
            if !(res < best) {
                break;
            }
            z = next;
            best = res;
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_roots(r: [Complex64; 3]) -> Cubic {
        Cubic {
            c3: c(1.0, 0.0),
            c2: -(r[0] + r[1] + r[2]),
            c1: r[0] * r[1] + r[0] * r[2] + r[1] * r[2],
            c0: -(r[0] * r[1] * r[2]),
        }
    }

    fn matched(found: [Complex64; 3], want: [Complex64; 3], tol: f64) -> bool {
        let mut used = [false; 3];
        want.iter().all(|w| {
            let hit = (0..3).find(|&i| !used[i] && (found[i] - w).norm() < tol);
            hit.map(|i| used[i] = true).is_some()
        })
    }

    #[test]
    fn real_roots() {
        let want = [c(1.0, 0.0), c(2.0, 0.0), c(-3.0, 0.0)];
        assert!(matched(from_roots(want).roots(), want, 1e-12));
    }

    #[test]
    fn triple_and_double_roots() {
        let want = [c(2.0, 0.0); 3];
        assert!(matched(from_roots(want).roots(), want, 1e-5));
        let want = [c(1.0, 1.0), c(1.0, 1.0), c(-1.0, 0.0)];
        assert!(matched(from_roots(want).roots(), want, 1e-6));
    }

    proptest! {
        #[test]
        fn recovers_random_roots(
            re in prop::array::uniform3(-10.0f64..10.0),
            im in prop::array::uniform3(-10.0f64..10.0),
            scale in 0.01f64..100.0,
        ) {
            let want = [c(re[0], im[0]), c(re[1], im[1]), c(re[2], im[2])];
            let mut cubic = from_roots(want);
            cubic.c3 *= scale;
            cubic.c2 *= scale;
            cubic.c1 *= scale;
            cubic.c0 *= scale;
            for r in cubic.roots() {
                let size = 1.0 + r.norm().powi(3);
                prop_assert!(cubic.eval(r).norm() <= 1e-9 * scale * size * 100.0);
            }
        }
    }
}
