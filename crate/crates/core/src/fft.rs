//! Minimal complex FFT: iterative radix-2 for power-of-two sizes and
//! Bluestein's chirp-z for everything else. Unnormalized in both directions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub(crate) struct Fft {
    len: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Radix2(Radix2),
    Bluestein {
        inner: Radix2,
        // exp(-i*pi*k^2/n), k = 0..n
        chirp: Vec<Complex64>,
        // forward transform of the conjugate chirp, wrapped to the inner length
        kernel_hat: Vec<Complex64>,
    },
}

#[derive(Debug, Clone)]
struct Radix2 {
    len: usize,
    // exp(-2*pi*i*k/len), k = 0..len/2
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        let twiddles = (0..len / 2)
            .map(|k| {
                let angle = -2.0 * PI * k as f64 / len as f64;
                Complex64::new(libm::cos(angle), libm::sin(angle))
            })
            .collect();
        Self { len, twiddles }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.len;
        debug_assert_eq!(buf.len(), n);
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}

impl Fft {
    pub(crate) fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        if len.is_power_of_two() {
            return Self { len, kind: Kind::Radix2(Radix2::new(len)) };
        }
        let inner_len = (2 * len - 1).next_power_of_two();
        let inner = Radix2::new(inner_len);
        let two_n = 2 * len as u128;
        let chirp: Vec<Complex64> = (0..len)
            .map(|k| {
                // k^2 mod 2n keeps the angle small for large k
                let k2 = (k as u128 * k as u128) % two_n;
                let angle = -PI * k2 as f64 / len as f64;
                Complex64::new(libm::cos(angle), libm::sin(angle))
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); inner_len];
        kernel[0] = chirp[0].conj();
        for k in 1..len {
            kernel[k] = chirp[k].conj();
            kernel[inner_len - k] = chirp[k].conj();
        }
        inner.process(&mut kernel, false);
        Self { len, kind: Kind::Bluestein { inner, chirp, kernel_hat: kernel } }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, false);
    }

    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, true);
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.len, "buffer length does not match FFT plan");
        match &self.kind {
            Kind::Radix2(r) => r.process(buf, inverse),
            Kind::Bluestein { inner, chirp, kernel_hat } => {
                // inverse(x) = conj(forward(conj(x)))
                let m = inner.len;
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for (k, (w, x)) in work.iter_mut().zip(buf.iter()).enumerate() {
                    let x = if inverse { x.conj() } else { *x };
                    *w = x * chirp[k];
                }
                inner.process(&mut work, false);
                for (w, k) in work.iter_mut().zip(kernel_hat) {
                    *w *= k;
                }
                inner.process(&mut work, true);
                let scale = 1.0 / m as f64;
                for (k, out) in buf.iter_mut().enumerate() {
                    let v = work[k] * scale * chirp[k];
                    *out = if inverse { v.conj() } else { v };
                }
            }
        }
    }
}
