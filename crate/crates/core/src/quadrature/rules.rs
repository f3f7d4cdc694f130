//! Fixed quadrature rules on the unit interval.
//!
//! Gauss rules come from the Jacobi matrix of the weight `t^power` on `[0, 1]`
//! (Golub-Welsch), with nodes polished by Newton steps on the orthonormal
//! recurrence and weights recomputed from the Christoffel numbers. The
//! tanh-sinh rule is used as an independent endpoint treatment.

use nalgebra::DMatrix;
use std::f64::consts::FRAC_PI_2;

/// Nodes in `[0, 1]` and weights for `∫_0^1 t^power f(t) dt ≈ Σ w_i f(t_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub power: f64,
}

impl Rule {
    pub fn gauss_legendre(n: usize) -> Rule {
        Rule::gauss_jacobi(n, 0.0)
    }

    /// Gauss rule for the weight `t^power` on `[0, 1]`, `power > -1`.
    pub fn gauss_jacobi(n: usize, power: f64) -> Rule {
        assert!(n >= 1, "rule order must be positive");
        assert!(power > -1.0, "weight exponent must exceed -1");
        let rec = Recurrence::new(n, power);

        let guesses = if n == 1 {
            vec![rec.diag[0]]
        } else {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for k in 0..n {
                m[(k, k)] = rec.diag[k];
                if k + 1 < n {
                    m[(k, k + 1)] = rec.off[k + 1];
                    m[(k + 1, k)] = rec.off[k + 1];
                }
            }
            let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev
        };

        let scale = 2f64.powf(power + 1.0);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for &x0 in &guesses {
            let mut x = x0;
            for _ in 0..3 {
                let (p, dp, _) = rec.eval(x);
                if dp == 0.0 {
                    break;
                }
                let step = p / dp;
                let next = x - step;
                if !(next > -1.0 && next < 1.0) {
                    break;
                }
                x = next;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, _, christoffel) = rec.eval(x);
            nodes.push(0.5 * (x + 1.0));
            weights.push(1.0 / (christoffel * scale));
        }
        Rule { nodes, weights, power }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Three-term recurrence of the orthonormal Jacobi polynomials for the
/// weight `(1 + x)^b` on `[-1, 1]`.
struct Recurrence {
    n: usize,
    diag: Vec<f64>,
    // off[k] couples degree k-1 and k; off[0] unused.
    off: Vec<f64>,
    p0: f64,
}

impl Recurrence {
    fn new(n: usize, b: f64) -> Self {
        let mut diag = Vec::with_capacity(n);
        for k in 0..n {
            let kk = k as f64;
            diag.push(if k == 0 {
                b / (b + 2.0)
            } else {
                b * b / ((2.0 * kk + b) * (2.0 * kk + b + 2.0))
            });
        }
        let mut off = vec![0.0; n + 1];
        for (k, o) in off.iter_mut().enumerate().skip(1) {
            let kk = k as f64;
            let s = 2.0 * kk + b;
            *o = 2.0 * kk * (kk + b) / (s * (s * s - 1.0).sqrt());
        }
        let mu0 = 2f64.powf(b + 1.0) / (b + 1.0);
        Recurrence {
            n,
            diag,
            off,
            p0: 1.0 / mu0.sqrt(),
        }
    }

    /// Returns (p_n(x), p_n'(x), Σ_{k<n} p_k(x)²).
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (mut p_prev, mut p) = (0.0, self.p0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        let mut sum = p * p;
        for k in 0..self.n {
            let p_next = ((x - self.diag[k]) * p - self.off[k] * p_prev) / self.off[k + 1];
            let d_next = (p + (x - self.diag[k]) * d - self.off[k] * d_prev) / self.off[k + 1];
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
            if k + 1 < self.n {
                sum += p * p;
            }
        }
        (p, d, sum)
    }
}

/// One node of a tanh-sinh rule on `[0, h]`: distance from the left end and
/// the weight including the Jacobian.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TanhSinhNode {
    pub left: f64,
    pub weight: f64,
}

/// Nodes of level `level` of the tanh-sinh rule on `[0, h]`. Level 0 holds
/// integer abscissae in the transformed variable; each later level holds only
/// the new midpoints, so summing levels `0..=l` and scaling by `2^-l` gives the
/// level-`l` estimate.
pub(crate) fn tanh_sinh_level(h: f64, level: u32) -> Vec<TanhSinhNode> {
    const T_MAX: f64 = 4.0;
    let step = 0.5f64.powi(level as i32);
    let count = (T_MAX / step).floor() as i64;
    let mut out = Vec::new();
    for k in -count..=count {
        if level > 0 && k.rem_euclid(2) == 0 {
            continue;
        }
        let t = k as f64 * step;
        let u = FRAC_PI_2 * t.sinh();
        let cosh_u = u.cosh();
        let weight = 0.5 * h * FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
        if weight == 0.0 || !weight.is_finite() {
            continue;
        }
        let left = h / (1.0 + (-2.0 * u).exp());
        out.push(TanhSinhNode { left, weight });
    }
    out
}
