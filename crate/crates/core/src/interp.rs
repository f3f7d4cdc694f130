//! Shape-preserving piecewise cubic Hermite interpolation (Fritsch-Butland slopes).

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` must be strictly increasing with at least two entries.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Option<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return None;
        }
        let secants: Vec<f64> = (0..n - 1)
            .map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for k in 1..n - 1 {
            let (d0, d1) = (secants[k - 1], secants[k]);
            if d0 * d1 <= 0.0 {
                slopes[k] = 0.0;
            } else {
                let h0 = xs[k] - xs[k - 1];
                let h1 = xs[k + 1] - xs[k];
                slopes[k] = 3.0 * (h0 + h1) / ((2.0 * h1 + h0) / d0 + (h1 + 2.0 * h0) / d1);
            }
        }
        // endpoint slopes must not overshoot the adjacent secant
        for (end, sec) in [(0usize, secants[0]), (n - 1, secants[n - 2])] {
            if slopes[end] * sec <= 0.0 {
                slopes[end] = 0.0;
            } else if slopes[end].abs() > 3.0 * sec.abs() {
                slopes[end] = 3.0 * sec;
            }
        }
        Some(MonotoneCubic { xs, ys, slopes })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn first(&self) -> f64 {
        self.xs[0]
    }

    pub fn last(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    /// Interpolated value; zero outside the tabulated range.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.first() || x > self.last() || x.is_nan() {
            return 0.0;
        }
        let k = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            p => (p - 1).min(self.xs.len() - 2),
        };
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.slopes[k] + h01 * self.ys[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_knot_values_and_linear_data() {
        let xs = vec![0.0, 0.5, 1.5, 2.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let f = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(f.eval(*x), *y);
        }
        assert!((f.eval(1.2) - 3.4).abs() < 1e-14);
        assert_eq!(f.eval(2.5), 0.0);
        assert_eq!(f.eval(-0.1), 0.0);
    }

    #[test]
    fn rejects_non_increasing_abscissae() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_none());
        assert!(MonotoneCubic::new(vec![0.0], vec![1.0]).is_none());
    }

    proptest! {
        #[test]
        fn monotone_data_gives_monotone_interpolant(
            steps in proptest::collection::vec((0.01f64..1.0, 0.0f64..1.0), 3..12),
            probes in proptest::collection::vec(0.0f64..1.0, 20)
        ) {
            let mut xs = vec![0.0];
            let mut ys = vec![0.0];
            for (dx, dy) in &steps {
                xs.push(xs.last().unwrap() + dx);
                ys.push(ys.last().unwrap() + dy);
            }
            let f = MonotoneCubic::new(xs.clone(), ys).unwrap();
            let span = f.last();
            let mut pts: Vec<f64> = probes.iter().map(|p| p * span).collect();
            pts.sort_by(f64::total_cmp);
            for w in pts.windows(2) {
                prop_assert!(f.eval(w[1]) >= f.eval(w[0]) - 1e-12);
            }
        }
    }
}
