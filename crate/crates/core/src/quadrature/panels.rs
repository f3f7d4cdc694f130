//! Globally adaptive composite quadrature of `∫_0^L t^p r(t) dt` for complex `r`.
//!
//! The first panel carries the endpoint weight `t^p` (Gauss-Jacobi or
//! tanh-sinh); every other panel is Gauss-Legendre. Each panel is evaluated at
//! orders `n` and `2n` and the difference is its error estimate. The worst
//! panel is bisected until the summed estimate meets the target.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::rules::{tanh_sinh_level, Rule};
use super::EndpointRule;

const ROUNDING: f64 = 8.0 * f64::EPSILON;
const MAX_TANH_SINH_LEVEL: u32 = 8;

#[derive(Debug, Clone)]
pub(crate) struct RuleSet {
    low: Rule,
    high: Rule,
    end_low: Rule,
    end_high: Rule,
    endpoint: EndpointRule,
    power: f64,
}

impl RuleSet {
    pub(crate) fn new(order: usize, power: f64, endpoint: EndpointRule) -> Self {
        let (end_low, end_high) = if power == 0.0 {
            (Rule::gauss_legendre(order), Rule::gauss_legendre(2 * order))
        } else {
            (Rule::gauss_jacobi(order, power), Rule::gauss_jacobi(2 * order, power))
        };
        RuleSet {
            low: Rule::gauss_legendre(order),
            high: Rule::gauss_legendre(2 * order),
            end_low,
            end_high,
            endpoint,
            power,
        }
    }
}

/// Initial decomposition of `[0, length]`.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub length: f64,
    /// Interior points where a panel must end.
    pub cuts: Vec<f64>,
    pub max_width: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Outcome {
    pub value: Complex64,
    pub abs_error: f64,
    pub converged: bool,
    #[allow(dead_code)]
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    truncation: f64,
    floor: f64,
}

impl Panel {
    fn error(&self) -> f64 {
        self.truncation + self.floor
    }
}

#[derive(Debug, Clone, Copy)]
struct Ranked {
    error: f64,
    index: usize,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.index.cmp(&self.index))
    }
}

pub(crate) fn integrate<F>(r: &F, layout: &Layout, rules: &RuleSet, target: f64, max_panels: usize) -> Outcome
where
    F: Fn(f64) -> Complex64,
{
    let mut panels: Vec<Panel> = initial_cuts(layout)
        .windows(2)
        .map(|w| eval_panel(r, rules, w[0], w[1]))
        .collect();

    let mut heap: BinaryHeap<Ranked> = panels
        .iter()
        .enumerate()
        .map(|(index, p)| Ranked { error: p.error(), index })
        .collect();
    let mut total: f64 = panels.iter().map(Panel::error).sum();
    // an initial layout larger than the budget counts as exhaustion
    let within_budget = panels.len() <= max_panels;

    while total > target && panels.len() < max_panels {
        let Some(worst) = heap.pop() else { break };
        let p = panels[worst.index];
        let width = p.b - p.a;
        if p.truncation <= p.floor || width <= 1e-13 * layout.length {
            // nothing left to gain by splitting
            heap.push(worst);
            break;
        }
        let mid = p.a + 0.5 * width;
        let left = eval_panel(r, rules, p.a, mid);
        let right = eval_panel(r, rules, mid, p.b);
        total += left.error() + right.error() - p.error();
        panels[worst.index] = left;
        heap.push(Ranked {
            error: left.error(),
            index: worst.index,
        });
        heap.push(Ranked {
            error: right.error(),
            index: panels.len(),
        });
        panels.push(right);
    }

    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = panels.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
    let abs_error: f64 = panels.iter().map(Panel::error).sum();
    Outcome {
        value,
        abs_error,
        converged: within_budget && abs_error <= target,
        panels: panels.len(),
    }
}

fn initial_cuts(layout: &Layout) -> Vec<f64> {
    let mut fixed = vec![0.0];
    let mut interior: Vec<f64> = layout
        .cuts
        .iter()
        .copied()
        .filter(|&c| c > 0.0 && c < layout.length)
        .collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    fixed.extend(interior);
    fixed.push(layout.length);

    let mut out = vec![0.0];
    for w in fixed.windows(2) {
        let span = w[1] - w[0];
        if span <= 0.0 {
            continue;
        }
        let n = (span / layout.max_width).ceil().max(1.0) as usize;
        for k in 1..n {
            out.push(w[0] + span * (k as f64 / n as f64));
        }
        out.push(w[1]);
    }
    out
}

fn eval_panel<F>(r: &F, rules: &RuleSet, a: f64, b: f64) -> Panel
where
    F: Fn(f64) -> Complex64,
{
    if a == 0.0 {
        match rules.endpoint {
            EndpointRule::JacobiWeighted => endpoint_gauss(r, rules, b),
            EndpointRule::TanhSinh => endpoint_tanh_sinh(r, rules.power, b),
        }
    } else {
        let h = b - a;
        let g = |t: f64| {
            let x = a + h * t;
            let v = r(x);
            if rules.power == 0.0 {
                v
            } else {
                v * x.powf(rules.power)
            }
        };
        let (lo, _) = apply(&rules.low, g);
        let (hi, l1) = apply(&rules.high, g);
        Panel {
            a,
            b,
            value: hi * h,
            truncation: (hi - lo).norm() * h,
            floor: ROUNDING * l1 * h,
        }
    }
}

fn endpoint_gauss<F>(r: &F, rules: &RuleSet, b: f64) -> Panel
where
    F: Fn(f64) -> Complex64,
{
    let scale = b.powf(rules.power + 1.0);
    let g = |t: f64| r(b * t);
    let (lo, _) = apply(&rules.end_low, g);
    let (hi, l1) = apply(&rules.end_high, g);
    Panel {
        a: 0.0,
        b,
        value: hi * scale,
        truncation: (hi - lo).norm() * scale,
        floor: ROUNDING * l1 * scale,
    }
}

fn endpoint_tanh_sinh<F>(r: &F, power: f64, b: f64) -> Panel
where
    F: Fn(f64) -> Complex64,
{
    let mut sum = Complex64::new(0.0, 0.0);
    let mut l1 = 0.0;
    let mut previous = None;
    let mut estimate = Complex64::new(0.0, 0.0);
    let mut truncation = f64::INFINITY;
    let mut step = 1.0;
    for level in 0..=MAX_TANH_SINH_LEVEL {
        for node in tanh_sinh_level(b, level) {
            let x = node.left;
            if x <= 0.0 {
                continue;
            }
            let mut v = r(x) * node.weight;
            if power != 0.0 {
                v *= x.powf(power);
            }
            sum += v;
            l1 += v.norm();
        }
        step = 0.5f64.powi(level as i32);
        estimate = sum * step;
        if let Some(prev) = previous {
            let diff: Complex64 = estimate - prev;
            truncation = diff.norm();
            if level >= 3 && truncation <= ROUNDING * l1 * step {
                break;
            }
        }
        previous = Some(estimate);
    }
    Panel {
        a: 0.0,
        b,
        value: estimate,
        truncation,
        floor: ROUNDING * l1 * step,
    }
}

fn apply<G>(rule: &Rule, g: G) -> (Complex64, f64)
where
    G: Fn(f64) -> Complex64,
{
    let mut sum = Complex64::new(0.0, 0.0);
    let mut l1 = 0.0;
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = g(*t) * *w;
        sum += v;
        l1 += v.norm();
    }
    (sum, l1)
}
