//! Gauss-Legendre rules and a simple adaptive driver.

use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

/// Nodes and weights on [-1, 1], ascending nodes.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn new(n: usize) -> Rule {
        let gl = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
    }

    /// Mapped nodes and weights on [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (m + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

pub fn gauss8() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| Rule::new(8))
}

pub fn gauss16() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| Rule::new(16))
}

/// Composite rule with `panels` equal panels.
pub fn composite<F: FnMut(f64) -> f64>(rule: &Rule, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for k in 0..panels {
        let lo = a + h * k as f64;
        let hi = if k + 1 == panels { b } else { lo + h };
        s += rule.integrate(lo, hi, &mut f);
    }
    s
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Adaptive bisection comparing an 8-point rule with its two halves.
pub fn adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, tol: f64, max_depth: usize, mut f: F) -> Adaptive {
    let rule = gauss8();
    let mut evals = 0usize;
    let mut total = 0.0;
    let mut err = 0.0;
    let whole = rule.integrate(a, b, &mut f);
    evals += 8;
    let mut stack = vec![(a, b, whole, 0usize)];
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let l = rule.integrate(lo, mid, &mut f);
        let r = rule.integrate(mid, hi, &mut f);
        evals += 16;
        let fine = l + r;
        let e = (fine - coarse).abs();
        let local_tol = tol * (hi - lo) / (b - a);
        if e <= local_tol.max(1e-15 * fine.abs()) || depth >= max_depth {
            total += fine;
            err += e;
        } else {
            stack.push((lo, mid, l, depth + 1));
            stack.push((mid, hi, r, depth + 1));
        }
    }
    Adaptive { value: total, error: err, evaluations: evals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss8_exact_for_degree_15() {
        let v = gauss8().integrate(-1.0, 2.0, |x| x.powi(15));
        let exact = (2f64.powi(16) - 1.0) / 16.0;
        assert!((v - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let r = adaptive(0.0, 1.0, 1e-12, 60, |x| x.sqrt());
        assert!((r.value - 2.0 / 3.0).abs() < 1e-11);
    }
}
