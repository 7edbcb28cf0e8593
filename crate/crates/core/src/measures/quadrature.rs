//! Composite Gauss–Legendre rules with geometric grading toward declared
//! singular points.

use std::sync::OnceLock;

/// Nodes per panel.
pub const ORDER: usize = 16;

/// Number of dyadic levels used to grade a panel toward a singular point.
pub const REFINEMENT_LEVELS: usize = 40;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn reference_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Flattened rule: every node carries its weight and, for nodes inside a
/// graded panel, the dyadic level it belongs to.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub levels: Vec<Option<u8>>,
}

impl Rule {
    fn push_panel(&mut self, a: f64, b: f64, level: Option<u8>) {
        let (x, w) = reference_rule();
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in x.iter().zip(w) {
            self.nodes.push(mid + half * xi);
            self.weights.push(half * wi);
            self.levels.push(level);
        }
    }

    /// Panel `[a, b]` graded toward `singular`, which must be one of its
    /// endpoints. The innermost `2^-REFINEMENT_LEVELS` sliver is dropped.
    fn push_graded(&mut self, singular: f64, other: f64) {
        let w = other - singular;
        for k in 0..REFINEMENT_LEVELS {
            let near = singular + w * 0.5f64.powi(k as i32 + 1);
            let far = singular + w * 0.5f64.powi(k as i32);
            let (a, b) = if w > 0.0 { (near, far) } else { (far, near) };
            self.push_panel(a, b, Some(k as u8));
        }
    }

    /// Composite rule on `[a, b]` with `panels` equal panels, split and
    /// graded at each singular point lying in `[a, b]`.
    pub fn composite(a: f64, b: f64, panels: usize, singular: &[f64]) -> Rule {
        let panels = panels.max(1);
        let mut breaks: Vec<f64> = (0..=panels)
            .map(|i| a + (b - a) * i as f64 / panels as f64)
            .collect();
        breaks.extend(singular.iter().copied().filter(|&s| a < s && s < b));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let is_singular = |x: f64| singular.iter().any(|&s| s == x);
        let mut rule = Rule::default();
        for pair in breaks.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            match (is_singular(lo), is_singular(hi)) {
                (false, false) => rule.push_panel(lo, hi, None),
                (true, false) => rule.push_graded(lo, hi),
                (false, true) => rule.push_graded(hi, lo),
                (true, true) => {
                    let mid = 0.5 * (lo + hi);
                    rule.push_graded(lo, mid);
                    rule.push_graded(hi, mid);
                }
            }
        }
        rule
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_symmetric_and_weights_sum_to_two() {
        let (x, w) = gauss_legendre(ORDER);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for i in 0..ORDER {
            assert!((x[i] + x[ORDER - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_31() {
        let (x, w) = gauss_legendre(ORDER);
        for deg in 0..32 {
            let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - exact).abs() < 1e-14, "degree {deg}: {got} vs {exact}");
        }
    }

    #[test]
    fn graded_rule_integrates_smooth_functions() {
        let rule = Rule::composite(0.0, 2.0, 4, &[0.0, 1.3]);
        let got: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.cos()).sum();
        assert!((got - 2f64.sin()).abs() < 1e-12);
        assert!(rule.levels.iter().any(|l| l.is_some()));
        assert!(rule.nodes.iter().all(|&x| x > 0.0 && x < 2.0));
    }
}
