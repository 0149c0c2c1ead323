use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on P_n from the Tricomi initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared instance for `n`, computed once per process.
    pub fn cached(n: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(g) = cache.lock().expect("quadrature cache poisoned").get(&n) {
            return Arc::clone(g);
        }
        let g = Arc::new(Self::new(n));
        cache
            .lock()
            .expect("quadrature cache poisoned")
            .entry(n)
            .or_insert(g)
            .clone()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let g = GaussLegendre::new(7);
        for p in 0..=13 {
            let got: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.powi(p)).sum();
            let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn large_rule_is_accurate() {
        let g = GaussLegendre::cached(2001);
        assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-12);
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        // int_{-1}^{1} cos(300 x) dx = 2 sin(300)/300
        let got: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * (300.0 * x).cos()).sum();
        assert!((got - 2.0 * 300f64.sin() / 300.0).abs() < 1e-12);
    }

    #[test]
    fn single_node_rule() {
        let g = GaussLegendre::new(1);
        assert_eq!(g.nodes, vec![0.0]);
        assert!((g.weights[0] - 2.0).abs() < 1e-15);
    }
}
