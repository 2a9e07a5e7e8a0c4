//! Gauss-Legendre and Gauss-Laguerre rules.
//!
//! Rules are generated once per order and cached; every caller sees the same
//! nodes, which keeps assembled matrices bit-reproducible.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

type Cache = Mutex<HashMap<usize, Arc<Rule>>>;

fn cached(cache: &'static OnceLock<Cache>, n: usize, build: fn(usize) -> Rule) -> Arc<Rule> {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry(n).or_insert_with(|| Arc::new(build(n))).clone()
}

/// n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    cached(&CACHE, n, build_legendre)
}

/// n-point Gauss-Laguerre rule for ∫₀^∞ e^{-t} f(t) dt.
pub fn gauss_laguerre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    cached(&CACHE, n, build_laguerre)
}

// P_n and P_n' by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn build_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    if n == 1 {
        return Rule { nodes: vec![0.0], weights: vec![2.0] };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // ascending order, exactly mirrored
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

// Returns (L_n(x), L_{n-1}(x)) scaled by e^{-log_scale}, plus log_scale.
fn laguerre_scaled(n: usize, x: f64) -> (f64, f64, f64) {
    let (mut p0, mut p1) = (0.0_f64, 1.0_f64);
    let mut log_scale = 0.0;
    for k in 0..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 - x) * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
        let m = p1.abs().max(p0.abs());
        if m > 1e150 {
            p0 /= m;
            p1 /= m;
            log_scale += m.ln();
        }
    }
    (p1, p0, log_scale)
}

fn build_laguerre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Laguerre order must be positive");
    // Golub-Welsch start: Jacobi matrix with diag 2i+1, off-diag i+1.
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * i as f64 + 1.0
        } else if i.abs_diff(j) == 1 {
            i.max(j) as f64
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut start: Vec<(f64, f64)> =
        (0..n).map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2))).collect();
    start.sort_by(|a, b| a.0.total_cmp(&b.0));

    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (mut x, w_gw) in start {
        // Newton on L_n: x L_n' = n (L_n - L_{n-1})
        for _ in 0..50 {
            let (ln, lm1, _) = laguerre_scaled(n, x);
            let dln = nf * (ln - lm1) / x;
            let dx = ln / dln;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs() {
                break;
            }
        }
        // Eigenvector weights are accurate to relative ε where they are large; the
        // recurrence form is needed in the tail where they underflow into noise.
        let w = if w_gw > 1e-8 {
            w_gw
        } else {
            let (lnp1, _, log_scale) = laguerre_scaled(n + 1, x);
            (x.ln() - 2.0 * (nf + 1.0).ln() - 2.0 * (lnp1.abs().ln() + log_scale)).exp()
        };
        nodes.push(x);
        weights.push(w);
    }
    Rule { nodes, weights }
}
