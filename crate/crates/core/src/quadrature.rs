//! Gauss–Legendre rules and composite integration on graded meshes.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the three-term recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th largest root.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
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

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Node/weight pairs mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Shared rule of order `16·2^k`, `k < 5`.
pub fn cached_rule(order: usize) -> &'static GaussLegendre {
    static RULES: [OnceLock<GaussLegendre>; 5] = [const { OnceLock::new() }; 5];
    let k = match order {
        16 => 0,
        32 => 1,
        64 => 2,
        128 => 3,
        256 => 4,
        _ => panic!("no cached Gauss-Legendre rule of order {order}"),
    };
    RULES[k].get_or_init(|| GaussLegendre::new(order))
}

/// Composite Gauss–Legendre integral over `edges` with order doubling.
///
/// Starts at order `start` and doubles at most twice; converged when two
/// successive values differ by less than `rel_tol` times the integral of `|f|`.
pub fn integrate_doubling<F>(
    op: &'static str,
    edges: &[f64],
    start: usize,
    rel_tol: f64,
    f: F,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let eval = |order: usize| {
        let rule = cached_rule(order);
        let mut sum = 0.0;
        let mut abs = 0.0;
        for w in edges.windows(2) {
            for (x, wt) in rule.mapped(w[0], w[1]) {
                let v = wt * f(x);
                sum += v;
                abs += v.abs();
            }
        }
        (sum, abs)
    };
    let (mut prev, _) = eval(start);
    let mut order = start;
    for _ in 0..2 {
        order *= 2;
        let (next, abs) = eval(order);
        if (next - prev).abs() <= rel_tol * abs || abs == 0.0 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::non_convergence(
        op,
        format!("quadrature did not reach relative tolerance {rel_tol:e} at order {order}"),
    ))
}

/// Panel edges on [lo, hi] graded geometrically towards `lo`.
///
/// With `lo > 0` the edges are `lo·(hi/lo)^(k/panels)`; with `lo == 0` the
/// smallest panel is `hi / 2^(panels-1)`.
pub fn graded_edges(lo: f64, hi: f64, panels: usize) -> Vec<f64> {
    assert!(hi > lo && lo >= 0.0 && panels >= 1);
    if lo > 0.0 {
        let ratio = hi / lo;
        let mut e: Vec<f64> = (0..=panels)
            .map(|k| lo * ratio.powf(k as f64 / panels as f64))
            .collect();
        e[0] = lo;
        e[panels] = hi;
        e
    } else {
        let mut e = Vec::with_capacity(panels + 1);
        e.push(0.0);
        for k in (0..panels).rev() {
            e.push(hi / 2f64.powi(k as i32));
        }
        e
    }
}

/// Composite Gauss–Legendre nodes over the given panel edges.
pub fn composite_nodes(edges: &[f64], rule: &GaussLegendre) -> Vec<(f64, f64)> {
    edges
        .windows(2)
        .flat_map(|w| rule.mapped(w[0], w[1]).collect::<Vec<_>>())
        .collect()
}
