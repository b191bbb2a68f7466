use serde::Serialize;

use crate::graph::Graph;

/// Largest adjacency eigenvalue and the matching upper limit on the
/// encoding scale `c` (`c < 1/λ`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub radius: f64,
    /// `1/λ`; `None` for an edgeless graph, where any scale is admissible.
    pub max_scaling: Option<f64>,
}

const MAX_ITERATIONS: usize = 200_000;

/// Power iteration on `A + I`.
///
/// The shift makes the dominant eigenvalue `λ + 1` strictly larger in
/// magnitude than every other (`|μ + 1| < λ + 1` for `μ ≥ -λ`, `μ ≠ λ`), so
/// bipartite graphs, whose spectrum is symmetric, still converge. The
/// all-ones start vector overlaps every connected component's Perron
/// vector.
pub fn spectral_radius(g: &Graph) -> Spectrum {
    let n = g.n();
    if g.edge_count() == 0 {
        return Spectrum {
            radius: 0.0,
            max_scaling: None,
        };
    }
    let adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut estimate = f64::NAN;
    let mut stable = 0;
    for _ in 0..MAX_ITERATIONS {
        for v in 0..n {
            y[v] = x[v] + adj[v].iter().map(|&u| x[u]).sum::<f64>();
        }
        // Rayleigh quotient of A + I at the normalised x.
        let rq: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (xv, yv) in x.iter_mut().zip(&y) {
            *xv = yv / norm;
        }
        let next = rq - 1.0;
        if (next - estimate).abs() <= 1e-15 * next.abs().max(1.0) {
            stable += 1;
            if stable >= 5 {
                estimate = next;
                break;
            }
        } else {
            stable = 0;
        }
        estimate = next;
    }
    Spectrum {
        radius: estimate,
        max_scaling: Some(1.0 / estimate),
    }
}
