//! One-dimensional rules on `[−1, 1]`.

use nalgebra::DMatrix;

use crate::C64;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Newton iteration on the three-term recurrence, symmetric fill.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(u, w)| (mid + half * u, half * w))
    }
}

fn legendre_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// First-kind Chebyshev points `cos((2k + 1)π/(2m))`.
pub fn chebyshev_nodes(m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * m) as f64).cos())
        .collect()
}

/// Exponentially fitted rule for `∫_{−1}^{1} f(u) e^{βu} du`: `f` is
/// interpolated at Chebyshev points and the moments `∫ u^j e^{βu} du` are
/// computed exactly.
#[derive(Clone, Debug)]
pub struct FilonRule {
    pub nodes: Vec<f64>,
    /// `vinv[j][k]`: monomial coefficient `j` of the `k`-th Lagrange basis polynomial.
    vinv: Vec<Vec<f64>>,
}

/// Below this `|β|` the moment recurrence loses accuracy and callers fall
/// back to Gauss–Legendre on the full integrand.
pub const FILON_MIN_BETA: f64 = 4.0;

impl FilonRule {
    pub fn new(m: usize) -> Self {
        let nodes = chebyshev_nodes(m);
        let v = DMatrix::from_fn(m, m, |k, j| nodes[k].powi(j as i32));
        let inv = v.try_inverse().expect("Chebyshev Vandermonde matrix is invertible");
        let vinv = (0..m).map(|j| (0..m).map(|k| inv[(j, k)]).collect()).collect();
        Self { nodes, vinv }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weights `w_k` and the factored endpoint `σ ∈ {−1, 1}` such that
    /// `∫_{−1}^{1} f(u) e^{βu} du ≈ e^{σβ} Σ_k w_k f(u_k)`. The endpoint with
    /// the larger `Re(σβ)` is factored out so that no moment overflows.
    pub fn weights(&self, beta: C64) -> (Vec<C64>, f64) {
        let m = self.nodes.len();
        let one = C64::new(1.0, 0.0);
        let (sigma, e2) = if beta.re <= 0.0 {
            (-1.0, (2.0 * beta).exp())
        } else {
            (1.0, (-2.0 * beta).exp())
        };
        let inv_beta = beta.inv();
        let mut mu = vec![C64::new(0.0, 0.0); m];
        for j in 0..m {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let boundary = if sigma < 0.0 { e2 - one * sign } else { one - e2 * sign };
            let prev = if j == 0 {
                C64::new(0.0, 0.0)
            } else {
                mu[j - 1] * j as f64
            };
            mu[j] = (boundary - prev) * inv_beta;
        }
        let w = (0..m).map(|k| (0..m).map(|j| mu[j] * self.vinv[j][k]).sum()).collect();
        (w, sigma)
    }
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let t = acc.0 + x;
    if acc.0.abs() >= x.abs() {
        acc.1 += (acc.0 - t) + x;
    } else {
        acc.1 += (x - t) + acc.0;
    }
    acc.0 = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: C64) {
        neumaier(&mut self.re, z.re);
        neumaier(&mut self.im, z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 8, 12, 16, 24] {
            let g = GaussRule::legendre(n);
            assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let q: f64 = g
                    .nodes
                    .iter()
                    .zip(&g.weights)
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                assert!((q - exact).abs() < 1e-14, "n={n} deg={deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn gauss_nodes_sorted_and_mapped() {
        let g = GaussRule::legendre(16);
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        let s: f64 = g.mapped(2.0, 5.0).map(|(x, w)| w * x * x).sum();
        assert!((s - (125.0 - 8.0) / 3.0).abs() < 1e-12);
    }

    fn exact_exp_moment(f_deg: i32, beta: C64) -> C64 {
        // ∫ u^k e^{βu} du by repeated integration by parts, evaluated with a fine Gauss rule
        let g = GaussRule::legendre(64);
        g.nodes
            .iter()
            .zip(&g.weights)
            .map(|(u, w)| (beta * u).exp() * u.powi(f_deg) * *w)
            .sum()
    }

    #[test]
    fn filon_reproduces_polynomial_times_exponential() {
        let rule = FilonRule::new(12);
        for beta in [
            C64::new(0.0, 5.0),
            C64::new(-3.0, 40.0),
            C64::new(2.0, -7.0),
            C64::new(-30.0, 0.5),
        ] {
            let (w, sigma) = rule.weights(beta);
            for deg in [0, 3, 7, 11] {
                let q: C64 =
                    rule.nodes.iter().zip(&w).map(|(u, wk)| wk * u.powi(deg)).sum::<C64>() * (sigma * beta).exp();
                let e = exact_exp_moment(deg, beta);
                assert!(
                    (q - e).norm() < 1e-10 * e.norm().max(1e-3),
                    "β={beta} deg={deg}: {q} vs {e}"
                );
            }
        }
    }

    #[test]
    fn filon_large_oscillation_smooth_amplitude() {
        // ∫ e^{βu}/(2 + u) du at β = 200i against a fine Gauss rule
        let rule = FilonRule::new(16);
        let beta = C64::new(-0.5, 200.0);
        let (w, sigma) = rule.weights(beta);
        let q: C64 = rule.nodes.iter().zip(&w).map(|(u, wk)| wk / (2.0 + u)).sum::<C64>() * (sigma * beta).exp();
        let g = GaussRule::legendre(40);
        let mut e = C64::new(0.0, 0.0);
        for k in 0..200 {
            let a = -1.0 + 2.0 * k as f64 / 200.0;
            for (u, wt) in g.mapped(a, a + 0.01) {
                e += (beta * u).exp() / (2.0 + u) * wt;
            }
        }
        assert!((q - e).norm() < 1e-8 * e.norm(), "{q} vs {e}");
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(C64::new(1e16, 0.0));
        for _ in 0..10 {
            s.add(C64::new(1.0, 1.0));
        }
        s.add(C64::new(-1e16, 0.0));
        assert_eq!(s.value(), C64::new(10.0, 10.0));
    }
}
