use binsense::amp::{amp_step, estimate_sigma, AmpState, DenseGaussianMatrix};
use binsense::channel::{ebn0_to_sigma, measure, BinarySignal};
use binsense::nnls::{nnls_solve, NnlsConfig};
use binsense::rng;
use binsense::LinearOperator;

struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Dense {
    fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }
}

impl LinearOperator<f64> for Dense {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..self.cols).map(|j| self.data[i * self.cols + j] * x[j]).sum();
        }
    }
    fn apply_transpose_into(&self, r: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..self.rows).map(|i| self.data[i * self.cols + j] * r[i]).sum();
        }
    }
}

/// Solves the square system `g c = h` by Gaussian elimination; `None` if singular.
fn solve(mut g: Vec<Vec<f64>>, mut h: Vec<f64>) -> Option<Vec<f64>> {
    let n = h.len();
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| g[a][c].abs().partial_cmp(&g[b][c].abs()).unwrap())?;
        if g[p][c].abs() < 1e-10 {
            return None;
        }
        g.swap(c, p);
        h.swap(c, p);
        for r in c + 1..n {
            let f = g[r][c] / g[c][c];
            for k in c..n {
                g[r][k] -= f * g[c][k];
            }
            h[r] -= f * h[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        x[r] = (h[r] - (r + 1..n).map(|k| g[r][k] * x[k]).sum::<f64>()) / g[r][r];
    }
    Some(x)
}

/// Minimum of `½‖y − Ax‖²` over `x ≥ 0`, by enumerating every support and
/// keeping the nonnegative least-squares solutions on it.
fn active_set_reference(a: &Dense, y: &[f64]) -> f64 {
    let mut best = 0.5 * y.iter().map(|v| v * v).sum::<f64>();
    for mask in 1u32..(1 << a.cols) {
        let s: Vec<usize> = (0..a.cols).filter(|j| mask >> j & 1 == 1).collect();
        if s.len() > a.rows {
            continue;
        }
        let cols: Vec<Vec<f64>> = s.iter().map(|&j| a.col(j)).collect();
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
        let g = cols.iter().map(|ci| cols.iter().map(|cj| dot(ci, cj)).collect()).collect();
        let h = cols.iter().map(|ci| dot(ci, y)).collect();
        let Some(c) = solve(g, h) else { continue };
        if c.iter().any(|&v| v < 0.0) {
            continue;
        }
        let mut x = vec![0.0; a.cols];
        for (&j, &v) in s.iter().zip(&c) {
            x[j] = v;
        }
        let ax = a.apply(&x).unwrap();
        let obj = 0.5 * ax.iter().zip(y).map(|(p, q)| (q - p).powi(2)).sum::<f64>();
        best = best.min(obj);
    }
    best
}

#[test]
fn nnls_matches_active_set_enumeration() {
    let mut r = rng::seeded(21);
    let cfg = NnlsConfig {
        max_iters: 50_000,
        tol: 1e-16,
        ..NnlsConfig::default()
    };
    for _ in 0..20 {
        let a = Dense {
            rows: 4,
            cols: 8,
            data: (0..32).map(|_| rng::standard_normal::<f64, _>(&mut r)).collect(),
        };
        let y: Vec<f64> = (0..4).map(|_| rng::standard_normal::<f64, _>(&mut r)).collect();
        let sol = nnls_solve(&a, &y, &cfg).unwrap();
        let reference = active_set_reference(&a, &y);
        assert!(sol.x.iter().all(|&v| v >= 0.0));
        assert!(
            (sol.objective - reference).abs() < 1e-8,
            "nnls {} vs reference {reference}",
            sol.objective
        );
    }
}

#[test]
fn sigma_estimate_on_a_million_gaussians() {
    let mut r = rng::seeded(8);
    let v: Vec<f64> = (0..1_000_000)
        .map(|_| 2.0 * rng::standard_normal::<f64, _>(&mut r))
        .collect();
    let s = estimate_sigma(&v).unwrap();
    assert!((s - 2.0).abs() < 0.02, "estimate {s}");
}

#[test]
fn sigma_estimate_ignores_one_outlier() {
    let mut r = rng::seeded(4);
    let mut v: Vec<f64> = (0..1000).map(|_| rng::standard_normal::<f64, _>(&mut r)).collect();
    let base = estimate_sigma(&v).unwrap();
    v[17] = 1e9;
    let moved = estimate_sigma(&v).unwrap();
    assert!((moved - base).abs() / base < 0.005);
}

#[test]
fn amp_zero_measurements_settle_at_prior_mean() {
    let a = DenseGaussianMatrix::<f64>::sample(64, 256, 3).unwrap();
    let mut st = AmpState::new(64, 256);
    let rho = 0.02;
    amp_step(&a, &vec![0.0; 64], rho, &mut st).unwrap();
    assert!(st.x.iter().all(|&v| v == rho));
}

/// After the first iteration, `b − x` should look like Gaussian noise with
/// variance `σ̂²`.
#[test]
fn amp_state_evolution_at_full_scale() {
    let (n, m, k) = (1 << 11, 1 << 14, 100);
    let a = DenseGaussianMatrix::<f64>::sample(n, m, 31).unwrap();
    let mut r = rng::seeded(32);
    let support = rand::seq::index::sample(&mut r, m, k).into_vec();
    let x = BinarySignal::from_support(m, &support).unwrap();
    let sigma = ebn0_to_sigma(2.0, 1.0, 14.0).unwrap();
    let y = measure(&a, &x, sigma, 1.0, 33).unwrap().y;
    let rho = k as f64 / m as f64;
    let mut st = AmpState::new(n, m);
    let xr = x.to_real::<f64>();
    for t in 0..6 {
        amp_step(&a, &y, rho, &mut st).unwrap();
        if t == 0 {
            continue;
        }
        let d: Vec<f64> = st.b.iter().zip(&xr).map(|(b, x)| b - x).collect();
        let mean = d.iter().sum::<f64>() / m as f64;
        let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64;
        let s2 = st.sigma_hat * st.sigma_hat;
        assert!(
            (var - s2).abs() / s2 < 0.15,
            "iteration {t}: empirical {var} vs estimated {s2}"
        );
    }
}
