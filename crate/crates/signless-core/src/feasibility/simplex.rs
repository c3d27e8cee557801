//! Nelder–Mead simplex descent with an evaluation budget.

/// Result of one descent.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_evaluations: usize,
    pub initial_step: f64,
    /// Stop once the spread of simplex values drops below this.
    pub value_tolerance: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_evaluations: 20_000, initial_step: 0.25, value_tolerance: 1e-15 }
    }
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            f(x)
        };
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        pts.push(x0.to_vec());
        for i in 0..n {
            let mut p = x0.to_vec();
            p[i] += self.initial_step;
            pts.push(p);
        }
        let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();
        let mut sum = column_sum(&pts);
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];

        while evals < self.max_evaluations {
            let (best, worst, second) = extremes(&vals);
            if (vals[worst] - vals[best]).abs() <= self.value_tolerance {
                break;
            }
            let inv = 1.0 / n as f64;
            let centroid: Vec<f64> = sum.iter().zip(&pts[worst]).map(|(s, w)| (s - w) * inv).collect();
            for k in 0..n {
                trial[k] = centroid[k] + (centroid[k] - pts[worst][k]);
            }
            let fr = eval(&trial, &mut evals);
            if fr < vals[best] {
                for k in 0..n {
                    trial2[k] = centroid[k] + 2.0 * (centroid[k] - pts[worst][k]);
                }
                let fe = eval(&trial2, &mut evals);
                if fe < fr {
                    replace(&mut pts, &mut vals, &mut sum, worst, &trial2, fe);
                } else {
                    replace(&mut pts, &mut vals, &mut sum, worst, &trial, fr);
                }
            } else if fr < vals[second] {
                replace(&mut pts, &mut vals, &mut sum, worst, &trial, fr);
            } else {
                let outside = fr < vals[worst];
                for k in 0..n {
                    trial2[k] = if outside {
                        centroid[k] + 0.5 * (trial[k] - centroid[k])
                    } else {
                        centroid[k] + 0.5 * (pts[worst][k] - centroid[k])
                    };
                }
                let fc = eval(&trial2, &mut evals);
                if fc < fr.min(vals[worst]) {
                    replace(&mut pts, &mut vals, &mut sum, worst, &trial2, fc);
                } else {
                    let anchor = pts[best].clone();
                    for (i, p) in pts.iter_mut().enumerate() {
                        if i == best {
                            continue;
                        }
                        for k in 0..n {
                            p[k] = anchor[k] + 0.5 * (p[k] - anchor[k]);
                        }
                        vals[i] = eval(p, &mut evals);
                    }
                    sum = column_sum(&pts);
                }
            }
        }
        let (best, _, _) = extremes(&vals);
        Minimum { x: pts[best].clone(), value: vals[best], evaluations: evals }
    }
}

fn column_sum(pts: &[Vec<f64>]) -> Vec<f64> {
    let mut s = vec![0.0; pts[0].len()];
    for p in pts {
        for (a, b) in s.iter_mut().zip(p) {
            *a += b;
        }
    }
    s
}

fn replace(pts: &mut [Vec<f64>], vals: &mut [f64], sum: &mut [f64], i: usize, x: &[f64], fx: f64) {
    for (k, &xk) in x.iter().enumerate() {
        sum[k] += xk - pts[i][k];
    }
    pts[i].copy_from_slice(x);
    vals[i] = fx;
}

/// (best, worst, second worst) indices.
fn extremes(vals: &[f64]) -> (usize, usize, usize) {
    let mut best = 0;
    let mut worst = 0;
    for (i, &v) in vals.iter().enumerate() {
        if v < vals[best] {
            best = i;
        }
        if v > vals[worst] {
            worst = i;
        }
    }
    let mut second = if worst == 0 { 1 } else { 0 };
    for (i, &v) in vals.iter().enumerate() {
        if i != worst && v > vals[second] {
            second = i;
        }
    }
    (best, worst, second)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let nm = NelderMead { max_evaluations: 20_000, initial_step: 0.5, value_tolerance: 1e-20 };
        let m = nm.minimize(|x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2), &[-1.2, 1.0]);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn quadratic_in_ten_dims() {
        let nm = NelderMead::default();
        let m = nm.minimize(|x| x.iter().enumerate().map(|(i, v)| (v - i as f64).powi(2)).sum(), &[0.0; 10]);
        assert!(m.value < 1e-6, "{}", m.value);
        assert!(m.evaluations <= 20_000 + 11);
    }
}
