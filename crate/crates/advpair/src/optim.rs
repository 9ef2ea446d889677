//! Derivative-free minimization with the Nelder–Mead simplex.
//!
//! Standard coefficients (reflect 1, expand 2, contract 0.5, shrink 0.5).
//! Objectives may return NaN or infinities; non-finite values are treated
//! as "worse than everything", which lets callers encode hard constraints
//! by returning infinity outside the feasible set.

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    /// True when both the function-value spread (≤ `tol`) and the
    /// simplex coordinate spread (≤ `√tol`) collapsed before the
    /// iteration cap.
    pub converged: bool,
}

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const RHO: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` starting from `x0`. The initial simplex perturbs each
/// coordinate by 5% of its magnitude (0.01 for zeros), so the result is
/// deterministic.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], max_iter: usize, tol: f64) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n > 0, "need at least one variable");

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += if p[i] != 0.0 { 0.05 * p[i].abs() } else { 0.01 };
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| sanitize(f(p))).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // Order best -> worst.
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let reorder = |v: &mut Vec<Vec<f64>>, w: &mut Vec<f64>| {
            let nv: Vec<Vec<f64>> = idx.iter().map(|&i| v[i].clone()).collect();
            let nw: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
            *v = nv;
            *w = nw;
        };
        reorder(&mut simplex, &mut values);

        // A small value spread alone is not enough: two vertices sitting
        // symmetrically around a minimum have equal values at any
        // distance. Require the simplex itself to be small too; √tol
        // matches the quadratic growth of f around a smooth minimum.
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&simplex[0]).map(|(&a, &b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if values[n] - values[0] <= tol && x_spread <= tol.sqrt() {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let blend = |from: &[f64], toward: &[f64], coef: f64| -> Vec<f64> {
            from.iter()
                .zip(toward)
                .map(|(&a, &b)| a + coef * (b - a))
                .collect()
        };

        // Reflection.
        let xr = blend(&centroid, &worst, -ALPHA);
        let fr = sanitize(f(&xr));
        if fr < values[0] {
            // Expansion.
            let xe = blend(&centroid, &xr, GAMMA);
            let fe = sanitize(f(&xe));
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }

        // Contraction, outside or inside of the worst point.
        let (xc, fc) = if fr < values[n] {
            let xc = blend(&centroid, &xr, RHO);
            let fc = sanitize(f(&xc));
            (xc, fc)
        } else {
            let xc = blend(&centroid, &worst, RHO);
            let fc = sanitize(f(&xc));
            (xc, fc)
        };
        if fc < values[n].min(sanitize(fr)) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }

        // Shrink toward the best vertex.
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = blend(&best, &simplex[i], SIGMA);
            values[i] = sanitize(f(&simplex[i]));
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    NelderMeadResult {
        x: simplex[best].clone(),
        fx: values[best],
        iterations,
        converged,
    }
}
