//! Shared test helpers: a brute-force vertex-enumeration LP oracle and a
//! seeded random problem generator.

#![allow(dead_code)]

use mvflux::lp::LpProblem;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const FEAS_TOL: f64 = 1e-7;

/// Solve a k x k dense system by Gaussian elimination with partial pivoting.
/// Returns `None` when (nearly) singular.
fn solve_dense(a: &mut [f64], b: &mut [f64], k: usize) -> Option<Vec<f64>> {
    let mut order: Vec<usize> = (0..k).collect();
    for col in 0..k {
        let (p, mag) = (col..k)
            .map(|r| (r, a[order[r] * k + col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if mag < 1e-10 {
            return None;
        }
        order.swap(col, p);
        let pr = order[col];
        for r in (col + 1)..k {
            let rr = order[r];
            let f = a[rr * k + col] / a[pr * k + col];
            for c in col..k {
                a[rr * k + c] -= f * a[pr * k + c];
            }
            b[rr] -= f * b[pr];
        }
    }
    let mut x = vec![0.0; k];
    for col in (0..k).rev() {
        let pr = order[col];
        let mut s = b[pr];
        for c in (col + 1)..k {
            s -= a[pr * k + c] * x[c];
        }
        x[col] = s / a[pr * k + col];
    }
    Some(x)
}

fn feasible(p: &LpProblem<f64>, x: &[f64]) -> bool {
    let v = p.n_vars();
    for j in 0..v {
        if x[j] < p.lower[j] - FEAS_TOL || x[j] > p.upper[j] + FEAS_TOL {
            return false;
        }
    }
    for r in 0..p.n_rows() {
        let act: f64 = p.row(r).iter().zip(x).map(|(a, b)| a * b).sum();
        if act < p.eq_lo[r] - FEAS_TOL || act > p.eq_hi[r] + FEAS_TOL {
            return false;
        }
    }
    true
}

/// Exhaustive vertex enumeration over the polytope
/// `{ lo <= Ax <= hi, l <= x <= u }` (V <= 6, R <= 3). Returns the optimal
/// objective, or `None` when no feasible vertex exists.
pub fn brute_force_optimum(p: &LpProblem<f64>) -> Option<f64> {
    let v = p.n_vars();
    let r = p.n_rows();
    assert!(v <= 6 && r <= 3, "oracle sized for tiny problems");
    let mut best: Option<f64> = None;

    // Row activity pattern: 0 inactive, 1 pinned at lo, 2 pinned at hi.
    let mut pattern = vec![0u8; r];
    loop {
        let active: Vec<(usize, f64)> = pattern
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != 0)
            .map(|(row, &s)| (row, if s == 1 { p.eq_lo[row] } else { p.eq_hi[row] }))
            .collect();
        let k = active.len();
        if k <= v {
            // Free-variable subsets of size k.
            for free_mask in 0u32..(1 << v) {
                if free_mask.count_ones() as usize != k {
                    continue;
                }
                let free: Vec<usize> = (0..v).filter(|j| free_mask >> j & 1 == 1).collect();
                let fixed: Vec<usize> = (0..v).filter(|j| free_mask >> j & 1 == 0).collect();
                // Bound side per fixed variable.
                for side_mask in 0u32..(1 << fixed.len()) {
                    let mut x = vec![0.0; v];
                    let mut ok = true;
                    for (b, &j) in fixed.iter().enumerate() {
                        if side_mask >> b & 1 == 1 {
                            if !p.upper[j].is_finite() {
                                ok = false;
                                break;
                            }
                            x[j] = p.upper[j];
                        } else {
                            x[j] = p.lower[j];
                        }
                    }
                    if !ok {
                        continue;
                    }
                    if k > 0 {
                        let mut a = vec![0.0; k * k];
                        let mut b = vec![0.0; k];
                        for (e, &(row, target)) in active.iter().enumerate() {
                            let coeffs = p.row(row);
                            let mut rhs = target;
                            for &j in &fixed {
                                rhs -= coeffs[j] * x[j];
                            }
                            b[e] = rhs;
                            for (c, &j) in free.iter().enumerate() {
                                a[e * k + c] = coeffs[j];
                            }
                        }
                        match solve_dense(&mut a, &mut b, k) {
                            Some(sol) => {
                                for (c, &j) in free.iter().enumerate() {
                                    x[j] = sol[c];
                                }
                            }
                            None => continue,
                        }
                    }
                    if feasible(p, &x) {
                        let obj: f64 = p.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                        best = Some(match best {
                            Some(cur) => cur.min(obj),
                            None => obj,
                        });
                    }
                }
            }
        }
        // next pattern
        let mut carry = true;
        for (row, slot) in pattern.iter_mut().enumerate() {
            if !carry {
                break;
            }
            *slot += 1;
            // equality rows: lo == hi, side 2 duplicates side 1
            let max_side = if p.eq_lo[row] == p.eq_hi[row] { 1 } else { 2 };
            if *slot > max_side {
                *slot = 0;
            } else {
                carry = false;
            }
        }
        if carry {
            break;
        }
    }
    best
}

/// Random box-and-rows LP, biased toward feasible instances (constraints
/// anchored at a random interior point) with occasional unanchored rows and
/// frequent cost ties to exercise degenerate optima.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem<f64> {
    let v = rng.gen_range(1..=6);
    let r = rng.gen_range(1..=3);
    let lower: Vec<f64> = (0..v).map(|_| rng.gen_range(-1.0..=0.0)).collect();
    let upper: Vec<f64> = lower.iter().map(|&l| l + rng.gen_range(0.2..=2.5)).collect();
    let cost: Vec<f64> = (0..v)
        .map(|_| {
            if rng.gen_bool(0.3) {
                [0.0, 0.5, -0.5][rng.gen_range(0..3)]
            } else {
                rng.gen_range(-1.0..=1.0)
            }
        })
        .collect();
    let eq_matrix: Vec<f64> = (0..r * v).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let anchor: Vec<f64> = (0..v)
        .map(|j| lower[j] + (upper[j] - lower[j]) * rng.gen_range(0.0..=1.0))
        .collect();
    let mut eq_lo = Vec::with_capacity(r);
    let mut eq_hi = Vec::with_capacity(r);
    for row in 0..r {
        let act: f64 = (0..v).map(|j| eq_matrix[row * v + j] * anchor[j]).sum();
        match rng.gen_range(0..10) {
            0..=3 => {
                eq_lo.push(act);
                eq_hi.push(act);
            }
            4..=6 => {
                let w1 = rng.gen_range(0.0..=0.5);
                let w2 = rng.gen_range(0.0..=0.5);
                eq_lo.push(act - w1);
                eq_hi.push(act + w2);
            }
            _ => {
                let c = rng.gen_range(-2.0..=2.0);
                let w = rng.gen_range(0.0..=0.4);
                eq_lo.push(c - w);
                eq_hi.push(c + w);
            }
        }
    }
    LpProblem { cost, lower, upper, eq_matrix, eq_lo, eq_hi }
}
