//! Exhaustive oracle for uniform transport problems.
//!
//! Both measures are expanded to `L = lcm(n, m)` atoms of mass `1/L` by
//! replicating points; every coupling between two uniform measures on `L`
//! atoms is a convex combination of permutations, so enumerating all `L!`
//! permutations finds the optimum.

use ndarray::{Array2, ArrayView1};

use super::{check_problem, frobenius, CostMatrix, TransportPlan};
use crate::error::{Error, Result};

/// Largest expanded atom count the oracle accepts.
pub const BRUTEFORCE_MAX_ATOMS: usize = 8;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn solve_bruteforce(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>, m: &CostMatrix) -> Result<TransportPlan> {
    check_problem(a, b, m)?;
    let (n, k) = m.dim();
    let l = n / gcd(n, k) * k;
    if l > BRUTEFORCE_MAX_ATOMS {
        return Err(Error::InvalidArgument(format!(
            "brute force needs lcm(n, m) <= {BRUTEFORCE_MAX_ATOMS}, got {l}"
        )));
    }
    for (w, len) in [(a, n), (b, k)] {
        if w.iter().any(|&x| (x - 1.0 / len as f64).abs() > 1e-12) {
            return Err(Error::InvalidArgument("brute force requires uniform weights".into()));
        }
    }
    let (rep_a, rep_b) = (l / n, l / k);
    let expanded = |s: usize, d: usize| m.entries[[s / rep_a, d / rep_b]];

    // Heap's algorithm over target atoms.
    let mut perm: Vec<usize> = (0..l).collect();
    let mut best_perm = perm.clone();
    let mut best = (0..l).map(|s| expanded(s, perm[s])).sum::<f64>();
    let mut c = vec![0usize; l];
    let mut i = 1;
    while i < l {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let total = (0..l).map(|s| expanded(s, perm[s])).sum::<f64>();
            if total < best {
                best = total;
                best_perm.copy_from_slice(&perm);
            }
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }

    let mass = 1.0 / l as f64;
    let mut coupling = Array2::zeros((n, k));
    for (s, &d) in best_perm.iter().enumerate() {
        coupling[[s / rep_a, d / rep_b]] += mass;
    }
    let objective = frobenius(&coupling, &m.entries);
    Ok(TransportPlan {
        coupling,
        objective,
        converged: true,
        iterations: 0,
        log_domain: false,
    })
}
