//! Small fixed-size vector and dense linear algebra helpers.

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn normalize(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

/// Orthonormal frame (n, t1, t2) from a unit normal. Deterministic: the
/// first tangent is built from the coordinate axis least aligned with n.
pub fn orthonormal_frame(n: Vec3) -> [Vec3; 3] {
    let ax = n[0].abs();
    let ay = n[1].abs();
    let az = n[2].abs();
    let seed = if ax <= ay && ax <= az {
        [1.0, 0.0, 0.0]
    } else if ay <= az {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    // Gram-Schmidt so that n = x yields the identity frame
    let s = dot(seed, n);
    let t1 = normalize(sub(seed, scale(n, s)));
    let t2 = cross(n, t1);
    [n, t1, t2]
}

/// Solve A x = b in place by Gaussian elimination with partial pivoting.
/// `a` holds the n*n matrix row-major. Returns None if a pivot falls below
/// `tol` relative to the largest initial entry (rank deficiency).
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize, tol: f64) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let mut max0 = 0.0f64;
    for v in a.iter() {
        max0 = max0.max(v.abs());
    }
    if max0 == 0.0 {
        return None;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut piv = col;
        let mut pmax = a[perm[col] * n + col].abs();
        for (r, &pr) in perm.iter().enumerate().skip(col + 1) {
            let v = a[pr * n + col].abs();
            if v > pmax {
                pmax = v;
                piv = r;
            }
        }
        if pmax < tol * max0 {
            return None;
        }
        perm.swap(col, piv);
        let prow = perm[col];
        let pval = a[prow * n + col];
        for &r in perm.iter().skip(col + 1) {
            let f = a[r * n + col] / pval;
            if f == 0.0 {
                continue;
            }
            a[r * n + col] = 0.0;
            for c in (col + 1)..n {
                a[r * n + c] -= f * a[prow * n + c];
            }
            b[r] -= f * b[prow];
        }
    }
    // back substitution
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let r = perm[col];
        let mut s = b[r];
        for c in (col + 1)..n {
            s -= a[r * n + c] * x[c];
        }
        x[col] = s / a[r * n + col];
    }
    b.copy_from_slice(&x);
    Some(())
}

/// LU factorization with partial pivoting for repeated solves against the
/// same matrix. Returns None when a pivot falls below `tol` relative to the
/// largest initial entry.
pub struct LuFactors {
    lu: Vec<f64>,
    perm: Vec<usize>,
    n: usize,
}

impl LuFactors {
    pub fn new(mut a: Vec<f64>, n: usize, tol: f64) -> Option<LuFactors> {
        debug_assert_eq!(a.len(), n * n);
        let mut max0 = 0.0f64;
        for v in a.iter() {
            max0 = max0.max(v.abs());
        }
        if max0 == 0.0 {
            return None;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut piv = col;
            let mut pmax = a[perm[col] * n + col].abs();
            for (r, &pr) in perm.iter().enumerate().skip(col + 1) {
                let v = a[pr * n + col].abs();
                if v > pmax {
                    pmax = v;
                    piv = r;
                }
            }
            if pmax < tol * max0 {
                return None;
            }
            perm.swap(col, piv);
            let prow = perm[col];
            let pval = a[prow * n + col];
            for &r in perm.iter().skip(col + 1) {
                let f = a[r * n + col] / pval;
                a[r * n + col] = f;
                if f == 0.0 {
                    continue;
                }
                for c in (col + 1)..n {
                    a[r * n + c] -= f * a[prow * n + c];
                }
            }
        }
        Some(LuFactors { lu: a, perm, n })
    }

    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        debug_assert_eq!(x.len(), n);
        // forward substitution (unit lower triangle in permuted order)
        let mut y = vec![0.0; n];
        for i in 0..n {
            let r = self.perm[i];
            let mut s = b[r];
            for j in 0..i {
                s -= self.lu[r * n + j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let r = self.perm[i];
            let mut s = y[i];
            for j in (i + 1)..n {
                s -= self.lu[r * n + j] * x[j];
            }
            x[i] = s / self.lu[r * n + i];
        }
    }
}
