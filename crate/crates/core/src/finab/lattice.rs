//! Exact integer linear algebra: Smith normal form with transform tracking,
//! integer kernels, and linear solves. All arithmetic in `i128`.

pub type Mat = Vec<Vec<i128>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

pub fn zeros(rows: usize, cols: usize) -> Mat {
    vec![vec![0; cols]; rows]
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (ra, ca) = shape(a);
    let (rb, cb) = shape(b);
    assert_eq!(ca, rb, "shape mismatch in mat_mul");
    let mut out = zeros(ra, cb);
    for i in 0..ra {
        for (l, &ail) in a[i].iter().enumerate() {
            if ail == 0 {
                continue;
            }
            for j in 0..cb {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

pub fn mat_vec(a: &Mat, x: &[i128]) -> Vec<i128> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(&r, &v)| r * v).sum())
        .collect()
}

pub fn shape(a: &Mat) -> (usize, usize) {
    let rows = a.len();
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    (rows, cols)
}

pub fn transpose(a: &Mat) -> Mat {
    let (rows, cols) = shape(a);
    (0..cols)
        .map(|j| (0..rows).map(|i| a[i][j]).collect())
        .collect()
}

/// Smith normal form `u * m * v = d` with unimodular `u`, `v` (inverses
/// tracked), `d` diagonal with the divisibility chain `d_1 | d_2 | ...` and
/// nonnegative entries.
#[derive(Debug, Clone)]
pub struct Snf {
    pub d: Mat,
    pub u: Mat,
    pub v: Mat,
    pub u_inv: Mat,
    pub v_inv: Mat,
}

impl Snf {
    /// Diagonal entries (all `min(rows, cols)` of them, zeros included).
    pub fn diag(&self) -> Vec<i128> {
        let (r, c) = shape(&self.d);
        (0..r.min(c)).map(|i| self.d[i][i]).collect()
    }
}

pub fn snf(m: &Mat) -> Snf {
    snf_impl(m, None)
}

/// Smith normal form of some matrix `A'` congruent to `m` modulo `modulus`:
/// the trailing block is reduced into the balanced range each round, which
/// keeps entries small. The transforms are exact for `A'`; use only when the
/// input matters modulo `modulus` (e.g. congruence kernels).
pub fn snf_mod(m: &Mat, modulus: i128) -> Snf {
    snf_impl(m, Some(modulus))
}

fn balanced(x: i128, n: i128) -> i128 {
    let r = x.rem_euclid(n);
    if 2 * r > n {
        r - n
    } else {
        r
    }
}

fn snf_impl(m: &Mat, modulus: Option<i128>) -> Snf {
    let (rows, cols) = shape(m);
    let mut d = m.clone();
    let mut u = identity(rows);
    let mut u_inv = identity(rows);
    let mut v = identity(cols);
    let mut v_inv = identity(cols);

    // elementary operations, kept in sync with the inverse transforms
    macro_rules! row_swap {
        ($i:expr, $j:expr) => {
            if $i != $j {
                d.swap($i, $j);
                u.swap($i, $j);
                for r in u_inv.iter_mut() {
                    r.swap($i, $j);
                }
            }
        };
    }
    macro_rules! col_swap {
        ($i:expr, $j:expr) => {
            if $i != $j {
                for r in d.iter_mut() {
                    r.swap($i, $j);
                }
                for r in v.iter_mut() {
                    r.swap($i, $j);
                }
                v_inv.swap($i, $j);
            }
        };
    }
    macro_rules! row_add {
        // row_i += q * row_j
        ($i:expr, $j:expr, $q:expr) => {{
            let q: i128 = $q;
            for c in 0..cols {
                let x = d[$j][c];
                d[$i][c] += q * x;
            }
            for c in 0..rows {
                let x = u[$j][c];
                u[$i][c] += q * x;
            }
            for r in 0..rows {
                let x = u_inv[r][$i];
                u_inv[r][$j] -= q * x;
            }
        }};
    }
    // unimodular 2-row transform: (r_a, r_b) <- (p r_a + q r_b, s r_a + t r_b)
    macro_rules! row_bezout {
        ($a:expr, $b:expr, $p:expr, $q:expr, $s:expr, $t:expr) => {{
            let (p, q, s, t): (i128, i128, i128, i128) = ($p, $q, $s, $t);
            debug_assert_eq!(p * t - q * s, 1);
            for c in 0..cols {
                let (xa, xb) = (d[$a][c], d[$b][c]);
                d[$a][c] = p * xa + q * xb;
                d[$b][c] = s * xa + t * xb;
            }
            for c in 0..rows {
                let (xa, xb) = (u[$a][c], u[$b][c]);
                u[$a][c] = p * xa + q * xb;
                u[$b][c] = s * xa + t * xb;
            }
            // u_inv gets the inverse transform on columns: [[t, -q], [-s, p]]
            for r in 0..rows {
                let (xa, xb) = (u_inv[r][$a], u_inv[r][$b]);
                u_inv[r][$a] = t * xa - s * xb;
                u_inv[r][$b] = -q * xa + p * xb;
            }
        }};
    }
    macro_rules! col_add {
        // col_i += q * col_j
        ($i:expr, $j:expr, $q:expr) => {{
            let q: i128 = $q;
            for r in 0..rows {
                let x = d[r][$j];
                d[r][$i] += q * x;
            }
            for r in 0..cols {
                let x = v[r][$j];
                v[r][$i] += q * x;
            }
            for c in 0..cols {
                let x = v_inv[$i][c];
                v_inv[$j][c] -= q * x;
            }
        }};
    }
    // unimodular 2-column transform: (c_a, c_b) <- (p c_a + q c_b, s c_a + t c_b)
    macro_rules! col_bezout {
        ($a:expr, $b:expr, $p:expr, $q:expr, $s:expr, $t:expr) => {{
            let (p, q, s, t): (i128, i128, i128, i128) = ($p, $q, $s, $t);
            debug_assert_eq!(p * t - q * s, 1);
            for r in 0..rows {
                let (xa, xb) = (d[r][$a], d[r][$b]);
                d[r][$a] = p * xa + q * xb;
                d[r][$b] = s * xa + t * xb;
            }
            for r in 0..cols {
                let (xa, xb) = (v[r][$a], v[r][$b]);
                v[r][$a] = p * xa + q * xb;
                v[r][$b] = s * xa + t * xb;
            }
            for c in 0..cols {
                let (xa, xb) = (v_inv[$a][c], v_inv[$b][c]);
                v_inv[$a][c] = t * xa - s * xb;
                v_inv[$b][c] = -q * xa + p * xb;
            }
        }};
    }
    macro_rules! row_neg {
        ($i:expr) => {{
            for c in 0..cols {
                d[$i][c] = -d[$i][c];
            }
            for c in 0..rows {
                u[$i][c] = -u[$i][c];
            }
            for r in 0..rows {
                u_inv[r][$i] = -u_inv[r][$i];
            }
        }};
    }

    let n = rows.min(cols);
    let mut t = 0;
    while t < n {
        // the trailing block only matters modulo `modulus`: keep it balanced
        if let Some(md) = modulus {
            for i in t..rows {
                for j in t..cols {
                    d[i][j] = balanced(d[i][j], md);
                }
            }
        }
        // locate the minimal nonzero |entry| in the trailing block
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if d[i][j] != 0
                    && pivot
                        .map(|(pi, pj)| d[i][j].abs() < d[pi][pj].abs())
                        .unwrap_or(true)
                {
                    pivot = Some((i, j));
                }
            }
        }
        let (pi, pj) = match pivot {
            None => break,
            Some(p) => p,
        };
        row_swap!(t, pi);
        col_swap!(t, pj);

        // clear row and column t with Bezout steps (entry growth stays tame)
        loop {
            let mut dirty = false;
            for i in (t + 1)..rows {
                if d[i][t] != 0 {
                    let (x, y) = (d[t][t], d[i][t]);
                    if y % x == 0 {
                        row_add!(i, t, -(y / x));
                    } else {
                        let (g, s, w) = egcd(x, y);
                        row_bezout!(t, i, s, w, -(y / g), x / g);
                        dirty = true;
                    }
                }
            }
            for j in (t + 1)..cols {
                if d[t][j] != 0 {
                    let (x, y) = (d[t][t], d[t][j]);
                    if y % x == 0 {
                        col_add!(j, t, -(y / x));
                    } else {
                        let (g, s, w) = egcd(x, y);
                        col_bezout!(t, j, s, w, -(y / g), x / g);
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }

        if d[t][t] < 0 {
            row_neg!(t);
        }

        // divisibility fixup: d[t][t] must divide the trailing block
        let mut fixed = true;
        'outer: for i in (t + 1)..rows {
            for j in (t + 1)..cols {
                if d[i][j] % d[t][t] != 0 {
                    row_add!(t, i, 1);
                    fixed = false;
                    break 'outer;
                }
            }
        }
        if fixed {
            t += 1;
        }
    }

    Snf {
        d,
        u,
        v,
        u_inv,
        v_inv,
    }
}

/// Extended gcd: returns `(g, s, t)` with `s a + t b = g > 0`.
fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Basis (as columns) of the integer kernel `{x : m x = 0}`.
pub fn kernel(m: &Mat) -> Vec<Vec<i128>> {
    let (_, cols) = shape(m);
    let s = snf(m);
    let diag = s.diag();
    let mut out = Vec::new();
    for j in 0..cols {
        let zero = j >= diag.len() || diag[j] == 0;
        if zero {
            out.push((0..cols).map(|i| s.v[i][j]).collect());
        }
    }
    out
}

/// One solution of `m x = b` over the integers, if any.
pub fn solve(m: &Mat, b: &[i128]) -> Option<Vec<i128>> {
    let (rows, cols) = shape(m);
    assert_eq!(rows, b.len());
    let s = snf(m);
    let ub = mat_vec(&s.u, b);
    let diag = s.diag();
    let mut y = vec![0i128; cols];
    for i in 0..rows {
        let di = if i < diag.len() { diag[i] } else { 0 };
        if di == 0 {
            if ub[i] != 0 {
                return None;
            }
        } else {
            if ub[i] % di != 0 {
                return None;
            }
            if i < cols {
                y[i] = ub[i] / di;
            }
        }
    }
    Some(mat_vec(&s.v, &y))
}

/// Basis (columns of an `n x n` matrix) of the full-rank lattice spanned by
/// the given columns. Panics if the span is not full rank.
pub fn lattice_basis(gens: &Mat) -> Mat {
    let (n, _) = shape(gens);
    let s = snf(gens);
    let diag = s.diag();
    assert!(
        diag.len() >= n && diag.iter().take(n).all(|&d| d != 0),
        "lattice is not full rank"
    );
    // colspan(m) = u_inv * colspan(d); basis vectors d_i * u_inv e_i
    let mut basis = zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            basis[i][j] = s.u_inv[i][j] * diag[j];
        }
    }
    basis
}

/// Does the (full-rank, `n x n`) lattice with basis `basis` contain `x`?
pub fn lattice_contains(basis: &Mat, x: &[i128]) -> bool {
    solve(basis, x).is_some()
}

/// Basis (columns, full rank `cols x cols`) of the congruence-kernel lattice
/// `{x : (a x)_r = 0 mod moduli[r] for all r}` with positive moduli.
///
/// Row `r` is scaled by `N / moduli[r]` (N the lcm) and reduced mod `N`, which
/// keeps the SNF input small; if `u a' v = s` then the lattice is
/// `v . diag(N / gcd(s_j, N))`.
pub fn preimage_lattice_mod(a: &Mat, moduli: &[i128]) -> Mat {
    let (rows, cols) = shape(a);
    assert_eq!(moduli.len(), rows);
    assert!(moduli.iter().all(|&m| m > 0), "moduli must be positive");
    if cols == 0 {
        return vec![];
    }
    if rows == 0 {
        return identity(cols);
    }
    let n = moduli.iter().fold(1i128, |acc, &m| {
        let g = gcd(acc, m);
        acc / g * m
    });
    let scaled: Mat = (0..rows)
        .map(|r| {
            let f = n / moduli[r];
            a[r].iter().map(|&x| (x * f).rem_euclid(n)).collect()
        })
        .collect();
    let s = snf_mod(&scaled, n);
    let diag = s.diag();
    let mut out = zeros(cols, cols);
    for j in 0..cols {
        let dj = if j < diag.len() { diag[j] } else { 0 };
        let c = if dj == 0 { 1 } else { n / gcd(dj, n) };
        for i in 0..cols {
            out[i][j] = s.v[i][j] * c;
        }
    }
    out
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// One solution of the congruence system `(a x)_r = b_r mod moduli[r]`.
pub fn solve_mod(a: &Mat, moduli: &[i128], b: &[i128]) -> Option<Vec<i128>> {
    let (rows, cols) = shape(a);
    assert_eq!(moduli.len(), rows);
    assert_eq!(b.len(), rows);
    if rows == 0 {
        return Some(vec![0; cols]);
    }
    let n = moduli.iter().fold(1i128, |acc, &m| {
        let g = gcd(acc, m);
        acc / g * m
    });
    let scaled: Mat = (0..rows)
        .map(|r| {
            let f = n / moduli[r];
            a[r].iter().map(|&x| (x * f).rem_euclid(n)).collect()
        })
        .collect();
    let sb: Vec<i128> = (0..rows)
        .map(|r| (b[r] * (n / moduli[r])).rem_euclid(n))
        .collect();
    let s = snf_mod(&scaled, n);
    // the transforms are exact for A' with A' = scaled (mod n); solve
    // D z = U b (mod n) coordinatewise, then x = V z
    let ub = mat_vec(&s.u, &sb);
    let diag = s.diag();
    let mut z = vec![0i128; cols];
    for r in 0..rows {
        let d = if r < diag.len() { diag[r] } else { 0 };
        let rhs = ub[r].rem_euclid(n);
        if d == 0 {
            if rhs % n != 0 {
                return None;
            }
        } else {
            let g = gcd(d, n);
            if rhs % g != 0 {
                return None;
            }
            if r < cols {
                // d z = rhs (mod n): z = (rhs/g) * inv(d/g) mod n/g
                let (np, dp, rp) = (n / g, d / g, rhs / g);
                let inv = mod_inverse(dp.rem_euclid(np), np)?;
                z[r] = (rp % np) * inv % np;
            }
        }
    }
    let x = mat_vec(&s.v, &z);
    // verify (guards the A' = A (mod n) identification)
    for r in 0..rows {
        let got: i128 = a[r].iter().zip(&x).map(|(&c, &v)| c * v).sum();
        if (got - b[r]).rem_euclid(moduli[r]) != 0 {
            return None;
        }
    }
    Some(x)
}

fn mod_inverse(a: i128, n: i128) -> Option<i128> {
    if n == 1 {
        return Some(0);
    }
    let (g, s, _) = {
        let (mut r0, mut r1) = (a.rem_euclid(n), n);
        let (mut s0, mut s1) = (1i128, 0i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        (r0, s0, t0)
    };
    if g != 1 && g != -1 {
        return None;
    }
    Some((s * g.signum()).rem_euclid(n))
}

/// Determinant of a square matrix via SNF (up to sign: product of diagonal).
pub fn abs_det(m: &Mat) -> i128 {
    let s = snf(m);
    s.diag().iter().product()
}
