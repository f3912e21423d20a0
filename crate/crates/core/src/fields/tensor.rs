//! Pointwise 3×3 algebra. Matrices are `[[f64; 3]; 3]` indexed `[row][col]`;
//! tensor fields store entry `(i, j)` at component `3 i + j`.

pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Non-zero entries of the Levi-Civita symbol for a fixed first index:
/// `(m, n, ε_{imn})`.
const EPS: [[(usize, usize, f64); 2]; 3] = [
    [(1, 2, 1.0), (2, 1, -1.0)],
    [(2, 0, 1.0), (0, 2, -1.0)],
    [(0, 1, 1.0), (1, 0, -1.0)],
];

pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    EPS[i]
        .iter()
        .find(|&&(m, n, _)| m == j && n == k)
        .map_or(0.0, |&(_, _, s)| s)
}

/// `B(X, Y)_ij = ½ ε_imn ε_jkl X_km Y_ln`; symmetric in `X`, `Y`, and
/// `B(J, J)` is the cofactor matrix of a deformation gradient `J_km = ∂_m η_k`.
pub fn bilinear_cofactor(x: &Mat3, y: &Mat3) -> Mat3 {
    let mut b = [[0.0; 3]; 3];
    for (i, row) in b.iter_mut().enumerate() {
        for (j, bij) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(m, n, s1) in &EPS[i] {
                for &(k, l, s2) in &EPS[j] {
                    acc += s1 * s2 * x[k][m] * y[l][n];
                }
            }
            *bij = 0.5 * acc;
        }
    }
    b
}

/// Cofactor matrix `a_ij = ½ ε_imn ε_jkl ∂_m η_k ∂_n η_l`.
pub fn cofactor3(j: &Mat3) -> Mat3 {
    bilinear_cofactor(j, j)
}

/// Linear part of `a − I` in `E = ∇η − I`: `tr(E) I − E`.
pub fn cofactor_linear(e: &Mat3) -> Mat3 {
    let tr = e[0][0] + e[1][1] + e[2][2];
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            l[i][j] = if i == j { tr } else { 0.0 } - e[i][j];
        }
    }
    l
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn mul3(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn transpose3(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn sub3(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = *a;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] -= b[i][j];
        }
    }
    c
}

pub fn add3(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = *a;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] += b[i][j];
        }
    }
    c
}

/// Entry-wise sup norm.
pub fn max_abs3(a: &Mat3) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn load3(s: &[f64]) -> Mat3 {
    [[s[0], s[1], s[2]], [s[3], s[4], s[5]], [s[6], s[7], s[8]]]
}

pub fn store3(m: &Mat3, s: &mut [f64]) {
    for i in 0..3 {
        s[3 * i..3 * i + 3].copy_from_slice(&m[i]);
    }
}

/// `‖a J − det(J) I‖_∞` and `‖J a − det(J) I‖_∞`, the larger of the two.
pub fn adjugate_defect(j: &Mat3, a: &Mat3) -> f64 {
    let d = det3(j);
    let mut worst: f64 = 0.0;
    for prod in [mul3(a, j), mul3(j, a)] {
        for r in 0..3 {
            for c in 0..3 {
                let target = if r == c { d } else { 0.0 };
                worst = worst.max((prod[r][c] - target).abs());
            }
        }
    }
    worst
}
