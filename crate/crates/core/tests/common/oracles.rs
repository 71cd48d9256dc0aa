//! Independent reference computations.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use qrhull::yuv::{FrameYuv420, Plane};

/// Σ(a−b)² by a plain double loop over rows and columns.
pub fn sse_exact(a: &Plane, b: &Plane) -> u128 {
    let w = a.width as usize;
    let mut sse: u128 = 0;
    for row in 0..a.height as usize {
        for col in 0..w {
            let d = i64::from(a.data[row * w + col]) - i64::from(b.data[row * w + col]);
            sse += (d * d) as u128;
        }
    }
    sse
}

/// 10·log10(255²·n / sse), 100 dB when identical.
pub fn psnr_exact(sse: u128, samples: u128) -> f64 {
    if sse == 0 {
        return 100.0;
    }
    // both integers are exact in f64 for frames up to UHD
    10.0 * ((65025u128 * samples) as f64).log10() - 10.0 * (sse as f64).log10()
}

/// (PSNR_Y, PSNR_U, PSNR_V, PSNR_420) with the 4:1:1 luma weighting.
pub fn frame_psnr_exact(a: &FrameYuv420, b: &FrameYuv420) -> (f64, f64, f64, f64) {
    let p = |x: &Plane, y: &Plane| psnr_exact(sse_exact(x, y), u128::from(x.width * x.height));
    let (y, u, v) = (p(&a.y, &b.y), p(&a.u, &b.u), p(&a.v, &b.v));
    (y, u, v, (4.0 * y + u + v) / 6.0)
}

fn env_at(points: &[(i128, i128)], x: i128) -> Option<(i128, i128)> {
    // upper envelope value at x as a fraction num/den, den > 0
    let mut best: Option<(i128, i128)> = None;
    let mut consider = |num: i128, den: i128| {
        best = match best {
            Some((bn, bd)) if BigInt::from(bn) * den >= BigInt::from(num) * bd => Some((bn, bd)),
            _ => Some((num, den)),
        };
    };
    for a in points {
        if a.0 == x {
            consider(a.1, 1);
        }
        for b in points {
            if a.0 < x && x < b.0 {
                let den = b.0 - a.0;
                consider(a.1 * den + (b.1 - a.1) * (x - a.0), den);
            }
        }
    }
    best
}

/// Frontier vertex indices by brute force over exact integer coordinates: a
/// point is kept iff the upper envelope of the others passes strictly below
/// it, and vertices right of the leftmost maximum are dropped.
pub fn hull_oracle(points: &[(i128, i128)]) -> Vec<usize> {
    let alive: Vec<usize> = (0..points.len())
        .filter(|&i| !points[..i].contains(&points[i]))
        .collect();
    let mut vertices: Vec<usize> = alive
        .iter()
        .copied()
        .filter(|&p| {
            let others: Vec<(i128, i128)> = alive.iter().filter(|&&j| j != p).map(|&j| points[j]).collect();
            match env_at(&others, points[p].0) {
                None => true,
                Some((num, den)) => num < points[p].1 * den,
            }
        })
        .collect();
    vertices.sort_by_key(|&i| points[i].0);
    let max_y = vertices.iter().map(|&i| points[i].1).max();
    if let Some(max_y) = max_y {
        let cut = vertices.iter().position(|&i| points[i].1 == max_y).unwrap();
        vertices.truncate(cut + 1);
    }
    vertices
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Least squares through the normal equations `XᵀX c = Xᵀy`, solved by
/// Gaussian elimination in exact rationals. Highest power first.
pub fn normal_equations_fit(x: &[f64], y: &[f64], degree: usize) -> Vec<f64> {
    let p = degree + 1;
    let xs: Vec<BigRational> = x.iter().map(|&v| rational(v)).collect();
    let ys: Vec<BigRational> = y.iter().map(|&v| rational(v)).collect();
    // powers[i][k] = x_i^k
    let powers: Vec<Vec<BigRational>> = xs
        .iter()
        .map(|xi| {
            let mut row = vec![BigRational::one()];
            for k in 1..=2 * degree {
                let next = &row[k - 1] * xi;
                row.push(next);
            }
            row
        })
        .collect();
    // m[r][c] = Σ x^(r+c), rhs[r] = Σ x^r y, with index = power
    let mut m: Vec<Vec<BigRational>> = (0..p)
        .map(|r| {
            (0..p)
                .map(|c| powers.iter().fold(BigRational::zero(), |acc, pw| acc + &pw[r + c]))
                .collect()
        })
        .collect();
    let mut rhs: Vec<BigRational> = (0..p)
        .map(|r| {
            powers
                .iter()
                .zip(&ys)
                .fold(BigRational::zero(), |acc, (pw, yi)| acc + &pw[r] * yi)
        })
        .collect();
    for col in 0..p {
        let pivot = (col..p).find(|&r| !m[r][col].is_zero()).expect("singular system");
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in 0..p {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                for c in col..p {
                    let t = &f * &m[col][c];
                    m[r][c] -= t;
                }
                let t = &f * &rhs[col];
                rhs[r] -= t;
            }
        }
    }
    let ascending: Vec<f64> = (0..p)
        .map(|i| (&rhs[i] / &m[i][i]).to_f64().expect("representable"))
        .collect();
    ascending.into_iter().rev().collect()
}

/// Population std of b−a from exact integer moments.
pub fn ti_pair(a: &Plane, b: &Plane) -> f64 {
    let n = BigInt::from(a.data.len());
    let (mut s, mut s2) = (BigInt::zero(), BigInt::zero());
    for (x, y) in a.data.iter().zip(&b.data) {
        let d = BigInt::from(i32::from(*y) - i32::from(*x));
        s2 += &d * &d;
        s += d;
    }
    let var = BigRational::new(&n * s2 - &s * &s, &n * &n);
    debug_assert!(!var.is_negative());
    var.to_f64().unwrap().sqrt()
}

const KX: [[i32; 3]; 3] = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
const KY: [[i32; 3]; 3] = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]];

/// Population std of the 3×3 Sobel magnitude over the interior, by explicit
/// kernel correlation and a two-pass variance.
pub fn si_frame(p: &Plane) -> f64 {
    let (w, h) = (p.width as usize, p.height as usize);
    let mut mags = Vec::new();
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            let (mut gx, mut gy) = (0i64, 0i64);
            for (i, dr) in [-1isize, 0, 1].iter().enumerate() {
                for (j, dc) in [-1isize, 0, 1].iter().enumerate() {
                    let v = i64::from(p.data[(r as isize + dr) as usize * w + (c as isize + dc) as usize]);
                    gx += i64::from(KX[i][j]) * v;
                    gy += i64::from(KY[i][j]) * v;
                }
            }
            mags.push(((gx * gx + gy * gy) as f64).sqrt());
        }
    }
    let n = mags.len() as f64;
    let mean = mags.iter().sum::<f64>() / n;
    (mags.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Diagonal of `(XᵀX)⁻¹` for the Vandermonde design, in exact rationals.
/// Highest power first.
pub fn normal_inverse_diagonal(x: &[f64], degree: usize) -> Vec<f64> {
    let p = degree + 1;
    let xs: Vec<BigRational> = x.iter().map(|&v| rational(v)).collect();
    let moment = |k: usize| {
        xs.iter().fold(BigRational::zero(), |acc, xi| {
            let mut t = BigRational::one();
            for _ in 0..k {
                t *= xi;
            }
            acc + t
        })
    };
    let moments: Vec<BigRational> = (0..=2 * degree).map(moment).collect();
    let mut m: Vec<Vec<BigRational>> = (0..p)
        .map(|r| {
            let mut row: Vec<BigRational> = (0..p).map(|c| moments[r + c].clone()).collect();
            row.extend((0..p).map(|c| if c == r { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    for col in 0..p {
        let pivot = (col..p).find(|&r| !m[r][col].is_zero()).expect("singular system");
        m.swap(col, pivot);
        let inv = BigRational::one() / &m[col][col];
        for c in 0..2 * p {
            m[col][c] *= &inv;
        }
        for r in 0..p {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..2 * p {
                    let t = &f * &m[col][c];
                    m[r][c] -= t;
                }
            }
        }
    }
    let ascending: Vec<f64> = (0..p).map(|i| m[i][p + i].to_f64().unwrap()).collect();
    ascending.into_iter().rev().collect()
}

/// Maps values that are integer multiples of 2⁻⁵² onto exact integers.
pub fn exact_grid(points: &[(f64, f64)]) -> Vec<(i128, i128)> {
    let s = 2f64.powi(52);
    points
        .iter()
        .map(|&(x, y)| {
            let (a, b) = (x * s, y * s);
            assert!(a.fract() == 0.0 && b.fract() == 0.0 && a.abs() < 2f64.powi(60) && b.abs() < 2f64.powi(60));
            (a as i128, b as i128)
        })
        .collect()
}
