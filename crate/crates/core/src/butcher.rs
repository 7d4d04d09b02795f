//! Explicit Runge-Kutta tableaus and the fast / buffer / slow partition
//! tableaus of a multirate partitioned Runge-Kutta (MPRK) scheme.
//!
//! A multirate set is generated from a base method with `s` stages and a
//! rate ratio `m`. All three partitions have `m * s` stages:
//!
//! * **fast** runs `m` subcycles of the base method with step `dt / m`;
//! * **buffer** evaluates the base method's stage pattern once per subcycle
//!   (unscaled, block diagonal) but is combined with the fast weights;
//! * **slow** performs one base step of size `dt`; stages beyond the first
//!   `s` are copies of the first `s`.

use std::fmt;

use thiserror::Error;

use crate::domain::Region;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableauError {
    #[error("tableau dimensions are inconsistent: {0}")]
    Shape(String),
    #[error("tableau is not explicit: a[{row}][{col}] = {value} on or above the diagonal")]
    Implicit { row: usize, col: usize, value: f64 },
    #[error("rate ratio must be at least 1")]
    ZeroRate,
}

/// Coefficients `(a, b, c)` of an explicit Runge-Kutta method.
///
/// `a` is stored dense, row-major, `stages x stages`.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    stages: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ButcherTableau {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Result<Self, TableauError> {
        let stages = b.len();
        if stages == 0 {
            return Err(TableauError::Shape("no stages".into()));
        }
        if c.len() != stages || a.len() != stages {
            return Err(TableauError::Shape(format!(
                "len(a) = {}, len(b) = {}, len(c) = {}",
                a.len(),
                stages,
                c.len()
            )));
        }
        let mut dense = vec![0.0; stages * stages];
        for (i, row) in a.iter().enumerate() {
            if row.len() > stages {
                return Err(TableauError::Shape(format!("row {i} has {} entries", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if j >= i && v != 0.0 {
                    return Err(TableauError::Implicit { row: i, col: j, value: v });
                }
                dense[i * stages + j] = v;
            }
        }
        Ok(Self { stages, a: dense, b, c })
    }

    /// Two-stage explicit trapezoidal rule (Heun's method).
    pub fn base_rk2() -> Self {
        Self::new(vec![vec![], vec![1.0]], vec![0.5, 0.5], vec![0.0, 1.0])
            .expect("rk2 tableau is valid")
    }

    /// Classical four-stage, fourth-order method. Used as a reference integrator.
    pub fn classical_rk4() -> Self {
        Self::new(
            vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 0.5, 1.0],
        )
        .expect("rk4 tableau is valid")
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.stages + j]
    }

    /// Row `i` of `a`, restricted to the strictly lower part `a[i][0..i]`.
    pub fn a_row(&self, i: usize) -> &[f64] {
        &self.a[i * self.stages..i * self.stages + i]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Largest `|c_i - sum_j a_ij|` over all rows.
    pub fn row_sum_defect(&self) -> f64 {
        (0..self.stages)
            .map(|i| (self.c[i] - self.a_row(i).iter().sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }

    pub fn weight_sum(&self) -> f64 {
        self.b.iter().sum()
    }

    /// `b . c`, equal to 1/2 for any second-order method.
    pub fn second_order_sum(&self) -> f64 {
        self.b.iter().zip(&self.c).map(|(b, c)| b * c).sum()
    }

    /// Coefficients `p_0..=p_stages` of the stability polynomial
    /// `R(z) = 1 + sum_k z^k b^T A^(k-1) 1` of an explicit method.
    pub fn stability_polynomial(&self) -> Vec<f64> {
        let n = self.stages;
        let mut coeffs = Vec::with_capacity(n + 1);
        coeffs.push(1.0);
        let mut v = vec![1.0; n];
        for _ in 0..n {
            coeffs.push(self.b.iter().zip(&v).map(|(b, x)| b * x).sum());
            let next: Vec<f64> = (0..n)
                .map(|i| self.a_row(i).iter().zip(&v).map(|(a, x)| a * x).sum())
                .collect();
            v = next;
        }
        coeffs
    }

    fn from_dense(stages: usize, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Self {
        debug_assert_eq!(a.len(), stages * stages);
        Self { stages, a, b, c }
    }
}

impl fmt::Display for ButcherTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.stages {
            write!(f, "{:>9.6} |", self.c[i])?;
            for j in 0..i {
                write!(f, " {:>9.6}", self.a(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "{:-<11}", "")?;
        writeln!(f, "{:-<1$}", "", 10 * self.stages)?;
        write!(f, "{:>9} |", "")?;
        for b in &self.b {
            write!(f, " {b:>9.6}")?;
        }
        writeln!(f)
    }
}

/// The three partition tableaus of a multirate scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct MprkTableauSet {
    pub fast: ButcherTableau,
    pub buffer: ButcherTableau,
    pub slow: ButcherTableau,
    pub m: usize,
    pub s: usize,
}

impl MprkTableauSet {
    pub fn get(&self, region: Region) -> &ButcherTableau {
        match region {
            Region::Fast => &self.fast,
            Region::Buffer => &self.buffer,
            Region::Slow => &self.slow,
        }
    }

    /// Total stage count `m * s`.
    pub fn stages(&self) -> usize {
        self.m * self.s
    }

    /// Index of the base stage that global stage `i` (0-based) repeats.
    #[inline]
    pub fn base_stage(&self, i: usize) -> usize {
        i % self.s
    }
}

/// Builds the fast, buffer and slow tableaus of the multirate scheme with
/// rate ratio `m` over the explicit `base` method.
pub fn generate_mprk(base: &ButcherTableau, m: usize) -> Result<MprkTableauSet, TableauError> {
    if m == 0 {
        return Err(TableauError::ZeroRate);
    }
    let s = base.stages();
    for i in 0..s {
        for j in i..s {
            let v = base.a(i, j);
            if v != 0.0 {
                return Err(TableauError::Implicit { row: i, col: j, value: v });
            }
        }
    }
    let n = m * s;
    let mf = m as f64;

    let mut a_fast = vec![0.0; n * n];
    let mut a_buffer = vec![0.0; n * n];
    let mut a_slow = vec![0.0; n * n];
    for k in 0..m {
        for i in 0..s {
            let row = k * s + i;
            // earlier subcycles contribute their full weights
            for l in 0..k {
                for j in 0..s {
                    a_fast[row * n + l * s + j] = base.b[j] / mf;
                }
            }
            for j in 0..i {
                a_fast[row * n + k * s + j] = base.a(i, j) / mf;
                a_buffer[row * n + k * s + j] = base.a(i, j);
                a_slow[row * n + j] = base.a(i, j);
            }
        }
    }

    let b_fast: Vec<f64> = (0..n).map(|i| base.b[i % s] / mf).collect();
    let mut b_slow = vec![0.0; n];
    b_slow[..s].copy_from_slice(&base.b);

    let c_fast: Vec<f64> = (0..n)
        .map(|i| (i / s) as f64 / mf + base.c[i % s] / mf)
        .collect();
    let c_repeat: Vec<f64> = (0..n).map(|i| base.c[i % s]).collect();

    Ok(MprkTableauSet {
        fast: ButcherTableau::from_dense(n, a_fast, b_fast.clone(), c_fast),
        buffer: ButcherTableau::from_dense(n, a_buffer, b_fast, c_repeat.clone()),
        slow: ButcherTableau::from_dense(n, a_slow, b_slow, c_repeat),
        m,
        s,
    })
}
