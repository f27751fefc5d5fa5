//! The unipotent group `W = U × V` with product twisted by an alternating
//! form `ψ: V × V → U`.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

/// An alternating bilinear map `ψ: Q^{dim_v} × Q^{dim_v} → Q^{dim_u}`,
/// one antisymmetric `dim_v × dim_v` matrix per U-coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarizationForm {
    dim_u: usize,
    dim_v: usize,
    tensor: Vec<Vec<Vec<BigRational>>>,
}

impl PolarizationForm {
    pub fn new(dim_u: usize, dim_v: usize, tensor: Vec<Vec<Vec<BigRational>>>) -> Result<Self> {
        if tensor.len() != dim_u || tensor.iter().any(|m| m.len() != dim_v || m.iter().any(|r| r.len() != dim_v)) {
            return Err(Error::DimensionMismatch(format!("psi tensor must be {dim_u} x {dim_v} x {dim_v}")));
        }
        for (k, m) in tensor.iter().enumerate() {
            for i in 0..dim_v {
                for j in i..dim_v {
                    if m[i][j] != -m[j][i].clone() {
                        return Err(Error::NonAlternatingForm { component: k, i, j });
                    }
                }
            }
        }
        Ok(PolarizationForm { dim_u, dim_v, tensor })
    }

    pub fn zero(dim_u: usize, dim_v: usize) -> Self {
        PolarizationForm {
            dim_u,
            dim_v,
            tensor: vec![vec![vec![BigRational::zero(); dim_v]; dim_v]; dim_u],
        }
    }

    pub fn dim_u(&self) -> usize {
        self.dim_u
    }

    pub fn dim_v(&self) -> usize {
        self.dim_v
    }

    pub fn dim_w(&self) -> usize {
        self.dim_u + self.dim_v
    }

    pub fn entry(&self, k: usize, i: usize, j: usize) -> &BigRational {
        &self.tensor[k][i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.tensor.iter().flatten().flatten().all(Zero::is_zero)
    }

    /// Nonzero entries `(k, i, j, value)` with `i < j`.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (usize, usize, usize, &BigRational)> {
        self.tensor.iter().enumerate().flat_map(|(k, m)| {
            m.iter().enumerate().flat_map(move |(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(move |(j, x)| *j > i && !x.is_zero())
                    .map(move |(j, x)| (k, i, j, x))
            })
        })
    }

    pub fn apply(&self, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        self.tensor
            .iter()
            .map(|m| {
                let mut acc = BigRational::zero();
                for (i, ai) in a.iter().enumerate() {
                    if ai.is_zero() {
                        continue;
                    }
                    for (j, bj) in b.iter().enumerate() {
                        if !m[i][j].is_zero() && !bj.is_zero() {
                            acc += ai * &m[i][j] * bj;
                        }
                    }
                }
                acc
            })
            .collect()
    }
}

/// An element `w = (u, v)` of `W(Q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeisenbergElement {
    pub u: Vec<BigRational>,
    pub v: Vec<BigRational>,
}

impl HeisenbergElement {
    pub fn new(u: Vec<BigRational>, v: Vec<BigRational>) -> Self {
        HeisenbergElement { u, v }
    }

    pub fn identity(dim_u: usize, dim_v: usize) -> Self {
        HeisenbergElement { u: vec![BigRational::zero(); dim_u], v: vec![BigRational::zero(); dim_v] }
    }

    /// Split a flat coordinate vector `u ++ v`.
    pub fn from_flat(flat: &[BigRational], dim_u: usize) -> Self {
        HeisenbergElement { u: flat[..dim_u].to_vec(), v: flat[dim_u..].to_vec() }
    }

    pub fn flat(&self) -> Vec<BigRational> {
        self.u.iter().chain(&self.v).cloned().collect()
    }

    pub fn is_identity(&self) -> bool {
        self.u.iter().chain(&self.v).all(Zero::is_zero)
    }

    fn check(&self, psi: &PolarizationForm) -> Result<()> {
        if self.u.len() != psi.dim_u || self.v.len() != psi.dim_v {
            return Err(Error::DimensionMismatch(format!(
                "element of shape ({}, {}) against form of shape ({}, {})",
                self.u.len(),
                self.v.len(),
                psi.dim_u,
                psi.dim_v
            )));
        }
        Ok(())
    }
}

/// `(a.u + b.u + ψ(a.v, b.v), a.v + b.v)`.
pub fn hmul(a: &HeisenbergElement, b: &HeisenbergElement, psi: &PolarizationForm) -> Result<HeisenbergElement> {
    a.check(psi)?;
    b.check(psi)?;
    let twist = psi.apply(&a.v, &b.v);
    let u = a.u.iter().zip(&b.u).zip(&twist).map(|((x, y), t)| x + y + t).collect();
    let v = a.v.iter().zip(&b.v).map(|(x, y)| x + y).collect();
    Ok(HeisenbergElement { u, v })
}

pub fn hinv(a: &HeisenbergElement, psi: &PolarizationForm) -> Result<HeisenbergElement> {
    a.check(psi)?;
    Ok(HeisenbergElement { u: a.u.iter().map(|x| -x).collect(), v: a.v.iter().map(|x| -x).collect() })
}

/// `w^n = (n·u, n·v)`, valid because ψ is alternating.
pub fn hpow(a: &HeisenbergElement, n: i64, psi: &PolarizationForm) -> Result<HeisenbergElement> {
    a.check(psi)?;
    let n = BigRational::from_integer(n.into());
    Ok(HeisenbergElement { u: a.u.iter().map(|x| x * &n).collect(), v: a.v.iter().map(|x| x * &n).collect() })
}
