//! Finite d-tuples of measures over a labeled support.
//!
//! Weights are stored unnormalized. The normalized average `mubar`, the
//! derivative profile `z_i = (mu_j(x_i) / mubar(x_i))_j` and the law of that
//! profile under `mubar` are computed on demand.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::{sum, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct SupportPoint {
    pub label: String,
    pub coords: Option<Vec<Rational>>,
}

impl SupportPoint {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            coords: None,
        }
    }

    pub fn with_coords(label: impl Into<String>, coords: Vec<Rational>) -> Self {
        Self {
            label: label.into(),
            coords: Some(coords),
        }
    }
}

/// `d` nonnegative weight rows over a common finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteVectorMeasure<S = Rational> {
    support: Vec<SupportPoint>,
    /// `weights[j][i] = mu_j({x_i})`
    weights: Vec<Vec<S>>,
}

impl<S: Scalar> DiscreteVectorMeasure<S> {
    pub fn new(support: Vec<SupportPoint>, weights: Vec<Vec<S>>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one component".into()));
        }
        if support.is_empty() {
            return Err(Error::InvalidInput("support is empty".into()));
        }
        let n = support.len();
        for (j, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "component {j} has {} weights for {n} support points",
                    row.len()
                )));
            }
            if let Some(i) = row.iter().position(|w| w.is_negative()) {
                return Err(Error::InvalidInput(format!(
                    "negative weight at component {j}, point {i}"
                )));
            }
            if !sum(row).is_pos() {
                return Err(Error::InvalidInput(format!(
                    "component {j} has zero total mass"
                )));
            }
        }
        let mut seen = HashSet::new();
        for p in &support {
            if !seen.insert(p.label.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate label {:?}", p.label)));
            }
        }
        Ok(Self { support, weights })
    }

    /// Builds a measure on points labeled `0..n`.
    pub fn from_weights(weights: Vec<Vec<S>>) -> Result<Self> {
        let n = weights.first().map_or(0, Vec::len);
        let support = (0..n).map(|i| SupportPoint::new(i.to_string())).collect();
        Self::new(support, weights)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[SupportPoint] {
        &self.support
    }

    pub fn weights(&self) -> &[Vec<S>] {
        &self.weights
    }

    pub fn weight(&self, j: usize, i: usize) -> &S {
        &self.weights[j][i]
    }

    /// The vector `(mu_1({x_i}), ..., mu_d({x_i}))`.
    pub fn column(&self, i: usize) -> Vec<S> {
        self.weights.iter().map(|row| row[i].clone()).collect()
    }

    /// Component totals `mu_j(X)`.
    pub fn totals(&self) -> Vec<S> {
        self.weights.iter().map(|row| sum(row)).collect()
    }

    pub fn total_mass(&self) -> S {
        sum(&self.totals())
    }

    /// Componentwise equal totals.
    pub fn is_balanced_with(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self
                .totals()
                .iter()
                .zip(other.totals())
                .all(|(a, b)| a.approx_eq(&b))
    }

    /// Per-point mass of `sum_j mu_j`, unnormalized.
    pub fn column_sums(&self) -> Vec<S> {
        (0..self.len()).map(|i| sum(&self.column(i))).collect()
    }

    /// Normalized average `sum_j mu_j / sum_j mu_j(X)`.
    pub fn mubar(&self) -> Result<Vec<S>> {
        let cols = self.column_sums();
        let total = sum(&cols);
        if !total.is_pos() {
            return Err(Error::ZeroTotalMass);
        }
        Ok(cols.into_iter().map(|c| c / total.clone()).collect())
    }

    /// Drops support points carrying no mass in any component.
    pub fn trim(&self) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.weights.iter().any(|row| !row[i].is_zero_tol()))
            .collect();
        self.restrict(&keep)
    }

    pub fn is_trimmed(&self) -> bool {
        (0..self.len()).all(|i| self.weights.iter().any(|row| !row[i].is_zero_tol()))
    }

    fn restrict(&self, keep: &[usize]) -> Self {
        Self {
            support: keep.iter().map(|&i| self.support[i].clone()).collect(),
            weights: self
                .weights
                .iter()
                .map(|row| keep.iter().map(|&i| row[i].clone()).collect())
                .collect(),
        }
    }

    /// Multiplies every weight by `t > 0`.
    pub fn scaled(&self, t: &S) -> Result<Self> {
        if !t.is_pos() {
            return Err(Error::InvalidInput("scale must be positive".into()));
        }
        Ok(Self {
            support: self.support.clone(),
            weights: self
                .weights
                .iter()
                .map(|row| row.iter().map(|w| w.clone() * t.clone()).collect())
                .collect(),
        })
    }

    /// Converts the weights to another scalar type through their exact value.
    pub fn convert<T: Scalar>(&self) -> DiscreteVectorMeasure<T>
    where
        S: Scalar,
    {
        DiscreteVectorMeasure {
            support: self.support.clone(),
            weights: self
                .weights
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|w| T::from_rational(&w.to_rational().unwrap_or_default()))
                        .collect()
                })
                .collect(),
        }
    }

    /// `z_i[j] = mu_j({x_i}) / mubar({x_i})`.
    pub fn derivative_profile(&self) -> Result<DerivativeProfile<S>> {
        let bar = self.mubar()?;
        let mut vectors = Vec::with_capacity(self.len());
        for (i, b) in bar.iter().enumerate() {
            if b.is_zero_tol() {
                return Err(Error::DivisionByZeroMass(i));
            }
            vectors.push(
                self.weights
                    .iter()
                    .map(|row| row[i].clone() / b.clone())
                    .collect(),
            );
        }
        Ok(DerivativeProfile { vectors })
    }

    /// Law of the derivative profile under `mubar`.
    pub fn derivative_law(&self) -> Result<DerivativeLaw<S>> {
        let profile = self.derivative_profile()?;
        let bar = self.mubar()?;
        Ok(DerivativeLaw::from_profile(&profile, &bar))
    }

    /// Scalar coordinates of every support point, if all points carry exactly one.
    pub fn scalar_coords(&self) -> Result<Vec<Rational>> {
        self.support
            .iter()
            .map(|p| match p.coords.as_deref() {
                Some([c]) => Ok(c.clone()),
                _ => Err(Error::MissingCoords(format!(
                    "point {:?} needs a single scalar coordinate",
                    p.label
                ))),
            })
            .collect()
    }
}

/// Radon-Nikodym profile of a measure tuple against its normalized average.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeProfile<S = Rational> {
    pub vectors: Vec<Vec<S>>,
}

/// Finite law over profile vectors, with the support points making up each atom.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeLaw<S = Rational> {
    pub atoms: Vec<Vec<S>>,
    pub masses: Vec<S>,
    pub members: Vec<Vec<usize>>,
}

impl<S: Scalar> DerivativeLaw<S> {
    /// Groups profile vectors into atoms. Exact scalars group by equality; floats
    /// use single-linkage clustering at `FLOAT_TOL` in the sup norm, with the
    /// atom placed at the mass-weighted mean of its members.
    pub fn from_profile(profile: &DerivativeProfile<S>, mass: &[S]) -> Self {
        let n = profile.vectors.len();
        let groups = if S::EXACT {
            group_exact(&profile.vectors)
        } else {
            single_linkage(&profile.vectors)
        };
        let mut law = DerivativeLaw {
            atoms: Vec::new(),
            masses: Vec::new(),
            members: Vec::new(),
        };
        debug_assert_eq!(groups.iter().map(Vec::len).sum::<usize>(), n);
        for members in groups {
            let m = members
                .iter()
                .fold(S::zero(), |acc, &i| acc + mass[i].clone());
            let atom = if S::EXACT || members.len() == 1 || !m.is_pos() {
                profile.vectors[members[0]].clone()
            } else {
                let d = profile.vectors[members[0]].len();
                (0..d)
                    .map(|j| {
                        members.iter().fold(S::zero(), |acc, &i| {
                            acc + profile.vectors[i][j].clone() * mass[i].clone()
                        }) / m.clone()
                    })
                    .collect()
            };
            law.atoms.push(atom);
            law.masses.push(m);
            law.members.push(members);
        }
        law
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms.first().map_or(0, Vec::len)
    }

    /// Mean vector, which equals the component totals of the underlying measure.
    pub fn mean(&self) -> Vec<S> {
        let d = self.dim();
        (0..d)
            .map(|j| {
                self.atoms
                    .iter()
                    .zip(&self.masses)
                    .fold(S::zero(), |acc, (a, m)| acc + a[j].clone() * m.clone())
            })
            .collect()
    }

    /// Every atom has a single member.
    pub fn is_injective(&self) -> bool {
        self.members.iter().all(|m| m.len() == 1)
    }

    /// Index of the atom equal to `z`, if any.
    pub fn find(&self, z: &[S]) -> Option<usize> {
        self.atoms
            .iter()
            .position(|a| crate::scalar::vec_approx_eq(a, z))
    }
}

fn group_exact<S: Scalar>(vectors: &[Vec<S>]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        match groups.iter_mut().find(|g| vectors[g[0]] == *v) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

/// Sup-norm distance in f64.
pub(crate) fn sup_dist<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.to_f64() - y.to_f64()).abs())
        .fold(0.0, f64::max)
}

/// Connected components of the graph linking vectors within `FLOAT_TOL`.
/// Components are ordered by their smallest member.
pub(crate) fn single_linkage<S: Scalar>(vectors: &[Vec<S>]) -> Vec<Vec<usize>> {
    let n = vectors.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for k in i + 1..n {
            if sup_dist(&vectors[i], &vectors[k]) <= crate::scalar::FLOAT_TOL {
                let (a, b) = (find(&mut parent, i), find(&mut parent, k));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of_group: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of_group.iter().position(|&g| g == r) {
            Some(pos) => groups[pos].push(i),
            None => {
                root_of_group.push(r);
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Reference probability `eta` over the source support.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMeasure<S = Rational> {
    pub weights: Vec<S>,
    /// `eta` charges exactly the points charged by `mubar`.
    pub equivalent: bool,
}

impl<S: Scalar> ReferenceMeasure<S> {
    /// Validates `eta` against `mu`: nonnegative, sums to one, absolutely
    /// continuous with respect to `mubar`.
    pub fn new(weights: Vec<S>, mu: &DiscreteVectorMeasure<S>) -> Result<Self> {
        if weights.len() != mu.len() {
            return Err(Error::DimensionMismatch(format!(
                "eta has {} weights for {} support points",
                weights.len(),
                mu.len()
            )));
        }
        if weights.iter().any(|w| w.is_neg()) {
            return Err(Error::InvalidInput("eta has a negative weight".into()));
        }
        if !sum(&weights).approx_eq(&S::one()) {
            return Err(Error::InvalidInput("eta must sum to 1".into()));
        }
        let bar = mu.mubar()?;
        let mut equivalent = true;
        for (i, (e, b)) in weights.iter().zip(&bar).enumerate() {
            match (e.is_pos(), b.is_pos()) {
                (true, false) => {
                    return Err(Error::InvalidInput(format!(
                        "eta charges point {i} which has no mass under mubar"
                    )))
                }
                (false, true) => equivalent = false,
                _ => {}
            }
        }
        Ok(Self {
            weights,
            equivalent,
        })
    }

    /// `eta = mubar`.
    pub fn mubar(mu: &DiscreteVectorMeasure<S>) -> Result<Self> {
        Self::new(mu.mubar()?, mu)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(d mu / d eta)(x_i)`; zero where `mu` has no mass. `None` where `eta`
    /// vanishes but `mu` does not.
    pub fn density(&self, mu: &DiscreteVectorMeasure<S>, i: usize) -> Option<Vec<S>> {
        let col = mu.column(i);
        if self.weights[i].is_zero_tol() {
            if col.iter().all(|w| w.is_zero_tol()) {
                Some(vec![S::zero(); col.len()])
            } else {
                None
            }
        } else {
            Some(col.into_iter().map(|w| w / self.weights[i].clone()).collect())
        }
    }
}
