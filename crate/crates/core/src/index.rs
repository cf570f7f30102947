//! Centered indexing.
//!
//! Chain quantities are naturally indexed symmetrically about the middle of
//! the chain: strains run over `-N..=N`, representative forces over
//! `-N..=N+1`. [`Centered`] stores them in a plain `Vec` together with the
//! index of the first element so the formulas can be written with the same
//! indices as the model equations.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// A vector whose first element carries the (possibly negative) index `origin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centered<T> {
    #[serde(rename = "index_origin")]
    origin: isize,
    values: Vec<T>,
}

impl<T> Centered<T> {
    /// Wraps `values` so that `values[0]` is addressed as `origin`.
    pub fn new(origin: isize, values: Vec<T>) -> Self {
        Self { origin, values }
    }

    /// Builds the vector over the inclusive index range `lo..=hi`.
    pub fn from_fn(lo: isize, hi: isize, mut f: impl FnMut(isize) -> T) -> Self {
        let values = (lo..=hi).map(&mut f).collect();
        Self { origin: lo, values }
    }

    /// Index of the first element.
    pub fn lo(&self) -> isize {
        self.origin
    }

    /// Index of the last element. Equal to `lo() - 1` when empty.
    pub fn hi(&self) -> isize {
        self.origin + self.values.len() as isize - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, i: isize) -> bool {
        i >= self.lo() && i <= self.hi()
    }

    pub fn get(&self, i: isize) -> Option<&T> {
        if self.contains(i) {
            self.values.get((i - self.origin) as usize)
        } else {
            None
        }
    }

    /// The underlying storage, ordered left to right.
    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    /// `(index, value)` pairs in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (isize, &T)> + '_ {
        let origin = self.origin;
        self.values
            .iter()
            .enumerate()
            .map(move |(k, v)| (origin + k as isize, v))
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<isize> {
        self.lo()..=self.hi()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Centered<U> {
        Centered {
            origin: self.origin,
            values: self.values.iter().map(f).collect(),
        }
    }
}

impl<T: Copy + Default> Centered<T> {
    /// Value at `i`, or `T::default()` outside the stored range.
    pub fn at_or_default(&self, i: isize) -> T {
        self.get(i).copied().unwrap_or_default()
    }
}

impl Centered<f64> {
    pub fn zeros(lo: isize, hi: isize) -> Self {
        Self::from_fn(lo, hi, |_| 0.0)
    }

    /// Maximum absolute entry; zero for an empty vector.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `‖self − other‖∞` over the common index range.
    pub fn max_abs_diff(&self, other: &Centered<f64>) -> f64 {
        let lo = self.lo().max(other.lo());
        let hi = self.hi().min(other.hi());
        (lo..=hi).fold(0.0_f64, |m, i| m.max((self[i] - other[i]).abs()))
    }

    /// Largest `|v_i − v_{−i}|` over indices whose mirror is also stored.
    pub fn symmetry_defect(&self) -> f64 {
        self.iter()
            .filter_map(|(i, v)| self.get(-i).map(|w| (v - w).abs()))
            .fold(0.0, f64::max)
    }
}

impl<T> Index<isize> for Centered<T> {
    type Output = T;

    fn index(&self, i: isize) -> &T {
        assert!(
            self.contains(i),
            "index {i} outside {}..={}",
            self.lo(),
            self.hi()
        );
        &self.values[(i - self.origin) as usize]
    }
}

impl<T> IndexMut<isize> for Centered<T> {
    fn index_mut(&mut self, i: isize) -> &mut T {
        assert!(
            self.contains(i),
            "index {i} outside {}..={}",
            self.lo(),
            self.hi()
        );
        &mut self.values[(i - self.origin) as usize]
    }
}
