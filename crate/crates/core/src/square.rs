use std::ops::{Index, IndexMut};

use serde::Serialize;

/// Dense row-major `k × k` table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Square<V> {
    k: usize,
    data: Vec<V>,
}

impl<V: Clone> Square<V> {
    pub fn filled(k: usize, value: V) -> Self {
        Self {
            k,
            data: vec![value; k * k],
        }
    }
}

impl<V> Square<V> {
    pub fn from_fn(k: usize, mut f: impl FnMut(usize, usize) -> V) -> Self {
        let mut data = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                data.push(f(i, j));
            }
        }
        Self { k, data }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[V] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[V]> {
        self.data.chunks(self.k.max(1))
    }

    pub fn as_slice(&self) -> &[V] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [V] {
        &mut self.data
    }
}

impl<V> Index<(usize, usize)> for Square<V> {
    type Output = V;

    fn index(&self, (i, j): (usize, usize)) -> &V {
        debug_assert!(i < self.k && j < self.k);
        &self.data[i * self.k + j]
    }
}

impl<V> IndexMut<(usize, usize)> for Square<V> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut V {
        debug_assert!(i < self.k && j < self.k);
        &mut self.data[i * self.k + j]
    }
}
