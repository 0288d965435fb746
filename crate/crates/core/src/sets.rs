//! Dense bitsets over action and process indices.
//!
//! Every set is created against a fixed universe size and keeps bits above
//! that size zeroed, so equality and hashing work structurally.

use smallvec::{smallvec, SmallVec};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    nbits: u32,
    blocks: SmallVec<[u64; 1]>,
}

impl Bits {
    pub fn empty(nbits: usize) -> Self {
        let nblocks = nbits.div_ceil(64).max(1);
        Bits {
            nbits: nbits as u32,
            blocks: smallvec![0; nblocks],
        }
    }

    pub fn full(nbits: usize) -> Self {
        let mut b = Bits::empty(nbits);
        for i in 0..nbits {
            b.insert(i);
        }
        b
    }

    pub fn universe(&self) -> usize {
        self.nbits as usize
    }

    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.nbits as usize);
        self.blocks[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        debug_assert!(i < self.nbits as usize);
        self.blocks[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.nbits as usize);
        self.blocks[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn clear(&mut self) {
        self.blocks.fill(0);
    }

    pub fn union_with(&mut self, other: &Bits) {
        debug_assert_eq!(self.nbits, other.nbits);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &Bits) {
        debug_assert_eq!(self.nbits, other.nbits);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= b;
        }
    }

    pub fn subtract(&mut self, other: &Bits) {
        debug_assert_eq!(self.nbits, other.nbits);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= !b;
        }
    }

    pub fn is_subset_of(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.nbits, other.nbits);
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.nbits, other.nbits);
        self.blocks.iter().zip(&other.blocks).any(|(a, b)| a & b != 0)
    }

    /// Ascending index iteration.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &block)| {
            let mut bits = block;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(bi * 64 + tz)
                }
            })
        })
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

macro_rules! index_set {
    ($set:ident, $id:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, PartialEq, Eq, Hash)]
        pub struct $set(pub Bits);

        impl $set {
            pub fn empty(universe: usize) -> Self {
                $set(Bits::empty(universe))
            }

            pub fn full(universe: usize) -> Self {
                $set(Bits::full(universe))
            }

            pub fn singleton(universe: usize, id: $id) -> Self {
                let mut s = Self::empty(universe);
                s.insert(id);
                s
            }

            pub fn from_ids<I: IntoIterator<Item = $id>>(universe: usize, ids: I) -> Self {
                let mut s = Self::empty(universe);
                for id in ids {
                    s.insert(id);
                }
                s
            }

            pub fn universe(&self) -> usize {
                self.0.universe()
            }

            pub fn insert(&mut self, id: $id) {
                self.0.insert(id.index());
            }

            pub fn remove(&mut self, id: $id) {
                self.0.remove(id.index());
            }

            pub fn contains(&self, id: $id) -> bool {
                self.0.contains(id.index())
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn clear(&mut self) {
                self.0.clear()
            }

            pub fn union_with(&mut self, other: &Self) {
                self.0.union_with(&other.0)
            }

            pub fn intersect_with(&mut self, other: &Self) {
                self.0.intersect_with(&other.0)
            }

            pub fn subtract(&mut self, other: &Self) {
                self.0.subtract(&other.0)
            }

            pub fn is_subset_of(&self, other: &Self) -> bool {
                self.0.is_subset_of(&other.0)
            }

            pub fn intersects(&self, other: &Self) -> bool {
                self.0.intersects(&other.0)
            }

            pub fn iter(&self) -> impl Iterator<Item = $id> + '_ {
                self.0.iter().map(|i| $id(i as u16))
            }
        }

        impl fmt::Debug for $set {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

/// Dense index of an action in its [`crate::model::System`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ActionId(pub u16);

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense index of a process in its [`crate::model::System`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ProcId(pub u16);

impl ProcId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

index_set!(ActionSet, ActionId, "Set of actions over a system's alphabet.");
index_set!(ProcessSet, ProcId, "Set of processes of a system.");
