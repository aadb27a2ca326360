use fixedbitset::FixedBitSet;

/// Set of premises a derived fact depends on: origin indices followed by
/// decision-level bits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Reason(FixedBitSet);

impl Reason {
    pub fn empty() -> Self {
        Reason(FixedBitSet::new())
    }

    pub fn single(bit: usize) -> Self {
        let mut s = FixedBitSet::with_capacity(bit + 1);
        s.insert(bit);
        Reason(s)
    }

    pub fn insert(&mut self, bit: usize) {
        self.0.grow(bit + 1);
        self.0.insert(bit);
    }

    pub fn remove(&mut self, bit: usize) {
        if bit < self.0.len() {
            self.0.set(bit, false);
        }
    }

    pub fn contains(&self, bit: usize) -> bool {
        self.0.contains(bit)
    }

    pub fn union_with(&mut self, other: &Reason) {
        self.0.union_with(&other.0);
    }

    pub fn union(mut self, other: &Reason) -> Reason {
        self.union_with(other);
        self
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }
}
