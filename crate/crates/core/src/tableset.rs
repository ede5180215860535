use std::fmt;

/// Set of table indices (at most 32) stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TableSet(pub u32);

impl TableSet {
    pub const EMPTY: TableSet = TableSet(0);

    pub fn single(i: usize) -> Self {
        TableSet(1 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        it.into_iter().fold(TableSet::EMPTY, |s, i| s.with(i))
    }

    pub fn with(self, i: usize) -> Self {
        TableSet(self.0 | (1 << i))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn union(self, o: TableSet) -> Self {
        TableSet(self.0 | o.0)
    }

    pub fn intersect(self, o: TableSet) -> Self {
        TableSet(self.0 & o.0)
    }

    pub fn minus(self, o: TableSet) -> Self {
        TableSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: TableSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Ascending indices.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |i| self.contains(*i))
    }

    /// Ascending index digits, e.g. `{0,3,4}` → `"034"`.
    pub fn key(self) -> String {
        self.iter().map(|i| i.to_string()).collect()
    }
}

impl fmt::Debug for TableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{{}}}",
            self.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
        )
    }
}
