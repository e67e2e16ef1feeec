//! LIFO store of overwritten state and control-flow tokens.

#[derive(Debug, Clone, PartialEq)]
pub enum TapeEntry {
    Real(f64),
    Int(i64),
    Array(Vec<f64>),
    Loop { lo: i64, hi: i64, saved_index: i64 },
    Trips(u64),
    Branch(bool),
}

#[derive(Debug, Clone, Default)]
pub struct Tape {
    stack: Vec<TapeEntry>,
    pub push_count: u64,
    pub pop_count: u64,
    pub peak_depth: usize,
}

impl Tape {
    pub fn push(&mut self, e: TapeEntry) {
        self.stack.push(e);
        self.push_count += 1;
        self.peak_depth = self.peak_depth.max(self.stack.len());
    }

    /// Pops the top entry. Underflow means the transform is broken.
    pub fn pop(&mut self) -> TapeEntry {
        self.pop_count += 1;
        self.stack.pop().expect("tape underflow: pops outnumber pushes")
    }

    pub fn len(&self) -> usize {
        self.stack.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stack.is_empty()
    }
}
