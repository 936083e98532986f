/// Fixed-capacity ring buffer of equal-width rows on a uniform time grid.
#[derive(Debug, Clone)]
pub struct DelayLine {
    data: Vec<f64>,
    width: usize,
    capacity: usize,
    head: usize,
    len: usize,
}

impl DelayLine {
    pub fn new(capacity: usize, width: usize) -> Self {
        assert!(capacity > 0 && width > 0);
        Self {
            data: vec![0.0; capacity * width],
            width,
            capacity,
            head: 0,
            len: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Writes the newest row in place, evicting the oldest when full.
    pub fn push_with<F: FnOnce(&mut [f64])>(&mut self, fill: F) {
        self.head = (self.head + 1) % self.capacity;
        let start = self.head * self.width;
        fill(&mut self.data[start..start + self.width]);
        self.len = (self.len + 1).min(self.capacity);
    }

    /// Row pushed `lag` pushes ago (`0` is the newest), if still held.
    pub fn lagged(&self, lag: usize) -> Option<&[f64]> {
        if lag >= self.len {
            return None;
        }
        let idx = (self.head + self.capacity - lag) % self.capacity;
        let start = idx * self.width;
        Some(&self.data[start..start + self.width])
    }
}
