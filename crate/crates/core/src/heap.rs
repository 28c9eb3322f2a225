//! Indexed binary min-heap over node ids with `f64` keys. Ties are broken by id.

const ABSENT: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct IndexedHeap {
    heap: Vec<(f64, u32)>,
    pos: Vec<u32>,
}

#[inline]
fn less(a: (f64, u32), b: (f64, u32)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

impl IndexedHeap {
    pub fn new(n: usize) -> Self {
        IndexedHeap { heap: Vec::new(), pos: vec![ABSENT; n] }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.pos[id as usize] != ABSENT
    }

    pub fn key(&self, id: u32) -> Option<f64> {
        let p = self.pos[id as usize];
        (p != ABSENT).then(|| self.heap[p as usize].0)
    }

    pub fn peek(&self) -> Option<(f64, u32)> {
        self.heap.first().copied()
    }

    pub fn clear(&mut self) {
        for &(_, id) in &self.heap {
            self.pos[id as usize] = ABSENT;
        }
        self.heap.clear();
    }

    /// Insert `id` or change its key to `key`, in either direction.
    pub fn push_or_update(&mut self, id: u32, key: f64) {
        let p = self.pos[id as usize];
        if p == ABSENT {
            self.heap.push((key, id));
            self.sift_up(self.heap.len() - 1);
        } else {
            let old = self.heap[p as usize].0;
            self.heap[p as usize].0 = key;
            if key < old {
                self.sift_up(p as usize);
            } else {
                self.sift_down(p as usize);
            }
        }
    }

    /// Insert `id` or lower its key; a larger key is ignored.
    pub fn push_or_decrease(&mut self, id: u32, key: f64) {
        match self.key(id) {
            Some(old) if old <= key => {}
            _ => self.push_or_update(id, key),
        }
    }

    pub fn pop(&mut self) -> Option<(f64, u32)> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top.1 as usize] = ABSENT;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last.1 as usize] = 0;
            self.sift_down(0);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize) {
        let item = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !less(item, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i].1 as usize] = i as u32;
            i = parent;
        }
        self.heap[i] = item;
        self.pos[item.1 as usize] = i as u32;
    }

    fn sift_down(&mut self, mut i: usize) {
        let item = self.heap[i];
        let n = self.heap.len();
        loop {
            let mut child = 2 * i + 1;
            if child >= n {
                break;
            }
            if child + 1 < n && less(self.heap[child + 1], self.heap[child]) {
                child += 1;
            }
            if !less(self.heap[child], item) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i].1 as usize] = i as u32;
            i = child;
        }
        self.heap[i] = item;
        self.pos[item.1 as usize] = i as u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn pops_sorted(ops in prop::collection::vec((0u32..50, 0.0f64..100.0), 1..200)) {
            let mut heap = IndexedHeap::new(50);
            let mut best = vec![f64::INFINITY; 50];
            for &(id, key) in &ops {
                heap.push_or_decrease(id, key);
                best[id as usize] = best[id as usize].min(key);
            }
            let mut expected: Vec<(f64, u32)> = best.iter().enumerate().filter(|b| b.1.is_finite()).map(|(i, &k)| (k, i as u32)).collect();
            expected.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut popped = Vec::new();
            while let Some(x) = heap.pop() {
                popped.push(x);
            }
            prop_assert_eq!(popped, expected);
        }
    }
}
