use alloc::vec::Vec;

/// Outgoing jumps of one state. Deltas are stored in a shared arena so a
/// list can be refilled at every event without reallocating.
#[derive(Debug, Clone, Default)]
pub struct TransitionList {
    items: Vec<(usize, i64)>,
    spans: Vec<Span>,
    scratch: Vec<(usize, i64)>,
    total_rate: f64,
    blocked_rate: f64,
    clamped: usize,
}

#[derive(Debug, Clone, Copy)]
struct Span {
    start: usize,
    len: usize,
    rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition<'a> {
    pub delta: &'a [(usize, i64)],
    pub rate: f64,
}

impl TransitionList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        self.items.clear();
        self.spans.clear();
        self.total_rate = 0.0;
        self.blocked_rate = 0.0;
        self.clamped = 0;
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// Rate of jumps suppressed because they would leave the truncation.
    pub fn blocked_rate(&self) -> f64 {
        self.blocked_rate
    }

    /// Number of jumps dropped because they would make a count negative.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    pub fn get(&self, i: usize) -> Transition<'_> {
        let s = self.spans[i];
        Transition {
            delta: &self.items[s.start..s.start + s.len],
            rate: s.rate,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Transition<'_>> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Add a jump from the state with occupation `counts`.
    ///
    /// The delta is normalized (sorted, merged, zeros dropped). Jumps into
    /// slots past the truncation go to the blocked rate; jumps that would
    /// empty a slot below zero are dropped and counted.
    pub fn push(&mut self, counts: &[u64], delta: &[(usize, i64)], rate: f64) {
        if rate == 0.0 {
            return;
        }
        self.scratch.clear();
        for &(i, v) in delta {
            match self.scratch.iter_mut().find(|(k, _)| *k == i) {
                Some(e) => e.1 += v,
                None => self.scratch.push((i, v)),
            }
        }
        self.scratch.retain(|(_, v)| *v != 0);
        if self.scratch.is_empty() {
            return;
        }
        self.scratch.sort_unstable_by_key(|(i, _)| *i);
        for &(i, v) in &self.scratch {
            match counts.get(i) {
                None => {
                    if v > 0 {
                        self.blocked_rate += rate;
                    } else {
                        self.clamped += 1;
                    }
                    return;
                }
                Some(c) if (*c as i64) + v < 0 => {
                    self.clamped += 1;
                    return;
                }
                _ => {}
            }
        }
        let start = self.items.len();
        self.items.extend_from_slice(&self.scratch);
        self.spans.push(Span {
            start,
            len: self.scratch.len(),
            rate,
        });
        self.total_rate += rate;
    }

    /// Index of the entry selected by `u` in `[0, 1)`, proportionally to rate.
    pub fn sample(&self, u: f64) -> usize {
        let target = u * self.total_rate;
        let mut acc = 0.0;
        for (i, s) in self.spans.iter().enumerate() {
            acc += s.rate;
            if target < acc {
                return i;
            }
        }
        self.spans.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_normalizes_and_filters() {
        let mut l = TransitionList::new();
        let counts = [2, 0, 1];
        l.push(&counts, &[(2, 1), (0, -1), (0, 0)], 1.5);
        assert_eq!(l.get(0).delta, &[(0, -1), (2, 1)]);
        l.push(&counts, &[(1, -1), (0, 1)], 2.0);
        assert_eq!(l.clamped(), 1);
        l.push(&counts, &[(2, -1), (3, 1)], 0.25);
        assert_eq!(l.blocked_rate(), 0.25);
        l.push(&counts, &[(1, 1), (1, -1)], 9.0);
        assert_eq!(l.len(), 1);
        assert_eq!(l.total_rate(), 1.5);
    }

    #[test]
    fn sampling_is_proportional() {
        let mut l = TransitionList::new();
        let c = [5, 5];
        l.push(&c, &[(0, -1), (1, 1)], 1.0);
        l.push(&c, &[(1, -1), (0, 1)], 3.0);
        assert_eq!(l.sample(0.0), 0);
        assert_eq!(l.sample(0.2499), 0);
        assert_eq!(l.sample(0.25), 1);
        assert_eq!(l.sample(0.999_999), 1);
    }
}
