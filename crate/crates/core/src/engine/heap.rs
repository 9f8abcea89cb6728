//! Indexed binary max-heap over variables keyed by activity.
//!
//! Ties on activity are broken towards the lower variable index so the
//! branching order is a pure function of the activity vector.

use super::lit::Var;

#[derive(Debug, Default, Clone)]
pub(crate) struct VarHeap {
    heap: Vec<Var>,
    position: Vec<Option<usize>>,
}

#[inline]
fn before(activity: &[f64], a: Var, b: Var) -> bool {
    let (x, y) = (activity[a.index()], activity[b.index()]);
    x > y || (x == y && a < b)
}

impl VarHeap {
    pub fn grow(&mut self, vars: usize) {
        if self.position.len() < vars {
            self.position.resize(vars, None);
        }
    }

    pub fn contains(&self, v: Var) -> bool {
        self.position.get(v.index()).is_some_and(|p| p.is_some())
    }

    pub fn insert(&mut self, v: Var, activity: &[f64]) {
        self.grow(v.index() + 1);
        if self.contains(v) {
            return;
        }
        let at = self.heap.len();
        self.heap.push(v);
        self.position[v.index()] = Some(at);
        self.sift_up(at, activity);
    }

    /// Restore heap order after `v`'s activity increased.
    pub fn bumped(&mut self, v: Var, activity: &[f64]) {
        if let Some(Some(at)) = self.position.get(v.index()) {
            self.sift_up(*at, activity);
        }
    }

    pub fn pop(&mut self, activity: &[f64]) -> Option<Var> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("nonempty");
        self.position[top.index()] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.position[last.index()] = Some(0);
            self.sift_down(0, activity);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut at: usize, activity: &[f64]) {
        let v = self.heap[at];
        while at > 0 {
            let parent = (at - 1) / 2;
            let p = self.heap[parent];
            if !before(activity, v, p) {
                break;
            }
            self.heap[at] = p;
            self.position[p.index()] = Some(at);
            at = parent;
        }
        self.heap[at] = v;
        self.position[v.index()] = Some(at);
    }

    fn sift_down(&mut self, mut at: usize, activity: &[f64]) {
        let v = self.heap[at];
        let len = self.heap.len();
        loop {
            let left = 2 * at + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && before(activity, self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            let c = self.heap[child];
            if !before(activity, c, v) {
                break;
            }
            self.heap[at] = c;
            self.position[c.index()] = Some(at);
            at = child;
        }
        self.heap[at] = v;
        self.position[v.index()] = Some(at);
    }
}
