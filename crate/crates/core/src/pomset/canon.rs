//! Canonical event numbering by colour refinement and backtracking.

use super::ActionLabel;

/// Connected components of the comparability graph, as event masks,
/// ordered by smallest member.
pub(super) fn components(succ: &[u64]) -> Vec<u64> {
    let n = succ.len();
    let mut pred = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            if succ[i] >> j & 1 == 1 {
                pred[j] |= 1 << i;
            }
        }
    }
    let mut seen = 0u64;
    let mut out = Vec::new();
    for start in 0..n {
        if seen >> start & 1 == 1 {
            continue;
        }
        let mut comp = 1u64 << start;
        let mut frontier = comp;
        while frontier != 0 {
            let i = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let next = (succ[i] | pred[i]) & !comp;
            comp |= next;
            frontier |= next;
        }
        seen |= comp;
        out.push(comp);
    }
    out
}

fn members(mask: u64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// Dense ranks of `keys`, in sorted key order.
fn ranks<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).expect("present")).collect()
}

fn distinct(colors: &[usize]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

struct Component<'a> {
    vs: Vec<usize>,
    succ: &'a [u64],
    pred: Vec<u64>,
}

impl Component<'_> {
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let local = |mask: u64, colors: &[usize]| -> Vec<usize> {
            let mut cs: Vec<usize> = self
                .vs
                .iter()
                .enumerate()
                .filter(|(_, &v)| mask >> v & 1 == 1)
                .map(|(k, _)| colors[k])
                .collect();
            cs.sort_unstable();
            cs
        };
        loop {
            let keys: Vec<(usize, Vec<usize>, Vec<usize>)> = self
                .vs
                .iter()
                .enumerate()
                .map(|(k, &v)| (colors[k], local(self.succ[v], &colors), local(self.pred[v], &colors)))
                .collect();
            let next = ranks(&keys);
            if distinct(&next) == distinct(&colors) {
                return next;
            }
            colors = next;
        }
    }

    fn code(&self, order: &[usize]) -> Vec<u8> {
        let mut code = Vec::with_capacity(order.len() * order.len());
        for (a, &i) in order.iter().enumerate() {
            for &j in &order[a + 1..] {
                let (vi, vj) = (self.vs[i], self.vs[j]);
                code.push(if self.succ[vi] >> vj & 1 == 1 {
                    1
                } else if self.succ[vj] >> vi & 1 == 1 {
                    2
                } else {
                    0
                });
            }
        }
        code
    }

    /// Least code over all leaves of the individualization tree below
    /// `colors`, with the local order that realizes it.
    fn search(&self, colors: Vec<usize>, best: &mut Option<(Vec<u8>, Vec<usize>)>) {
        let n = self.vs.len();
        if distinct(&colors) == n {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&k| colors[k]);
            let code = self.code(&order);
            if best.as_ref().map_or(true, |(b, _)| code < *b) {
                *best = Some((code, order));
            }
            return;
        }
        let mut counts = vec![0usize; n];
        for &c in &colors {
            counts[c] += 1;
        }
        let target = (0..n).find(|&c| counts[c] > 1).expect("non-discrete colouring");
        let mut tried: Vec<(u64, u64)> = Vec::new();
        for k in 0..n {
            if colors[k] != target {
                continue;
            }
            // twins (same predecessors and successors) lead to the same leaves
            let v = self.vs[k];
            let sig = (self.pred[v], self.succ[v]);
            if tried.contains(&sig) {
                continue;
            }
            tried.push(sig);
            let split: Vec<usize> = (0..n)
                .map(|u| if u == k { 2 * colors[u] } else { 2 * colors[u] + 1 })
                .collect();
            let split = ranks(&split);
            self.search(self.refine(split), best);
        }
    }
}

/// Canonical placement of events: position `k` of the result holds the
/// original index of the event that receives canonical number `k`.
pub(super) fn canonical_order(labels: &[ActionLabel], succ: &[u64]) -> Vec<usize> {
    let n = labels.len();
    let mut pred = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            if succ[i] >> j & 1 == 1 {
                pred[j] |= 1 << i;
            }
        }
    }
    let heights = longest(succ, &pred, true);
    let depths = longest(succ, &pred, false);

    let mut blocks: Vec<(usize, Vec<&ActionLabel>, Vec<u8>, Vec<usize>)> = Vec::new();
    for mask in components(succ) {
        let vs = members(mask);
        let comp = Component { vs: vs.clone(), succ, pred: pred.clone() };
        let keys: Vec<(&ActionLabel, usize, usize, u32, u32)> = vs
            .iter()
            .map(|&v| (&labels[v], heights[v], depths[v], pred[v].count_ones(), succ[v].count_ones()))
            .collect();
        let colors = comp.refine(ranks(&keys));
        let mut best = None;
        comp.search(colors, &mut best);
        let (code, order) = best.expect("at least one leaf");
        let order: Vec<usize> = order.into_iter().map(|k| vs[k]).collect();
        let labs = order.iter().map(|&v| &labels[v]).collect();
        blocks.push((order.len(), labs, code, order));
    }
    blocks.sort();
    blocks.into_iter().flat_map(|b| b.3).collect()
}

/// Longest chain below (`up = true`) or above each event.
fn longest(succ: &[u64], pred: &[u64], up: bool) -> Vec<usize> {
    let n = succ.len();
    let mut memo = vec![usize::MAX; n];
    fn go(i: usize, next: &[u64], memo: &mut [usize]) -> usize {
        if memo[i] != usize::MAX {
            return memo[i];
        }
        let v = members(next[i]).into_iter().map(|j| go(j, next, memo) + 1).max().unwrap_or(0);
        memo[i] = v;
        v
    }
    let next = if up { pred } else { succ };
    (0..n).map(|i| go(i, next, &mut memo)).collect()
}
