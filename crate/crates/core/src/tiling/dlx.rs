//! Knuth's dancing links for exact cover, with forced rows and a node budget.

use crate::error::{Error, Result};

/// An exact-cover instance: every item must be covered by exactly one chosen row.
#[derive(Clone, Debug, Default)]
pub struct ExactCover {
    n_items: usize,
    rows: Vec<Vec<usize>>,
}

/// How a search ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub solutions: u64,
    /// True when the whole tree was explored (the visitor never asked to stop).
    pub exhausted: bool,
}

impl ExactCover {
    pub fn new(n_items: usize) -> Self {
        ExactCover { n_items, rows: Vec::new() }
    }

    pub fn add_row(&mut self, mut items: Vec<usize>) -> usize {
        items.sort_unstable();
        items.dedup();
        debug_assert!(items.iter().all(|&i| i < self.n_items));
        self.rows.push(items);
        self.rows.len() - 1
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    /// Depth-first search. Columns are chosen by fewest remaining rows (lowest
    /// index on ties) and rows are tried in insertion order, so the solution
    /// order is deterministic. `visit` gets each solution as sorted row
    /// indices and returns whether to keep going.
    pub fn search<F>(&self, forced: &[usize], budget: u64, mut visit: F) -> Result<SearchStats>
    where
        F: FnMut(&[usize]) -> bool,
    {
        let mut links = Links::build(self);
        let mut stats = SearchStats { nodes: 0, solutions: 0, exhausted: true };
        let mut chosen: Vec<usize> = Vec::new();
        // forced rows: cover their columns up front, fail fast on a clash
        for &r in forced {
            if self.rows[r].is_empty() {
                continue;
            }
            for &c in &self.rows[r] {
                if !links.is_active(c) {
                    return Ok(SearchStats { nodes: 0, solutions: 0, exhausted: true });
                }
            }
            links.select_row(r);
            chosen.push(r);
        }
        let mut cont = true;
        links.solve(&mut chosen, &mut stats, budget, &mut visit, &mut cont)?;
        stats.exhausted = cont;
        Ok(stats)
    }

    /// The first solution in search order, if any.
    pub fn first_solution(&self, forced: &[usize], budget: u64) -> Result<Option<Vec<usize>>> {
        let mut out = None;
        self.search(forced, budget, |s| {
            out = Some(s.to_vec());
            false
        })?;
        Ok(out)
    }

    /// Every solution (up to `limit`).
    pub fn all_solutions(&self, forced: &[usize], budget: u64, limit: usize) -> Result<(Vec<Vec<usize>>, bool)> {
        let mut out = Vec::new();
        let stats = self.search(forced, budget, |s| {
            out.push(s.to_vec());
            out.len() < limit
        })?;
        Ok((out, stats.exhausted))
    }
}

struct Links {
    l: Vec<usize>,
    r: Vec<usize>,
    u: Vec<usize>,
    d: Vec<usize>,
    col: Vec<usize>,
    row: Vec<usize>,
    size: Vec<usize>,
    /// first node of each row
    row_start: Vec<usize>,
    active: Vec<bool>,
}

const ROOT: usize = 0;

impl Links {
    // node 0 is the root, nodes 1..=n are column headers
    fn build(ec: &ExactCover) -> Self {
        let n = ec.n_items;
        let total = 1 + n + ec.rows.iter().map(Vec::len).sum::<usize>();
        let mut lk = Links {
            l: Vec::with_capacity(total),
            r: Vec::with_capacity(total),
            u: Vec::with_capacity(total),
            d: Vec::with_capacity(total),
            col: Vec::with_capacity(total),
            row: Vec::with_capacity(total),
            size: vec![0; n + 1],
            row_start: Vec::with_capacity(ec.rows.len()),
            active: vec![true; n + 1],
        };
        for i in 0..=n {
            lk.l.push(if i == 0 { n } else { i - 1 });
            lk.r.push(if i == n { 0 } else { i + 1 });
            lk.u.push(i);
            lk.d.push(i);
            lk.col.push(i);
            lk.row.push(usize::MAX);
        }
        for (ri, items) in ec.rows.iter().enumerate() {
            let first = lk.l.len();
            lk.row_start.push(first);
            for (k, &it) in items.iter().enumerate() {
                let c = it + 1;
                let x = lk.l.len();
                let left = if k == 0 { x } else { x - 1 };
                lk.l.push(left);
                lk.r.push(first);
                if k > 0 {
                    lk.r[x - 1] = x;
                    lk.l[first] = x;
                }
                let up = lk.u[c];
                lk.u.push(up);
                lk.d.push(c);
                lk.d[up] = x;
                lk.u[c] = x;
                lk.col.push(c);
                lk.row.push(ri);
                lk.size[c] += 1;
            }
        }
        lk
    }

    fn is_active(&self, item: usize) -> bool {
        self.active[item + 1]
    }

    fn cover(&mut self, c: usize) {
        self.active[c] = false;
        let (l, r) = (self.l[c], self.r[c]);
        self.r[l] = r;
        self.l[r] = l;
        let mut i = self.d[c];
        while i != c {
            let mut j = self.r[i];
            while j != i {
                let (u, d) = (self.u[j], self.d[j]);
                self.d[u] = d;
                self.u[d] = u;
                self.size[self.col[j]] -= 1;
                j = self.r[j];
            }
            i = self.d[i];
        }
    }

    fn uncover(&mut self, c: usize) {
        let mut i = self.u[c];
        while i != c {
            let mut j = self.l[i];
            while j != i {
                let (u, d) = (self.u[j], self.d[j]);
                self.size[self.col[j]] += 1;
                self.d[u] = j;
                self.u[d] = j;
                j = self.l[j];
            }
            i = self.u[i];
        }
        let (l, r) = (self.l[c], self.r[c]);
        self.r[l] = c;
        self.l[r] = c;
        self.active[c] = true;
    }

    fn select_row(&mut self, r: usize) {
        let start = self.row_start[r];
        self.cover(self.col[start]);
        let mut j = self.r[start];
        while j != start {
            self.cover(self.col[j]);
            j = self.r[j];
        }
    }

    fn solve<F>(
        &mut self,
        chosen: &mut Vec<usize>,
        stats: &mut SearchStats,
        budget: u64,
        visit: &mut F,
        cont: &mut bool,
    ) -> Result<()>
    where
        F: FnMut(&[usize]) -> bool,
    {
        if self.r[ROOT] == ROOT {
            stats.solutions += 1;
            let mut sol = chosen.clone();
            sol.sort_unstable();
            if !visit(&sol) {
                *cont = false;
            }
            return Ok(());
        }
        let mut best = self.r[ROOT];
        let mut c = self.r[best];
        while c != ROOT {
            if self.size[c] < self.size[best] {
                best = c;
            }
            c = self.r[c];
        }
        if self.size[best] == 0 {
            return Ok(());
        }
        self.cover(best);
        let mut i = self.d[best];
        while i != best {
            stats.nodes += 1;
            if stats.nodes > budget {
                return Err(Error::Budget(format!("exact cover exceeded {budget} search nodes")));
            }
            chosen.push(self.row[i]);
            let mut j = self.r[i];
            while j != i {
                self.cover(self.col[j]);
                j = self.r[j];
            }
            self.solve(chosen, stats, budget, visit, cont)?;
            let mut j = self.l[i];
            while j != i {
                self.uncover(self.col[j]);
                j = self.l[j];
            }
            chosen.pop();
            if !*cont {
                break;
            }
            i = self.d[i];
        }
        self.uncover(best);
        Ok(())
    }
}
