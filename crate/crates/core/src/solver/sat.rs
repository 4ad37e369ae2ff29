//! Conflict-driven clause-learning SAT solver.
//!
//! Two watched literals, first-UIP learning, VSIDS decisions, phase saving,
//! Luby restarts and solving under assumptions.

use super::cnf::Lit;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timeout;

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

pub struct SatSolver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    unsat: bool,
    conflicts: u64,
}

impl SatSolver {
    pub fn new(num_vars: u32) -> Self {
        let n = num_vars as usize;
        let mut heap = VarHeap::new(n);
        let activity = vec![0.0; n];
        for v in 0..n {
            heap.insert(v, &activity);
        }
        SatSolver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assign: vec![UNDEF; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            heap,
            phase: vec![false; n],
            seen: vec![false; n],
            unsat: false,
            conflicts: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assign.len()
    }

    fn value(&self, l: Lit) -> i8 {
        let a = self.assign[l.var() as usize];
        if l.is_neg() {
            -a
        } else {
            a
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Add a clause. Returns false once the clause set is known unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if self.unsat {
            return false;
        }
        self.backtrack(0);
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        for w in c.windows(2) {
            if w[0] == !w[1] {
                return true;
            }
        }
        if c.iter().any(|&l| self.value(l) == TRUE) {
            return true;
        }
        c.retain(|&l| self.value(l) != FALSE);
        match c.len() {
            0 => {
                self.unsat = true;
                false
            }
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.unsat = true;
                }
                !self.unsat
            }
            _ => {
                self.attach(c);
                true
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> usize {
        let ci = self.clauses.len();
        self.watches[c[0].index()].push(ci);
        self.watches[c[1].index()].push(ci);
        self.clauses.push(c);
        ci
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var() as usize;
        self.assign[v] = if l.is_neg() { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns a conflicting clause if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                if self.assign_value(first) == TRUE {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[ci].len() {
                    let l = self.clauses[ci][k];
                    if self.assign_value(l) != FALSE {
                        self.clauses[ci].swap(1, k);
                        self.watches[l.index()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = ci;
                j += 1;
                if self.assign_value(first) == FALSE {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, Some(ci));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.index()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    #[inline]
    fn assign_value(&self, l: Lit) -> i8 {
        self.value(l)
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increase(v, &self.activity);
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit::pos(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let dl = self.decision_level();
        loop {
            let start = usize::from(p.is_some());
            for k in start..self.clauses[confl].len() {
                let q = self.clauses[confl][k];
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump(v);
                    self.seen[v] = true;
                    if self.level[v] >= dl {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[idx];
            let v = lit.var() as usize;
            self.seen[v] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[v].expect("implied literal without reason");
        }
        learnt[0] = !p.unwrap();
        for l in &learnt[1..] {
            self.seen[l.var() as usize] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var() as usize] > self.level[learnt[max_i].var() as usize] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var() as usize];
        }
        (learnt, bt)
    }

    fn backtrack(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var() as usize;
            self.phase[v] = !l.is_neg();
            self.assign[v] = UNDEF;
            self.reason[v] = None;
            if !self.heap.contains(v) {
                self.heap.insert(v, &self.activity);
            }
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assign[v] == UNDEF {
                return Some(Lit::new(v as u32, self.phase[v]));
            }
        }
        None
    }

    /// Solve under `assumptions`. `Ok(None)` means unsatisfiable (under the
    /// assumptions); `Ok(Some(model))` gives a total assignment.
    pub fn solve(&mut self, assumptions: &[Lit], deadline: Option<Instant>) -> Result<Option<Vec<bool>>, Timeout> {
        if self.unsat {
            return Ok(None);
        }
        self.backtrack(0);
        if self.propagate().is_some() {
            self.unsat = true;
            return Ok(None);
        }
        let mut restart_no = 0u32;
        let mut budget = luby(restart_no) * 100;
        let mut since_restart = 0u64;
        let mut steps = 0u64;
        loop {
            steps += 1;
            if steps % 512 == 0 {
                if let Some(d) = deadline {
                    if Instant::now() >= d {
                        self.backtrack(0);
                        return Err(Timeout);
                    }
                }
            }
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.unsat = true;
                    return Ok(None);
                }
                let (learnt, bt) = self.analyze(confl);
                self.backtrack(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(first, Some(ci));
                }
                self.var_inc /= 0.95;
                continue;
            }
            if since_restart >= budget {
                since_restart = 0;
                restart_no += 1;
                budget = luby(restart_no) * 100;
                self.backtrack(0);
                continue;
            }
            let dl = self.decision_level() as usize;
            let next = if dl < assumptions.len() {
                let a = assumptions[dl];
                match self.value(a) {
                    TRUE => {
                        self.trail_lim.push(self.trail.len());
                        continue;
                    }
                    FALSE => {
                        self.backtrack(0);
                        return Ok(None);
                    }
                    _ => a,
                }
            } else {
                match self.pick_branch() {
                    Some(l) => l,
                    None => {
                        let model = self.assign.iter().map(|&a| a == TRUE).collect();
                        self.backtrack(0);
                        return Ok(Some(model));
                    }
                }
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(next, None);
        }
    }
}

fn luby(i: u32) -> u64 {
    // 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < u64::from(i) + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = u64::from(i);
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

/// Binary max-heap of variables keyed by activity.
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn new(n: usize) -> Self {
        VarHeap { heap: Vec::with_capacity(n), pos: vec![None; n] }
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v].is_some()
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        self.pos[v] = Some(self.heap.len());
        self.heap.push(v);
        self.up(self.heap.len() - 1, act);
    }

    fn increase(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.pos[v] {
            self.up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0]] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if act[self.heap[parent]] >= act[v] {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let c = if r < self.heap.len() && act[self.heap[r]] > act[self.heap[l]] { r } else { l };
            if act[self.heap[c]] <= act[v] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i]] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }
}
