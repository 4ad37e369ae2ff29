//! Exact weighted partial MaxSAT by branch and bound over the soft literals.

use super::cnf::Lit;
use super::sat::SatSolver;
use super::SolverError;
use std::time::Instant;

#[derive(Debug, Clone, Default)]
pub struct WeightedInstance {
    pub num_vars: u32,
    pub hard: Vec<Vec<Lit>>,
    /// (weight, literal): satisfying the literal adds the weight to the rank.
    pub soft: Vec<(i64, Lit)>,
    /// Names for variables `0..names.len()`; the rest are auxiliary.
    pub names: Vec<String>,
}

impl WeightedInstance {
    /// Sum of the weights of satisfied soft literals.
    pub fn rank_of(&self, assignment: &[bool]) -> Result<i64, SolverError> {
        self.soft.iter().filter(|(_, l)| l.holds(assignment)).try_fold(0i64, |acc, (w, _)| {
            acc.checked_add(*w).ok_or(SolverError::Overflow)
        })
    }

    pub fn hard_satisfied(&self, assignment: &[bool]) -> bool {
        self.hard.iter().all(|c| c.iter().any(|l| l.holds(assignment)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub assignment: Vec<bool>,
    pub rank: i64,
}

/// Maximize the satisfied soft weight subject to the hard clauses.
/// `Ok(None)` means the hard clauses are unsatisfiable.
pub fn solve_maxsat(inst: &WeightedInstance, deadline: Option<Instant>) -> Result<Option<Model>, SolverError> {
    let mut sat = SatSolver::new(inst.num_vars);
    for c in &inst.hard {
        if !sat.add_clause(c) {
            return Ok(None);
        }
    }
    // A negative weight on l is a positive weight on !l plus a constant.
    let mut softs: Vec<(u64, Lit)> = Vec::new();
    for &(w, l) in &inst.soft {
        match w {
            0 => {}
            w if w > 0 => softs.push((w as u64, l)),
            w => softs.push((w.unsigned_abs(), !l)),
        }
    }
    softs.sort_by_key(|s| std::cmp::Reverse(s.0));
    let mut rest = vec![0u64; softs.len() + 1];
    for i in (0..softs.len()).rev() {
        rest[i] = rest[i + 1].checked_add(softs[i].0).ok_or(SolverError::Overflow)?;
    }

    let Some(first) = sat.solve(&[], deadline).map_err(|_| SolverError::Timeout)? else {
        return Ok(None);
    };
    let mut bb = BranchAndBound { sat, softs, rest, deadline, best: None };
    bb.consider(first);
    let mut assumptions = Vec::new();
    bb.search(0, &mut assumptions, 0)?;
    let (_, assignment) = bb.best.expect("a model was found");
    let rank = inst.rank_of(&assignment)?;
    Ok(Some(Model { assignment, rank }))
}

struct BranchAndBound {
    sat: SatSolver,
    softs: Vec<(u64, Lit)>,
    rest: Vec<u64>,
    deadline: Option<Instant>,
    best: Option<(u64, Vec<bool>)>,
}

impl BranchAndBound {
    fn gain(&self, m: &[bool]) -> u64 {
        self.softs.iter().filter(|(_, l)| l.holds(m)).map(|(w, _)| w).sum()
    }

    fn consider(&mut self, m: Vec<bool>) -> u64 {
        let g = self.gain(&m);
        if self.best.as_ref().is_none_or(|(b, _)| g > *b) {
            self.best = Some((g, m));
        }
        g
    }

    fn best_gain(&self) -> Option<u64> {
        self.best.as_ref().map(|(b, _)| *b)
    }

    /// Softs before `i` are fixed by `assumptions`, contributing `fixed`.
    fn search(&mut self, i: usize, assumptions: &mut Vec<Lit>, fixed: u64) -> Result<(), SolverError> {
        if let Some(b) = self.best_gain() {
            if fixed + self.rest[i] <= b {
                return Ok(());
            }
        }
        let Some(m) = self.sat.solve(assumptions, self.deadline).map_err(|_| SolverError::Timeout)? else {
            return Ok(());
        };
        let all_rest = self.softs[i..].iter().all(|(_, l)| l.holds(&m));
        self.consider(m);
        if all_rest || i == self.softs.len() {
            return Ok(());
        }
        let (w, l) = self.softs[i];
        assumptions.push(l);
        self.search(i + 1, assumptions, fixed + w)?;
        assumptions.pop();
        assumptions.push(!l);
        self.search(i + 1, assumptions, fixed)?;
        assumptions.pop();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_variable() {
        let inst = WeightedInstance { num_vars: 1, hard: vec![vec![Lit::pos(0)]], soft: vec![(1, Lit::neg(0))], names: vec![] };
        let m = solve_maxsat(&inst, None).unwrap().unwrap();
        assert_eq!((m.assignment[0], m.rank), (true, 0));
    }

    #[test]
    fn weight_comparison() {
        let inst = WeightedInstance { num_vars: 1, hard: vec![], soft: vec![(1, Lit::pos(0)), (2, Lit::neg(0))], names: vec![] };
        let m = solve_maxsat(&inst, None).unwrap().unwrap();
        assert_eq!((m.assignment[0], m.rank), (false, 2));
    }

    #[test]
    fn negative_weights() {
        let inst = WeightedInstance {
            num_vars: 2,
            hard: vec![vec![Lit::pos(0), Lit::pos(1)]],
            soft: vec![(-3, Lit::pos(0)), (-1, Lit::pos(1))],
            names: vec![],
        };
        let m = solve_maxsat(&inst, None).unwrap().unwrap();
        assert_eq!(m.rank, -1);
        assert!(!m.assignment[0] && m.assignment[1]);
    }

    #[test]
    fn unsat_hard() {
        let inst = WeightedInstance { num_vars: 1, hard: vec![vec![Lit::pos(0)], vec![Lit::neg(0)]], soft: vec![], names: vec![] };
        assert!(solve_maxsat(&inst, None).unwrap().is_none());
    }
}
