//! Exhaustive reference implementations of the clustering metrics and of
//! the assignment problem.

use std::collections::HashMap;

use splir_core::numerics::Matrix;

/// All permutations of 0..n in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                prefix.push(j);
                rec(prefix, used, out);
                prefix.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn brute_assignment(cost: &Matrix) -> Vec<usize> {
    let n = cost.rows();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for p in permutations(n) {
        let c: f64 = p.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, p));
        }
    }
    best.unwrap().1
}

pub fn all_labelings(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..k).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

struct PairCounts {
    both: f64,
    pred_only: f64,
    truth_only: f64,
    neither: f64,
}

fn pair_counts(p: &[usize], t: &[usize]) -> PairCounts {
    let mut c = PairCounts {
        both: 0.0,
        pred_only: 0.0,
        truth_only: 0.0,
        neither: 0.0,
    };
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            match (p[i] == p[j], t[i] == t[j]) {
                (true, true) => c.both += 1.0,
                (true, false) => c.pred_only += 1.0,
                (false, true) => c.truth_only += 1.0,
                (false, false) => c.neither += 1.0,
            }
        }
    }
    c
}

fn same_partition(p: &[usize], t: &[usize]) -> bool {
    let c = pair_counts(p, t);
    c.pred_only == 0.0 && c.truth_only == 0.0
}

pub fn brute_acc(p: &[usize], t: &[usize]) -> f64 {
    let k = p.iter().chain(t).max().unwrap() + 1;
    permutations(k)
        .iter()
        .map(|m| p.iter().zip(t).filter(|(a, b)| m[**a] == **b).count())
        .max()
        .unwrap() as f64
        / p.len() as f64
}

pub fn brute_ari(p: &[usize], t: &[usize]) -> f64 {
    let c = pair_counts(p, t);
    let num = 2.0 * (c.both * c.neither - c.pred_only * c.truth_only);
    let den = (c.both + c.pred_only) * (c.pred_only + c.neither) + (c.both + c.truth_only) * (c.truth_only + c.neither);
    if den == 0.0 {
        if same_partition(p, t) {
            1.0
        } else {
            0.0
        }
    } else {
        num / den
    }
}

pub fn brute_fscore(p: &[usize], t: &[usize]) -> f64 {
    let c = pair_counts(p, t);
    let pred_pairs = c.both + c.pred_only;
    let truth_pairs = c.both + c.truth_only;
    if pred_pairs == 0.0 && truth_pairs == 0.0 {
        return 1.0;
    }
    if c.both == 0.0 {
        return 0.0;
    }
    let (prec, rec) = (c.both / pred_pairs, c.both / truth_pairs);
    2.0 * prec * rec / (prec + rec)
}

pub fn brute_nmi(p: &[usize], t: &[usize]) -> f64 {
    if same_partition(p, t) {
        return 1.0;
    }
    let n = p.len() as f64;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut ca: HashMap<usize, usize> = HashMap::new();
    let mut cb: HashMap<usize, usize> = HashMap::new();
    for (&a, &b) in p.iter().zip(t) {
        *joint.entry((a, b)).or_default() += 1;
        *ca.entry(a).or_default() += 1;
        *cb.entry(b).or_default() += 1;
    }
    let prob = |m: &HashMap<usize, usize>| -> HashMap<usize, f64> { m.iter().map(|(&k, &c)| (k, c as f64 / n)).collect() };
    let (pa, pb) = (prob(&ca), prob(&cb));
    let h = |m: &HashMap<usize, f64>| -> f64 { m.values().map(|q| -q * q.ln()).sum() };
    let (ha, hb) = (h(&pa), h(&pb));
    if ha == 0.0 || hb == 0.0 {
        return 0.0;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(a, b), &c)| {
            let q = c as f64 / n;
            q * (q / (pa[&a] * pb[&b])).ln()
        })
        .sum();
    mi / (ha * hb).sqrt()
}

pub fn brute_purity(p: &[usize], t: &[usize]) -> f64 {
    let mut hits = 0;
    for c in 0..=*p.iter().max().unwrap() {
        let mut counts = HashMap::new();
        for (&a, &b) in p.iter().zip(t) {
            if a == c {
                *counts.entry(b).or_insert(0) += 1;
            }
        }
        hits += counts.values().copied().max().unwrap_or(0);
    }
    hits as f64 / p.len() as f64
}

