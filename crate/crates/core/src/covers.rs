//! Finite covers of bouquets of circles, stored as one permutation per letter.
//!
//! Two explicit families are built here: the cover `S` over `{a1, e1}` for the
//! tree T_{k,k+1}, and the cover `Z` over `{C1..Ck, C1'..Ck'}` for the path
//! P_{4k+2}. Both have `k(k+1)` vertices.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("k must be at least 1")]
    BadK,
    #[error("malformed cover: {0}")]
    Malformed(String),
    #[error("malformed cover JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A basepointed cover of a bouquet: `perms[x][v]` is the end of the edge
/// labelled by letter `x` leaving `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverGraph {
    vertex_count: usize,
    basepoint: usize,
    alphabet: Vec<String>,
    perms: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverJson {
    vertices: usize,
    basepoint: usize,
    alphabet: Vec<String>,
    perms: BTreeMap<String, Vec<usize>>,
}

/// Violations found by a validator; empty means the cover passed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CoverReport {
    pub violations: Vec<String>,
}

impl CoverReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.violations.push(message());
        }
    }
}

impl CoverGraph {
    /// Builds a cover without checking it; see [`CoverGraph::validate`].
    pub fn from_parts(
        vertex_count: usize,
        basepoint: usize,
        alphabet: Vec<String>,
        perms: Vec<Vec<usize>>,
    ) -> Result<CoverGraph, CoverError> {
        if alphabet.len() != perms.len() {
            return Err(CoverError::Malformed("one map per letter is required".into()));
        }
        if basepoint >= vertex_count {
            return Err(CoverError::Malformed("basepoint out of range".into()));
        }
        if perms
            .iter()
            .any(|p| p.len() != vertex_count || p.iter().any(|&t| t >= vertex_count))
        {
            return Err(CoverError::Malformed("map has wrong length or range".into()));
        }
        Ok(CoverGraph {
            vertex_count,
            basepoint,
            alphabet,
            perms,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn letter(&self, name: &str) -> Result<usize, CoverError> {
        self.alphabet
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| CoverError::UnknownLetter(name.to_string()))
    }

    pub fn perm(&self, letter: usize) -> &[usize] {
        &self.perms[letter]
    }

    pub fn step(&self, letter: usize, v: usize) -> usize {
        self.perms[letter][v]
    }

    /// Orbit length of the letter through `v`.
    pub fn cycle_length(&self, letter: usize, v: usize) -> usize {
        let mut len = 1;
        let mut cur = self.step(letter, v);
        while cur != v {
            cur = self.step(letter, cur);
            len += 1;
            assert!(len <= self.vertex_count, "letter map is not a permutation");
        }
        len
    }

    pub fn cycle_length_of(&self, letter: &str, v: usize) -> Result<usize, CoverError> {
        Ok(self.cycle_length(self.letter(letter)?, v))
    }

    /// Orbits of a letter, each starting at its smallest vertex, sorted by it.
    pub fn cycles(&self, letter: usize) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.vertex_count];
        let mut out = Vec::new();
        for start in 0..self.vertex_count {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut cur = self.step(letter, start);
            while cur != start {
                seen[cur] = true;
                cycle.push(cur);
                cur = self.step(letter, cur);
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle lengths of a letter in decreasing order.
    pub fn census(&self, letter: usize) -> Vec<usize> {
        let mut lens: Vec<usize> = self.cycles(letter).iter().map(Vec::len).collect();
        lens.sort_unstable_by(|a, b| b.cmp(a));
        lens
    }

    /// Number of steps along `letter` from `from` to `to`, if `to` is on that orbit.
    pub fn distance_along(&self, letter: usize, from: usize, to: usize) -> Option<usize> {
        let mut cur = from;
        for d in 0..self.vertex_count {
            if cur == to {
                return Some(d);
            }
            cur = self.step(letter, cur);
        }
        None
    }

    pub fn components_by_index(&self, letters: &[usize]) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.vertex_count];
        let mut out = Vec::new();
        for start in 0..self.vertex_count {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &x in letters {
                    for w in [self.step(x, v), self.perms[x].iter().position(|&t| t == v).unwrap()] {
                        if comp[w] == usize::MAX {
                            comp[w] = id;
                            members.push(w);
                            queue.push_back(w);
                        }
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Components of the subgraph spanned by the given letters (all vertices
    /// included), each sorted and ordered by smallest vertex.
    pub fn label_subgraph_components(&self, letters: &[&str]) -> Result<Vec<Vec<usize>>, CoverError> {
        let idx = letters
            .iter()
            .map(|l| self.letter(l))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.components_by_index(&idx))
    }

    pub fn is_connected(&self) -> bool {
        let all: Vec<usize> = (0..self.alphabet.len()).collect();
        self.components_by_index(&all).len() == 1
    }

    /// Bijectivity of every letter map and connectivity.
    pub fn validate(&self) -> CoverReport {
        let mut r = CoverReport::default();
        for (x, perm) in self.perms.iter().enumerate() {
            let mut hit = vec![false; self.vertex_count];
            for &t in perm {
                hit[t] = true;
            }
            r.check(hit.iter().all(|&h| h), || {
                format!("letter {} is not a bijection", self.alphabet[x])
            });
        }
        if r.is_ok() {
            r.check(self.is_connected(), || "cover is not connected".into());
        }
        r
    }

    pub fn to_json(&self) -> String {
        let json = CoverJson {
            vertices: self.vertex_count,
            basepoint: self.basepoint,
            alphabet: self.alphabet.clone(),
            perms: self
                .alphabet
                .iter()
                .cloned()
                .zip(self.perms.iter().cloned())
                .collect(),
        };
        serde_json::to_string(&json).expect("covers serialize")
    }

    pub fn from_json(text: &str) -> Result<CoverGraph, CoverError> {
        let mut json: CoverJson = serde_json::from_str(text)?;
        let mut perms = Vec::new();
        for letter in &json.alphabet {
            perms.push(
                json.perms
                    .remove(letter)
                    .ok_or_else(|| CoverError::Malformed(format!("no map for `{letter}`")))?,
            );
        }
        if !json.perms.is_empty() {
            return Err(CoverError::Malformed("map for a letter outside the alphabet".into()));
        }
        CoverGraph::from_parts(json.vertices, json.basepoint, json.alphabet, perms)
    }

    /// Graphviz rendering; loops and cycles are labelled by letter.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph {name} {{\n");
        writeln!(out, "  v{} [shape=doublecircle];", self.basepoint).unwrap();
        for (x, perm) in self.perms.iter().enumerate() {
            for (v, &t) in perm.iter().enumerate() {
                writeln!(out, "  v{v} -> v{t} [label=\"{}\"];", self.alphabet[x]).unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

fn cycle_perm(n: usize, cycles: &[Vec<usize>]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for cycle in cycles {
        for (t, &v) in cycle.iter().enumerate() {
            perm[v] = cycle[(t + 1) % cycle.len()];
        }
    }
    perm
}

/// Vertex blocks of the cover `S`: `a_blocks[i]` holds the vertices of the
/// `i`-th `a1`-cycle shared with the previous `e1`-cycle, `b_blocks[i]` those
/// shared with the next one (0-based `i`).
struct SBlocks {
    a_blocks: Vec<Vec<usize>>,
    b_blocks: Vec<Vec<usize>>,
}

fn s_blocks(k: usize) -> SBlocks {
    let mut next = 0;
    let mut take = |len: usize| {
        let block: Vec<usize> = (next..next + len).collect();
        next += len;
        block
    };
    let mut a_blocks = Vec::new();
    let mut b_blocks = Vec::new();
    for i in 1..=k {
        a_blocks.push(take(k - i + 1));
        b_blocks.push(take(i));
    }
    SBlocks { a_blocks, b_blocks }
}

/// The degree-`k(k+1)` cover `S` over `{a1, e1}`.
///
/// The `i`-th `a1`-cycle (length `k+1`) runs through an `A` block of `k-i+1`
/// vertices and a `B` block of `i` vertices. The `i`-th `e1`-cycle (length
/// `k`) runs backwards through `B_i` and then backwards through `A_{i+1}`, so
/// shared vertices appear in opposite orders. `e1` fixes `A_1` and `B_k`.
/// The basepoint is the single vertex of `B_1`. For `k = 1` this puts an
/// `e1`-loop at the basepoint as well.
pub fn build_cover_s(k: usize) -> Result<CoverGraph, CoverError> {
    if k == 0 {
        return Err(CoverError::BadK);
    }
    let n = k * (k + 1);
    let SBlocks { a_blocks, b_blocks } = s_blocks(k);
    let p_cycles: Vec<Vec<usize>> = (0..k)
        .map(|i| a_blocks[i].iter().chain(&b_blocks[i]).copied().collect())
        .collect();
    let q_cycles: Vec<Vec<usize>> = (0..k - 1)
        .map(|i| {
            b_blocks[i]
                .iter()
                .rev()
                .chain(a_blocks[i + 1].iter().rev())
                .copied()
                .collect()
        })
        .collect();
    CoverGraph::from_parts(
        n,
        b_blocks[0][0],
        vec!["a1".into(), "e1".into()],
        vec![cycle_perm(n, &p_cycles), cycle_perm(n, &q_cycles)],
    )
}

/// Checks every property the construction of `S` promises.
pub fn validate_cover_s(c: &CoverGraph, k: usize) -> CoverReport {
    let mut r = c.validate();
    let n = k * (k + 1);
    r.check(c.vertex_count() == n, || format!("expected {n} vertices"));
    let (Ok(a), Ok(e)) = (c.letter("a1"), c.letter("e1")) else {
        r.violations.push("alphabet must contain a1 and e1".into());
        return r;
    };
    if !r.is_ok() {
        return r;
    }
    r.check(c.census(a) == vec![k + 1; k], || {
        format!("a1 must span {k} cycles of length {}", k + 1)
    });
    let mut expected_e = vec![k; k - 1];
    expected_e.extend(vec![1; 2 * k]);
    if k == 1 {
        expected_e = vec![1, 1];
    }
    r.check(c.census(e) == expected_e, || {
        format!("e1 must span {} cycles of length {k} and {} loops", k - 1, 2 * k)
    });
    if k == 1 || !r.is_ok() {
        return r;
    }

    // Walk the chain P_1, Q_1, P_2, ..., Q_{k-1}, P_k from the basepoint.
    let a_cycles = c.cycles(a);
    let q_cycles: Vec<Vec<usize>> = c.cycles(e).into_iter().filter(|q| q.len() > 1).collect();
    let a_of = |v: usize| a_cycles.iter().position(|p| p.contains(&v)).unwrap();
    let bp = c.basepoint();
    let Some(mut q_idx) = q_cycles.iter().position(|q| q.contains(&bp)) else {
        r.violations.push("basepoint must lie on an e1-cycle of length k".into());
        return r;
    };
    let mut p_idx = a_of(bp);
    let first_p = p_idx;
    let mut used_p = vec![p_idx];
    let mut used_q = Vec::new();
    for i in 1..k {
        let shared_pq = |p: usize, q: usize| -> Vec<usize> {
            a_cycles[p]
                .iter()
                .copied()
                .filter(|v| q_cycles[q].contains(v))
                .collect()
        };
        let s1 = shared_pq(p_idx, q_idx);
        r.check(s1.len() == i, || format!("P_{i} and Q_{i} must share {i} vertices"));
        r.check(opposite_runs(c, a, e, &s1), || {
            format!("P_{i} and Q_{i} must meet in a run traversed in opposite orders")
        });
        used_q.push(q_idx);
        let next_p: Vec<usize> = (0..a_cycles.len())
            .filter(|&p| !used_p.contains(&p) && !shared_pq(p, q_idx).is_empty())
            .collect();
        if next_p.len() != 1 {
            r.violations.push(format!("Q_{i} must meet exactly one new a1-cycle"));
            return r;
        }
        p_idx = next_p[0];
        used_p.push(p_idx);
        let s2 = shared_pq(p_idx, q_idx);
        r.check(s2.len() == k - i, || {
            format!("P_{} and Q_{i} must share {} vertices", i + 1, k - i)
        });
        r.check(opposite_runs(c, a, e, &s2), || {
            format!("P_{} and Q_{i} must meet in a run traversed in opposite orders", i + 1)
        });
        if i + 1 < k {
            let next_q: Vec<usize> = (0..q_cycles.len())
                .filter(|&q| !used_q.contains(&q) && !shared_pq(p_idx, q).is_empty())
                .collect();
            if next_q.len() != 1 {
                r.violations.push(format!("P_{} must meet exactly one new e1-cycle", i + 1));
                return r;
            }
            q_idx = next_q[0];
        }
    }
    let last_p = p_idx;
    let last_q = &q_cycles[q_idx];
    for v in 0..c.vertex_count() {
        let expect_loop = (a_cycles[first_p].contains(&v) && v != bp)
            || (a_cycles[last_p].contains(&v) && !last_q.contains(&v));
        r.check((c.step(e, v) == v) == expect_loop, || {
            format!("e1-loop placement wrong at vertex {v}")
        });
    }
    r
}

/// Is `shared` a run that letter `x` walks forward while `y` walks it backward?
fn opposite_runs(c: &CoverGraph, x: usize, y: usize, shared: &[usize]) -> bool {
    if shared.len() <= 1 {
        return true;
    }
    let in_set = |v: usize| shared.contains(&v);
    // Start of the run along x: the member whose x-predecessor is outside.
    let Some(start) = shared
        .iter()
        .copied()
        .find(|&v| !in_set(c.perms[x].iter().position(|&t| t == v).unwrap()))
    else {
        return false;
    };
    let mut run = vec![start];
    while run.len() < shared.len() {
        let nxt = c.step(x, *run.last().unwrap());
        if !in_set(nxt) {
            return false;
        }
        run.push(nxt);
    }
    run.windows(2).all(|w| c.step(y, w[1]) == w[0])
}

/// Lengths of shortest oriented paths from the basepoint to loop vertices.
///
/// For `2 <= i <= k-1`: `alpha[i]` along `C_{i-1}'` to the loops of `C_i`;
/// `alpha_prime[i]` along `C_i` to the loops of `C_{i-1}'`; `beta[i]` along
/// `C_i` to the loops of `C_i'`; `beta_prime[i]` along `C_i'` to the loops of
/// `C_i`. Each list is strictly increasing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AlphaBeta {
    pub alpha: BTreeMap<usize, Vec<usize>>,
    pub alpha_prime: BTreeMap<usize, Vec<usize>>,
    pub beta: BTreeMap<usize, Vec<usize>>,
    pub beta_prime: BTreeMap<usize, Vec<usize>>,
}

impl AlphaBeta {
    fn lookup(map: &BTreeMap<usize, Vec<usize>>, i: usize, j: usize) -> Option<usize> {
        if j == 0 {
            return map.contains_key(&i).then_some(0);
        }
        map.get(&i)?.get(j - 1).copied()
    }

    /// `alpha_{i,j}`, with `alpha_{i,0} = 0`.
    pub fn alpha(&self, i: usize, j: usize) -> Option<usize> {
        Self::lookup(&self.alpha, i, j)
    }

    /// `beta_{i,j}`, with `beta_{i,0} = 0`.
    pub fn beta(&self, i: usize, j: usize) -> Option<usize> {
        Self::lookup(&self.beta, i, j)
    }
}

pub fn z_letter(i: usize) -> String {
    format!("C{i}")
}

pub fn z_letter_prime(i: usize) -> String {
    format!("C{i}'")
}

/// The degree-`k(k+1)` cover `Z` over `{C1..Ck, C1'..Ck'}` in a canonical layout.
///
/// `C1'` and `Ck` walk the master cycle `v -> v+1`; `C1` and `Ck'` walk
/// `v -> v+k` (k cycles of length k+1). The loops (`k-i` for `C_i`, `i-1` for
/// `C_i'`) go to the lowest non-basepoint vertices without a loop yet, `C`
/// letters first; each remaining long cycle visits its non-loop vertices in
/// increasing order. The basepoint is vertex 0.
pub fn build_cover_z(k: usize) -> Result<(CoverGraph, AlphaBeta), CoverError> {
    if k == 0 {
        return Err(CoverError::BadK);
    }
    let n = k * (k + 1);
    let master: Vec<usize> = (0..n).map(|v| (v + 1) % n).collect();
    let stride: Vec<usize> = (0..n).map(|v| (v + k) % n).collect();
    let mut next_free = 1;
    let mut loops_for = |count: usize| -> Vec<usize> {
        let taken: Vec<usize> = (next_free..next_free + count).collect();
        next_free += count;
        taken
    };
    let threaded = |loops: &[usize]| -> Vec<usize> {
        let rest: Vec<usize> = (0..n).filter(|v| !loops.contains(v)).collect();
        cycle_perm(n, &[rest])
    };
    let mut c_perms = vec![Vec::new(); k + 1];
    let mut cp_perms = vec![Vec::new(); k + 1];
    c_perms[1] = stride.clone();
    cp_perms[k] = stride;
    c_perms[k] = master.clone();
    cp_perms[1] = master;
    for (i, perm) in c_perms.iter_mut().enumerate().take(k).skip(2) {
        *perm = threaded(&loops_for(k - i));
    }
    for (i, perm) in cp_perms.iter_mut().enumerate().take(k).skip(2) {
        *perm = threaded(&loops_for(i - 1));
    }
    let mut alphabet: Vec<String> = (1..=k).map(z_letter).collect();
    alphabet.extend((1..=k).map(z_letter_prime));
    let perms: Vec<Vec<usize>> = c_perms.into_iter().skip(1).chain(cp_perms.into_iter().skip(1)).collect();
    let cover = CoverGraph::from_parts(n, 0, alphabet, perms)?;
    let ab = alpha_beta(&cover, k)?;
    Ok((cover, ab))
}

fn loop_vertices(c: &CoverGraph, letter: usize) -> Vec<usize> {
    (0..c.vertex_count()).filter(|&v| c.step(letter, v) == v).collect()
}

/// Reads the alpha/beta families off a `Z`-type cover. Unreachable loop
/// vertices are an error.
pub fn alpha_beta(c: &CoverGraph, k: usize) -> Result<AlphaBeta, CoverError> {
    let mut ab = AlphaBeta::default();
    let dist = |along: usize, loops_of: usize| -> Result<Vec<usize>, CoverError> {
        let mut out = loop_vertices(c, loops_of)
            .into_iter()
            .map(|v| {
                c.distance_along(along, c.basepoint(), v).ok_or_else(|| {
                    CoverError::Malformed(format!("loop vertex {v} is off the basepoint cycle"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.sort_unstable();
        Ok(out)
    };
    for i in 2..k {
        let ci = c.letter(&z_letter(i))?;
        let cpi = c.letter(&z_letter_prime(i))?;
        let cp_prev = c.letter(&z_letter_prime(i - 1))?;
        ab.alpha.insert(i, dist(cp_prev, ci)?);
        ab.alpha_prime.insert(i, dist(ci, cp_prev)?);
        ab.beta.insert(i, dist(ci, cpi)?);
        ab.beta_prime.insert(i, dist(cpi, ci)?);
    }
    Ok(ab)
}

/// Checks every property the construction of `Z` promises.
pub fn validate_cover_z(c: &CoverGraph, k: usize) -> CoverReport {
    let mut r = c.validate();
    let n = k * (k + 1);
    r.check(c.vertex_count() == n, || format!("expected {n} vertices"));
    let mut letters = Vec::new();
    for i in 1..=k {
        match (c.letter(&z_letter(i)), c.letter(&z_letter_prime(i))) {
            (Ok(x), Ok(y)) => letters.push((x, y)),
            _ => {
                r.violations.push(format!("alphabet must contain C{i} and C{i}'"));
                return r;
            }
        }
    }
    if !r.is_ok() {
        return r;
    }
    let c_of = |i: usize| letters[i - 1].0;
    let cp_of = |i: usize| letters[i - 1].1;
    let long_plus_loops = |long: usize, loops: usize| {
        let mut v = vec![long];
        v.extend(vec![1; loops]);
        v
    };
    for i in 1..=k {
        let expect_c = if i == 1 {
            vec![k + 1; k]
        } else {
            long_plus_loops(n - (k - i), k - i)
        };
        r.check(c.census(c_of(i)) == expect_c, || {
            format!("C{i} census {:?}, expected {expect_c:?}", c.census(c_of(i)))
        });
        let expect_cp = if i == k {
            vec![k + 1; k]
        } else {
            long_plus_loops(n - (i - 1), i - 1)
        };
        r.check(c.census(cp_of(i)) == expect_cp, || {
            format!("C{i}' census {:?}, expected {expect_cp:?}", c.census(cp_of(i)))
        });
    }
    let bp = c.basepoint();
    let mut loops_at = vec![0usize; n];
    for x in 0..c.alphabet().len() {
        for v in loop_vertices(c, x) {
            loops_at[v] += 1;
        }
    }
    r.check(loops_at[bp] == 0, || "loop at the basepoint".into());
    r.check(loops_at.iter().all(|&l| l <= 1), || "more than one loop at a vertex".into());
    for i in 1..=k {
        r.check(c.components_by_index(&[c_of(i), cp_of(i)]).len() == 1, || {
            format!("{{C{i}, C{i}'}} subgraph is not connected")
        });
        if i >= 2 {
            r.check(c.components_by_index(&[cp_of(i - 1), c_of(i)]).len() == 1, || {
                format!("{{C{}', C{i}}} subgraph is not connected", i - 1)
            });
        }
    }
    let distinct_cycles = |walk: usize, cycles_of: usize| {
        let cycles = c.cycles(cycles_of);
        let mut v = bp;
        let mut seen = Vec::new();
        for _ in 0..k {
            seen.push(cycles.iter().position(|cy| cy.contains(&v)).unwrap());
            v = c.step(walk, v);
        }
        seen.sort_unstable();
        seen.dedup();
        seen.len() == k
    };
    r.check(distinct_cycles(cp_of(1), c_of(1)), || {
        "C1'^j (j < k) must reach distinct C1-cycles".into()
    });
    r.check(distinct_cycles(c_of(k), cp_of(k)), || {
        "Ck^j (j < k) must reach distinct Ck'-cycles".into()
    });
    match alpha_beta(c, k) {
        Ok(ab) => {
            let families = [&ab.alpha, &ab.alpha_prime, &ab.beta, &ab.beta_prime];
            for fam in families {
                for list in fam.values() {
                    r.check(
                        list.windows(2).all(|w| w[0] < w[1]) && list.iter().all(|&x| (1..=n).contains(&x)),
                        || "alpha/beta family not strictly increasing in 1..=k(k+1)".into(),
                    );
                }
            }
            for i in 2..k {
                r.check(ab.alpha[&i].len() == k - i && ab.beta_prime[&i].len() == k - i, || {
                    format!("alpha_{i} and beta'_{i} need {} entries", k - i)
                });
                r.check(ab.beta[&i].len() == i - 1 && ab.alpha_prime[&i].len() == i - 2, || {
                    format!("beta_{i} needs {} entries and alpha'_{i} {}", i - 1, i - 2)
                });
            }
        }
        Err(e) => r.violations.push(e.to_string()),
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_for_k3_census() {
        let s = build_cover_s(3).unwrap();
        assert_eq!(s.vertex_count(), 12);
        let a = s.letter("a1").unwrap();
        let e = s.letter("e1").unwrap();
        assert_eq!(s.census(a), vec![4, 4, 4]);
        assert_eq!(s.census(e), vec![3, 3, 1, 1, 1, 1, 1, 1]);
        assert_eq!(s.cycle_length(a, s.basepoint()), 4);
        let loop_vertex = (0..12).find(|&v| s.step(e, v) == v).unwrap();
        assert_eq!(s.cycle_length(e, loop_vertex), 1);
        assert!(validate_cover_s(&s, 3).is_ok());
    }

    #[test]
    fn s_small_and_degenerate() {
        let s = build_cover_s(2).unwrap();
        assert_eq!(s.vertex_count(), 6);
        assert!(validate_cover_s(&s, 2).is_ok(), "{:?}", validate_cover_s(&s, 2));
        let s1 = build_cover_s(1).unwrap();
        assert_eq!(s1.vertex_count(), 2);
        assert!(validate_cover_s(&s1, 1).is_ok());
        assert_eq!(s1.step(1, s1.basepoint()), s1.basepoint());
        for k in 1..=7 {
            let s = build_cover_s(k).unwrap();
            assert_eq!(s.vertex_count(), k * (k + 1));
            let report = validate_cover_s(&s, k);
            assert!(report.is_ok(), "k={k}: {report:?}");
        }
    }

    #[test]
    fn z_for_k3_census() {
        let (z, ab) = build_cover_z(3).unwrap();
        assert_eq!(z.vertex_count(), 12);
        let c2p = z.letter("C2'").unwrap();
        assert_eq!(z.census(c2p), vec![11, 1]);
        assert_eq!(ab.alpha(2, 1), Some(1));
        assert_eq!(ab.beta(2, 1), Some(1));
        assert_eq!(ab.alpha(2, 0), Some(0));
        assert_eq!(z.label_subgraph_components(&["C2"]).unwrap().len(), 2);
        assert!(validate_cover_z(&z, 3).is_ok(), "{:?}", validate_cover_z(&z, 3));
    }

    #[test]
    fn z_for_k2_has_no_loops() {
        let (z, _) = build_cover_z(2).unwrap();
        assert_eq!(z.census(z.letter("C1").unwrap()), vec![3, 3]);
        assert_eq!(z.census(z.letter("C1'").unwrap()), vec![6]);
        assert_eq!(z.census(z.letter("C2").unwrap()), vec![6]);
        assert_eq!(z.census(z.letter("C2'").unwrap()), vec![3, 3]);
        assert!(validate_cover_z(&z, 2).is_ok());
    }

    #[test]
    fn z_validates_up_to_six() {
        for k in 1..=6 {
            let (z, _) = build_cover_z(k).unwrap();
            let report = validate_cover_z(&z, k);
            assert!(report.is_ok(), "k={k}: {report:?}");
        }
    }

    #[test]
    fn broken_map_is_reported() {
        let c = CoverGraph::from_parts(3, 0, vec!["a1".into()], vec![vec![1, 1, 2]]).unwrap();
        let report = c.validate();
        assert_eq!(report.violations, vec!["letter a1 is not a bijection".to_string()]);
    }

    #[test]
    fn json_round_trip() {
        let (z, _) = build_cover_z(3).unwrap();
        assert_eq!(CoverGraph::from_json(&z.to_json()).unwrap(), z);
        assert!(matches!(z.cycle_length_of("X", 0), Err(CoverError::UnknownLetter(_))));
    }
}
