//! Independent oracles shared by the integration suites. Nothing here calls
//! into the distance code under test.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use debugscope_core::jsparse::{Node, NodeKind};
use debugscope_core::{
    DebugEvent, EventKind, SessionHeader, SessionId, SessionMode, SessionRecord, Snapshot, SnapshotId,
    Timestamp, UserId,
};

/// Builds a tree from a parent array: node 0 is the root, `parents[i - 1]`
/// is the parent of node `i` and must be `< i`. Children keep index order.
pub fn tree_from_parents(parents: &[usize], labels: &[&str]) -> Node {
    let n = labels.len();
    assert_eq!(parents.len() + 1, n);
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &p) in parents.iter().enumerate() {
        assert!(p <= i);
        kids[p].push(i + 1);
    }
    fn build(i: usize, kids: &[Vec<usize>], labels: &[&str]) -> Node {
        Node::with_value(
            NodeKind::Identifier,
            labels[i],
            kids[i].iter().map(|&c| build(c, kids, labels)).collect(),
        )
    }
    build(0, &kids, labels)
}

/// Minimal xorshift so oracles do not depend on the crate's RNG choices.
pub struct XorShift(pub u64);

impl XorShift {
    pub fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }
}

pub fn random_tree(rng: &mut XorShift, max_nodes: usize, alphabet: &[&'static str]) -> Node {
    let n = 1 + rng.below(max_nodes);
    let parents: Vec<usize> = (1..n).map(|i| rng.below(i)).collect();
    let labels: Vec<&str> = (0..n).map(|_| alphabet[rng.below(alphabet.len())]).collect();
    tree_from_parents(&parents, &labels)
}

struct Pre {
    labels: Vec<(NodeKind, Option<String>)>,
    /// Preorder index one past the last descendant.
    end: Vec<usize>,
}

fn preorder(root: &Node) -> Pre {
    fn walk(n: &Node, p: &mut Pre) {
        let i = p.labels.len();
        p.labels.push((n.kind, n.value.clone()));
        p.end.push(0);
        for c in &n.children {
            walk(c, p);
        }
        p.end[i] = p.labels.len();
    }
    let mut p = Pre {
        labels: Vec::new(),
        end: Vec::new(),
    };
    walk(root, &mut p);
    p
}

/// Tree edit distance as the cheapest valid mapping, found by exhaustive
/// enumeration. A mapping is valid when it is one-to-one and preserves both
/// preorder and the ancestor relation; its cost is the unmapped nodes on
/// each side plus mapped pairs with differing labels.
pub fn mapping_distance(a: &Node, b: &Node) -> usize {
    let pa = preorder(a);
    let pb = preorder(b);
    let (n, m) = (pa.labels.len(), pb.labels.len());
    let anc = |p: &Pre, x: usize, y: usize| x < y && y < p.end[x];

    let mut best = n + m;
    let mut pairs: Vec<(usize, usize)> = Vec::new();

    fn go(
        i: usize,
        pairs: &mut Vec<(usize, usize)>,
        relabels: usize,
        best: &mut usize,
        ctx: &(&Pre, &Pre, &dyn Fn(&Pre, usize, usize) -> bool),
    ) {
        let (pa, pb, anc) = ctx;
        let (n, m) = (pa.labels.len(), pb.labels.len());
        let k = pairs.len();
        let cost = (n - k) + (m - k) + relabels;
        // Each further pair lowers the cost by at most 2.
        let next_j = pairs.last().map_or(0, |p| p.1 + 1);
        let room = (n - i).min(m.saturating_sub(next_j));
        if cost.saturating_sub(2 * room) >= *best {
            return;
        }
        *best = (*best).min(cost);
        if i == n {
            return;
        }
        go(i + 1, pairs, relabels, best, ctx);
        for j in next_j..m {
            let ok = pairs
                .iter()
                .all(|&(x, y)| anc(pa, x, i) == anc(pb, y, j));
            if ok {
                pairs.push((i, j));
                let r = usize::from(pa.labels[i] != pb.labels[j]);
                go(i + 1, pairs, relabels + r, best, ctx);
                pairs.pop();
            }
        }
    }
    let anc_dyn: &dyn Fn(&Pre, usize, usize) -> bool = &anc;
    go(0, &mut pairs, 0, &mut best, &(&pa, &pb, anc_dyn));
    best
}

/// A forest of `(label, children)` nodes, used as a search state.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct F(pub Vec<(u8, F)>);

impl F {
    pub fn size(&self) -> usize {
        self.0.iter().map(|(_, c)| 1 + c.size()).sum()
    }

    pub fn from_node(n: &Node, alphabet: &[String]) -> F {
        let l = alphabet
            .iter()
            .position(|a| Some(a.as_str()) == n.value.as_deref())
            .expect("label in alphabet") as u8;
        F(vec![(
            l,
            F(n.children.iter().map(|c| F::from_node(c, alphabet).0.remove(0)).collect()),
        )])
    }

    /// Every forest one unit edit away.
    fn neighbours(&self, labels: u8, out: &mut Vec<F>) {
        let len = self.0.len();
        // Insert a new node at this level adopting siblings i..j.
        for i in 0..=len {
            for j in i..=len {
                for l in 0..labels {
                    let mut v = self.0[..i].to_vec();
                    v.push((l, F(self.0[i..j].to_vec())));
                    v.extend_from_slice(&self.0[j..]);
                    out.push(F(v));
                }
            }
        }
        for i in 0..len {
            let (l, kids) = &self.0[i];
            // Relabel.
            for nl in 0..labels {
                if nl != *l {
                    let mut v = self.0.clone();
                    v[i].0 = nl;
                    out.push(F(v));
                }
            }
            // Delete: children take the node's place.
            let mut v = self.0[..i].to_vec();
            v.extend_from_slice(&kids.0);
            v.extend_from_slice(&self.0[i + 1..]);
            out.push(F(v));
            // Edits inside the child forest.
            let mut inner = Vec::new();
            kids.neighbours(labels, &mut inner);
            for k in inner {
                let mut v = self.0.clone();
                v[i].1 = k;
                out.push(F(v));
            }
        }
    }
}

/// Breadth-first search over unit edit scripts. Intermediate forests are
/// capped at `max(|a|, |b|)` nodes; some optimal script (relabels, then
/// deletes, then inserts) always stays within that cap.
pub fn bfs_distance(a: &Node, b: &Node) -> usize {
    let mut alphabet: Vec<String> = Vec::new();
    for n in a.preorder().into_iter().chain(b.preorder()) {
        let v = n.value.clone().unwrap_or_default();
        if !alphabet.contains(&v) {
            alphabet.push(v);
        }
    }
    let start = F::from_node(a, &alphabet);
    let goal = F::from_node(b, &alphabet);
    let cap = start.size().max(goal.size());
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    let mut buf = Vec::new();
    while let Some((f, d)) = queue.pop_front() {
        if f == goal {
            return d;
        }
        buf.clear();
        f.neighbours(alphabet.len() as u8, &mut buf);
        for g in buf.drain(..) {
            if g.size() <= cap && seen.insert(g.clone()) {
                queue.push_back((g, d + 1));
            }
        }
    }
    unreachable!("the goal is always reachable")
}

/// Textbook Levenshtein over chars with a full matrix.
pub fn naive_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

pub fn corpus_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/logic")
}

/// `(file name, source)` for every bundled Logic-layer corpus file, sorted.
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .filter(|(n, _)| n.ends_with(".js"))
        .collect();
    out.sort();
    out
}

/// A session with one Save per source, all in `pages/index.js`, plus the
/// snapshots it refers to.
pub fn session_of_saves(id: &str, sources: &[&str]) -> (SessionRecord, HashMap<SnapshotId, Snapshot>) {
    let mut rec = SessionRecord::open(SessionHeader {
        session_id: SessionId::new(id),
        user_id: UserId::new("stu"),
        question_id: None,
        mode: SessionMode::FreeDebug,
        source_ticket: None,
        initial_snapshot_id: None,
        started_at: Timestamp(0),
    });
    let mut snaps = HashMap::new();
    for (i, src) in sources.iter().enumerate() {
        let s = Snapshot::new([("pages/index.js", *src)]).unwrap();
        rec.push_event(DebugEvent {
            event_id: i as u64 + 1,
            kind: EventKind::Save,
            snapshot_id: Some(s.id().clone()),
            compile_ok: None,
            error_log: None,
            at: Timestamp(1000 * (i as i64 + 1)),
        })
        .unwrap();
        snaps.insert(s.id().clone(), s);
    }
    (rec, snaps)
}
