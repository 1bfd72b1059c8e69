//! Ordered tree edit distance (Zhang–Shasha) with mapping recovery, and a
//! greedy top-down matcher for trees too large for the exact program.

use std::collections::HashMap;

use crate::jsparse::{Node, SyntaxTree};

use super::script::{EditOp, EditScript, Label, NodeRef, Work};

/// Combined node count above which the greedy matcher is used.
pub const EXACT_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TedResult {
    pub distance: usize,
    pub script: EditScript,
    /// True when the greedy matcher produced an upper bound.
    pub approximate: bool,
}

pub fn tree_edit_distance(a: &SyntaxTree, b: &SyntaxTree) -> TedResult {
    node_edit_distance(&a.root, &b.root)
}

pub fn node_edit_distance(a: &Node, b: &Node) -> TedResult {
    edit_distance_with_limit(a, b, EXACT_LIMIT)
}

pub fn edit_distance_with_limit(a: &Node, b: &Node, exact_limit: usize) -> TedResult {
    if a == b {
        return TedResult {
            distance: 0,
            script: EditScript::default(),
            approximate: false,
        };
    }
    let fa = Flat::new(a);
    let fb = Flat::new(b);
    let approximate = fa.len() + fb.len() > exact_limit;
    let mapping = if approximate {
        greedy_mapping(&fa, &fb)
    } else {
        zhang_shasha_mapping(&fa, &fb)
    };
    let script = script_from_mapping(a, &fa, &fb, &mapping);
    TedResult {
        distance: script.cost(),
        script,
        approximate,
    }
}

/// Exact distance via the Zhang–Shasha program, without building a script.
pub fn exact_distance(a: &Node, b: &Node) -> usize {
    let fa = Flat::new(a);
    let fb = Flat::new(b);
    let mut zs = Zs::new(&fa, &fb);
    zs.run();
    zs.td[zs.at(fa.len(), fb.len())] as usize
}

/// Upper bound from the greedy matcher, regardless of size.
pub fn greedy_distance(a: &Node, b: &Node) -> usize {
    let fa = Flat::new(a);
    let fb = Flat::new(b);
    mapping_cost(&fa, &fb, &greedy_mapping(&fa, &fb))
}

pub(crate) struct Flat<'a> {
    pub nodes: Vec<&'a Node>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub size: Vec<usize>,
    pub child_index: Vec<usize>,
}

impl<'a> Flat<'a> {
    pub fn new(root: &'a Node) -> Flat<'a> {
        let mut f = Flat {
            nodes: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
            size: Vec::new(),
            child_index: Vec::new(),
        };
        fn walk<'a>(f: &mut Flat<'a>, n: &'a Node, parent: Option<usize>, idx: usize) -> usize {
            let id = f.nodes.len();
            f.nodes.push(n);
            f.parent.push(parent);
            f.children.push(Vec::with_capacity(n.children.len()));
            f.size.push(1);
            f.child_index.push(idx);
            for (i, c) in n.children.iter().enumerate() {
                let cid = walk(f, c, Some(id), i);
                f.children[id].push(cid);
                f.size[id] += f.size[cid];
            }
            id
        }
        walk(&mut f, root, None, 0);
        f
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn label(&self, i: usize) -> Label {
        Label::of(self.nodes[i])
    }

    fn same_label(&self, i: usize, other: &Flat<'_>, j: usize) -> bool {
        self.nodes[i].kind == other.nodes[j].kind && self.nodes[i].value == other.nodes[j].value
    }
}

fn mapping_cost(fa: &Flat<'_>, fb: &Flat<'_>, mapping: &[Option<usize>]) -> usize {
    let matched = mapping.iter().flatten().count();
    let relabels = mapping
        .iter()
        .enumerate()
        .filter(|(i, m)| m.is_some_and(|j| !fa.same_label(*i, fb, j)))
        .count();
    (fa.len() - matched) + (fb.len() - matched) + relabels
}

/// Dynamic-program state over 1-based postorder indices.
struct Zs {
    n: usize,
    m: usize,
    la: Vec<u32>,
    lb: Vec<u32>,
    lmd_a: Vec<usize>,
    lmd_b: Vec<usize>,
    keyroots_a: Vec<usize>,
    keyroots_b: Vec<usize>,
    pre_a: Vec<usize>,
    pre_b: Vec<usize>,
    td: Vec<u32>,
    fd: Vec<u32>,
}

impl Zs {
    fn new(fa: &Flat<'_>, fb: &Flat<'_>) -> Zs {
        let mut interner: HashMap<Label, u32> = HashMap::new();
        let mut side = |f: &Flat<'_>| {
            // postorder index of preorder node i is i + size(i) - 1 minus its
            // ancestors' count; computed directly by a walk instead.
            let n = f.len();
            let mut post_of_pre = vec![0usize; n];
            let mut counter = 0;
            let mut stack: Vec<(usize, bool)> = vec![(0, false)];
            while let Some((i, expanded)) = stack.pop() {
                if expanded {
                    counter += 1;
                    post_of_pre[i] = counter;
                } else {
                    stack.push((i, true));
                    for &c in f.children[i].iter().rev() {
                        stack.push((c, false));
                    }
                }
            }
            let mut labels = vec![0u32; n + 1];
            let mut lmd = vec![0usize; n + 1];
            let mut pre = vec![0usize; n + 1];
            let mut keyroots = Vec::new();
            for i in 0..n {
                let p = post_of_pre[i];
                let next = interner.len() as u32;
                labels[p] = *interner.entry(f.label(i)).or_insert(next);
                lmd[p] = p + 1 - f.size[i];
                pre[p] = i;
                if f.parent[i].is_none() || f.child_index[i] > 0 {
                    keyroots.push(p);
                }
            }
            keyroots.sort_unstable();
            (labels, lmd, pre, keyroots)
        };
        let (la, lmd_a, pre_a, keyroots_a) = side(fa);
        let (lb, lmd_b, pre_b, keyroots_b) = side(fb);
        let (n, m) = (fa.len(), fb.len());
        Zs {
            n,
            m,
            la,
            lb,
            lmd_a,
            lmd_b,
            keyroots_a,
            keyroots_b,
            pre_a,
            pre_b,
            td: vec![0; (n + 1) * (m + 1)],
            fd: Vec::new(),
        }
    }

    fn at(&self, i: usize, j: usize) -> usize {
        i * (self.m + 1) + j
    }

    fn run(&mut self) {
        let kra = std::mem::take(&mut self.keyroots_a);
        let krb = std::mem::take(&mut self.keyroots_b);
        for &i in &kra {
            for &j in &krb {
                self.forest(i, j, true);
            }
        }
        self.keyroots_a = kra;
        self.keyroots_b = krb;
    }

    /// Fills `fd` for the subtree pair rooted at (i, j). Row r stands for the
    /// forest lmd(i)..=lmd(i)+r-1, column c likewise.
    fn forest(&mut self, i: usize, j: usize, record: bool) {
        let (li, lj) = (self.lmd_a[i], self.lmd_b[j]);
        let rows = i - li + 2;
        let cols = j - lj + 2;
        self.fd.clear();
        self.fd.resize(rows * cols, 0);
        let fd = &mut self.fd;
        for r in 1..rows {
            fd[r * cols] = r as u32;
        }
        for c in 1..cols {
            fd[c] = c as u32;
        }
        for x in li..=i {
            let r = x - li + 1;
            let lx = self.lmd_a[x];
            for y in lj..=j {
                let c = y - lj + 1;
                let del = fd[(r - 1) * cols + c] + 1;
                let ins = fd[r * cols + c - 1] + 1;
                let ly = self.lmd_b[y];
                let v = if lx == li && ly == lj {
                    let cost = u32::from(self.la[x] != self.lb[y]);
                    let v = del.min(ins).min(fd[(r - 1) * cols + c - 1] + cost);
                    if record {
                        self.td[x * (self.m + 1) + y] = v;
                    }
                    v
                } else {
                    let sub = fd[(lx - li) * cols + (ly - lj)] + self.td[x * (self.m + 1) + y];
                    del.min(ins).min(sub)
                };
                fd[r * cols + c] = v;
            }
        }
    }

    /// Recovers an optimal mapping as preorder(a) -> preorder(b).
    fn mapping(&mut self) -> Vec<Option<usize>> {
        let mut mapping = vec![None; self.n];
        let mut stack = vec![(self.n, self.m)];
        while let Some((i, j)) = stack.pop() {
            self.forest(i, j, false);
            let (li, lj) = (self.lmd_a[i], self.lmd_b[j]);
            let cols = j - lj + 2;
            let fd = &self.fd;
            let get = |x: usize, y: usize| fd[(x + 1 - li) * cols + (y + 1 - lj)];
            let (mut x, mut y) = (i, j);
            while x >= li || y >= lj {
                if x >= li && y >= lj {
                    let (lx, ly) = (self.lmd_a[x], self.lmd_b[y]);
                    let here = get(x, y);
                    if lx == li && ly == lj {
                        let cost = u32::from(self.la[x] != self.lb[y]);
                        if here == get(x - 1, y - 1) + cost {
                            mapping[self.pre_a[x]] = Some(self.pre_b[y]);
                            x -= 1;
                            y -= 1;
                            continue;
                        }
                    } else if here == get(lx - 1, ly - 1) + self.td[self.at(x, y)] {
                        stack.push((x, y));
                        x = lx - 1;
                        y = ly - 1;
                        continue;
                    }
                }
                if x >= li && get(x, y) == get(x - 1, y) + 1 {
                    x -= 1;
                } else {
                    debug_assert!(y >= lj && get(x, y) == get(x, y - 1) + 1);
                    y -= 1;
                }
            }
        }
        mapping
    }
}

pub(crate) fn zhang_shasha_mapping(fa: &Flat<'_>, fb: &Flat<'_>) -> Vec<Option<usize>> {
    let mut zs = Zs::new(fa, fb);
    zs.run();
    zs.mapping()
}

/// Pairs the roots, aligns children by a longest common subsequence over
/// node kinds and recurses into aligned pairs. Unaligned subtrees are
/// deleted or inserted whole.
pub(crate) fn greedy_mapping(fa: &Flat<'_>, fb: &Flat<'_>) -> Vec<Option<usize>> {
    let mut mapping = vec![None; fa.len()];
    let mut stack = vec![(0usize, 0usize)];
    while let Some((i, j)) = stack.pop() {
        mapping[i] = Some(j);
        let ca = &fa.children[i];
        let cb = &fb.children[j];
        let score = |x: usize, y: usize| -> u32 {
            if fa.nodes[x].kind != fb.nodes[y].kind {
                0
            } else if fa.nodes[x] == fb.nodes[y] {
                3
            } else if fa.nodes[x].value == fb.nodes[y].value {
                2
            } else {
                1
            }
        };
        // Weighted LCS so identical subtrees win over same-kind ones.
        let (p, q) = (ca.len(), cb.len());
        let mut t = vec![0u32; (p + 1) * (q + 1)];
        for x in (0..p).rev() {
            for y in (0..q).rev() {
                let s = score(ca[x], cb[y]);
                let diag = if s > 0 { t[(x + 1) * (q + 1) + y + 1] + s } else { 0 };
                t[x * (q + 1) + y] = diag.max(t[(x + 1) * (q + 1) + y]).max(t[x * (q + 1) + y + 1]);
            }
        }
        let (mut x, mut y) = (0, 0);
        while x < p && y < q {
            let s = score(ca[x], cb[y]);
            if s > 0 && t[x * (q + 1) + y] == t[(x + 1) * (q + 1) + y + 1] + s {
                stack.push((ca[x], cb[y]));
                x += 1;
                y += 1;
            } else if t[x * (q + 1) + y] == t[(x + 1) * (q + 1) + y] {
                x += 1;
            } else {
                y += 1;
            }
        }
    }
    mapping
}

/// Turns a valid ordered mapping into relabels, deletes and top-down
/// inserts, simulating the script to compute insert positions.
pub(crate) fn script_from_mapping(
    a: &Node,
    fa: &Flat<'_>,
    fb: &Flat<'_>,
    mapping: &[Option<usize>],
) -> EditScript {
    let mut ops = Vec::new();
    let mut a_of_b: Vec<Option<usize>> = vec![None; fb.len()];
    for (i, m) in mapping.iter().enumerate() {
        if let Some(j) = *m {
            a_of_b[j] = Some(i);
            if !fa.same_label(i, fb, j) {
                ops.push(EditOp::Relabel {
                    node: i,
                    target: j,
                    from: fa.label(i),
                    to: fb.label(j),
                });
            }
        }
    }
    for (i, m) in mapping.iter().enumerate() {
        if m.is_none() {
            ops.push(EditOp::Delete {
                node: i,
                label: fa.label(i),
            });
        }
    }

    let mut work = Work::new(a);
    for op in &ops {
        work.apply(op).expect("relabels and deletes from a mapping apply");
    }
    // b-preorder index of every live work node.
    let mut b_of_work: HashMap<usize, usize> = mapping
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|j| (i, j)))
        .collect();
    for j in 0..fb.len() {
        if a_of_b[j].is_some() {
            continue;
        }
        let parent_ref = fb.parent[j].map(|p| match a_of_b[p] {
            Some(i) => NodeRef::Source(i),
            None => NodeRef::Target(p),
        });
        let parent_id = parent_ref.map(|r| work.resolve(r).expect("parent present"));
        let siblings = work.children_of(parent_id);
        let end = j + fb.size[j];
        let inside = |w: &usize| {
            let bj = b_of_work[w];
            bj > j && bj < end
        };
        let first = siblings.iter().position(inside);
        let (position, adopt) = match first {
            Some(p) => {
                let adopt = siblings[p..].iter().take_while(|w| inside(w)).count();
                (p, adopt)
            }
            None => (siblings.iter().filter(|w| b_of_work[*w] < j).count(), 0),
        };
        let op = EditOp::Insert {
            node: j,
            label: fb.label(j),
            parent: parent_ref,
            position,
            adopt,
        };
        work.apply(&op).expect("insert derived from a valid mapping");
        let id = work.resolve(NodeRef::Target(j)).expect("just inserted");
        b_of_work.insert(id, j);
        ops.push(op);
    }
    EditScript { ops }
}
