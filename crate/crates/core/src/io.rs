//! Plain-text interchange formats. Every format is whitespace separated,
//! ignores blank lines and `#` comments, and reports parse errors with the
//! 1-based line number. Writers start with a `# ribe <kind> v1` comment.
//! Floats are written in shortest round-trip form, so write then parse is
//! the identity.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::cube::CubeFunction;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::metric::FiniteMetric;
use crate::oracle::{OracleLevel, OracleStructure};
use crate::ramsey::SkeletonResult;
use crate::ultrametric::{HstNode, HstTree};
use crate::walk::MarkovChain;

pub const ORACLE_MAGIC: &str = "RIBE-ORACLE";
pub const ORACLE_VERSION: &str = "v1";

struct Lines<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let body = l.split('#').next().unwrap_or("");
                let toks: Vec<&str> = body.split_whitespace().collect();
                (!toks.is_empty()).then_some((i + 1, toks))
            })
            .collect();
        Lines { lines, pos: 0 }
    }

    fn last_line(&self) -> usize {
        self.lines.last().map_or(1, |l| l.0)
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let l = self
            .lines
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::parse(self.last_line(), format!("unexpected end of input, expected {what}")))?;
        self.pos += 1;
        Ok(l)
    }

    fn peek(&self) -> Option<&(usize, Vec<&'a str>)> {
        self.lines.get(self.pos)
    }

    /// Every remaining token with its line.
    fn rest(&mut self) -> Vec<(usize, &'a str)> {
        let out = self.lines[self.pos..]
            .iter()
            .flat_map(|(n, toks)| toks.iter().map(move |t| (*n, *t)))
            .collect();
        self.pos = self.lines.len();
        out
    }

    fn finish(&self) -> Result<()> {
        match self.peek() {
            Some((n, _)) => Err(Error::parse(*n, "trailing content")),
            None => Ok(()),
        }
    }
}

fn num<T: FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::parse(line, format!("invalid {what} '{tok}'")))
}

fn arity(line: usize, toks: &[&str], expected: &[usize], what: &str) -> Result<()> {
    if expected.contains(&toks.len()) {
        Ok(())
    } else {
        Err(Error::parse(line, format!("{what}: expected {expected:?} fields, got {}", toks.len())))
    }
}

fn reloc(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse { .. } => e,
        other => Error::parse(line, other.to_string()),
    }
}

pub fn read_file(path: impl AsRef<Path>) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn write_file(path: impl AsRef<Path>, text: &str) -> Result<()> {
    Ok(std::fs::write(path, text)?)
}

/// `n m`, then `u v` or `u v w` per edge. Weights are omitted when all are 1.
pub fn write_graph(g: &Graph) -> String {
    let mut s = String::from("# ribe graph v1\n");
    writeln!(s, "{} {}", g.vertex_count(), g.edge_count()).unwrap();
    let unit = g.is_unit_weight();
    for e in g.edges() {
        if unit {
            writeln!(s, "{} {}", e.u, e.v).unwrap();
        } else {
            writeln!(s, "{} {} {}", e.u, e.v, e.weight).unwrap();
        }
    }
    s
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next("graph header")?;
    arity(ln, &head, &[2], "graph header")?;
    let n: usize = num(ln, head[0], "vertex count")?;
    let m: usize = num(ln, head[1], "edge count")?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, t) = lines.next("edge")?;
        arity(ln, &t, &[2, 3], "edge")?;
        let u = num(ln, t[0], "vertex")?;
        let v = num(ln, t[1], "vertex")?;
        let weight = if t.len() == 3 { num(ln, t[2], "weight")? } else { 1.0 };
        edges.push(Edge { u, v, weight });
    }
    lines.finish()?;
    Graph::new(n, edges).map_err(reloc(ln))
}

/// `n`, then the upper triangle in row-major order, one row per line.
pub fn write_metric(m: &FiniteMetric) -> String {
    let mut s = String::from("# ribe metric v1\n");
    let n = m.len();
    writeln!(s, "{n}").unwrap();
    for i in 0..n.saturating_sub(1) {
        let row: Vec<String> = (i + 1..n).map(|j| m.dist(i, j).to_string()).collect();
        writeln!(s, "{}", row.join(" ")).unwrap();
    }
    s
}

pub fn parse_metric(text: &str) -> Result<FiniteMetric> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next("metric header")?;
    arity(ln, &head, &[1], "metric header")?;
    let n: usize = num(ln, head[0], "point count")?;
    let toks = lines.rest();
    let expected = n * n.saturating_sub(1) / 2;
    if toks.len() != expected {
        let at = toks.last().map_or(ln, |t| t.0);
        return Err(Error::parse(at, format!("expected {expected} distances, got {}", toks.len())));
    }
    let upper = toks.iter().map(|&(l, t)| num(l, t, "distance")).collect::<Result<Vec<f64>>>()?;
    FiniteMetric::new(n, upper).map_err(reloc(ln))
}

fn push_hst(s: &mut String, t: &HstTree) {
    writeln!(s, "{} {}", t.node_count(), t.point_count()).unwrap();
    for (id, v) in t.nodes().iter().enumerate() {
        let parent = v.parent.map_or(-1, |p| p as i64);
        let point = v.point.map_or(-1, |p| p as i64);
        writeln!(s, "{id} {parent} {} {point}", v.diameter).unwrap();
    }
}

/// `nodes leaves`, then `id parent diameter leaf_point` per node with `-1`
/// for a missing parent or point.
pub fn write_hst(t: &HstTree) -> String {
    let mut s = String::from("# ribe hst v1\n");
    push_hst(&mut s, t);
    s
}

fn take_hst(lines: &mut Lines) -> Result<HstTree> {
    let (ln, head) = lines.next("tree header")?;
    arity(ln, &head, &[2], "tree header")?;
    let count: usize = num(ln, head[0], "node count")?;
    let leaves: usize = num(ln, head[1], "leaf count")?;
    let mut nodes: Vec<HstNode> = Vec::with_capacity(count);
    for expected in 0..count {
        let (ln, t) = lines.next("tree node")?;
        arity(ln, &t, &[4], "tree node")?;
        let id: usize = num(ln, t[0], "node id")?;
        if id != expected {
            return Err(Error::parse(ln, format!("expected node {expected}, got {id}")));
        }
        let parent: i64 = num(ln, t[1], "parent")?;
        let diameter: f64 = num(ln, t[2], "diameter")?;
        let point: i64 = num(ln, t[3], "leaf point")?;
        let as_opt = |v: i64, what: &str| -> Result<Option<usize>> {
            match v {
                -1 => Ok(None),
                v if v >= 0 => Ok(Some(v as usize)),
                _ => Err(Error::parse(ln, format!("invalid {what} {v}"))),
            }
        };
        let parent = as_opt(parent, "parent")?;
        if parent.is_some_and(|p| p >= count) {
            return Err(Error::parse(ln, format!("parent {} out of range", parent.unwrap())));
        }
        nodes.push(HstNode {
            parent,
            diameter,
            children: Vec::new(),
            point: as_opt(point, "leaf point")?,
        });
    }
    for id in 0..count {
        if let Some(p) = nodes[id].parent {
            nodes[p].children.push(id);
        }
    }
    let tree = HstTree::from_nodes(nodes).map_err(reloc(ln))?;
    if tree.point_count() != leaves {
        return Err(Error::parse(ln, format!("header declares {leaves} leaves, tree has {}", tree.point_count())));
    }
    Ok(tree)
}

pub fn parse_hst(text: &str) -> Result<HstTree> {
    let mut lines = Lines::new(text);
    let t = take_hst(&mut lines)?;
    lines.finish()?;
    Ok(t)
}

/// A skeleton as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFile {
    pub epsilon: f64,
    pub seed: u64,
    pub certified_distortion: f64,
    pub tree: HstTree,
    pub subset: Vec<usize>,
}

impl From<&SkeletonResult> for SkeletonFile {
    fn from(s: &SkeletonResult) -> Self {
        SkeletonFile {
            epsilon: s.epsilon,
            seed: s.seed,
            certified_distortion: s.certified_distortion,
            tree: s.tree.clone(),
            subset: s.subset.clone(),
        }
    }
}

fn push_skeleton(s: &mut String, sk: &SkeletonFile) {
    writeln!(s, "{} {} {}", sk.epsilon, sk.seed, sk.certified_distortion).unwrap();
    push_hst(s, &sk.tree);
    let ids: Vec<String> = sk.subset.iter().map(usize::to_string).collect();
    writeln!(s, "S: {}", ids.join(" ")).unwrap();
}

/// `epsilon seed certified_distortion`, the tree, then `S: ids`.
pub fn write_skeleton(sk: &SkeletonFile) -> String {
    let mut s = String::from("# ribe skeleton v1\n");
    push_skeleton(&mut s, sk);
    s
}

fn take_skeleton(lines: &mut Lines) -> Result<SkeletonFile> {
    let (ln, head) = lines.next("skeleton header")?;
    arity(ln, &head, &[3], "skeleton header")?;
    let epsilon = num(ln, head[0], "epsilon")?;
    let seed = num(ln, head[1], "seed")?;
    let certified_distortion = num(ln, head[2], "distortion")?;
    let tree = take_hst(lines)?;
    let (ln, t) = lines.next("subset line")?;
    if t[0] != "S:" {
        return Err(Error::parse(ln, "expected 'S:' line"));
    }
    let subset = t[1..].iter().map(|x| num(ln, x, "point id")).collect::<Result<Vec<usize>>>()?;
    Ok(SkeletonFile {
        epsilon,
        seed,
        certified_distortion,
        tree,
        subset,
    })
}

pub fn parse_skeleton(text: &str) -> Result<SkeletonFile> {
    let mut lines = Lines::new(text);
    let sk = take_skeleton(&mut lines)?;
    lines.finish()?;
    Ok(sk)
}

/// `RIBE-ORACLE v1 n epsilon seed D`, then per level a line `level k forced`
/// followed by the skeleton of that level. Tree points are the level's
/// remaining points in increasing order.
pub fn write_oracle(o: &OracleStructure) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{ORACLE_MAGIC} {ORACLE_VERSION} {} {} {} {}",
        o.len(),
        o.epsilon(),
        o.seed(),
        o.distortion()
    )
    .unwrap();
    for (k, level) in o.levels().iter().enumerate() {
        writeln!(s, "level {k} {}", level.forced as u8).unwrap();
        push_skeleton(
            &mut s,
            &SkeletonFile {
                epsilon: o.epsilon(),
                seed: level.seed,
                certified_distortion: o.distortion(),
                tree: level.tree.clone(),
                subset: level.subset.clone(),
            },
        );
    }
    s
}

pub fn parse_oracle(text: &str) -> Result<OracleStructure> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next("oracle header")?;
    arity(ln, &head, &[6], "oracle header")?;
    if head[0] != ORACLE_MAGIC || head[1] != ORACLE_VERSION {
        return Err(Error::parse(ln, format!("not a {ORACLE_MAGIC} {ORACLE_VERSION} file")));
    }
    let n: usize = num(ln, head[2], "point count")?;
    let epsilon: f64 = num(ln, head[3], "epsilon")?;
    let seed: u64 = num(ln, head[4], "seed")?;
    let d: f64 = num(ln, head[5], "distortion")?;
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut levels = Vec::new();
    while let Some((ln, _)) = lines.peek() {
        let ln = *ln;
        let (_, t) = lines.next("level line")?;
        arity(ln, &t, &[3], "level line")?;
        if t[0] != "level" || num::<usize>(ln, t[1], "level")? != levels.len() {
            return Err(Error::parse(ln, format!("expected 'level {}'", levels.len())));
        }
        let forced = match t[2] {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(ln, format!("invalid forced flag '{other}'"))),
        };
        let sk = take_skeleton(&mut lines)?;
        let level = OracleLevel::new(remaining.clone(), sk.subset, sk.tree, sk.seed, forced).map_err(reloc(ln))?;
        remaining.retain(|x| level.subset.binary_search(x).is_err());
        levels.push(level);
    }
    let o = OracleStructure::from_levels(n, epsilon, seed, levels).map_err(reloc(ln))?;
    if o.distortion() != d {
        return Err(Error::parse(ln, format!("distortion {d} does not match epsilon {epsilon}")));
    }
    Ok(o)
}

/// `m`, then `m` rows of transition probabilities, then the start row.
pub fn write_chain(c: &MarkovChain) -> String {
    let mut s = String::from("# ribe chain v1\n");
    writeln!(s, "{}", c.len()).unwrap();
    let join = |r: &[f64]| r.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    for row in c.dense() {
        writeln!(s, "{}", join(&row)).unwrap();
    }
    writeln!(s, "{}", join(c.start())).unwrap();
    s
}

pub fn parse_chain(text: &str) -> Result<MarkovChain> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next("chain header")?;
    arity(ln, &head, &[1], "chain header")?;
    let m: usize = num(ln, head[0], "state count")?;
    let mut row_of = |what: &str| -> Result<Vec<f64>> {
        let (ln, t) = lines.next(what)?;
        arity(ln, &t, &[m], what)?;
        t.iter().map(|x| num(ln, x, "probability")).collect()
    };
    let matrix = (0..m).map(|_| row_of("transition row")).collect::<Result<Vec<_>>>()?;
    let start = row_of("start row")?;
    lines.finish()?;
    MarkovChain::from_dense(&matrix, start).map_err(reloc(ln))
}

/// `n d`, then `2^n` rows of `d` values in sign-pattern order.
pub fn write_cube_function(f: &CubeFunction) -> String {
    let mut s = String::from("# ribe cube v1\n");
    writeln!(s, "{} {}", f.dim(), f.codim()).unwrap();
    for row in f.values().chunks(f.codim()) {
        writeln!(s, "{}", row.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")).unwrap();
    }
    s
}

pub fn parse_cube_function(text: &str) -> Result<CubeFunction> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next("cube header")?;
    arity(ln, &head, &[2], "cube header")?;
    let n: usize = num(ln, head[0], "dimension")?;
    let d: usize = num(ln, head[1], "codomain dimension")?;
    if n > crate::metric::MAX_CUBE_DIM {
        return Err(Error::parse(ln, format!("dimension {n} too large")));
    }
    let mut values = Vec::with_capacity(d << n);
    for _ in 0..1usize << n {
        let (ln, t) = lines.next("cube value")?;
        arity(ln, &t, &[d], "cube value")?;
        for x in t {
            values.push(num(ln, x, "value")?);
        }
    }
    lines.finish()?;
    CubeFunction::new(n, d, values).map_err(reloc(ln))
}
