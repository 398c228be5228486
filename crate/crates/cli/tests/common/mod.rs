#![allow(dead_code)]

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumopt_core::{CorpusRecord, Language};

const VERBS: &[&str] = &[
    "get", "set", "compute", "load", "build", "parse", "update", "find", "create", "handle", "resolve", "read",
    "write", "apply", "check", "init", "merge", "split", "format", "render", "scan", "flush", "open", "close",
];
const NOUNS: &[&str] = &[
    "Value", "Count", "Index", "Buffer", "Node", "Event", "Record", "Entry", "Item", "Key", "Name", "Path", "Size",
    "State", "Token", "Table", "Map", "List", "Queue", "Stream", "Header", "Body", "Frame", "Block", "Chunk", "Cache",
    "Limit", "Offset", "Range", "Score", "Weight", "Label",
];
const TYPES: &[&str] = &["int", "long", "double", "boolean", "String", "Object", "Node", "Buffer", "Event"];

/// Deterministic generator of verbose Java methods over a large, skewed
/// identifier vocabulary.
pub struct JavaGen {
    rng: ChaCha8Rng,
    names: Vec<String>,
}

impl JavaGen {
    pub fn new(seed: u64) -> Self {
        let mut names = Vec::new();
        for v in VERBS {
            for n in NOUNS {
                for k in 0..12 {
                    names.push(format!("{v}{n}{k}"));
                    names.push(format!("{}{}{k}", n.to_lowercase(), v));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        names.shuffle(&mut rng);
        JavaGen { rng: ChaCha8Rng::seed_from_u64(seed), names }
    }

    /// Skewed pick: a few names are common, most are rare.
    fn name(&mut self) -> String {
        let u: f64 = self.rng.gen();
        let i = ((self.names.len() as f64) * u * u) as usize;
        self.names[i.min(self.names.len() - 1)].clone()
    }

    fn ty(&mut self) -> &'static str {
        TYPES[self.rng.gen_range(0..TYPES.len())]
    }

    fn literal(&mut self) -> String {
        match self.rng.gen_range(0..3) {
            0 => self.rng.gen_range(0..5000).to_string(),
            1 => format!("\"{} {}\"", self.name(), self.rng.gen_range(0..900)),
            _ => self.name(),
        }
    }

    fn statement(&mut self, vars: &mut Vec<String>) -> String {
        let pick = |g: &mut Self, vars: &[String]| vars[g.rng.gen_range(0..vars.len())].clone();
        match self.rng.gen_range(0..6) {
            0 => {
                let v = self.name();
                let s = format!("{} {v} = {}({}, {});", self.ty(), self.name(), pick(self, vars), self.literal());
                vars.push(v);
                s
            }
            1 => {
                let v = pick(self, vars);
                format!("if ({v} > {}) {{ {v} = {v} - {}; }}", self.rng.gen_range(0..100), self.literal())
            }
            2 => format!(
                "for (int i = 0; i < {}; i++) {{ {} += {}[i]; }}",
                pick(self, vars),
                pick(self, vars),
                self.name()
            ),
            3 => format!("{}.{}({}, {});", pick(self, vars), self.name(), pick(self, vars), self.literal()),
            4 => format!("this.{} = {}.{}();", self.name(), pick(self, vars), self.name()),
            _ => format!("{} = {} * {} + {};", pick(self, vars), pick(self, vars), self.literal(), self.literal()),
        }
    }

    pub fn method(&mut self) -> String {
        let mut params = Vec::new();
        for _ in 0..self.rng.gen_range(1..4) {
            params.push(format!("{} {}", self.ty(), self.name()));
        }
        let mut vars: Vec<String> = params.iter().map(|p| p.split(' ').nth(1).unwrap().to_string()).collect();
        let modifiers = ["public", "public static", "private", "protected final"][self.rng.gen_range(0..4)];
        let throws = if self.rng.gen_bool(0.3) { " throws IOException" } else { "" };
        let mut body = Vec::new();
        // a mix of short accessor-like methods and long verbose ones
        let len = if self.rng.gen_bool(0.3) { self.rng.gen_range(0..3) } else { self.rng.gen_range(5..12) };
        for _ in 0..len {
            body.push(format!("    {}", self.statement(&mut vars)));
        }
        body.push(format!("    return {};", vars[self.rng.gen_range(0..vars.len())]));
        format!("{modifiers} {} {}({}){throws} {{\n{}\n}}", self.ty(), self.name(), params.join(", "), body.join("\n"))
    }

    pub fn summary(&mut self) -> String {
        format!(
            "{} the {} of the {} {}.",
            VERBS[self.rng.gen_range(0..VERBS.len())],
            self.name(),
            self.name(),
            self.name()
        )
    }

    pub fn record(&mut self, id: usize) -> CorpusRecord {
        let code = self.method();
        let summary = self.summary();
        let score = self.rng.gen_range(0..=100) as f64 / 100.0;
        CorpusRecord::new(format!("j{id}"), Language::Java, code, summary).with_side_score(score)
    }

    pub fn corpus(&mut self, n: usize) -> Vec<CorpusRecord> {
        (0..n).map(|i| self.record(i)).collect()
    }
}

/// Java-flavored token soup where `public`, `static` and `return` dominate.
pub fn keyword_soup(seed: u64, n: usize) -> Vec<CorpusRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let filler = ["int", "x", "y", "(", ")", "{", "}", ";", "=", "+", "void", "final", "foo", "bar", "baz", "1", "2"];
    (0..n)
        .map(|i| {
            let mut toks: Vec<&str> = Vec::new();
            for _ in 0..rng.gen_range(4..8) {
                toks.extend(["public", "static", "return"]);
            }
            for _ in 0..rng.gen_range(3..9) {
                toks.push(filler[rng.gen_range(0..filler.len())]);
            }
            toks.shuffle(&mut rng);
            CorpusRecord::new(format!("s{i}"), Language::Java, toks.join(" "), "soup")
        })
        .collect()
}

/// A deterministic "system output": the reference with some words dropped
/// or replaced.
pub fn perturb(summary: &str, seed: u64, noise: f64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<&str> = summary.split_whitespace().collect();
    let mut out = Vec::new();
    for w in words {
        let r: f64 = rng.gen();
        if r < noise / 2.0 {
            continue;
        } else if r < noise {
            out.push("thing");
        } else {
            out.push(w);
        }
    }
    if out.is_empty() {
        out.push("thing");
    }
    out.join(" ")
}

pub fn write_lines(path: &Path, lines: impl IntoIterator<Item = String>) {
    let mut s = String::new();
    for l in lines {
        s.push_str(&l);
        s.push('\n');
    }
    std::fs::write(path, s).unwrap();
}
