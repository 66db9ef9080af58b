use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use freefold::graphs::Graph;
use freefold::morphisms::{analyze_endomorphism, fold_trace, StageDoc, TerminalClass};
use freefold::subgroups::{Index, StallingsGraph};
use freefold::whitehead::is_partial_free_basis;
use freefold::words::{are_conjugate, Endomorphism, NielsenKind, Word};
use freefold::ExactLengths;
use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{run, Command, QueryResult};

/// Result of a command before output routing.
pub(crate) struct Outcome {
    pub text: String,
    pub code: i32,
    pub verdict: Value,
    pub trace: Value,
}

impl Outcome {
    fn text(text: String, code: i32) -> Self {
        Outcome { text, code, verdict: Value::Null, trace: Value::Null }
    }
}

/// Endomorphism verdicts as printed and recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub injective: bool,
    pub surjective: bool,
    pub automorphism: bool,
}

type CmdResult = Result<Outcome, String>;

fn code(b: bool) -> i32 {
    if b {
        0
    } else {
        1
    }
}

/// Parse words with a common rank: `--rank` if given, else the highest
/// generator used.
fn parse_words(texts: &[String], rank: Option<usize>) -> Result<(Vec<Word>, usize), String> {
    let inferred: Vec<Word> = texts.iter().map(|t| Word::parse_infer(t).map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    let needed = inferred.iter().map(Word::rank).max().unwrap_or(1);
    let rank = rank.unwrap_or(needed);
    if rank == 0 {
        return Err("rank must be at least 1".into());
    }
    if rank < needed {
        return Err(format!("words use generator {needed}, beyond rank {rank}"));
    }
    let words = inferred.iter().map(|w| w.with_rank(rank).map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    Ok((words, rank))
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn ensure_dir(dir: &str) -> Result<&Path, String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {dir}: {e}"))?;
    Ok(Path::new(dir))
}

pub(crate) fn execute(command: &Command) -> CmdResult {
    match command {
        Command::Reduce { word } => {
            let w = Word::parse_infer(word).map_err(|e| e.to_string())?;
            Ok(Outcome::text(format!("{w}\n"), 0))
        }
        Command::Conj { first, second, rank } => {
            let (ws, _) = parse_words(&[first.clone(), second.clone()], *rank)?;
            let yes = are_conjugate(&ws[0], &ws[1]).map_err(|e| e.to_string())?;
            Ok(Outcome::text(format!("{yes}\n"), code(yes)))
        }
        Command::Primitive { word, rank, dot_dir, .. } => partial_basis(std::slice::from_ref(word), *rank, dot_dir),
        Command::PartialBasis { words, conjugacy, rank, dot_dir, .. } => {
            let all: Vec<String> = words.iter().chain(conjugacy).cloned().collect();
            if all.is_empty() {
                return Err("no words given".into());
            }
            partial_basis(&all, *rank, dot_dir)
        }
        Command::Endo { images, check, .. } => endo(images, *check),
        Command::Subgroup { words, rank, basis, index, contains, dot, json } => {
            subgroup(words, *rank, *basis, *index, contains, dot.as_deref(), *json)
        }
        Command::Fold { images, dot_dir, .. } => fold(images, dot_dir.as_deref()),
        Command::Systole { graph, lengths } => systole(graph, lengths.as_deref()),
        Command::RandomAuto { rank, steps, seed } => random_auto(*rank, *steps, *seed),
        Command::Replay { file } => replay(file),
        Command::Batch { file } => batch(file),
    }
}

fn partial_basis(texts: &[String], rank: Option<usize>, dot_dir: &Option<String>) -> CmdResult {
    let (words, rank) = parse_words(texts, rank)?;
    let (verdict, trace) = is_partial_free_basis(&words, rank).map_err(|e| e.to_string())?;
    if let Some(dir) = dot_dir {
        let dir = ensure_dir(dir)?;
        for step in &trace.steps {
            let (g, _) = Graph::from_doc(&step.graph_snapshot).map_err(|e| e.to_string())?;
            write_file(&dir.join(format!("split_{:02}.dot", step.iteration)), &g.to_dot())?;
        }
    }
    let mut text = format!("{verdict}\n");
    for step in &trace.steps {
        let _ = writeln!(
            text,
            "split {}: vertex {} direction {}: {} -> {}",
            step.iteration, step.vertex, step.cut_direction, step.weight_sequence_before, step.weight_sequence_after
        );
    }
    Ok(Outcome {
        text,
        code: code(verdict),
        verdict: json!(verdict),
        trace: serde_json::to_value(&trace).expect("serializable"),
    })
}

fn terminal_text(t: &TerminalClass) -> String {
    match t {
        TerminalClass::NotCoveringInfiniteIndex => "not a covering (infinite index)".into(),
        TerminalClass::Covering(d) => format!("covering of degree {d}"),
        TerminalClass::Homeomorphism => "homeomorphism".into(),
    }
}

fn endo(images: &str, check: bool) -> CmdResult {
    let e = Endomorphism::parse(images).map_err(|e| e.to_string())?;
    let analysis = analyze_endomorphism(&e).map_err(|e| e.to_string())?;
    let class = analysis.class;
    let verdict = Verdict { injective: class.injective, surjective: class.surjective, automorphism: class.automorphism };
    let mut text = format!(
        "injective={} surjective={} automorphism={}\n",
        verdict.injective, verdict.surjective, verdict.automorphism
    );
    if check {
        let image = StallingsGraph::build(e.images(), e.rank()).map_err(|e| e.to_string())?;
        let injective = image.subgroup_rank() == e.rank();
        let surjective = image.index() == Index::Finite(1);
        if injective != verdict.injective || surjective != verdict.surjective {
            return Err(format!(
                "check failed: image subgroup has rank {} and index {:?}",
                image.subgroup_rank(),
                image.index()
            ));
        }
        text.push_str("check: consistent with the image subgroup\n");
    }
    let trace = json!({
        "images": e.to_string(),
        "pi1_trivial": class.pi1_trivial,
        "folds": analysis.factorization.as_ref().map(fold_trace),
        "terminal": analysis.terminal,
    });
    Ok(Outcome {
        text,
        code: code(verdict.automorphism),
        verdict: serde_json::to_value(verdict).expect("serializable"),
        trace,
    })
}

fn subgroup(
    texts: &[String],
    rank: Option<usize>,
    basis: bool,
    index: bool,
    contains: &[String],
    dot: Option<&str>,
    as_json: bool,
) -> CmdResult {
    let all: Vec<String> = texts.iter().chain(contains).cloned().collect();
    let (words, rank) = parse_words(&all, rank)?;
    let (gens, queries) = words.split_at(texts.len());
    let g = StallingsGraph::build(gens, rank).map_err(|e| e.to_string())?;
    if let Some(path) = dot {
        write_file(Path::new(path), &g.to_dot())?;
    }
    let everything = !basis && !index && contains.is_empty();
    let mut text = String::new();
    if as_json {
        text.push_str(&serde_json::to_string_pretty(&g.to_doc()).expect("serializable"));
        text.push('\n');
    }
    if everything || basis || index {
        let _ = writeln!(text, "rank: {}", g.subgroup_rank());
    }
    if everything || index {
        match g.index() {
            Index::Finite(d) => {
                let _ = writeln!(text, "index: {d}");
            }
            Index::Infinite => text.push_str("index: infinite\n"),
        }
    }
    if everything || basis {
        let b: Vec<String> = g.basis().iter().map(|w| w.to_string()).collect();
        let _ = writeln!(text, "basis: {}", b.join(","));
    }
    let mut all_in = true;
    for (q, raw) in queries.iter().zip(contains) {
        let yes = g.contains(q).map_err(|e| e.to_string())?;
        all_in &= yes;
        let _ = writeln!(text, "contains {raw}: {yes}");
    }
    Ok(Outcome::text(text, code(all_in)))
}

fn fold(images: &str, dot_dir: Option<&str>) -> CmdResult {
    let e = Endomorphism::parse(images).map_err(|e| e.to_string())?;
    let analysis = analyze_endomorphism(&e).map_err(|e| e.to_string())?;
    let Some(fact) = &analysis.factorization else {
        let trace = json!({ "images": e.to_string(), "pi1_trivial": true, "steps": [] });
        return Ok(Outcome {
            text: "the map is trivial on pi_1: no folds\n".into(),
            code: 0,
            verdict: json!({ "folds": 0, "pi1_trivial": true }),
            trace,
        });
    };
    let steps = fold_trace(fact);
    if let Some(dir) = dot_dir {
        let dir = ensure_dir(dir)?;
        for i in 0..=fact.steps.len() {
            let dot = StageDoc::to_dot(fact.map_at(i), &format!("stage{i}"));
            write_file(&dir.join(format!("stage_{i:02}.dot")), &dot)?;
        }
    }
    let terminal = analysis.terminal.expect("set with the factorization");
    let mut text = format!("folds: {}\n", steps.len());
    for s in &steps {
        let _ = writeln!(
            text,
            "{}. {} fold at vertex {}: {} (length {})",
            s.step,
            serde_json::to_value(s.fold_class).expect("serializable").as_str().unwrap_or_default(),
            s.vertex,
            s.segment,
            s.segment_len
        );
    }
    let _ = writeln!(text, "bigon: {}", fact.has_bigon());
    let _ = writeln!(text, "terminal: {}", terminal_text(&terminal));
    let verdict = json!({
        "folds": steps.len(),
        "bigon": fact.has_bigon(),
        "locally_injective": fact.terminal().is_locally_injective(),
        "terminal": terminal,
    });
    let trace = json!({
        "images": e.to_string(),
        "pi1_trivial": false,
        "initial": StageDoc::of(&fact.initial),
        "steps": steps,
    });
    Ok(Outcome { text, code: 0, verdict, trace })
}

fn parse_lengths(text: &str, names: &[String]) -> Result<Vec<Rational64>, String> {
    let mut given: BTreeMap<usize, Rational64> = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        let key = key.trim();
        let k = names
            .iter()
            .position(|n| n == key)
            .or_else(|| key.strip_prefix('e').and_then(|s| s.parse().ok()))
            .or_else(|| key.parse().ok())
            .filter(|&k| k < names.len())
            .ok_or_else(|| format!("unknown edge {key:?}"))?;
        let v = Rational64::from_str(value.trim()).map_err(|_| format!("bad length {value:?}"))?;
        if given.insert(k, v).is_some() {
            return Err(format!("edge {key:?} given twice"));
        }
    }
    (0..names.len()).map(|k| given.get(&k).copied().ok_or_else(|| format!("no length for edge {}", names[k]))).collect()
}

fn systole(path: &str, lengths: Option<&str>) -> CmdResult {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    let (graph, names) = Graph::from_json(&text).map_err(|e| e.to_string())?;
    let structure = match lengths {
        None => ExactLengths::barycenter(graph),
        Some(spec) => ExactLengths::new(graph, parse_lengths(spec, &names.edges)?),
    }
    .map_err(|e| e.to_string())?;
    let (value, witness) = structure.systole();
    let edges: Vec<String> = witness
        .iter()
        .map(|&e| if e % 2 == 0 { names.edges[e / 2].clone() } else { format!("{}^-1", names.edges[e / 2]) })
        .collect();
    Ok(Outcome::text(format!("systole: {value}\nwitness: {}\n", edges.join(" ")), 0))
}

fn random_auto(rank: usize, steps: usize, seed: u64) -> CmdResult {
    if rank < 2 {
        return Err("rank must be at least 2".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut auto = Endomorphism::identity(rank);
    for _ in 0..steps {
        let kind = *NielsenKind::ALL.choose(&mut rng).expect("nonempty");
        let i = rng.gen_range(1..=rank);
        let j = (i + rng.gen_range(0..rank - 1)) % rank + 1;
        let step = Endomorphism::nielsen(kind, i, j, rank).map_err(|e| e.to_string())?;
        auto = step.compose(&auto).map_err(|e| e.to_string())?;
    }
    Ok(Outcome::text(format!("{auto}\n"), 0))
}

fn replay(path: &str) -> CmdResult {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    let record: QueryResult = serde_json::from_str(&text).map_err(|e| format!("not a query record: {e}"))?;
    if record.trace.is_none() {
        return Err("record has no trace".into());
    }
    if matches!(record.command.as_str(), "replay" | "batch") {
        return Err(format!("cannot replay {}", record.command));
    }
    let mut args = vec!["freefold".to_string(), record.command.clone()];
    args.extend(record.args.iter().cloned());
    args.push("--trace".into());
    let rerun = run(args);
    if rerun.code == 2 {
        return Err(format!("recorded query no longer parses: {}", rerun.stderr.trim()));
    }
    let fresh: QueryResult = serde_json::from_str(&rerun.stdout).map_err(|e| format!("rerun produced no record: {e}"))?;
    let same = fresh.verdict == record.verdict && fresh.trace == record.trace;
    let text = if same {
        format!("replay ok: verdict {}\n", record.verdict)
    } else {
        format!("replay mismatch: recorded {}, now {}\n", record.verdict, fresh.verdict)
    };
    Ok(Outcome::text(text, code(same)))
}

#[derive(Serialize)]
struct BatchLine {
    line: usize,
    query: String,
    code: i32,
    stdout: String,
    stderr: String,
}

fn batch(path: &str) -> CmdResult {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    let queries: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let results: Vec<BatchLine> = queries
        .par_iter()
        .map(|&(line, query)| {
            let tokens: Vec<String> = query.split_whitespace().map(String::from).collect();
            let out = if tokens.first().map(String::as_str) == Some("batch") {
                crate::CmdOutput { stderr: "error: nested batch\n".into(), code: 2, ..Default::default() }
            } else {
                run(std::iter::once("freefold".to_string()).chain(tokens))
            };
            BatchLine {
                line,
                query: query.to_string(),
                code: out.code,
                stdout: out.stdout.trim_end().to_string(),
                stderr: out.stderr.trim_end().to_string(),
            }
        })
        .collect();
    let mut out = String::new();
    for r in &results {
        out.push_str(&serde_json::to_string(r).expect("serializable"));
        out.push('\n');
    }
    Ok(Outcome::text(out, 0))
}
