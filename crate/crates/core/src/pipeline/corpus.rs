//! Corpus generation and loading.
//!
//! A corpus directory holds `corpus.json` (version ids in order) and one
//! directory per version with `program.ml` (faulty), `original.ml`,
//! `mutation.json` and `tests.json`.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::templates::{golden_mutation, Template, GOLDEN_NAME, GOLDEN_SOURCE, GOLDEN_TESTS};
use super::PipelineError;
use crate::minilang::{
    candidate_mutations, execute, parse, seed_fault, ExecConfig, Inputs, Mutation, Oracle, Program, Stmt,
};
use crate::rng::substream;

/// Tests drawn per template before deduplication.
pub const TESTS_PER_TEMPLATE: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template `{name}` does not parse: {message}")]
    Parse { name: String, message: String },
    #[error("template `{name}` fails on its own test `{test}`")]
    OriginalFails { name: String, test: String },
    #[error("template `{name}` has no mutation giving both passing and failing tests")]
    UnsatisfiableOracle { name: String },
    #[error("template `{name}` declares no range for input `{input}`")]
    MissingRange { name: String, input: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub inputs: Inputs,
    pub oracle: Oracle,
}

/// Contents of `mutation.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationRecord {
    pub template: String,
    pub mutation: Mutation,
    /// Ground-truth faulty statements.
    pub faults: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusVersion {
    pub id: String,
    pub source: String,
    pub original: String,
    pub record: MutationRecord,
    pub tests: Vec<TestCase>,
}

impl CorpusVersion {
    pub fn program(&self) -> Result<Program, PipelineError> {
        parse(&self.source).map_err(|e| PipelineError::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Manifest {
    seed: u64,
    versions: Vec<String>,
}

fn oracle_tests(
    name: &str,
    program: &Program,
    inputs: Vec<(String, Inputs)>,
) -> Result<Vec<TestCase>, TemplateError> {
    inputs
        .into_iter()
        .map(|(id, inputs)| {
            let rec = execute(program, &inputs, &Oracle::new(), ExecConfig::default())
                .map_err(|_| TemplateError::MissingRange { name: name.into(), input: id.clone() })?;
            if rec.fault.is_some() {
                return Err(TemplateError::OriginalFails { name: name.into(), test: id });
            }
            Ok(TestCase { id, inputs, oracle: rec.output_map() })
        })
        .collect()
}

/// `(failing, passing)` counts and whether `target` runs in a failing test.
fn judge(program: &Program, tests: &[TestCase], target: Stmt) -> (usize, usize, bool) {
    let (mut fail, mut pass, mut reached) = (0, 0, false);
    for t in tests {
        let Ok(r) = execute(program, &t.inputs, &t.oracle, ExecConfig::default()) else { continue };
        if r.is_failing() {
            fail += 1;
            reached |= r.coverage[target.col()] == 1;
        } else {
            pass += 1;
        }
    }
    (fail, pass, reached)
}

/// Builds one single-fault version: random tests with oracles from the
/// original program, then the first shuffled mutation that leaves at least
/// one failing test, more passing than failing tests, and is executed by a
/// failing test.
pub fn build_version<R: Rng + ?Sized>(
    id: &str,
    template: &Template,
    rng: &mut R,
) -> Result<CorpusVersion, TemplateError> {
    let name = &template.name;
    let original = parse(&template.source)
        .map_err(|e| TemplateError::Parse { name: name.clone(), message: e.to_string() })?;
    for input in &original.inputs {
        if !template.inputs.iter().any(|r| &r.name == input) {
            return Err(TemplateError::MissingRange { name: name.clone(), input: input.clone() });
        }
    }
    let mut drawn: Vec<Inputs> = Vec::new();
    for _ in 0..TESTS_PER_TEMPLATE {
        let inputs: Inputs =
            template.inputs.iter().map(|r| (r.name.clone(), rng.random_range(r.lo..=r.hi))).collect();
        if !drawn.contains(&inputs) {
            drawn.push(inputs);
        }
    }
    let named = drawn.into_iter().enumerate().map(|(i, v)| (format!("t{}", i + 1), v)).collect();
    let tests = oracle_tests(name, &original, named)?;

    let mut candidates = candidate_mutations(&original);
    candidates.shuffle(rng);
    for mutation in candidates {
        let Ok(faulty) = seed_fault(&original, &mutation) else { continue };
        let (fail, pass, reached) = judge(&faulty, &tests, mutation.target);
        if fail >= 1 && pass > fail && reached {
            return Ok(CorpusVersion {
                id: id.to_string(),
                source: faulty.to_source(),
                original: original.to_source(),
                record: MutationRecord { template: name.clone(), faults: vec![mutation.target], mutation },
                tests,
            });
        }
    }
    Err(TemplateError::UnsatisfiableOracle { name: name.clone() })
}

/// The hand-built sixteen-statement version with four passing and two
/// failing tests.
pub fn golden_version() -> CorpusVersion {
    let original = parse(GOLDEN_SOURCE).expect("golden program parses");
    let inputs = GOLDEN_TESTS
        .iter()
        .map(|&(id, x, y)| (id.to_string(), Inputs::from([("x".to_string(), x), ("y".to_string(), y)])))
        .collect();
    let tests = oracle_tests(GOLDEN_NAME, &original, inputs).expect("golden tests run");
    let mutation = golden_mutation();
    let faulty = seed_fault(&original, &mutation).expect("golden mutation applies");
    CorpusVersion {
        id: format!("00-{GOLDEN_NAME}"),
        source: faulty.to_source(),
        original: original.to_source(),
        record: MutationRecord { template: GOLDEN_NAME.into(), faults: vec![mutation.target], mutation },
        tests,
    }
}

/// Golden version first, then one version per template, ids `NN-name`.
pub fn generate_corpus(templates: &[Template], seed: u64) -> Result<Vec<CorpusVersion>, TemplateError> {
    let mut out = vec![golden_version()];
    for (i, t) in templates.iter().enumerate() {
        let id = format!("{:02}-{}", i + 1, t.name);
        out.push(build_version(&id, t, &mut substream(seed, "corpus", &t.name))?);
    }
    Ok(out)
}

fn write(path: &Path, contents: &str) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(|e| PipelineError::io(path, e))
}

pub fn write_corpus(dir: &Path, versions: &[CorpusVersion], seed: u64) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    for v in versions {
        let vdir = dir.join(&v.id);
        fs::create_dir_all(&vdir).map_err(|e| PipelineError::io(&vdir, e))?;
        write(&vdir.join("program.ml"), &v.source)?;
        write(&vdir.join("original.ml"), &v.original)?;
        write(&vdir.join("mutation.json"), &serde_json::to_string_pretty(&v.record)?)?;
        write(&vdir.join("tests.json"), &serde_json::to_string_pretty(&v.tests)?)?;
    }
    let manifest = Manifest { seed, versions: versions.iter().map(|v| v.id.clone()).collect() };
    write(&dir.join("corpus.json"), &serde_json::to_string_pretty(&manifest)?)
}

/// Generates and writes a corpus; returns the version ids.
pub fn corpus_gen(templates: &[Template], seed: u64, dir: &Path) -> Result<Vec<String>, PipelineError> {
    let versions = generate_corpus(templates, seed)?;
    write_corpus(dir, &versions, seed)?;
    Ok(versions.into_iter().map(|v| v.id).collect())
}

fn read(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))
}

pub fn load_version(dir: &Path, id: &str) -> Result<CorpusVersion, PipelineError> {
    let vdir = dir.join(id);
    Ok(CorpusVersion {
        id: id.to_string(),
        source: read(&vdir.join("program.ml"))?,
        original: read(&vdir.join("original.ml"))?,
        record: serde_json::from_str(&read(&vdir.join("mutation.json"))?)?,
        tests: serde_json::from_str(&read(&vdir.join("tests.json"))?)?,
    })
}

/// Version ids listed in the corpus manifest.
pub fn corpus_ids(dir: &Path) -> Result<Vec<String>, PipelineError> {
    let m: Manifest = serde_json::from_str(&read(&dir.join("corpus.json"))?)?;
    Ok(m.versions)
}
