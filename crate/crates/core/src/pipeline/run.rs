use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::thread;

use serde::{Deserialize, Serialize};

use super::config::{EvalSpace, FlMethod, RunConfig};
use super::corpus::{corpus_ids, load_version, CorpusVersion};
use super::PipelineError;
use crate::augment::{generate_until_balanced, resample, undersample, AugmentedDataset, GenerateConfig, Scenario};
use crate::context::{
    contribution_select, default_target_dim, fuse, fusion_size, initial_fusion, ContextDump, FusedContext,
    StatisticalContext,
};
use crate::diffusion::{encode_bits, make_schedule, train, DpmOptions, NoiseSchedule, Spacing, TrainConfig};
use crate::dlfl::{train_mlpfl, virtual_suspiciousness, MlpFlConfig};
use crate::eval::{MetricsReport, VersionError, VersionResult};
use crate::minilang::{execute, ExecConfig, ExecutionRecord, Stmt};
use crate::nn::{AdamWConfig, Class, Denoiser, DenoiserConfig};
use crate::rng::substream;
use crate::slicing::{suite_fault_context, FaultSemanticContext};
use crate::spectra::{build_spectra, rank_statements, score, tally, CoverageDataset, RankedList};

/// Everything computed for one version before scoring.
#[derive(Debug, Clone)]
pub struct VersionAnalysis {
    pub id: String,
    pub faults: Vec<Stmt>,
    pub records: Vec<ExecutionRecord>,
    pub dataset: CoverageDataset,
    pub semantic: FaultSemanticContext,
    pub statistical: StatisticalContext,
    pub fused: FusedContext,
}

impl VersionAnalysis {
    pub fn dump(&self) -> ContextDump {
        ContextDump::new(&self.semantic.stm_sc, &self.statistical, &self.fused)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionOutcome {
    pub id: String,
    pub faults: Vec<Stmt>,
    pub context: ContextDump,
    pub synthetic: BTreeMap<Scenario, usize>,
    /// Final epoch loss of the diffusion model, when one was trained.
    pub final_loss: Option<f64>,
    pub rankings: BTreeMap<Scenario, BTreeMap<FlMethod, RankedList>>,
    #[serde(skip)]
    pub datasets: BTreeMap<Scenario, AugmentedDataset>,
}

impl VersionOutcome {
    pub fn fault_rank(&self, scenario: Scenario, method: FlMethod) -> Option<usize> {
        let list = self.rankings.get(&scenario)?.get(&method)?;
        self.faults.iter().filter_map(|&f| list.rank_of(f)).min()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: MetricsReport,
    pub outcomes: Vec<VersionOutcome>,
}

impl RunOutput {
    /// Fraction of versions whose first fault rank under `scenario` is
    /// strictly better than under origin.
    pub fn improved_share(&self, scenario: Scenario, method: FlMethod) -> f64 {
        if self.outcomes.is_empty() {
            return 0.0;
        }
        let better = self
            .outcomes
            .iter()
            .filter(|o| match (o.fault_rank(scenario, method), o.fault_rank(Scenario::Origin, method)) {
                (Some(a), Some(b)) => a < b,
                _ => false,
            })
            .count();
        better as f64 / self.outcomes.len() as f64
    }
}

pub fn schedule(cfg: &RunConfig) -> Result<NoiseSchedule, PipelineError> {
    Ok(make_schedule(cfg.steps, cfg.beta_1, cfg.beta_t)?)
}

pub fn train_config(cfg: &RunConfig) -> TrainConfig {
    TrainConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        p_uncond: cfg.p_uncond,
        optimizer: AdamWConfig { lr: cfg.lr, ..AdamWConfig::default() },
        ..TrainConfig::default()
    }
}

pub fn generate_config(cfg: &RunConfig) -> GenerateConfig {
    GenerateConfig {
        gamma: cfg.gamma,
        solver: DpmOptions { steps: cfg.sample_steps, order: cfg.solver_order, spacing: Spacing::LogSnr },
        reject_empty: cfg.reject_empty,
        ..GenerateConfig::default()
    }
}

/// Runs the suite, slices failing runs, and builds the fused context.
pub fn analyze_version(version: &CorpusVersion, cfg: &RunConfig) -> Result<VersionAnalysis, PipelineError> {
    let program = version.program()?;
    let mut records = Vec::with_capacity(version.tests.len());
    for t in &version.tests {
        records.push(execute(&program, &t.inputs, &t.oracle, ExecConfig::default())?);
    }
    let ids: Vec<String> = version.tests.iter().map(|t| t.id.clone()).collect();
    let dataset = build_spectra(&records, &ids)?;
    let semantic = suite_fault_context(&records, &ids, cfg.max_failing)?;
    let statistical = contribution_select(&dataset.matrix, &dataset.stmt_ids, cfg.m, dataset.cols())?;
    let target = cfg.k.unwrap_or_else(|| {
        let k_f = fusion_size(cfg.alpha, semantic.stm_sc.len());
        let initial = initial_fusion(&semantic.stm_sc, &statistical.stm_pca, k_f);
        default_target_dim(semantic.stm_sc.len(), initial.len())
    });
    let fused = fuse(&dataset.matrix, &semantic.stm_sc, &statistical.stm_pca, cfg.alpha, target, true)?;
    Ok(VersionAnalysis {
        id: version.id.clone(),
        faults: version.record.faults.clone(),
        records,
        dataset,
        semantic,
        statistical,
        fused,
    })
}

/// Trains the class-conditional denoiser on the fused context rows.
pub fn train_model(
    analysis: &VersionAnalysis,
    cfg: &RunConfig,
    sched: &NoiseSchedule,
) -> Result<(Denoiser, f64), PipelineError> {
    let data: Vec<(Vec<f64>, Class)> = analysis
        .fused
        .matrix
        .iter()
        .zip(&analysis.dataset.errors)
        .map(|(row, &e)| (encode_bits(row), if e == 1 { Class::Fail } else { Class::Pass }))
        .collect();
    let width = analysis.fused.stm_fusion.len();
    let mut model = Denoiser::new(DenoiserConfig::new(width), &mut substream(cfg.seed, "init", &analysis.id))?;
    let report = train(&mut model, &data, sched, &train_config(cfg), &mut substream(cfg.seed, "training", &analysis.id))?;
    Ok((model, report.epoch_losses.last().copied().unwrap_or(f64::NAN)))
}

/// Applies every configured scenario. The model is trained only when pcd
/// has rows to add.
pub fn augment_version(
    analysis: &VersionAnalysis,
    cfg: &RunConfig,
) -> Result<(BTreeMap<Scenario, AugmentedDataset>, Option<f64>), PipelineError> {
    let ds = &analysis.dataset;
    let mut out = BTreeMap::new();
    let mut final_loss = None;
    for &sc in &cfg.scenarios {
        let aug = match sc {
            Scenario::Origin => AugmentedDataset::origin(ds),
            Scenario::Undersample => undersample(ds, &mut substream(cfg.seed, "undersample", &analysis.id))?,
            Scenario::Resample => resample(ds, &mut substream(cfg.seed, "resample", &analysis.id))?,
            Scenario::Pcd if ds.passing() <= ds.failing() => {
                AugmentedDataset { scenario: Scenario::Pcd, dataset: ds.clone() }
            }
            Scenario::Pcd => {
                let sched = schedule(cfg)?;
                let (model, loss) = train_model(analysis, cfg, &sched)?;
                final_loss = Some(loss);
                let mut rng = substream(cfg.seed, "sampling", &analysis.id);
                generate_until_balanced(&model, &sched, ds, &analysis.fused, &generate_config(cfg), &mut rng)?
            }
        };
        out.insert(sc, aug);
    }
    Ok((out, final_loss))
}

/// Scores one dataset with one method. In context space the fused
/// statements are ranked first and every other statement follows in index
/// order, so faults outside the context still receive a rank.
pub fn localize(
    dataset: &CoverageDataset,
    fused: &[Stmt],
    space: EvalSpace,
    method: FlMethod,
    cfg: &RunConfig,
    rng_key: &str,
) -> Result<RankedList, PipelineError> {
    let view = match space {
        EvalSpace::Full => dataset.clone(),
        EvalSpace::Context => dataset.project(fused),
    };
    let scores = match method.formula() {
        Some(f) => score(f, &tally(&view)),
        None => {
            let mlp = MlpFlConfig { steps: cfg.mlp_steps, ..MlpFlConfig::default() };
            let (model, _) = train_mlpfl(&view, &mlp, &mut substream(cfg.seed, "mlpfl", rng_key))?;
            virtual_suspiciousness(&model)
        }
    };
    let mut list = rank_statements(&view.stmt_ids, &scores)?;
    if space == EvalSpace::Context {
        let mut next = list.len();
        for &s in &dataset.stmt_ids {
            if !fused.contains(&s) {
                next += 1;
                list.entries.push(crate::spectra::RankedEntry { stmt: s, score: f64::MIN, rank: next });
            }
        }
    }
    Ok(list)
}

/// Full per-version pipeline: analysis, augmentation, localization.
pub fn run_version(version: &CorpusVersion, cfg: &RunConfig) -> Result<VersionOutcome, PipelineError> {
    let analysis = analyze_version(version, cfg)?;
    let (datasets, final_loss) = augment_version(&analysis, cfg)?;
    let mut rankings = BTreeMap::new();
    for (&sc, aug) in &datasets {
        let mut per = BTreeMap::new();
        for &m in &cfg.methods {
            let key = format!("{}/{}", analysis.id, sc.name());
            per.insert(m, localize(&aug.dataset, &analysis.fused.stm_fusion, cfg.eval_space, m, cfg, &key)?);
        }
        rankings.insert(sc, per);
    }
    Ok(VersionOutcome {
        id: analysis.id.clone(),
        faults: analysis.faults.clone(),
        context: analysis.dump(),
        synthetic: datasets.iter().map(|(&s, a)| (s, a.synthetic_count())).collect(),
        final_loss,
        rankings,
        datasets,
    })
}

/// Runs `versions` on a worker pool; results come back in input order.
pub fn run_versions(
    versions: &[CorpusVersion],
    cfg: &RunConfig,
    workers: usize,
) -> Vec<Result<VersionOutcome, PipelineError>> {
    let workers = workers.clamp(1, versions.len().max(1));
    let chunk = versions.len().div_ceil(workers).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = versions
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|v| run_version(v, cfg)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Aggregates outcomes; failed versions are listed as errors and excluded.
pub fn aggregate(
    results: Vec<(String, Result<VersionOutcome, PipelineError>)>,
    cfg: &RunConfig,
) -> Result<RunOutput, PipelineError> {
    let mut outcomes = Vec::new();
    let mut errors = Vec::new();
    for (id, r) in results {
        match r {
            Ok(o) => outcomes.push(o),
            Err(e) => errors.push(VersionError { version: id, error: e.to_string() }),
        }
    }
    let mut grouped: BTreeMap<(String, String), Vec<VersionResult>> = BTreeMap::new();
    for o in &outcomes {
        for (sc, per) in &o.rankings {
            for (m, list) in per {
                grouped.entry((sc.name().to_string(), m.name().to_string())).or_default().push(VersionResult {
                    version: o.id.clone(),
                    ranking: list.clone(),
                    faults: o.faults.clone(),
                });
            }
        }
    }
    let report = MetricsReport::build(&grouped, Scenario::Origin.name(), cfg.tie_policy, errors)?;
    Ok(RunOutput { report, outcomes })
}

fn write(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(|e| PipelineError::io(path, e))
}

/// Writes `report.json`, `report.txt` and `rimp.csv` into `dir`.
pub fn emit_report(report: &MetricsReport, dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    write(&dir.join("report.json"), report.to_json().as_bytes())?;
    write(&dir.join("report.txt"), report.to_table().as_bytes())?;
    write(&dir.join("rimp.csv"), report.rimp_csv().as_bytes())
}

/// Per-version artifacts: context dump, rankings and augmented datasets.
pub fn emit_version(outcome: &VersionOutcome, dir: &Path) -> Result<(), PipelineError> {
    let vdir = dir.join("versions").join(&outcome.id);
    fs::create_dir_all(&vdir).map_err(|e| PipelineError::io(&vdir, e))?;
    write(&vdir.join("context.json"), outcome.context.to_json().as_bytes())?;
    write(&vdir.join("outcome.json"), serde_json::to_string_pretty(outcome)?.as_bytes())?;
    for (sc, aug) in &outcome.datasets {
        let mut buf = Vec::new();
        aug.dataset.write_csv(&mut buf, true)?;
        write(&vdir.join(format!("dataset-{}.csv", sc.name())), &buf)?;
    }
    Ok(())
}

/// Loads the corpus, runs every (selected) version and writes all reports.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    cfg.validate()?;
    let mut ids = corpus_ids(&cfg.corpus)?;
    if let Some(keep) = &cfg.versions {
        ids.retain(|id| keep.contains(id));
    }
    let mut loaded = Vec::new();
    let mut results = Vec::new();
    for id in &ids {
        match load_version(&cfg.corpus, id) {
            Ok(v) => loaded.push(v),
            Err(e) => results.push((id.clone(), Err(e))),
        }
    }
    let workers = thread::available_parallelism().map_or(1, |n| n.get());
    let ran = run_versions(&loaded, cfg, workers);
    results.extend(loaded.iter().map(|v| v.id.clone()).zip(ran));
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let out = aggregate(results, cfg)?;
    emit_report(&out.report, &cfg.output)?;
    for o in &out.outcomes {
        emit_version(o, &cfg.output)?;
    }
    Ok(out)
}
