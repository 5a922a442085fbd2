//! Seeded batches of runs, their reports and exported files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Context;
use evodyn::analysis::{ConvergenceReport, Thresholds};
use evodyn::export::{uniform_times, write_run_csv};
use evodyn::game::faces;
use evodyn::replicator::verify_rescale_lemma;
use evodyn::sampling::{random_interior_point, random_perturbation, rep77_start, uniform_simplex};
use evodyn::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig};

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub run_index: usize,
    pub passed: bool,
    /// Non-unique continuation; excluded from pass/fail.
    pub flagged: bool,
    pub verdict: String,
    pub report: Value,
}

/// A file produced by one run, written under the output directory.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub record: RunRecord,
    pub artifacts: Vec<Artifact>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub runs: usize,
    pub passed: usize,
    pub failed: usize,
    pub flagged: usize,
    pub verdicts: BTreeMap<String, usize>,
}

#[derive(Clone, Debug)]
pub struct Batch {
    pub config: ExperimentConfig,
    pub runs: Vec<RunOutput>,
}

impl Batch {
    pub fn records(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().map(|r| &r.record)
    }

    pub fn summary(&self) -> Summary {
        let mut verdicts = BTreeMap::new();
        for r in self.records() {
            *verdicts.entry(r.verdict.clone()).or_insert(0) += 1;
        }
        let flagged = self.records().filter(|r| r.flagged).count();
        let passed = self.records().filter(|r| !r.flagged && r.passed).count();
        Summary {
            experiment: self.config.experiment.name().to_string(),
            runs: self.runs.len(),
            passed,
            failed: self.runs.len() - flagged - passed,
            flagged,
            verdicts,
        }
    }

    /// True iff every non-flagged run met its target.
    pub fn success(&self) -> bool {
        self.records().all(|r| r.flagged || r.passed)
    }

    /// `config.json`, `reports.jsonl`, `summary.json` and per-run files.
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("config.json"), serde_json::to_vec_pretty(&self.config)?)?;
        let mut lines = String::new();
        for r in self.records() {
            lines.push_str(&serde_json::to_string(r)?);
            lines.push('\n');
        }
        fs::write(dir.join("reports.jsonl"), lines)?;
        fs::write(dir.join("summary.json"), serde_json::to_vec_pretty(&self.summary())?)?;
        for a in self.runs.iter().flat_map(|r| &r.artifacts) {
            fs::write(dir.join(&a.name), &a.contents)?;
        }
        Ok(())
    }
}

impl Summary {
    pub fn table(&self) -> String {
        let width = self.verdicts.keys().map(String::len).max().unwrap_or(0).max(7);
        let mut s = format!("experiment {}: {} runs\n", self.experiment, self.runs);
        s.push_str(&format!("{:<width$}  runs\n", "verdict"));
        for (v, n) in &self.verdicts {
            s.push_str(&format!("{v:<width$}  {n:>4}\n"));
        }
        s.push_str(&format!("passed {}, failed {}, flagged {}\n", self.passed, self.failed, self.flagged));
        s
    }
}

/// Thread pool sized by `EVODYN_THREADS` (rayon's default when unset).
pub fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("EVODYN_THREADS") {
        let n: usize = v.parse().with_context(|| format!("EVODYN_THREADS={v:?} is not a thread count"))?;
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

/// Run `k` draws from its own stream, so results do not depend on the
/// thread count or on scheduling.
fn run_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

struct Setup {
    game: SymmetricGame,
    targets: Targets,
    expected: Verdict,
    /// Inward RPS: runs are expected to reach the equilibrium instead.
    expect_rest_point: bool,
}

fn setup(cfg: &ExperimentConfig) -> anyhow::Result<Option<Setup>> {
    let th = cfg.thresholds();
    let eps = || cfg.eps.clone().context("missing eps");
    let st = |game: SymmetricGame, spec: RpsSpec, face: StrategySet, eliminate: StrategySet, th: Thresholds| {
        let tri = shapley_triangle(&spec, face, &game)?;
        anyhow::Ok(Setup {
            game,
            targets: Targets { triangle: Some(tri), cycle_face: None, eliminate, thresholds: th },
            expected: Verdict::ConvergedToSt { face },
            expect_rest_point: false,
        })
    };
    let cycle = |game: SymmetricGame, face: StrategySet, eliminate: StrategySet, th: Thresholds| Setup {
        game,
        targets: Targets { triangle: None, cycle_face: Some(face), eliminate, thresholds: th },
        expected: Verdict::ConvergedToCycle { face },
        expect_rest_point: false,
    };
    Ok(Some(match cfg.experiment {
        Experiment::Br66 => st(build_game_66(), RpsSpec::Epsilon(rat(1, 5)), faces::g66_second(), faces::first(), th)?,
        Experiment::Br77 => {
            let e = eps()?;
            st(build_game_77(&e)?, RpsSpec::Epsilon(e), faces::g77_second(), faces::first(), th)?
        }
        Experiment::RpsBr => {
            let spec = cfg.rps_spec()?;
            let game = build_rps(&spec)?;
            let all = StrategySet::all(3);
            if is_outward_cycling(&spec) {
                st(game, spec, all, StrategySet::EMPTY, th)?
            } else {
                Setup {
                    game,
                    targets: Targets { triangle: None, cycle_face: None, eliminate: StrategySet::EMPTY, thresholds: th },
                    expected: Verdict::Inconclusive { reason: "reached a rest point".into() },
                    expect_rest_point: true,
                }
            }
        }
        Experiment::Rep77 => {
            let eliminate = faces::first().union(StrategySet::singleton(faces::G77_LINK));
            cycle(build_game_77(&eps()?)?, faces::g77_second(), eliminate, th)
        }
        Experiment::RpsRep => cycle(build_rps(&cfg.rps_spec()?)?, StrategySet::all(3), StrategySet::EMPTY, th),
        Experiment::RescaleCheck | Experiment::Perturb66 => return Ok(None),
    }))
}

fn rat(p: i64, q: i64) -> Rational {
    evodyn::rational::rat(p, q)
}

fn file(k: usize, ext: &str) -> String {
    format!("run-{:04}.{ext}", k + 1)
}

fn csv_artifact(g: &SymmetricGame, run: Run<'_>, end: f64, cfg: &ExperimentConfig, k: usize) -> Option<Artifact> {
    let mut buf = Vec::new();
    write_run_csv(&mut buf, g, run, &uniform_times(end, cfg.csv_samples)).ok()?;
    Some(Artifact { name: file(k, "csv"), contents: buf })
}

fn failed(k: usize, meta: Value, err: impl std::fmt::Display) -> RunOutput {
    let reason = err.to_string();
    RunOutput {
        record: RunRecord {
            run_index: k,
            passed: false,
            flagged: false,
            verdict: "inconclusive".into(),
            report: json!({"verdict": {"kind": "inconclusive", "reason": reason}, "metadata": meta}),
        },
        artifacts: Vec::new(),
    }
}

fn record(k: usize, report: ConvergenceReport, passed: bool, verdict: String, extra: Value) -> RunRecord {
    let mut value = serde_json::to_value(&report).expect("reports serialize");
    if let (Value::Object(m), Value::Object(e)) = (&mut value, extra) {
        m.extend(e);
    }
    RunRecord { run_index: k, passed, flagged: report.flagged, verdict, report: value }
}

fn flow_run(cfg: &ExperimentConfig, s: &Setup, k: usize) -> RunOutput {
    let mut rng = run_rng(cfg.seed, k);
    let g = &s.game;
    let n = g.n();
    let horizon = cfg.horizon();
    let best_reply = matches!(cfg.experiment, Experiment::Br66 | Experiment::Br77 | Experiment::RpsBr);
    let x0 = match cfg.experiment {
        Experiment::Br77 | Experiment::Rep77 => rep77_start(&mut rng),
        _ => random_interior_point(&mut rng, n),
    };
    let meta = json!({
        "seed": cfg.seed,
        "run_index": k,
        "x0": x0.to_float().as_slice(),
        "config": cfg,
    });
    if best_reply {
        let sol = match integrate_br(g, &x0, horizon, &BrOptions::default()) {
            Ok(sol) => sol,
            Err(e) => return failed(k, meta, e),
        };
        let report = classify_run(g, Run::Br(&sol), &s.targets, meta);
        let (passed, verdict) = if s.expect_rest_point {
            let hit = matches!(sol.termination, Termination::Equilibrium { .. });
            (hit, if hit { "equilibrium".to_string() } else { report.verdict.label() })
        } else {
            (report.verdict == s.expected, report.verdict.label())
        };
        let extra = json!({"termination": sol.termination.name(), "events": sol.events.len()});
        let mut artifacts = vec![Artifact {
            name: file(k, "json"),
            contents: serde_json::to_vec(&sol.to_json()).expect("solutions serialize"),
        }];
        artifacts.extend(csv_artifact(g, Run::Br(&sol), sol.end_time(), cfg, k));
        RunOutput { record: record(k, report, passed, verdict, extra), artifacts }
    } else {
        let opts = RepOptions { rtol: cfg.rtol, atol: cfg.atol, ..Default::default() };
        let traj = match integrate_rep(g, &x0.to_float(), horizon, &opts) {
            Ok(t) => t,
            Err(e) => return failed(k, meta, e),
        };
        let report = classify_run(g, Run::Rep(&traj), &s.targets, meta);
        let passed = report.verdict == s.expected;
        let verdict = report.verdict.label();
        let extra = json!({"final_log_state": traj.final_log_state()});
        let artifacts = csv_artifact(g, Run::Rep(&traj), horizon, cfg, k).into_iter().collect();
        RunOutput { record: record(k, report, passed, verdict, extra), artifacts }
    }
}

fn rescale_run(cfg: &ExperimentConfig, k: usize) -> RunOutput {
    let mut rng = run_rng(cfg.seed, k);
    let x0 = FloatPoint::from_floats(uniform_simplex(&mut rng, 7)).expect("positive weights");
    let meta = json!({"seed": cfg.seed, "run_index": k, "x0": x0.as_slice(), "config": cfg});
    let run = || -> anyhow::Result<_> {
        let g = build_game_77(cfg.eps.as_ref().context("missing eps")?)?;
        let opts = RepOptions { rtol: cfg.rtol, atol: cfg.atol, ..Default::default() };
        Ok(verify_rescale_lemma(&g, &x0, cfg.horizon(), &opts)?)
    };
    match run() {
        Ok(r) => {
            let ok = |v: Option<f64>| v.is_some_and(|d| d < cfg.rescale_tol);
            let passed = ok(r.bar) && ok(r.hat);
            RunOutput {
                record: RunRecord {
                    run_index: k,
                    passed,
                    flagged: false,
                    verdict: if passed { "rescale_ok" } else { "rescale_violated" }.into(),
                    report: json!({"rescale": r, "tolerance": cfg.rescale_tol, "metadata": meta}),
                },
                artifacts: Vec::new(),
            }
        }
        Err(e) => failed(k, meta, e),
    }
}

fn perturb_run(cfg: &ExperimentConfig, k: usize) -> RunOutput {
    let mut rng = run_rng(cfg.seed, k);
    let meta = json!({"seed": cfg.seed, "run_index": k, "config": cfg});
    let run = |rng: &mut ChaCha8Rng| -> anyhow::Result<RunOutput> {
        let delta = cfg.delta.as_ref().context("missing delta")?;
        let g = build_game_66().perturbed(&random_perturbation(rng, 6, delta))?;
        let nash = enumerate_nash(&g)?;
        let inside = |c: &EquilibriumCertificate| {
            c.support_x.is_subset(faces::first()) && c.support_y.is_subset(faces::first())
        };
        let mut passed = nash.is_unique() && inside(&nash.equilibria[0]);
        let mut verdict = if passed { "unique_equilibrium_in({1,2,3})".to_string() } else { "not_unique_or_outside".into() };
        let mut br_verdicts = Vec::new();
        if cfg.runs_per_game > 0 {
            let face = faces::g66_second();
            let spec = RpsSpec::from_matrix(&g.restrict(face)?)?;
            let tri = shapley_triangle(&spec, face, &g)?;
            let targets = Targets { triangle: Some(tri), cycle_face: None, eliminate: faces::first(), thresholds: cfg.thresholds() };
            for _ in 0..cfg.runs_per_game {
                let x0 = random_interior_point(rng, 6);
                let v = match integrate_br(&g, &x0, cfg.horizon(), &BrOptions::default()) {
                    Ok(sol) => classify_run(&g, Run::Br(&sol), &targets, Value::Null).verdict,
                    Err(e) => Verdict::Inconclusive { reason: e.to_string() },
                };
                br_verdicts.push(v);
            }
            if br_verdicts.iter().any(|v| *v != (Verdict::ConvergedToSt { face })) {
                passed = false;
                verdict = "br_not_converged".into();
            }
        }
        Ok(RunOutput {
            record: RunRecord {
                run_index: k,
                passed,
                flagged: false,
                verdict,
                report: json!({"nash": nash.to_json(), "br_verdicts": br_verdicts, "metadata": meta}),
            },
            artifacts: vec![Artifact {
                name: format!("game-{:04}.json", k + 1),
                contents: serde_json::to_vec(&g.to_json())?,
            }],
        })
    };
    run(&mut rng).unwrap_or_else(|e| failed(k, meta.clone(), e))
}

/// Runs the batch described by `cfg` (resolved first) on `pool`; results
/// are ordered by run index.
pub fn run_batch(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> anyhow::Result<Batch> {
    let config = cfg.clone().resolve()?;
    // Reports carry the config; where they get written is not part of it.
    let cfg = ExperimentConfig { out_dir: None, ..config.clone() };
    let s = setup(&cfg)?;
    let runs = pool.install(|| {
        (0..cfg.count)
            .into_par_iter()
            .map(|k| match (&s, cfg.experiment) {
                (Some(s), _) => flow_run(&cfg, s, k),
                (None, Experiment::RescaleCheck) => rescale_run(&cfg, k),
                (None, _) => perturb_run(&cfg, k),
            })
            .collect()
    });
    Ok(Batch { config, runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool() -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap()
    }

    #[test]
    fn br66_batch_converges() {
        let mut cfg = ExperimentConfig::new(Experiment::Br66);
        cfg.count = 4;
        let batch = run_batch(&cfg, &pool()).unwrap();
        assert!(batch.success());
        let s = batch.summary();
        assert_eq!(s.verdicts["converged_to_ST({4,5,6})"], 4);
        assert!(s.table().contains("passed 4, failed 0, flagged 0"));
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let mut cfg = ExperimentConfig::new(Experiment::RpsBr);
        cfg.count = 5;
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a: Vec<String> = run_batch(&cfg, &one).unwrap().records().map(|r| r.report.to_string()).collect();
        let b: Vec<String> = run_batch(&cfg, &pool()).unwrap().records().map(|r| r.report.to_string()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn inward_rps_runs_expect_the_rest_point() {
        let mut cfg = ExperimentConfig::new(Experiment::RpsBr);
        cfg.alpha = Some(rat(1, 1));
        cfg.beta = Some(rat(3, 1));
        cfg.count = 3;
        let batch = run_batch(&cfg, &pool()).unwrap();
        assert!(batch.success());
        assert!(batch.records().all(|r| r.verdict == "equilibrium"));
    }

    #[test]
    fn short_runs_fail_their_target() {
        let mut cfg = ExperimentConfig::new(Experiment::Br66);
        cfg.count = 2;
        cfg.horizon = Some(1.0);
        let batch = run_batch(&cfg, &pool()).unwrap();
        assert!(!batch.success());
        assert_eq!(batch.summary().failed, 2);
    }
}
