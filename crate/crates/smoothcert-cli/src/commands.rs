use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Serialize;

use smoothcert::bitgraph::{matrix_l0_of, read_jsonl, write_jsonl, BitVector, Perturbation};
use smoothcert::classifier::FnClassifier;
use smoothcert::datagen::{generate_sbm, generate_topology_dataset, DatasetSpec};
use smoothcert::dpcert::{dp_radius, expectation_dp_check};
use smoothcert::error::{Error, Result};
use smoothcert::gcn::{train as train_gcn, train_node, GcnModel, TrainConfig};
use smoothcert::noise::epsilon_from_beta;
use smoothcert::npcert::oracle::{
    oracle_end_to_end, oracle_lower_bound_ya, oracle_region_probs, oracle_upper_bound_yb,
};
use smoothcert::npcert::{
    certified_radius, lower_bound_ya, lower_bound_ya_exact, region_table, region_table_exact,
    region_dump, upper_bound_yb, upper_bound_yb_exact,
};
use smoothcert::pipeline::{
    certified_accuracy, certify_graph_dataset, certify_node, curves_csv, results_csv,
    CertifyParams, SweepKind,
};

use crate::{CertifyArgs, GenDataArgs, NodeDemoArgs, OracleCheckArgs, SweepArgs, TrainArgs};

fn load_config_file(path: &Option<PathBuf>) -> Result<serde_json::Value> {
    match path {
        Some(p) => Ok(serde_json::from_str(&fs::read_to_string(p)?)?),
        None => Ok(serde_json::Value::Object(Default::default())),
    }
}

/// Pulls one key out of the config file; explicit flags always win.
fn resolve<T: serde::de::DeserializeOwned>(
    flag: Option<T>,
    file: &serde_json::Value,
    key: &str,
) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        None | Some(serde_json::Value::Null) => Ok(None),
        Some(v) => Ok(Some(serde_json::from_value(v.clone()).map_err(|e| {
            Error::Config(format!("config key {key}: {e}"))
        })?)),
    }
}

fn write_config(out_dir: &Path, value: &impl Serialize) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(
        out_dir.join("config.json"),
        serde_json::to_string_pretty(value)? + "\n",
    )?;
    Ok(())
}

// ---------------------------------------------------------------- gen-data

#[derive(Serialize)]
struct GenDataConfig {
    seed: u64,
    per_family: usize,
    train_per_family: usize,
}

pub fn gen_data(args: GenDataArgs) -> Result<()> {
    let file = load_config_file(&args.common.config)?;
    let cfg = GenDataConfig {
        seed: resolve(args.seed, &file, "seed")?.unwrap_or(0),
        per_family: resolve(args.per_family, &file, "per_family")?.unwrap_or(60),
        train_per_family: resolve(args.train_per_family, &file, "train_per_family")?.unwrap_or(40),
    };
    let spec = DatasetSpec {
        per_family: cfg.per_family,
        train_per_family: cfg.train_per_family,
        seed: cfg.seed,
    };
    let (train, test) = generate_topology_dataset(&spec)?;
    write_config(&args.common.out, &cfg)?;
    write_jsonl(&args.common.out.join("train.jsonl"), &train)?;
    write_jsonl(&args.common.out.join("test.jsonl"), &test)?;
    println!(
        "wrote {} training and {} test graphs to {}",
        train.len(),
        test.len(),
        args.common.out.display()
    );
    Ok(())
}

// ------------------------------------------------------------------- train

#[derive(Serialize)]
struct TrainCliConfig {
    data: PathBuf,
    epochs: usize,
    learning_rate: f64,
    seed: u64,
    noise_beta: Option<f64>,
    hidden: usize,
    d_max: usize,
}

pub fn train(args: TrainArgs) -> Result<()> {
    let file = load_config_file(&args.common.config)?;
    let data = resolve(args.data, &file, "data")?
        .ok_or_else(|| Error::Config("train needs --data".into()))?;
    let defaults = TrainConfig::default();
    let cfg = TrainCliConfig {
        data,
        epochs: resolve(args.epochs, &file, "epochs")?.unwrap_or(defaults.epochs),
        learning_rate: resolve(args.lr, &file, "lr")?.unwrap_or(defaults.learning_rate),
        seed: resolve(args.seed, &file, "seed")?.unwrap_or(defaults.seed),
        noise_beta: resolve(args.noise_beta, &file, "noise_beta")?,
        hidden: resolve(args.hidden, &file, "hidden")?.unwrap_or(defaults.hidden),
        d_max: resolve(args.d_max, &file, "d_max")?.unwrap_or(defaults.d_max),
    };
    let dataset = read_jsonl(&cfg.data)?;
    let train_cfg = TrainConfig {
        epochs: cfg.epochs,
        learning_rate: cfg.learning_rate,
        seed: cfg.seed,
        noise_beta: cfg.noise_beta,
        hidden: cfg.hidden,
        d_max: cfg.d_max,
    };
    let run = train_gcn(&dataset, &train_cfg)?;
    write_config(&args.common.out, &cfg)?;
    run.model.save(&args.common.out.join("model.json"))?;
    let clean_accuracy = {
        let correct = dataset
            .iter()
            .filter(|g| {
                smoothcert::gcn::forward_graph(&run.model, g)
                    .map(|s| argmax(&s) == g.label)
                    .unwrap_or(false)
            })
            .count();
        correct as f64 / dataset.len() as f64
    };
    println!(
        "trained on {} graphs: final loss {:.6}, training accuracy {:.4}",
        dataset.len(),
        run.epoch_losses.last().unwrap_or(&f64::NAN),
        clean_accuracy
    );
    Ok(())
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

// ----------------------------------------------------------------- certify

#[derive(Serialize)]
struct CertifyCliConfig {
    model: PathBuf,
    data: PathBuf,
    beta: f64,
    alpha: f64,
    samples: u64,
    seed: u64,
    l_max: Option<u64>,
    paranoid: bool,
    two_phase: bool,
    jobs: usize,
}

pub fn certify(args: CertifyArgs) -> Result<()> {
    let file = load_config_file(&args.common.config)?;
    let cfg = CertifyCliConfig {
        model: resolve(args.model, &file, "model")?
            .ok_or_else(|| Error::Config("certify needs --model".into()))?,
        data: resolve(args.data, &file, "data")?
            .ok_or_else(|| Error::Config("certify needs --data".into()))?,
        beta: resolve(args.beta, &file, "beta")?.unwrap_or(0.9),
        alpha: resolve(args.alpha, &file, "alpha")?.unwrap_or(0.01),
        samples: resolve(args.samples, &file, "samples")?.unwrap_or(1000),
        seed: resolve(args.seed, &file, "seed")?.unwrap_or(0),
        l_max: resolve(args.l_max, &file, "l_max")?,
        paranoid: args.paranoid
            || resolve(None::<bool>, &file, "paranoid")?.unwrap_or(false),
        two_phase: args.two_phase
            || resolve(None::<bool>, &file, "two_phase")?.unwrap_or(false),
        jobs: resolve(args.jobs, &file, "jobs")?.unwrap_or(0),
    };
    let model = GcnModel::load(&cfg.model)?;
    let dataset = read_jsonl(&cfg.data)?;
    if dataset.is_empty() {
        return Err(Error::Config("dataset is empty".into()));
    }
    let mut params = CertifyParams::new(cfg.beta, cfg.alpha, cfg.samples, cfg.seed)?;
    params.l_max = cfg.l_max;
    params.paranoid = cfg.paranoid;
    params.two_phase = cfg.two_phase;
    let certs = certify_graph_dataset(&model, &dataset, &params, cfg.jobs)?;
    write_config(&args.common.out, &cfg)?;
    fs::write(args.common.out.join("results.csv"), results_csv(&certs))?;
    let abstained = certs.iter().filter(|c| c.abstained()).count();
    let max_radius = certs.iter().map(|c| c.np_radius()).max().unwrap_or(0);
    println!(
        "certified {} instances: CA(0) = {:.4}, abstentions {}, max radius {}",
        certs.len(),
        certified_accuracy(&certs, 0),
        abstained,
        max_radius
    );
    Ok(())
}

// ------------------------------------------------------------------- sweep

#[derive(Serialize)]
struct SweepCliConfig {
    kind: String,
    model: PathBuf,
    data: PathBuf,
    values_beta: Option<Vec<f64>>,
    values_alpha: Option<Vec<f64>>,
    values_samples: Option<Vec<u64>>,
    beta: f64,
    alpha: f64,
    samples: u64,
    seed: u64,
    r_max: u64,
    jobs: usize,
}

#[derive(Serialize)]
struct SweepTimings {
    kind: String,
    values: Vec<SweepValueTiming>,
}

#[derive(Serialize)]
struct SweepValueTiming {
    sweep_value: String,
    instances: usize,
    wall_ms: f64,
    mean_instance_ms: f64,
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    let file = load_config_file(&args.common.config)?;
    let kind_name = resolve(args.kind, &file, "kind")?
        .ok_or_else(|| Error::Config("sweep needs --kind beta|alpha|samples".into()))?;
    let cfg = SweepCliConfig {
        kind: kind_name.clone(),
        model: resolve(args.model, &file, "model")?
            .ok_or_else(|| Error::Config("sweep needs --model".into()))?,
        data: resolve(args.data, &file, "data")?
            .ok_or_else(|| Error::Config("sweep needs --data".into()))?,
        values_beta: resolve(args.betas, &file, "betas")?,
        values_alpha: resolve(args.alphas, &file, "alphas")?,
        values_samples: resolve(args.samples_list, &file, "samples_list")?,
        beta: resolve(args.beta, &file, "beta")?.unwrap_or(0.9),
        alpha: resolve(args.alpha, &file, "alpha")?.unwrap_or(0.01),
        samples: resolve(args.samples, &file, "samples")?.unwrap_or(1000),
        seed: resolve(args.seed, &file, "seed")?.unwrap_or(0),
        r_max: resolve(args.r_max, &file, "r_max")?.unwrap_or(16),
        jobs: resolve(args.jobs, &file, "jobs")?.unwrap_or(0),
    };
    let kind = match kind_name.as_str() {
        "beta" => SweepKind::Beta(cfg.values_beta.clone().unwrap_or(vec![0.7, 0.9, 0.99])),
        "alpha" => SweepKind::Alpha(
            cfg.values_alpha.clone().unwrap_or(vec![0.01, 0.001, 0.0001]),
        ),
        "samples" => SweepKind::Samples(
            cfg.values_samples.clone().unwrap_or(vec![1000, 5000, 10000]),
        ),
        other => {
            return Err(Error::Config(format!(
                "unknown sweep kind {other:?}; expected beta, alpha, or samples"
            )))
        }
    };
    let model = GcnModel::load(&cfg.model)?;
    let dataset = read_jsonl(&cfg.data)?;
    let params = CertifyParams::new(cfg.beta, cfg.alpha, cfg.samples, cfg.seed)?;
    let result = smoothcert::pipeline::run_sweep(
        &model, &dataset, &kind, &params, cfg.r_max, cfg.jobs,
    )?;
    write_config(&args.common.out, &cfg)?;
    fs::write(args.common.out.join("curves.csv"), curves_csv(&result))?;
    let timings = SweepTimings {
        kind: result.kind.to_string(),
        values: result
            .curves
            .iter()
            .map(|c| SweepValueTiming {
                sweep_value: c.sweep_value.clone(),
                instances: c.certificates.len(),
                wall_ms: c.wall_ms,
                mean_instance_ms: c.wall_ms / c.certificates.len().max(1) as f64,
            })
            .collect(),
    };
    fs::write(
        args.common.out.join("timings.json"),
        serde_json::to_string_pretty(&timings)? + "\n",
    )?;
    for curve in &result.curves {
        let max_radius = curve
            .certificates
            .iter()
            .map(|c| c.np_radius())
            .max()
            .unwrap_or(0);
        println!(
            "{} = {}: CA(0) = {:.4}, max radius {}, {:.1} ms",
            result.kind,
            curve.sweep_value,
            curve.points[0].certified_accuracy,
            max_radius,
            curve.wall_ms
        );
    }
    Ok(())
}

// ------------------------------------------------------------ oracle-check

#[derive(Serialize)]
struct OracleReport {
    grid: OracleGrid,
    max_abs_error: f64,
    violations: Vec<String>,
}

#[derive(Serialize)]
struct OracleGrid {
    enumeration_bits: usize,
    region_weights: Vec<u64>,
    region_betas: Vec<f64>,
    placements_per_weight: usize,
    bound_budgets: Vec<f64>,
    backend_weights: Vec<u64>,
    e2e_bits: usize,
    e2e_classifiers: usize,
    e2e_betas: Vec<f64>,
    dominance_pa: Vec<f64>,
    dominance_betas: Vec<f64>,
}

pub fn oracle_check(args: OracleCheckArgs) -> Result<()> {
    let report = build_oracle_report(args.max_bits, args.e2e_classifiers)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(p) => {
            if let Some(dir) = p.parent() {
                if !dir.as_os_str().is_empty() {
                    fs::create_dir_all(dir)?;
                }
            }
            fs::write(p, &json)?;
        }
        None => print!("{json}"),
    }
    if report.violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Training(format!(
            "oracle suite found {} violations",
            report.violations.len()
        )))
    }
}

fn spread_mask(bits: usize, l: u64, stride: usize) -> BitVector {
    assert!(l as usize <= bits);
    let mut v = BitVector::zeros(bits);
    for k in 0..l as usize {
        // Linear probing keeps this total when stride and bits share a
        // factor and only part of the ring is reachable by k * stride.
        let mut pos = (k * stride) % bits;
        while v.get(pos) {
            pos = (pos + 1) % bits;
        }
        v.set(pos, true);
    }
    v
}

fn build_oracle_report(max_bits: usize, e2e_classifiers: usize) -> Result<OracleReport> {
    use num_rational::BigRational;
    use num_traits::One;

    let bits = max_bits.min(12);
    if bits < 9 {
        return Err(Error::InvalidParameter(
            "oracle check needs at least 9 enumeration bits".into(),
        ));
    }
    let mut violations = Vec::new();
    let mut max_abs_error = 0.0f64;

    // 1. Region calculus against brute-force enumeration, over weights,
    //    betas, perturbation placements, and base points.
    let region_betas = vec![0.6, 0.7, 0.9];
    let region_weights: Vec<u64> = (1..=8).collect();
    let bases = [BitVector::zeros(bits), spread_mask(bits, bits as u64 / 2, 5)];
    for &beta in &region_betas {
        for &l in &region_weights {
            let table = region_table_exact(l, beta)?;
            let placements = [
                {
                    let mut v = BitVector::zeros(bits);
                    for i in 0..l as usize {
                        v.set(i, true);
                    }
                    v
                },
                {
                    let mut v = BitVector::zeros(bits);
                    for i in 0..l as usize {
                        v.set(bits - 1 - i, true);
                    }
                    v
                },
                spread_mask(bits, l, 3),
            ];
            for (pi, delta) in placements.iter().enumerate() {
                for (xi, x) in bases.iter().enumerate() {
                    let probs = oracle_region_probs(x, &Perturbation::new(delta.clone()), beta)?;
                    if probs.len() != table.regions().len() {
                        violations.push(format!(
                            "region count mismatch at l={l} beta={beta} placement={pi} base={xi}"
                        ));
                        continue;
                    }
                    for (e, px, py) in table.regions() {
                        let oracle = &probs[e];
                        if &oracle.0 != px || &oracle.1 != py {
                            violations.push(format!(
                                "region mass mismatch at l={l} beta={beta} e={e} placement={pi} base={xi}"
                            ));
                        }
                    }
                }
            }
        }
    }

    // 2. Greedy bounds against the atom-level oracle.
    let bound_budgets = vec![0.51, 0.7, 0.9, 0.99, 1.0];
    for &beta in &region_betas {
        for &l in &[1u64, 2, 4, 8] {
            let table = region_table_exact(l, beta)?;
            let x = BitVector::zeros(bits);
            let delta = Perturbation::new(spread_mask(bits, l, 3));
            for &pa_f in &bound_budgets {
                let pa = BigRational::from_float(pa_f).expect("finite");
                let lo_region = lower_bound_ya_exact(&pa, &table);
                let lo_atom = oracle_lower_bound_ya(&x, &delta, beta, &pa)?;
                if lo_region != lo_atom {
                    violations.push(format!(
                        "lower bound mismatch at l={l} beta={beta} pa={pa_f}"
                    ));
                }
                let pb = BigRational::one() - &pa;
                let up_region = upper_bound_yb_exact(&pb, &table);
                let up_atom = oracle_upper_bound_yb(&x, &delta, beta, &pb)?;
                if up_region != up_atom {
                    violations.push(format!(
                        "upper bound mismatch at l={l} beta={beta} pb=1-{pa_f}"
                    ));
                }
            }
        }
    }

    // 3. Exact vs log-space backend deviation (reported, not a violation
    //    unless it exceeds the contract).
    let backend_weights = vec![1u64, 8, 16, 32, 64];
    for &l in &backend_weights {
        for &beta in &[0.7, 0.9, 0.99] {
            let exact = region_table(l, beta)?;
            let log = smoothcert::npcert::region_table_log(l, beta)?;
            for &pa in &[0.55, 0.9, 0.999] {
                let lo_e = lower_bound_ya(pa, &exact)?;
                let lo_l = lower_bound_ya(pa, &smoothcert::npcert::RegionTable::Log(log.clone()))?;
                let up_e = upper_bound_yb(1.0 - pa, &exact)?;
                let up_l =
                    upper_bound_yb(1.0 - pa, &smoothcert::npcert::RegionTable::Log(log.clone()))?;
                let dev = (lo_e - lo_l).abs().max((up_e - up_l).abs());
                max_abs_error = max_abs_error.max(dev);
                if dev > 1e-10 * lo_e.max(lo_l).max(up_e).max(up_l) + 1e-12 {
                    violations.push(format!(
                        "backend deviation {dev:.3e} at l={l} beta={beta} pa={pa}"
                    ));
                }
            }
        }
    }

    // 4. End-to-end soundness on random biased classifiers.
    use rand::{Rng, SeedableRng};
    let e2e_bits = bits.min(10);
    let e2e_betas = vec![0.7, 0.9];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    for trial in 0..e2e_classifiers {
        let bias = [0.6, 0.75, 0.88, 0.96][trial % 4];
        let classes = if trial % 5 == 0 { 4 } else { 2 };
        let labels: Vec<usize> = (0..1u64 << e2e_bits)
            .map(|_| {
                if rng.random::<f64>() < bias {
                    0
                } else {
                    1 + (rng.random::<u32>() as usize % (classes - 1))
                }
            })
            .collect();
        let f = FnClassifier::new(classes, move |b: &BitVector| {
            labels[b.ones().fold(0usize, |m, i| m | 1 << i)]
        });
        let x = BitVector::zeros(e2e_bits);
        for &beta in &e2e_betas {
            let report = oracle_end_to_end(&f, &x, beta, e2e_bits as u64)?;
            for v in &report.violations {
                violations.push(format!(
                    "end-to-end violation: classifier {trial} beta={beta} radius={} delta={:#x} weight={}",
                    report.radius, v.delta_mask, v.weight
                ));
            }
        }
    }

    // 5. Expectation form of the per-bit bound.
    let indicator_ratio = expectation_dp_check(
        &|b| {
            let s = b.get(0) as usize as f64;
            vec![s, 1.0 - s]
        },
        8,
        0.9,
    )?;
    if (indicator_ratio - 9.0).abs() > 1e-9 {
        violations.push(format!(
            "bit-indicator expectation ratio {indicator_ratio} differs from e^eps = 9"
        ));
    }
    let mut table_rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xd0);
    for trial in 0..20 {
        let table: Vec<[f64; 2]> = (0..256)
            .map(|_| {
                let a = table_rng.random::<f64>();
                [a, 1.0 - a]
            })
            .collect();
        let ratio = expectation_dp_check(
            &move |b: &BitVector| {
                let idx = b.ones().fold(0usize, |m, i| m | 1 << i);
                table[idx].to_vec()
            },
            8,
            0.7,
        )?;
        let bound = 7.0 / 3.0 + 1e-12;
        if ratio > bound {
            violations.push(format!(
                "expectation ratio {ratio} exceeds e^eps bound {bound} on table {trial}"
            ));
        }
    }

    // 6. The region certificate must dominate the closed-form radius.
    let dominance_pa = vec![0.55, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 0.999];
    let dominance_betas = vec![0.7, 0.8, 0.9, 0.99];
    for &beta in &dominance_betas {
        let eps = epsilon_from_beta(beta)?;
        for &pa in &dominance_pa {
            let pb = 1.0 - pa;
            let np = certified_radius(pa, pb, beta, 64)?;
            let dp = dp_radius(pa, pb, eps)?;
            if np.radius < dp.certified_edge_flips {
                violations.push(format!(
                    "dominance violated at pa={pa} beta={beta}: np={} < dp_floor={}\n{}",
                    np.radius,
                    dp.certified_edge_flips,
                    region_dump(np.radius + 1, beta)
                ));
            }
        }
    }

    Ok(OracleReport {
        grid: OracleGrid {
            enumeration_bits: bits,
            region_weights,
            region_betas,
            placements_per_weight: 3,
            bound_budgets,
            backend_weights,
            e2e_bits,
            e2e_classifiers,
            e2e_betas,
            dominance_pa,
            dominance_betas,
        },
        max_abs_error,
        violations,
    })
}

// --------------------------------------------------------------- node-demo

#[derive(Serialize)]
struct NodeDemoConfig {
    seed: u64,
    blocks: usize,
    block_size: usize,
    p_in: f64,
    p_out: f64,
    beta: f64,
    alpha: f64,
    samples: u64,
    noise_beta: Option<f64>,
    epochs: usize,
    learning_rate: f64,
    hidden: usize,
    jobs: usize,
}

pub fn node_demo(args: NodeDemoArgs) -> Result<()> {
    let file = load_config_file(&args.common.config)?;
    let cfg = NodeDemoConfig {
        seed: resolve(args.seed, &file, "seed")?.unwrap_or(0),
        blocks: resolve(args.blocks, &file, "blocks")?.unwrap_or(3),
        block_size: resolve(args.block_size, &file, "block_size")?.unwrap_or(10),
        p_in: resolve(args.p_in, &file, "p_in")?.unwrap_or(0.9),
        p_out: resolve(args.p_out, &file, "p_out")?.unwrap_or(0.05),
        beta: resolve(args.beta, &file, "beta")?.unwrap_or(0.99),
        alpha: resolve(args.alpha, &file, "alpha")?.unwrap_or(0.01),
        samples: resolve(args.samples, &file, "samples")?.unwrap_or(2000),
        noise_beta: resolve(args.noise_beta, &file, "noise_beta")?,
        epochs: resolve(args.epochs, &file, "epochs")?.unwrap_or(400),
        learning_rate: resolve(args.lr, &file, "lr")?.unwrap_or(0.2),
        hidden: resolve(args.hidden, &file, "hidden")?.unwrap_or(32),
        jobs: resolve(args.jobs, &file, "jobs")?.unwrap_or(0),
    };
    let (graph, labels) = generate_sbm(
        cfg.block_size,
        cfg.blocks,
        cfg.p_in,
        cfg.p_out,
        cfg.seed,
    )?;
    let n = graph.n;
    // Identity features: transductive node identity, unchanged by noise.
    let features = Array2::from_shape_fn((n, n), |(i, j)| (i == j) as usize as f64);
    // Stratified half/half split within each block.
    let train_mask: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    let train_cfg = TrainConfig {
        epochs: cfg.epochs,
        learning_rate: cfg.learning_rate,
        seed: cfg.seed,
        noise_beta: cfg.noise_beta,
        hidden: cfg.hidden,
        d_max: smoothcert::gcn::DEFAULT_D_MAX,
    };
    let run = train_node(&graph, &features, &labels, &train_mask, &train_cfg)?;
    let params = CertifyParams::new(cfg.beta, cfg.alpha, cfg.samples, cfg.seed)?;
    let targets: Vec<usize> = (0..n).filter(|&i| !train_mask[i]).collect();
    let mut certs = Vec::new();
    for &t in &targets {
        certs.push(certify_node(
            &run.model,
            &graph,
            &features,
            t,
            &params,
            Some(labels[t]),
        )?);
    }
    write_config(&args.common.out, &cfg)?;
    fs::write(args.common.out.join("results.csv"), results_csv(&certs))?;
    let mut certified = 0;
    for c in &certs {
        match c.outcome {
            smoothcert::pipeline::Outcome::Certified { class, radius, .. } => {
                certified += 1;
                println!(
                    "node {:>3}: certified class {} at L = {} edge flips (matrix |S|_0 <= {}), pA >= {:.4}",
                    c.instance_id,
                    class,
                    radius,
                    matrix_l0_of(radius as usize),
                    c.pa_lower
                );
            }
            smoothcert::pipeline::Outcome::Abstain => {
                println!(
                    "node {:>3}: abstain (pA lower bound {:.4}, p-value {:.4})",
                    c.instance_id, c.pa_lower, c.pvalue
                );
            }
        }
    }
    println!(
        "certified {certified} of {} targets; CA(0) = {:.4}",
        targets.len(),
        certified_accuracy(&certs, 0)
    );
    Ok(())
}
