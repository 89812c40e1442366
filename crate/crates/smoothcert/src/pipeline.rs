//! Monte Carlo prediction and certification, dataset runs, certified
//! accuracy, and the experiment sweeps.
//!
//! One instance follows the sample/select/test/bound/radius sequence:
//! draw M noisy inputs, count base-classifier labels, take the top two
//! classes, run the two-sided binomial selection test, lower-bound the
//! top-class probability with Clopper-Pearson, and abstain unless the
//! test clears alpha *and* the bound clears 1/2. Certified instances get
//! the tight region-calculus radius plus the closed-form bound for
//! comparison.

use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitgraph::{decode_graph, encode_graph, BitVector, GraphRecord};
use crate::classifier::BitClassifier;
use crate::dpcert::dp_radius;
use crate::error::{Error, Result};
use crate::gcn::{forward_graph, forward_node, GcnModel};
use crate::noise::{NoiseSampler, SmoothingParams};
use crate::npcert::certified_radius_with;
use crate::stats::{binomial_two_sided_pvalue, clopper_pearson_lower, SampleCounts};

/// Everything one certification run needs besides the classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyParams {
    pub smoothing: SmoothingParams,
    /// Significance level for both the selection test and the
    /// Clopper-Pearson bound.
    pub alpha: f64,
    /// Monte Carlo sample count M.
    pub samples: u64,
    /// Master seed; per-instance and per-sample noise derive from it.
    pub seed: u64,
    /// Radius scan cap; always additionally capped at the bit length.
    pub l_max: Option<u64>,
    /// Scan every weight up to the cap instead of stopping at the first
    /// failure, to surface non-monotone certifying conditions.
    pub paranoid: bool,
    /// Split the samples into a selection half and an estimation half
    /// instead of reusing all M for both (off by default, matching the
    /// single-batch procedure).
    pub two_phase: bool,
}

impl CertifyParams {
    pub fn new(beta: f64, alpha: f64, samples: u64, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if samples < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 samples, got {samples}"
            )));
        }
        Ok(CertifyParams {
            smoothing: SmoothingParams::from_beta(beta)?,
            alpha,
            samples,
            seed,
            l_max: None,
            paranoid: false,
            two_phase: false,
        })
    }
}

/// Certification outcome for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    /// Selection test or the 1/2 threshold failed; no claim is made.
    Abstain,
    Certified {
        class: usize,
        /// Certified edge-flip radius from the region calculus.
        radius: u64,
        /// False if a paranoid scan saw the condition recover after its
        /// first failure.
        monotone: bool,
    },
}

/// One certified (or abstained) instance with its parameter snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub instance_id: usize,
    pub true_label: Option<usize>,
    /// Most frequent class under noise, reported even when abstaining.
    pub predicted: usize,
    pub outcome: Outcome,
    pub pa_lower: f64,
    pub pvalue: f64,
    /// Closed-form radius (0 when abstained), kept beside the region
    /// radius so the dominance of the latter is visible per instance.
    pub dp_radius_real: f64,
    pub dp_radius_floor: u64,
    pub beta: f64,
    pub alpha: f64,
    pub samples: u64,
    pub seed: u64,
    /// Wall-clock per instance. The only field excluded from the
    /// determinism contract.
    pub wall_ms: f64,
}

impl Certificate {
    pub fn abstained(&self) -> bool {
        matches!(self.outcome, Outcome::Abstain)
    }

    /// Certified radius; 0 when abstained.
    pub fn np_radius(&self) -> u64 {
        match self.outcome {
            Outcome::Abstain => 0,
            Outcome::Certified { radius, .. } => radius,
        }
    }
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

/// Graph-level head of a GCN as a classifier over edge bits of n-node
/// graphs.
pub struct GraphClassifier<'a> {
    model: &'a GcnModel,
    n: usize,
}

impl<'a> GraphClassifier<'a> {
    pub fn new(model: &'a GcnModel, n: usize) -> Self {
        GraphClassifier { model, n }
    }
}

impl BitClassifier for GraphClassifier<'_> {
    fn num_classes(&self) -> usize {
        self.model.num_classes
    }

    fn classify(&self, bits: &BitVector) -> Result<usize> {
        let g = decode_graph(bits, self.n, 0, None)?;
        Ok(argmax(&forward_graph(self.model, &g)?))
    }
}

/// Node-level head pinned to one target node, with fixed features.
pub struct NodeClassifier<'a> {
    model: &'a GcnModel,
    features: &'a Array2<f64>,
    n: usize,
    target: usize,
}

impl<'a> NodeClassifier<'a> {
    pub fn new(model: &'a GcnModel, features: &'a Array2<f64>, n: usize, target: usize) -> Self {
        NodeClassifier {
            model,
            features,
            n,
            target,
        }
    }
}

impl BitClassifier for NodeClassifier<'_> {
    fn num_classes(&self) -> usize {
        self.model.num_classes
    }

    fn classify(&self, bits: &BitVector) -> Result<usize> {
        let g = decode_graph(bits, self.n, 0, None)?;
        Ok(argmax(&forward_node(self.model, &g, self.features, self.target)?))
    }
}

/// Samples, selects, tests, bounds, and certifies one instance.
///
/// Noise is a pure function of (seed, instance, sample index), so the
/// result is identical under any parallel schedule.
pub fn predict_and_certify(
    f: &dyn BitClassifier,
    x: &BitVector,
    params: &CertifyParams,
    instance_id: usize,
    true_label: Option<usize>,
) -> Result<Certificate> {
    let start = Instant::now();
    let sampler = NoiseSampler::new(params.seed).substream(instance_id as u64);
    let selection_cut = if params.two_phase {
        params.samples / 2
    } else {
        params.samples
    };
    let mut selection = SampleCounts::new(f.num_classes());
    let mut estimation = SampleCounts::new(f.num_classes());
    for m in 0..params.samples {
        let mut attacked = sampler.sample(x.len(), &params.smoothing, m);
        attacked.xor_in_place(x).expect("sampler matched length");
        let class = f.classify(&attacked).map_err(|e| {
            Error::InvalidInput(format!(
                "classifier failed on sample {m} of instance {instance_id}: {e}"
            ))
        })?;
        if m < selection_cut {
            selection.record(class);
        } else {
            estimation.record(class);
        }
    }
    let ((c_a, eta_a), runner) = selection.top_two();
    let eta_b = runner.map_or(0, |(_, count)| count);
    let pvalue = binomial_two_sided_pvalue(eta_a, eta_a + eta_b, 0.5)?;
    let (successes, trials) = if params.two_phase {
        (estimation.counts()[c_a], params.samples - selection_cut)
    } else {
        (eta_a, params.samples)
    };
    let pa_lower = clopper_pearson_lower(successes, trials, 1.0 - params.alpha)?;

    let certified = pvalue <= params.alpha && pa_lower > 0.5;
    let (outcome, dp_real, dp_floor) = if certified {
        let pb_upper = 1.0 - pa_lower;
        let l_cap = params
            .l_max
            .unwrap_or(x.len() as u64)
            .min(x.len() as u64);
        let np = certified_radius_with(
            pa_lower,
            pb_upper,
            params.smoothing.beta,
            l_cap,
            params.paranoid,
        )?;
        let dp = dp_radius(pa_lower, pb_upper, params.smoothing.epsilon)?;
        debug_assert!(
            dp.certified_edge_flips <= np.radius || np.radius == l_cap,
            "region certificate fell below the closed-form floor on instance {instance_id}"
        );
        (
            Outcome::Certified {
                class: c_a,
                radius: np.radius,
                monotone: np.monotone_prefix,
            },
            dp.radius_real,
            dp.certified_edge_flips,
        )
    } else {
        (Outcome::Abstain, 0.0, 0)
    };
    Ok(Certificate {
        instance_id,
        true_label,
        predicted: c_a,
        outcome,
        pa_lower,
        pvalue,
        dp_radius_real: dp_real,
        dp_radius_floor: dp_floor,
        beta: params.smoothing.beta,
        alpha: params.alpha,
        samples: params.samples,
        seed: params.seed,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Certifies a whole graph dataset against one trained model, instances
/// in parallel. `jobs = 0` uses all cores; the outputs are independent of
/// the worker count.
pub fn certify_graph_dataset(
    model: &GcnModel,
    graphs: &[GraphRecord],
    params: &CertifyParams,
    jobs: usize,
) -> Result<Vec<Certificate>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| {
        graphs
            .par_iter()
            .enumerate()
            .map(|(i, g)| {
                let classifier = GraphClassifier::new(model, g.n);
                predict_and_certify(&classifier, &encode_graph(g), params, i, Some(g.label))
            })
            .collect()
    })
}

/// Certifies the prediction for one node of one graph: identical
/// statistical pipeline, with noise applied to the graph's edge bits.
pub fn certify_node(
    model: &GcnModel,
    g: &GraphRecord,
    features: &Array2<f64>,
    target: usize,
    params: &CertifyParams,
    true_label: Option<usize>,
) -> Result<Certificate> {
    if target >= g.n {
        return Err(Error::InvalidInput(format!(
            "target node {target} out of range for n = {}",
            g.n
        )));
    }
    let classifier = NodeClassifier::new(model, features, g.n, target);
    predict_and_certify(&classifier, &encode_graph(g), params, target, true_label)
}

/// CA(r): fraction of instances that are certified (not abstained),
/// correctly classified, and have radius strictly greater than r.
pub fn certified_accuracy(certs: &[Certificate], r: u64) -> f64 {
    assert!(!certs.is_empty(), "certified accuracy of an empty run");
    let hits = certs
        .iter()
        .filter(|c| match c.outcome {
            Outcome::Certified { class, radius, .. } => {
                c.true_label == Some(class) && radius > r
            }
            Outcome::Abstain => false,
        })
        .count();
    hits as f64 / certs.len() as f64
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepKind {
    Beta(Vec<f64>),
    Alpha(Vec<f64>),
    Samples(Vec<u64>),
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::Beta(_) => "beta",
            SweepKind::Alpha(_) => "alpha",
            SweepKind::Samples(_) => "samples",
        }
    }
}

/// One point of a certified-accuracy curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: u64,
    pub certified_accuracy: f64,
}

/// CA(r) curve for one sweep value, with the underlying certificates.
#[derive(Debug, Clone)]
pub struct SweepCurve {
    pub sweep_value: String,
    pub points: Vec<CurvePoint>,
    pub certificates: Vec<Certificate>,
    /// Total wall-clock for this sweep value (not part of any
    /// deterministic output).
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub kind: &'static str,
    pub r_max: u64,
    pub curves: Vec<SweepCurve>,
}

/// Runs one CA(r) curve per sweep value over the test set, r in 0..=r_max.
pub fn run_sweep(
    model: &GcnModel,
    test_set: &[GraphRecord],
    kind: &SweepKind,
    base: &CertifyParams,
    r_max: u64,
    jobs: usize,
) -> Result<SweepResult> {
    if test_set.is_empty() {
        return Err(Error::Config("sweep needs a non-empty test set".into()));
    }
    let mut configs: Vec<(String, CertifyParams)> = Vec::new();
    match kind {
        SweepKind::Beta(betas) => {
            for &beta in betas {
                let mut p = base.clone();
                p.smoothing = SmoothingParams::from_beta(beta)?;
                configs.push((beta.to_string(), p));
            }
        }
        SweepKind::Alpha(alphas) => {
            for &alpha in alphas {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must lie in (0, 1), got {alpha}"
                    )));
                }
                let mut p = base.clone();
                p.alpha = alpha;
                configs.push((alpha.to_string(), p));
            }
        }
        SweepKind::Samples(counts) => {
            for &m in counts {
                if m < 2 {
                    return Err(Error::InvalidParameter(format!(
                        "need at least 2 samples, got {m}"
                    )));
                }
                let mut p = base.clone();
                p.samples = m;
                configs.push((m.to_string(), p));
            }
        }
    }
    if configs.is_empty() {
        return Err(Error::Config("sweep value list is empty".into()));
    }
    let mut curves = Vec::new();
    for (label, params) in configs {
        let start = Instant::now();
        let certificates = certify_graph_dataset(model, test_set, &params, jobs)?;
        let points: Vec<CurvePoint> = (0..=r_max)
            .map(|r| CurvePoint {
                r,
                certified_accuracy: certified_accuracy(&certificates, r),
            })
            .collect();
        debug_assert!(
            points
                .windows(2)
                .all(|w| w[1].certified_accuracy <= w[0].certified_accuracy),
            "CA(r) must be non-increasing in r"
        );
        curves.push(SweepCurve {
            sweep_value: label,
            points,
            certificates,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(SweepResult {
        kind: kind.name(),
        r_max,
        curves,
    })
}

/// Fixed-column results CSV. All columns except wall_ms are a pure
/// function of (seed, config, data).
pub fn results_csv(certs: &[Certificate]) -> String {
    let mut out = String::from(
        "instance_id,true_label,predicted,abstained,pa_lower,pvalue,np_radius,dp_radius_real,dp_radius_floor,beta,alpha,M,seed,wall_ms\n",
    );
    for c in certs {
        let truth = c.true_label.map_or(String::new(), |t| t.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            c.instance_id,
            truth,
            c.predicted,
            c.abstained(),
            c.pa_lower,
            c.pvalue,
            c.np_radius(),
            c.dp_radius_real,
            c.dp_radius_floor,
            c.beta,
            c.alpha,
            c.samples,
            c.seed,
            c.wall_ms,
        ));
    }
    out
}

/// Curves CSV: one row per (sweep value, r).
pub fn curves_csv(result: &SweepResult) -> String {
    let mut out = String::from("sweep_value,r,certified_accuracy\n");
    for curve in &result.curves {
        for p in &curve.points {
            out.push_str(&format!(
                "{},{},{}\n",
                curve.sweep_value, p.r, p.certified_accuracy
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::FnClassifier;
    use crate::npcert::oracle::oracle_end_to_end;

    fn strip_wall_ms(csv: &str) -> String {
        csv.lines()
            .map(|line| {
                let cut = line.rfind(',').unwrap();
                &line[..cut]
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn constant_classifier_certifies_to_the_bit_length_cap() {
        let f = FnClassifier::new(3, |_| 1);
        let x = BitVector::zeros(2);
        let params = CertifyParams::new(0.7, 0.001, 1000, 5).unwrap();
        let cert = predict_and_certify(&f, &x, &params, 0, None).unwrap();
        let expected_pa = 0.001f64.powf(1.0 / 1000.0);
        assert!((cert.pa_lower - expected_pa).abs() < 1e-10);
        match cert.outcome {
            Outcome::Certified { class, radius, .. } => {
                assert_eq!(class, 1);
                assert_eq!(radius, 2, "radius capped at the bit length");
            }
            Outcome::Abstain => panic!("constant classifier must certify"),
        }
        assert!(cert.dp_radius_floor <= cert.np_radius());
    }

    #[test]
    fn coin_flip_classifier_abstains() {
        // Parity of the noisy input is a near-fair coin under the flip
        // channel, so the selection test fails essentially always.
        let f = FnClassifier::new(2, |b: &BitVector| b.count_ones() % 2);
        let x = BitVector::zeros(21);
        let params = CertifyParams::new(0.7, 0.001, 400, 11).unwrap();
        let abstentions = (0..100)
            .filter(|&i| {
                predict_and_certify(&f, &x, &params, i, None)
                    .unwrap()
                    .abstained()
            })
            .count();
        assert!(abstentions >= 95, "only {abstentions} abstentions");
    }

    #[test]
    fn two_samples_with_split_counts_abstain() {
        // Find a seed where the two draws land in different classes; the
        // Clopper-Pearson bound at one success out of two cannot clear
        // 1/2, so the run must abstain.
        let f = FnClassifier::new(2, |b: &BitVector| b.get(0) as usize);
        let x = BitVector::zeros(1);
        let mut checked = false;
        for seed in 0..200 {
            let params = CertifyParams::new(0.7, 0.001, 2, seed).unwrap();
            let cert = predict_and_certify(&f, &x, &params, 0, None).unwrap();
            assert!(cert.abstained(), "M = 2 can never certify at small alpha");
            if cert.pvalue == 1.0 {
                // counts were (1, 1)
                assert!(cert.pa_lower <= 0.5);
                checked = true;
                break;
            }
        }
        assert!(checked, "no seed produced a (1, 1) split");
    }

    #[test]
    fn classifier_failure_aborts_with_sample_index() {
        struct Failing;
        impl BitClassifier for Failing {
            fn num_classes(&self) -> usize {
                2
            }
            fn classify(&self, _: &BitVector) -> Result<usize> {
                Err(Error::InvalidInput("boom".into()))
            }
        }
        let params = CertifyParams::new(0.9, 0.01, 10, 0).unwrap();
        let err = predict_and_certify(&Failing, &BitVector::zeros(4), &params, 7, None)
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sample 0") && msg.contains("instance 7"), "{msg}");
    }

    fn certified(id: usize, truth: usize, class: usize, radius: u64) -> Certificate {
        Certificate {
            instance_id: id,
            true_label: Some(truth),
            predicted: class,
            outcome: Outcome::Certified {
                class,
                radius,
                monotone: true,
            },
            pa_lower: 0.9,
            pvalue: 0.0,
            dp_radius_real: 0.0,
            dp_radius_floor: 0,
            beta: 0.9,
            alpha: 0.01,
            samples: 100,
            seed: 0,
            wall_ms: 0.0,
        }
    }

    #[test]
    fn certified_accuracy_indicator_product() {
        let mut abstained = certified(3, 0, 0, 9);
        abstained.outcome = Outcome::Abstain;
        let certs = vec![
            certified(0, 1, 1, 3), // correct, L = 3
            certified(1, 0, 0, 1), // correct, L = 1
            certified(2, 1, 0, 5), // wrong, L = 5
            abstained,
        ];
        assert_eq!(certified_accuracy(&certs, 0), 0.5);
        assert_eq!(certified_accuracy(&certs, 2), 0.25);
        assert_eq!(certified_accuracy(&certs, 5), 0.0);
        // r = 0 with every correct instance at L >= 1 equals the plain
        // accuracy of the certified-correct set.
        let all_ge1 = vec![certified(0, 1, 1, 1), certified(1, 0, 0, 2)];
        assert_eq!(certified_accuracy(&all_ge1, 0), 1.0);
    }

    fn tiny_setup() -> (GcnModel, Vec<GraphRecord>) {
        let spec = crate::datagen::DatasetSpec {
            per_family: 3,
            train_per_family: 2,
            seed: 5,
        };
        let (train, test) = crate::datagen::generate_topology_dataset(&spec).unwrap();
        let cfg = crate::gcn::TrainConfig {
            epochs: 30,
            hidden: 8,
            seed: 1,
            ..crate::gcn::TrainConfig::default()
        };
        let model = crate::gcn::train(&train, &cfg).unwrap().model;
        (model, test)
    }

    #[test]
    fn dataset_runs_are_schedule_independent() {
        let (model, test) = tiny_setup();
        let params = CertifyParams::new(0.9, 0.01, 60, 13).unwrap();
        let one = certify_graph_dataset(&model, &test, &params, 1).unwrap();
        let four = certify_graph_dataset(&model, &test, &params, 4).unwrap();
        assert_eq!(
            strip_wall_ms(&results_csv(&one)),
            strip_wall_ms(&results_csv(&four))
        );
        for (a, b) in one.iter().zip(&four) {
            assert_eq!(a.outcome, b.outcome);
            assert_eq!(a.pa_lower, b.pa_lower);
        }
    }

    #[test]
    fn sweep_curves_are_nonincreasing_and_deterministic() {
        let (model, test) = tiny_setup();
        let base = CertifyParams::new(0.9, 0.01, 60, 3).unwrap();
        let kind = SweepKind::Beta(vec![0.8, 0.95]);
        let s1 = run_sweep(&model, &test, &kind, &base, 8, 2).unwrap();
        let s2 = run_sweep(&model, &test, &kind, &base, 8, 1).unwrap();
        assert_eq!(curves_csv(&s1), curves_csv(&s2));
        for curve in &s1.curves {
            for w in curve.points.windows(2) {
                assert!(w[1].certified_accuracy <= w[0].certified_accuracy);
            }
        }
        assert_eq!(s1.curves.len(), 2);
        assert_eq!(s1.curves[0].points.len(), 9);
    }

    #[test]
    fn emitted_certificates_dominate_their_dp_floor() {
        let (model, test) = tiny_setup();
        let params = CertifyParams::new(0.8, 0.01, 120, 17).unwrap();
        let certs = certify_graph_dataset(&model, &test, &params, 2).unwrap();
        let mut certified_count = 0;
        for c in &certs {
            if !c.abstained() {
                certified_count += 1;
                assert!(
                    c.dp_radius_floor <= c.np_radius(),
                    "dominance violated on instance {}",
                    c.instance_id
                );
            }
        }
        assert!(certified_count > 0, "test needs at least one certified instance");
    }

    #[test]
    fn monte_carlo_certificates_are_sound_on_toy_instances() {
        // 10-bit instance, biased table classifier: the Monte Carlo
        // radius must stay within the exact-probability radius, and the
        // exhaustive check of that exact certificate must find no
        // violation.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let labels: Vec<usize> = (0..1u64 << 10)
            .map(|_| (rng.random::<f64>() < 0.94) as usize ^ 1)
            .collect();
        let f = FnClassifier::new(2, move |b: &BitVector| {
            labels[b.ones().fold(0usize, |m, i| m | 1 << i)]
        });
        let x = BitVector::zeros(10);
        let params = CertifyParams::new(0.9, 0.01, 2000, 29).unwrap();
        let cert = predict_and_certify(&f, &x, &params, 0, None).unwrap();
        let report = oracle_end_to_end(&f, &x, 0.9, 10).unwrap();
        assert!(report.violations.is_empty());
        assert!(!cert.abstained(), "bias 0.94 should certify at M = 2000");
        assert!(
            cert.np_radius() <= report.radius,
            "Monte Carlo radius {} exceeded exact radius {}",
            cert.np_radius(),
            report.radius
        );
    }

    #[test]
    fn node_certification_is_the_same_pipeline() {
        let g = crate::datagen::complete_graph(6).unwrap();
        let features = Array2::from_shape_fn((6, 6), |(i, j)| (i == j) as usize as f64);
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let model = GcnModel {
            w1: Array2::from_shape_fn((6, 4), |_| {
                rand::Rng::random::<f64>(&mut rng) - 0.5
            }),
            w2: Array2::from_shape_fn((4, 3), |_| {
                rand::Rng::random::<f64>(&mut rng) - 0.5
            }),
            d_max: 16,
            num_classes: 3,
        };
        let params = CertifyParams::new(0.7, 0.001, 100, 3).unwrap();
        let via_wrapper = certify_node(&model, &g, &features, 2, &params, Some(1)).unwrap();
        let classifier = NodeClassifier::new(&model, &features, 6, 2);
        let direct =
            predict_and_certify(&classifier, &encode_graph(&g), &params, 2, Some(1)).unwrap();
        // Same statistical pipeline, field for field (timing aside).
        assert_eq!(via_wrapper.outcome, direct.outcome);
        assert_eq!(via_wrapper.pa_lower, direct.pa_lower);
        assert_eq!(via_wrapper.pvalue, direct.pvalue);
        assert_eq!(via_wrapper.predicted, direct.predicted);
        assert!(certify_node(&model, &g, &features, 6, &params, None).is_err());
    }
}
