//! Acceptance suite. Runs every criterion, prints one verdict line each and
//! exits non-zero if any criterion fails.
//!
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test -p pdlsim-core --test acceptance -- 2 8`.

use std::cell::OnceCell;
use std::f64::consts::{FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use pdlsim::codec::{coherent_superpose, lpc_encode, ltc_encode, ml_decode, superpose_group};
use pdlsim::experiment::{
    emit_report, monte_carlo_statistical, run_trial, sweep_launch_power, sweep_theta, with_threads, PlotSwitch,
};
use pdlsim::link::fiber::{fiber_span_ssfm, SsfmSettings};
use pdlsim::link::{compose_lumped, cumulated_pdl_db, draw_lumped_elements, link_propagate};
use pdlsim::metrics::{ber_from_q, q_from_ber};
use pdlsim::ofdm::qpsk_map;
use pdlsim::rng::{complex_gaussian, generate_bits};
use pdlsim::*;
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// One-sided 95 % Student-t quantiles for 1..=30 degrees of freedom.
const T95: [f64; 30] = [
    6.314, 2.920, 2.353, 2.132, 2.015, 1.943, 1.895, 1.860, 1.833, 1.812, 1.796, 1.782, 1.771, 1.761, 1.753, 1.746,
    1.740, 1.734, 1.729, 1.725, 1.721, 1.717, 1.714, 1.711, 1.708, 1.706, 1.703, 1.701, 1.699, 1.697,
];

fn t95(df: usize) -> f64 {
    T95.get(df.saturating_sub(1)).copied().unwrap_or(1.645)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_std(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn skewness(v: &[f64]) -> f64 {
    let m = mean(v);
    let n = v.len() as f64;
    let m2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = v.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

fn smooth_waveform(n: usize, fs: f64, seed: u64) -> DualPolWaveform {
    // Sum of bin-centred tones inside ±fs/8, so the grid is well sampled.
    let mut r = SeededRng::new(seed).stream(Substream::Auxiliary, 0);
    let tones: Vec<(f64, C64, C64)> = (0..24)
        .map(|_| {
            let k = r.random_range(-(n as i64) / 8..(n as i64) / 8) as f64;
            (k, complex_gaussian(&mut r, 1e-3), complex_gaussian(&mut r, 1e-3))
        })
        .collect();
    let at = |i: usize, pick: fn(&(f64, C64, C64)) -> C64| -> C64 {
        tones
            .iter()
            .map(|t| pick(t) * C64::from_polar(1.0, 2.0 * PI * t.0 * i as f64 / n as f64))
            .sum()
    };
    let x = (0..n).map(|i| at(i, |t| t.1)).collect();
    let y = (0..n).map(|i| at(i, |t| t.2)).collect();
    DualPolWaveform::new(x, y, fs, signal::DEFAULT_CARRIER_HZ).unwrap()
}

/// Direct O(n²) DFT, sign `-1` forward and `+1` inverse (unnormalized).
fn naive_dft(x: &[C64], sign: f64) -> Vec<C64> {
    let n = x.len();
    let tw: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
        .collect();
    (0..n)
        .map(|k| x.iter().enumerate().map(|(j, v)| v * tw[(k * j) % n]).sum())
        .collect()
}

// 1 ───────────────────────────────────────────────────────────────────────

fn criterion_1() -> Verdict {
    let rho = 1.6;
    let n_seeds = 10_000u64;
    let cfg = LinkConfig {
        spans: Vec::new(),
        ..LinkConfig::desk_scale()
    }
    .with_pdl(5, PdlSection::statistical(rho));
    let base = SeededRng::new(20_240_501);
    let pdl: Vec<f64> = (0..n_seeds)
        .map(|t| {
            let e = draw_lumped_elements(&cfg, &SeededRng::new(base.trial_seed(t))).unwrap();
            cumulated_pdl_db(&compose_lumped(&e)).unwrap()
        })
        .collect();
    let rms = (pdl.iter().map(|v| v * v).sum::<f64>() / pdl.len() as f64).sqrt();
    let rms_ok = (rms - 3.6).abs() <= 0.2;

    let skew = skewness(&pdl);
    let mut r = SeededRng::new(7).stream(Substream::Auxiliary, 1);
    let boots: Vec<f64> = (0..400)
        .map(|_| {
            let s: Vec<f64> = (0..pdl.len()).map(|_| pdl[r.random_range(0..pdl.len())]).collect();
            skewness(&s)
        })
        .collect();
    let sigma = sample_std(&boots);
    // Skewness of the Maxwell distribution.
    let maxwell = 2.0 * 2f64.sqrt() * (16.0 - 5.0 * PI) / (3.0 * PI - 8.0).powf(1.5);
    let skew_ok = (maxwell - skew).abs() <= 3.0 * sigma;
    verdict(
        rms_ok && skew_ok,
        format!(
            "rms {rms:.3} dB (3.6 ± 0.2: {}), skewness {skew:.3} ± 3×{sigma:.3} vs Maxwellian {maxwell:.3} ({})",
            ok(rms_ok),
            ok(skew_ok)
        ),
    )
}

// 2 ───────────────────────────────────────────────────────────────────────

fn criterion_2() -> Verdict {
    let fs = 64e9;
    let n = 1024;
    let lambda = signal::REFERENCE_WAVELENGTH_M;

    // (a) dispersion only, against a direct-DFT transfer function.
    let mut span = SpanParams::ssmf_80km();
    span.nonlinear_coeff = 0.0;
    let w = smooth_waveform(n, fs, 11);
    let out = fiber_span_ssfm(&w, &span, &SsfmSettings::default()).unwrap();
    let alpha_np_m = span.attenuation_db_km / (10.0 * std::f64::consts::E.log10()) / 1e3;
    let l_m = span.length_km * 1e3;
    let beta2 = -(span.dispersion_ps_nm_km * 1e-6) * lambda * lambda / (2.0 * PI * signal::SPEED_OF_LIGHT);
    let loss = (-alpha_np_m * l_m / 2.0).exp();
    let mut err_a: f64 = 0.0;
    for (input, got) in [(w.x(), out.x()), (w.y(), out.y())] {
        let spec = naive_dft(input, -1.0);
        let shaped: Vec<C64> = spec
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let f = if k < n / 2 { k as f64 } else { k as f64 - n as f64 } * fs / n as f64;
                let om = 2.0 * PI * f;
                v * C64::from_polar(loss, 0.5 * beta2 * om * om * l_m)
            })
            .collect();
        let expect: Vec<C64> = naive_dft(&shaped, 1.0).into_iter().map(|v| v / n as f64).collect();
        err_a = err_a.max(expect.iter().zip(got).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    }
    let a_ok = err_a <= 1e-8;

    // (b) CW self-phase modulation on one polarization.
    let p: f64 = 0.01;
    let span = SpanParams::ssmf_80km();
    let cw = DualPolWaveform::new(
        vec![C64::new(p.sqrt(), 0.0); 64],
        vec![C64::new(0.0, 0.0); 64],
        fs,
        signal::DEFAULT_CARRIER_HZ,
    )
    .unwrap();
    let out = fiber_span_ssfm(&cw, &span, &SsfmSettings::default()).unwrap();
    let alpha_km = span.attenuation_db_km / (10.0 * std::f64::consts::E.log10());
    let l_eff = (1.0 - (-alpha_km * span.length_km).exp()) / alpha_km;
    let expect_phase = 8.0 / 9.0 * span.nonlinear_coeff * p * l_eff;
    let got_phase = out.x()[17].arg();
    let rel_b = (got_phase - expect_phase).abs() / expect_phase;
    let b_ok = rel_b <= 1e-6;

    // (c) impairment-free link.
    let mut clean = SpanParams::ssmf_80km();
    clean.attenuation_db_km = 0.0;
    clean.dispersion_ps_nm_km = 0.0;
    clean.nonlinear_coeff = 0.0;
    let mut cfg = LinkConfig::desk_scale();
    cfg.spans = vec![clean; 10];
    cfg.edfa_gain_db = 0.0;
    cfg.ase_enabled = false;
    cfg.laser_linewidth_hz = 0.0;
    let w = smooth_waveform(n, fs, 12);
    let (out, _) = link_propagate(&w, &cfg, &SeededRng::new(3)).unwrap();
    let err_c = w
        .x()
        .iter()
        .chain(w.y())
        .zip(out.x().iter().chain(out.y()))
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let c_ok = err_c <= 1e-12;
    verdict(
        a_ok && b_ok && c_ok,
        format!(
            "(a) CD max error {err_a:.2e} ({}), (b) SPM relative error {rel_b:.2e} ({}), (c) identity max error {err_c:.2e} ({})",
            ok(a_ok),
            ok(b_ok),
            ok(c_ok)
        ),
    )
}

// 3 ───────────────────────────────────────────────────────────────────────

fn criterion_3() -> Verdict {
    let cfg = OfdmConfig::desk_scale();
    let layout = cfg.layout();
    let d = layout.data.len();
    let n_symbols = 128;
    let mut r = SeededRng::new(33).stream(Substream::Bits, 0);

    let bits = generate_bits(&mut r, n_symbols * 4 * d);
    let mut lpc_errors = 0usize;
    for chunk in bits.chunks_exact(4 * d) {
        let g = lpc_encode(&qpsk_map(chunk).unwrap(), &cfg).unwrap();
        let rec = superpose_group(std::slice::from_ref(&g), CodecMode::LpcPcts, &layout).unwrap();
        let out = ml_decode(&rec, &CodedConstellation::new()).bits;
        lpc_errors += out.iter().zip(chunk).filter(|(a, b)| a != b).count();
    }
    let mut ltc_errors = 0usize;
    for chunk in bits.chunks_exact(8 * d) {
        let syms = qpsk_map(chunk).unwrap();
        let (g0, g1) = ltc_encode(&syms[..2 * d], &syms[2 * d..], &cfg).unwrap();
        let rec = superpose_group(&[g0, g1], CodecMode::LtcPcts, &layout).unwrap();
        let out = ml_decode(&rec, &CodedConstellation::new()).bits;
        ltc_errors += out.iter().zip(chunk).filter(|(a, b)| a != b).count();
    }

    let inner = 1.0 / 10f64.sqrt();
    let outer = 3.0 / 10f64.sqrt();
    let levels = [-outer, -inner, inner, outer];
    let points = CodedConstellation::new().points;
    let mut grid_err: f64 = 0.0;
    let mut covered = [[false; 4]; 4];
    for p in points {
        let (i, di) = nearest_level(&levels, p.re);
        let (q, dq) = nearest_level(&levels, p.im);
        grid_err = grid_err.max(di).max(dq);
        covered[i][q] = true;
    }
    let full = covered.iter().flatten().all(|&c| c);
    let pass = lpc_errors == 0 && ltc_errors == 0 && grid_err <= 1e-12 && full;
    verdict(
        pass,
        format!(
            "{} bits each: LPC errors {lpc_errors}, LTC errors {ltc_errors}; grid deviation {grid_err:.1e}, 4×4 grid complete: {full}",
            bits.len()
        ),
    )
}

fn nearest_level(levels: &[f64; 4], v: f64) -> (usize, f64) {
    levels
        .iter()
        .enumerate()
        .map(|(i, l)| (i, (v - l).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

// 4 ───────────────────────────────────────────────────────────────────────

fn criterion_4() -> Verdict {
    let n = 1_000_000;
    let sigma2 = 0.05;
    let mut r = SeededRng::new(44).stream(Substream::Auxiliary, 0);
    let mut s = Vec::with_capacity(n);
    let mut main = Vec::with_capacity(n);
    let mut twin = Vec::with_capacity(n);
    for _ in 0..n {
        let sym = CodedConstellation::new().points[r.random_range(0..16)];
        s.push(sym);
        main.push(sym + complex_gaussian(&mut r, sigma2));
        twin.push(sym.conj() + complex_gaussian(&mut r, sigma2));
    }
    let rec = coherent_superpose(&main, &twin).unwrap();
    let var = rec.iter().zip(&s).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / n as f64;
    let ratio = var / (sigma2 / 2.0);
    verdict(
        (ratio - 1.0).abs() <= 0.03,
        format!(
            "noise variance {var:.5} vs σ²/2 = {:.5} (ratio {ratio:.4})",
            sigma2 / 2.0
        ),
    )
}

// 5–7 shared runs ─────────────────────────────────────────────────────────

const SWEEP_CODECS: [CodecMode; 3] = [CodecMode::LpcPcts, CodecMode::LtcPcts, CodecMode::UncodedPdm];

#[derive(Default)]
struct Shared {
    sweeps: OnceCell<Vec<RunReport>>,
    theta: OnceCell<Vec<RunReport>>,
}

impl Shared {
    fn sweeps(&self) -> &[RunReport] {
        self.sweeps.get_or_init(|| {
            SWEEP_CODECS
                .iter()
                .map(|&codec| {
                    let mut spec = ExperimentSpec::desk(ExperimentKind::PowerSweep);
                    spec.codec = codec;
                    sweep_launch_power(&spec).unwrap()
                })
                .collect()
        })
    }

    fn sweep(&self, codec: CodecMode) -> &RunReport {
        &self.sweeps()[SWEEP_CODECS.iter().position(|&c| c == codec).unwrap()]
    }

    fn optimum(&self, codec: CodecMode) -> (f64, f64) {
        let r = self.sweep(codec);
        let p = r.optimum_launch_power_dbm.unwrap();
        let q = r.points.iter().find(|pt| pt.value == p).unwrap().mean_q_db;
        (p, q)
    }

    /// Aligned θ sweep (θ = 0°, 45°) at each twin mode's optimum, LPC then LTC.
    fn theta(&self) -> &[RunReport] {
        self.theta.get_or_init(|| {
            [CodecMode::LpcPcts, CodecMode::LtcPcts]
                .iter()
                .map(|&codec| {
                    let mut spec = ExperimentSpec::desk(ExperimentKind::ThetaSweep);
                    spec.codec = codec;
                    spec.link.launch_power_dbm = self.optimum(codec).0;
                    spec.n_trials = 10;
                    spec.sweep.thetas_rad = vec![0.0, FRAC_PI_4];
                    sweep_theta(&spec).unwrap()
                })
                .collect()
        })
    }
}

/// Per-seed ΔQ at sweep point `point`.
fn penalties(report: &RunReport, point: usize) -> Vec<f64> {
    report
        .baseline_trials
        .iter()
        .map(|b| {
            let t = report
                .trials
                .iter()
                .find(|t| t.point == point && t.seed == b.seed)
                .unwrap();
            b.q_db - t.q_db
        })
        .collect()
}

fn criterion_5(shared: &Shared) -> Verdict {
    let (p_lpc, q_lpc) = shared.optimum(CodecMode::LpcPcts);
    let (p_unc, q_unc) = shared.optimum(CodecMode::UncodedPdm);
    let gain = q_lpc - q_unc;
    verdict(
        gain >= 1.0,
        format!("Q_opt LPC {q_lpc:.2} dB @ {p_lpc} dBm vs uncoded {q_unc:.2} dB @ {p_unc} dBm: gain {gain:+.2} dB (need ≥ +1)"),
    )
}

fn criterion_6(shared: &Shared) -> Verdict {
    let theta = shared.theta();
    let (lpc, ltc) = (&theta[0], &theta[1]);
    let lpc45 = penalties(lpc, 1);
    let ltc45 = penalties(ltc, 1);
    let lpc0 = penalties(lpc, 0);
    // Same trial seeds for both modes, so the comparison is paired.
    let diff: Vec<f64> = lpc45.iter().zip(&ltc45).map(|(a, b)| a - b).collect();
    let n = diff.len();
    let lower = mean(&diff) - t95(n - 1) * sample_std(&diff) / (n as f64).sqrt();
    let order_codec = lower > 0.0;
    let order_theta = mean(&lpc45) > mean(&lpc0);
    verdict(
        order_codec && order_theta,
        format!(
            "ΔQ45 LPC {:.3} vs LTC {:.3} dB, paired 95% lower bound {lower:+.3} ({}); LPC ΔQ45 {:.3} vs ΔQ0 {:.3} ({})",
            mean(&lpc45),
            mean(&ltc45),
            ok(order_codec),
            mean(&lpc45),
            mean(&lpc0),
            ok(order_theta)
        ),
    )
}

fn criterion_7(shared: &Shared) -> Verdict {
    let theta = shared.theta();
    let mut stats = Vec::new();
    for (i, codec) in [CodecMode::LpcPcts, CodecMode::LtcPcts].into_iter().enumerate() {
        let no_pdl_q = theta[i].baseline.as_ref().unwrap().mean_q_db;
        let mut spec = ExperimentSpec::desk(ExperimentKind::MonteCarlo);
        spec.codec = codec;
        spec.link.launch_power_dbm = shared.optimum(codec).0;
        spec.n_trials = 50;
        spec.q_threshold_db = no_pdl_q - 1.0;
        let r = monte_carlo_statistical(&spec).unwrap();
        let q: Vec<f64> = r.samples.iter().map(|s| s.q_db).collect();
        stats.push((
            r.outage.unwrap().probability,
            sample_std(&q),
            spec.q_threshold_db,
            r.cumulated_pdl_rms_db.unwrap(),
        ));
    }
    let (lpc, ltc) = (stats[0], stats[1]);
    let outage_ok = lpc.0 > ltc.0;
    let std_ok = ltc.1 < lpc.1;
    verdict(
        outage_ok && std_ok,
        format!(
            "outage LPC {:.2} (q_t {:.2}) vs LTC {:.2} (q_t {:.2}) ({}); Q std LPC {:.3} vs LTC {:.3} ({}); rms PDL {:.2} dB",
            lpc.0,
            lpc.2,
            ltc.0,
            ltc.2,
            ok(outage_ok),
            lpc.1,
            ltc.1,
            ok(std_ok),
            lpc.3
        ),
    )
}

// 8 ───────────────────────────────────────────────────────────────────────

/// `(BER, Q dB)` from a 40-digit erfc⁻¹.
const Q_REFERENCE: [(f64, f64); 20] = [
    (1e-06, 13.540131656211259),
    (1.97172e-06, 13.2821942362191),
    (3.88768e-06, 13.008633167784349),
    (7.66542e-06, 12.717473544130579),
    (1.51141e-05, 12.406345366323493),
    (2.98007e-05, 12.072376946077941),
    (5.87586e-05, 11.712030733781817),
    (0.000115856, 11.320895115095915),
    (0.000228435, 10.893380933460294),
    (0.000450409, 10.422239698275302),
    (0.000888081, 9.8978692594226257),
    (0.00175105, 9.3071840925234419),
    (0.00345258, 8.6317258914057363),
    (0.00680751, 7.8443099994008839),
    (0.0134225, 6.9026274255317128),
    (0.0264654, 5.7357964764040304),
    (0.0521824, 4.2119963833907608),
    (0.102889, 2.0435982584385017),
    (0.202869, -1.6036201683033631),
    (0.4, -11.925681144563475),
];

fn criterion_8() -> Verdict {
    let worst = Q_REFERENCE
        .iter()
        .map(|&(ber, q)| (q_from_ber(ber).unwrap() - q).abs())
        .fold(0.0, f64::max);
    let ber = ber_from_q(5.7);
    let back = q_from_ber(ber).unwrap();
    let pass = worst <= 1e-6 && (ber - 2.7e-2).abs() <= 1e-3 && (back - 5.7).abs() <= 1e-9;
    verdict(
        pass,
        format!("max |ΔQ| {worst:.2e} dB over 20 points; 5.7 dB → BER {ber:.5e} → {back:.12} dB"),
    )
}

// 9 ───────────────────────────────────────────────────────────────────────

fn criterion_9() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for codec in CodecMode::ALL {
        let mut spec = ExperimentSpec::desk(ExperimentKind::Single);
        spec.codec = codec;
        spec.link = spec.link.linear_noiseless().with_pdl(2, PdlSection::aligned(1.8, 0.0));
        let out = run_trial(&spec, &spec.link, 9).unwrap();
        pass &= out.count.errors == 0;
        parts.push(format!(
            "{codec} {}/{} errors (PDL {:.2} dB)",
            out.count.errors, out.count.bits, out.link.cumulated_pdl_db
        ));
    }
    verdict(pass, parts.join(", "))
}

// 10 ──────────────────────────────────────────────────────────────────────

fn criterion_10() -> Verdict {
    let mut spec = ExperimentSpec::desk(ExperimentKind::MonteCarlo);
    spec.n_trials = 4;
    spec.frames_per_burst = 1;
    spec.seed = 1010;
    let emit = |threads: usize| -> Vec<Vec<u8>> {
        let report = with_threads(threads, || monte_carlo_statistical(&spec))
            .unwrap()
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_report(&report, dir.path(), PlotSwitch::Off).unwrap();
        ["samples.csv", "points.csv", "report.json"]
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap())
            .collect()
    };
    let serial = emit(1);
    let again = emit(1);
    let parallel = emit(3);
    let pass = serial == again && serial == parallel;
    verdict(
        pass,
        format!(
            "serial repeat identical: {}, serial vs 3 threads identical: {} ({} CSV bytes)",
            serial == again,
            serial == parallel,
            serial[0].len()
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let shared = Shared::default();
    type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;
    let criteria: Vec<(u32, &str, Option<Duration>, Check)> = vec![
        (
            1,
            "PDL statistics",
            Some(Duration::from_secs(30)),
            Box::new(criterion_1),
        ),
        (
            2,
            "split-step oracles",
            Some(Duration::from_secs(60)),
            Box::new(criterion_2),
        ),
        (
            3,
            "lossless codec chain",
            Some(Duration::from_secs(10)),
            Box::new(criterion_3),
        ),
        (4, "superposition noise halving", None, Box::new(criterion_4)),
        (
            5,
            "nonlinearity mitigation",
            Some(Duration::from_secs(15 * 60)),
            Box::new(|| criterion_5(&shared)),
        ),
        (
            6,
            "aligned-PDL ordering",
            Some(Duration::from_secs(30 * 60)),
            Box::new(|| criterion_6(&shared)),
        ),
        (
            7,
            "statistical-PDL outage ordering",
            Some(Duration::from_secs(45 * 60)),
            Box::new(|| criterion_7(&shared)),
        ),
        (8, "Q/BER conversion", None, Box::new(criterion_8)),
        (9, "receiver-chain exactness", None, Box::new(criterion_9)),
        (10, "reproducibility", None, Box::new(criterion_10)),
    ];
    let mut failed = Vec::new();
    for (id, name, budget, check) in &criteria {
        if !wanted.is_empty() && !wanted.contains(id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let pass = v.pass && in_time;
        if !pass {
            failed.push(*id);
        }
        let budget_note = match budget {
            Some(b) if !in_time => format!(", over the {} s budget", b.as_secs()),
            _ => String::new(),
        };
        println!(
            "criterion {id:>2} [{}] {name}: {} ({:.1} s{budget_note})",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
