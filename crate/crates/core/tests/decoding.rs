use otajam::channel::{EffectiveMACConfig, JointModel, LinearGaussianModel, Side};
use otajam::coding::{draw_codebook, estimate_error, CodebookSpec, JtDecoder, SizeCaps};
use otajam::compound::{build_net, AwgnFamily, ChannelFamily, NetOptions, ParamGrid};
use otajam::gaussian::Normal;
use otajam::ota::{run_rounds, OTAConfig};
use otajam::stats::binomial_stderr;
use otajam::RngStream;
use proptest::prelude::*;

fn family() -> AwgnFamily {
    AwgnFamily { gain: 1.0, input: Normal::new(0.0, 1.0).unwrap() }
}

fn decoder(noise_vars: &[f64], epsilon: f64) -> (JtDecoder<LinearGaussianModel>, ParamGrid) {
    let grid = ParamGrid::finite(noise_vars.iter().map(|&v| vec![v]).collect());
    let net = build_net(&family(), &grid, 0.05, &NetOptions::default(), &RngStream::new(1, 1)).unwrap();
    (JtDecoder::from_net(&net, &family(), epsilon).unwrap(), grid)
}

fn outputs(truth: &LinearGaussianModel, cb: &otajam::coding::Codebook<f64>, count: usize, rng: &RngStream) -> Vec<(Vec<f64>, usize)> {
    (0..count)
        .map(|t| {
            let mut r = rng.derive(t as u64);
            let m = r.below(cb.m());
            (cb.word(m).iter().map(|x| truth.sample_output(x, &mut r)).collect(), m)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn decoding_is_permutation_equivariant(seed in 0u64..1000, shift in 1usize..29) {
        let (dec, _) = decoder(&[1.0], 0.1);
        let cb = draw_codebook(CodebookSpec::with_words(24, 30).unwrap(), &Normal::new(0.0, 1.0).unwrap(), &SizeCaps::default(), &RngStream::new(seed, 2)).unwrap();
        let perm: Vec<usize> = (0..30).map(|i| (i * 7 + shift) % 30).collect();
        let permuted = cb.permuted(&perm);
        let (p0, p1) = (dec.prepare(&cb), dec.prepare(&permuted));
        let truth = family().member(&[1.0]).unwrap();
        for (y, _) in outputs(&truth, &cb, 20, &RngStream::new(seed, 3)) {
            let a = dec.decode(&p0, &y);
            let b = dec.decode(&p1, &y);
            prop_assert_eq!(a, b.map(|j| perm[j]));
        }
    }
}

#[test]
fn enlarging_epsilon_never_removes_typical_words() {
    let cb =
        draw_codebook(CodebookSpec::new(20, 0.3).unwrap(), &Normal::new(0.0, 1.0).unwrap(), &SizeCaps::default(), &RngStream::new(5, 2))
            .unwrap();
    let truth = family().member(&[1.5]).unwrap();
    let trials = outputs(&truth, &cb, 300, &RngStream::new(5, 3));
    let queries: Vec<(&[f64], Option<usize>)> = trials.iter().map(|(y, m)| (y.as_slice(), Some(*m))).collect();
    let mut last: Option<Vec<(usize, bool)>> = None;
    for eps in [0.02, 0.05, 0.1, 0.2, 0.4, 0.8] {
        let (dec, _) = decoder(&[1.0, 2.0], eps);
        let prep = dec.prepare(&cb);
        let now: Vec<(usize, bool)> = dec.decode_many(&prep, &queries).iter().map(|o| (o.typical_count, o.wrong_typical)).collect();
        if let Some(prev) = &last {
            for (p, q) in prev.iter().zip(&now) {
                assert!(q.0 >= p.0);
                assert!(q.1 || !p.1);
            }
            let count = |v: &[(usize, bool)]| v.iter().filter(|o| o.1).count();
            assert!(count(&now) >= count(prev));
        }
        last = Some(now);
    }
}

#[test]
fn few_codebooks_have_ten_times_the_mean_error() {
    let (dec, _) = decoder(&[1.0, 2.0], 0.1);
    let truth = family().member(&[2.0]).unwrap();
    let books = 50;
    let errs: Vec<f64> = (0..books)
        .map(|k| {
            let cb = draw_codebook(
                CodebookSpec::new(40, 0.04).unwrap(),
                &Normal::new(0.0, 1.0).unwrap(),
                &SizeCaps::default(),
                &RngStream::new(k, 2),
            )
            .unwrap();
            estimate_error(&dec, &dec.prepare(&cb), &truth, 200, &RngStream::new(k, 3)).unwrap().err
        })
        .collect();
    let mean = errs.iter().sum::<f64>() / books as f64;
    assert!(mean > 0.0);
    let frac = errs.iter().filter(|&&e| e >= 10.0 * mean).count() as f64 / books as f64;
    assert!(frac <= 0.1 + 3.0 * binomial_stderr(0.1, books as usize), "{frac} with mean {mean}");
}

#[test]
fn round_simulation_agrees_with_error_estimate() {
    let config = OTAConfig {
        mac: EffectiveMACConfig {
            bob_gains: vec![1.0, 1.0],
            bob_jammer_gain: 1.0,
            eve_gains: vec![1.0, 1.0],
            eve_jammer_gain: 0.25,
            bob_noise: Normal::new(0.0, 1.0).unwrap(),
            eve_noise: Normal::new(0.0, 1.0).unwrap(),
        },
        alphabets: vec![(0.0, 1.0), (0.0, 1.0)],
        // a single grid point pins the message at the midpoint
        message_points: 1,
        jammer_input: Normal::new(0.0, 1.0).unwrap(),
        cost: None,
        rate: 0.15,
        n: 30,
    };
    let fam = config.family(Side::Bob);
    let net = build_net(&fam, &config.message_grid().unwrap(), 0.1, &NetOptions::default(), &RngStream::new(2, 1)).unwrap();
    let dec = JtDecoder::from_net(&net, &fam, 0.12).unwrap();
    let cb =
        draw_codebook(CodebookSpec::new(30, 0.15).unwrap(), &config.jammer_input, &SizeCaps::default(), &RngStream::new(2, 2)).unwrap();
    let prep = dec.prepare(&cb);
    let rounds = run_rounds(&config, &dec, &prep, 2000, &RngStream::new(2, 5)).unwrap();
    let ok = rounds.iter().filter(|r| r.decode_ok).count() as f64 / rounds.len() as f64;
    let truth = fam.member(&[0.5, 0.5]).unwrap();
    let est = estimate_error(&dec, &prep, &truth, 2000, &RngStream::new(2, 3)).unwrap();
    let se = (binomial_stderr(ok, 2000).powi(2) + est.stderr.powi(2)).sqrt();
    assert!(est.err > 0.05 && est.err < 0.95, "uninformative setting: {}", est.err);
    assert!(((1.0 - est.err) - ok).abs() <= 3.0 * se, "rounds {ok} vs estimate {}", 1.0 - est.err);
}
