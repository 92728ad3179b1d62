mod common;

use common::fixture;
use ecodec::control::{strength, StrengthFunction, StrengthKind};
use ecodec::corpus::EOS_ID;
use ecodec::decoder::{
    brute_force_step_oracle, decode, decode_step, greedy_lm_decode, write_trace_tsv, Controller,
    DecodeConfig, DecodeMode, Decoder, Target, Termination, TRACE_HEADER,
};
use ecodec::models::LanguageModel;
use ecodec::Error;

fn targets() -> Vec<Target> {
    vec![Target::new("emotion", "happiness")]
}

#[test]
fn unit_strengths_reduce_eco_to_static() {
    let fx = fixture::<f64>(300, 7);
    let ctl = [Controller::new("emotion", &fx.emotion)];
    for lambda in [0.5, 2.0, 6.0] {
        let stat = DecodeConfig::default()
            .with_mode(DecodeMode::Static)
            .with_lambda(lambda)
            .with_targets(targets());
        let mut eco = stat.clone().with_mode(DecodeMode::Eco);
        eco.fixed_alpha = Some(1.0);
        for ex in fx.examples.iter().take(10) {
            let a = decode(&fx.lm, &ctl, &ex.history, &stat).unwrap();
            let b = decode(&fx.lm, &ctl, &ex.history, &eco).unwrap();
            assert_eq!(a.response, b.response);
            for (sa, sb) in a.steps.iter().zip(&b.steps) {
                for (x, y) in sa.scores.iter().zip(&sb.scores) {
                    assert!((x - y).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn zero_lambda_matches_plain_greedy() {
    let fx = fixture::<f64>(300, 8);
    let ctl = [
        Controller::new("emotion", &fx.emotion),
        Controller::new("dialog-act", &fx.act),
    ];
    for mode in [
        DecodeMode::Uncontrolled,
        DecodeMode::Static,
        DecodeMode::Eco,
    ] {
        let cfg = DecodeConfig::default()
            .with_mode(mode)
            .with_lambda(0.0)
            .with_targets(vec![
                Target::new("emotion", "anger"),
                Target::new("dialog-act", "question"),
            ]);
        for ex in fx.examples.iter().take(15) {
            let got = decode(&fx.lm, &ctl, &ex.history, &cfg).unwrap();
            let want = greedy_lm_decode(&fx.lm, &ex.history, cfg.max_len);
            assert_eq!(got.response, want, "mode {mode}");
        }
    }
}

#[test]
fn engine_agrees_with_brute_force_oracle() {
    let fx = fixture::<f64>(200, 9);
    let v = fx.lm.vocab_size();
    let ctl = [
        Controller::new("emotion", &fx.emotion),
        Controller::new("dialog-act", &fx.act),
    ];
    for (mode, k, kind) in [
        (DecodeMode::Eco, v, StrengthKind::Reciprocal),
        (DecodeMode::Static, v, StrengthKind::Reciprocal),
        (DecodeMode::Eco, 5, StrengthKind::Exponential),
        (DecodeMode::Eco, 12, StrengthKind::Negative),
        (DecodeMode::Uncontrolled, 3, StrengthKind::Reciprocal),
    ] {
        let mut cfg = DecodeConfig::default()
            .with_mode(mode)
            .with_lambda(3.0)
            .with_targets(vec![
                Target::new("emotion", "sadness"),
                Target::new("dialog-act", "directive"),
            ]);
        cfg.k = k;
        cfg.strength = kind;
        cfg.max_len = 20;
        let decoder = Decoder::new(&fx.lm, &ctl, cfg.clone()).unwrap();
        for ex in fx.examples.iter().take(6) {
            let mut session = decoder.begin(&ex.history, &[]);
            for _ in 0..cfg.max_len {
                let want =
                    brute_force_step_oracle(&fx.lm, &ctl, &ex.history, session.prefix(), &cfg)
                        .unwrap();
                let step = decoder.step(&mut session).unwrap();
                assert_eq!(step.chosen_token(), want);
                if want == EOS_ID {
                    break;
                }
            }
        }
    }
}

#[test]
fn reported_strengths_match_entropies() {
    let fx = fixture::<f64>(200, 10);
    let ctl = [Controller::new("emotion", &fx.emotion)];
    let cfg = DecodeConfig::default().with_targets(targets());
    let f = StrengthFunction::reciprocal();
    for ex in fx.examples.iter().take(5) {
        let trace = decode(&fx.lm, &ctl, &ex.history, &cfg).unwrap();
        for s in &trace.steps {
            let e = s.lm_entropy.unwrap();
            assert!(e >= 0.0 && e <= (s.top_k_len as f64).ln() + 1e-12);
            assert!((s.alpha_lm - strength(e, f).unwrap()).abs() <= 1e-12);
            for a in &s.attributes {
                assert!((a.alpha - strength(a.entropy.unwrap(), f).unwrap()).abs() <= 1e-12);
            }
            assert!(s.tokens.contains(&EOS_ID));
            assert!(s.top_k_len == cfg.k);
        }
    }
}

#[test]
fn huge_lambda_follows_the_classifier() {
    let fx = fixture::<f64>(300, 11);
    let ctl = [Controller::new("emotion", &fx.emotion)];
    let cfg = DecodeConfig::default()
        .with_mode(DecodeMode::Static)
        .with_lambda(1e6)
        .with_targets(targets());
    let ex = &fx.examples[0];
    let step = decode_step(&fx.lm, &ctl, &ex.history, &[], &cfg).unwrap();
    let probs = &step.attributes[0].probs;
    let best = probs.iter().cloned().fold(f64::MIN, f64::max);
    assert_eq!(probs[step.chosen], best);
}

#[test]
fn single_step_matches_first_decode_step() {
    let fx = fixture::<f64>(200, 12);
    let ctl = [Controller::new("emotion", &fx.emotion)];
    let cfg = DecodeConfig::default().with_targets(targets());
    let ex = &fx.examples[3];
    let full = decode(&fx.lm, &ctl, &ex.history, &cfg).unwrap();
    let one = decode_step(&fx.lm, &ctl, &ex.history, &[], &cfg).unwrap();
    assert_eq!(full.steps[0], one);
    let prefix = &full.response[..2];
    let third = decode_step(&fx.lm, &ctl, &ex.history, prefix, &cfg).unwrap();
    if full.steps.len() > 2 {
        assert_eq!(third.chosen_token(), full.steps[2].chosen_token());
    }
}

#[test]
fn stops_at_max_len() {
    let fx = fixture::<f64>(200, 13);
    let ctl = [Controller::new("emotion", &fx.emotion)];
    let mut cfg = DecodeConfig::default().with_targets(targets());
    cfg.max_len = 1;
    let t = decode(&fx.lm, &ctl, &fx.examples[0].history, &cfg).unwrap();
    assert_eq!(t.response.len(), 1);
    if t.response[0] != EOS_ID {
        assert_eq!(t.termination, Termination::MaxLen);
        assert_eq!(t.content(), &t.response[..]);
    }
    cfg.max_len = 128;
    let t = decode(&fx.lm, &ctl, &fx.examples[0].history, &cfg).unwrap();
    assert_eq!(t.termination, Termination::Eos);
    assert_eq!(*t.response.last().unwrap(), EOS_ID);
    assert_eq!(t.content().len() + 1, t.response.len());
}

#[test]
fn trace_tsv_has_one_row_per_candidate_and_attribute() {
    let fx = fixture::<f64>(200, 14);
    let ctl = [
        Controller::new("emotion", &fx.emotion),
        Controller::new("dialog-act", &fx.act),
    ];
    let cfg = DecodeConfig::default().with_targets(vec![
        Target::new("emotion", "fear"),
        Target::new("dialog-act", "inform"),
    ]);
    let trace = decode(&fx.lm, &ctl, &fx.examples[1].history, &cfg).unwrap();
    let mut buf = Vec::new();
    write_trace_tsv(&mut buf, &trace, Some(&fx.vocab)).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], TRACE_HEADER);
    let expected: usize = trace.steps.iter().map(|s| s.num_candidates() * 2).sum();
    assert_eq!(lines.len() - 1, expected);
    assert!(lines[1..].iter().all(|l| l.split('\t').count() == 11));
    let chosen = lines[1..].iter().filter(|l| l.ends_with("\t1")).count();
    assert_eq!(chosen, trace.steps.len() * 2);
}

#[test]
fn configuration_errors() {
    let fx = fixture::<f64>(100, 15);
    let ctl = [Controller::new("emotion", &fx.emotion)];
    let h = &fx.examples[0].history;
    let bad_attr = DecodeConfig::default().with_targets(vec![Target::new("topic", "x")]);
    assert!(matches!(
        decode(&fx.lm, &ctl, h, &bad_attr),
        Err(Error::UnknownAttribute(_))
    ));
    let bad_class = DecodeConfig::default().with_targets(vec![Target::new("emotion", "joy")]);
    assert!(matches!(
        decode(&fx.lm, &ctl, h, &bad_class),
        Err(Error::UnknownClass(_))
    ));
    let mut big_k = DecodeConfig::default().with_targets(targets());
    big_k.k = fx.lm.vocab_size() + 1;
    assert!(decode(&fx.lm, &ctl, h, &big_k).is_err());
}

#[test]
fn single_precision_decodes() {
    let fx = fixture::<f32>(200, 16);
    let ctl = [Controller::new("emotion", &fx.emotion)];
    let cfg = DecodeConfig::<f32>::default().with_targets(targets());
    let t = decode(&fx.lm, &ctl, &fx.examples[0].history, &cfg).unwrap();
    assert!(!t.response.is_empty());
    assert!(t
        .steps
        .iter()
        .all(|s| s.alpha_lm > 1.0 && s.alpha_lm <= 2.0));
}
