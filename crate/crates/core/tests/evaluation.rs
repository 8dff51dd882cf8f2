use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xsum_forge::lase_metric::correlation::correlate;
use xsum_forge::lase_metric::rouge::{rouge, RougeVariant};
use xsum_forge::lase_metric::{language_confidence, length_penalty, EvalConfig, LangIdTable, TextRecord, VectorTable};
use xsum_forge::synthetic::{evaluation_fixture, generate_corpus, Script, SynthConfig, Vocabulary};
use xsum_forge::*;

fn lang(s: &str) -> LangCode {
    LangCode::new(s).unwrap()
}

proptest! {
    #[test]
    fn length_penalty_is_monotone_and_bounded(len_ref in 0usize..200, len_gen in 0usize..400, c in 0u32..12) {
        let here = length_penalty(len_gen, len_ref, c);
        let next = length_penalty(len_gen + 1, len_ref, c);
        prop_assert!((0.0..=1.0).contains(&here));
        prop_assert!(next <= here);
        prop_assert_eq!(here == 1.0, len_gen <= len_ref + c as usize);
    }

    #[test]
    fn language_confidence_is_bounded(ws in prop::collection::vec(0.0f64..1.0, 1..6), pick in 0usize..6) {
        prop_assume!(ws.iter().sum::<f64>() > 0.0);
        let total: f64 = ws.iter().sum();
        let codes: Vec<LangCode> = (0..ws.len()).map(|i| lang(&format!("x{i}"))).collect();
        let probs: BTreeMap<LangCode, f64> = codes.iter().cloned().zip(ws.iter().map(|w| w / total)).collect();
        let dist = LangIdDistribution::new(probs).unwrap();
        let target = &codes[pick % codes.len()];
        let lc = language_confidence(&dist, target);
        prop_assert!((0.0..=1.0).contains(&lc));
        prop_assert!(lc >= dist.prob(target));
    }

    #[test]
    fn rouge_f1_is_symmetric(a in "[a-d ]{0,30}", b in "[a-d ]{0,30}") {
        for v in [RougeVariant::N(1), RougeVariant::N(2), RougeVariant::L] {
            let x = rouge(&a, &b, v);
            let y = rouge(&b, &a, v);
            prop_assert!((x.f1 - y.f1).abs() < 1e-12);
            prop_assert!((x.precision - y.recall).abs() < 1e-12);
        }
    }

    #[test]
    fn self_correlation_is_one(xs in prop::collection::vec(-100.0f64..100.0, 2..40)) {
        let c = correlate(&xs, &xs).unwrap();
        match c.pearson {
            Some(p) => prop_assert!((p - 1.0).abs() < 1e-9),
            None => prop_assert!(xs.iter().all(|&x| x == xs[0])),
        }
        if let Some(s) = c.spearman {
            prop_assert!((s - 1.0).abs() < 1e-9);
        }
    }
}

fn fixture() -> (synthetic::SyntheticCorpus, synthetic::EvalFixture) {
    let synth = generate_corpus(&SynthConfig::bundled(13)).unwrap();
    let fx = evaluation_fixture(&synth, 90, 2);
    (synth, fx)
}

fn langid_for(synth: &synthetic::SyntheticCorpus) -> LangIdModel {
    LangIdModel::train(synth.documents.iter().map(|d| (&d.lang, d.text.as_str()))).unwrap()
}

#[test]
fn perfect_predictions_score_one() {
    let (synth, fx) = fixture();
    let model = langid_for(&synth);
    let vectors = VectorTable::new(fx.reference.clone(), fx.reference.clone()).unwrap();
    let preds: Vec<TextRecord> = fx.references.clone();
    let report = evaluate_run(&preds, &fx.references, &EvalConfig::default(), &model, &vectors).unwrap();
    assert_eq!(report.samples.len(), 90);
    for s in &report.samples {
        assert_eq!(s.lc, 1.0, "{}", s.id);
        assert_eq!(s.lp, 1.0);
        assert!((s.lase - 1.0).abs() < 1e-6);
        assert!((s.rouge2.f1 - 1.0).abs() < 1e-12 || s.len_ref < 2);
    }
    assert!(report.aggregates.iter().all(|a| a.low_confidence));
}

#[test]
fn wrong_language_predictions_are_penalised() {
    let (synth, fx) = fixture();
    let model = langid_for(&synth);
    let vectors = VectorTable::new(fx.generated.clone(), fx.reference.clone()).unwrap();
    let report = evaluate_run(
        &fx.predictions,
        &fx.references,
        &EvalConfig::default(),
        &model,
        &vectors,
    )
    .unwrap();
    let mut echoes = 0;
    for (s, p) in report.samples.iter().zip(&fx.predictions) {
        assert_eq!(s.id, p.id);
        if p.src_lang.as_ref() != Some(&p.lang) && model.classify(&p.text).distribution.argmax() != Some(&p.lang) {
            echoes += 1;
            assert!(s.lc < 0.5, "{} lc {}", s.id, s.lc);
            assert!(s.lase < 0.5);
        }
    }
    assert!(echoes >= 25);
}

#[test]
fn evaluate_rejects_bad_inputs() {
    let (synth, fx) = fixture();
    let model = langid_for(&synth);
    let vectors = VectorTable::new(fx.generated.clone(), fx.reference.clone()).unwrap();
    let cfg = EvalConfig::default();
    assert!(evaluate_run(&[], &fx.references, &cfg, &model, &vectors).is_err());
    let refs = &fx.references[2..];
    match evaluate_run(&fx.predictions, refs, &cfg, &model, &vectors) {
        Err(Error::MissingReferences(ids)) => assert_eq!(ids, vec!["e00000".to_string(), "e00001".to_string()]),
        other => panic!("{other:?}"),
    }
    let table = LangIdTable::from_records(Vec::new()).unwrap();
    assert!(matches!(
        evaluate_run(&fx.predictions, &fx.references, &cfg, &table, &vectors),
        Err(Error::UnknownId(_))
    ));
}

#[test]
fn latin_and_cyrillic_are_separated_on_held_out_lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (en, ru) = (lang("en"), lang("ru"));
    let vocab = [
        (en.clone(), Vocabulary::generate(Script::Latin, 400, &mut rng)),
        (ru.clone(), Vocabulary::generate(Script::Cyrillic, 400, &mut rng)),
    ];
    let line = |v: &Vocabulary, rng: &mut ChaCha8Rng| {
        let idx: Vec<usize> = (0..rng.random_range(3..12)).map(|_| rng.random_range(0..400)).collect();
        v.render(&idx)
    };
    let train: Vec<(LangCode, String)> = (0..400)
        .map(|k| (vocab[k % 2].0.clone(), line(&vocab[k % 2].1, &mut rng)))
        .collect();
    let model = LangIdModel::train(train.iter().map(|(l, t)| (l, t.as_str()))).unwrap();
    let mut correct = 0;
    for k in 0..100 {
        let (l, v) = &vocab[k % 2];
        if model.classify(&line(v, &mut rng)).distribution.argmax() == Some(l) {
            correct += 1;
        }
    }
    assert!(correct >= 99, "{correct}/100");
}
