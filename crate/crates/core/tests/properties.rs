use deepagent::audio::AudioEmbedding;
use deepagent::fusion::{stratified_kfold, ForestConfig, ForestModel};
use deepagent::metrics::{confusion, macro_f1, roc_auc};
use deepagent::nn::{softmax, Tensor};
use deepagent::par::Exec;
use deepagent::pipeline::FeatureCache;
use deepagent::semantic::{build_feature, lexical_similarity, tokenize, TokenSet};
use deepagent::vision::{resize_bilinear, Frame};
use proptest::prelude::*;

fn token_set() -> impl Strategy<Value = TokenSet> {
    prop::collection::btree_set("[a-e]{1,2}", 0..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn similarity_in_unit_interval(a in token_set(), v in token_set()) {
        let s = lexical_similarity(&a, &v);
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn feature_is_fourteen_finite_values(
        coeffs in prop::array::uniform13(-50.0f64..50.0),
        present in any::<bool>(),
        a in prop::option::of(token_set()),
        v in prop::option::of(token_set()),
    ) {
        let audio = if present { AudioEmbedding { coeffs, present } } else { AudioEmbedding::absent() };
        let f = build_feature(&audio, a.as_ref(), v.as_ref());
        prop_assert_eq!(f.x.len(), 14);
        prop_assert!(f.x.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn tokens_are_lowercase_alphanumeric(text in ".{0,40}") {
        for t in tokenize(&text) {
            prop_assert!(!t.is_empty());
            prop_assert!(t.chars().all(char::is_alphanumeric));
            prop_assert_eq!(t.to_lowercase(), t.clone());
        }
    }

    #[test]
    fn softmax_is_a_shift_invariant_distribution(z in prop::collection::vec(-30.0f64..30.0, 2..6), c in -10.0f64..10.0) {
        let p = softmax(&z);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
        for (a, b) in p.iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn accuracy_is_trace_over_n_and_macro_f1_symmetric(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..60)) {
        let (labels, preds): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let cm = confusion(&labels, &preds).unwrap();
        let trace = cm.tp + cm.tn;
        prop_assert_eq!(cm.accuracy().value, trace as f64 / labels.len() as f64);
        let flip = |v: &[u8]| v.iter().map(|&x| 1 - x).collect::<Vec<u8>>();
        let swapped = confusion(&flip(&labels), &flip(&preds)).unwrap();
        prop_assert!((macro_f1(&cm) - macro_f1(&swapped)).abs() < 1e-12);
    }

    #[test]
    fn auc_in_unit_interval(pairs in prop::collection::vec((0u8..2, 0.0f64..1.0), 2..80)) {
        let (labels, scores): (Vec<u8>, Vec<f64>) = pairs.into_iter().unzip();
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let auc = roc_auc(&labels, &scores).unwrap().auc;
        prop_assert!((0.0..=1.0).contains(&auc));
    }

    #[test]
    fn stratified_folds_partition_and_balance(labels in prop::collection::vec(0u8..2, 10..120), seed in any::<u64>()) {
        let ones = labels.iter().filter(|&&y| y == 1).count();
        prop_assume!(ones >= 5 && labels.len() - ones >= 5);
        let folds = stratified_kfold(&labels, 5, seed).unwrap();
        let mut seen = vec![0; labels.len()];
        for f in &folds {
            prop_assert_eq!(f.train.len() + f.validation.len(), labels.len());
            for &i in &f.validation {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        for class in [0u8, 1] {
            let n_c = labels.iter().filter(|&&y| y == class).count() as f64;
            for f in &folds {
                let c = f.validation.iter().filter(|&&i| labels[i] == class).count() as f64;
                prop_assert!((c - n_c / 5.0).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn forest_probability_in_unit_interval(
        rows in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0u8..2), 6..40),
        z in (-2.0f64..3.0, -2.0f64..3.0),
    ) {
        let labels: Vec<u8> = rows.iter().map(|r| r.2).collect();
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let x: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.0, r.1]).collect();
        let cfg = ForestConfig { trees: 9, ..ForestConfig::default() };
        let forest = ForestModel::fit(&x, &labels, &cfg, Exec::Sequential).unwrap();
        let (p, label) = forest.predict(&[z.0, z.1]).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert_eq!(label, u8::from(p >= 0.5));
    }

    #[test]
    fn cache_round_trip_is_bit_exact(values in prop::collection::vec(any::<f64>(), 1..40)) {
        let mut cache = FeatureCache::default();
        cache.put_f64("x/a", vec![values.len()], &values);
        let back = FeatureCache::decode(&cache.encode()).unwrap();
        let got = back.get_f64("x/a").unwrap();
        prop_assert_eq!(got.len(), values.len());
        for (a, b) in got.iter().zip(&values) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn resizing_a_constant_image_keeps_it_constant(w in 1usize..12, h in 1usize..12, dw in 1usize..12, dh in 1usize..12, c in 0.0f64..255.0) {
        let f = Frame::filled(w, h, 3, c);
        let out = resize_bilinear(&f, dw, dh);
        prop_assert!(out.pixels.iter().all(|&p| (p - c).abs() < 1e-9));
    }

    #[test]
    fn tensor_stack_preserves_rows(rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..6)) {
        let ts: Vec<Tensor<f64>> = rows.iter().map(|r| Tensor::new(vec![3], r.clone()).unwrap()).collect();
        let s = Tensor::stack(&ts).unwrap();
        prop_assert_eq!(s.shape(), &[rows.len(), 3][..]);
        prop_assert_eq!(s.data().to_vec(), rows.concat());
    }
}
