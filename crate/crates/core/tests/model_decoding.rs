mod common;

use chart2text::encoding::BOS;
use chart2text::model::{beam_decode, greedy_decode, Encoded, Model};
use common::{exhaustive, random_records, rng, standard_normal_model, tiny_dims, tiny_model};

#[test]
fn beam_one_is_greedy() {
    for seed in 0..50 {
        let model = tiny_model(8, 12, seed);
        let recs = random_records(&mut rng(seed + 1000), &tiny_dims(12), 1 + seed as usize % 5);
        assert_eq!(
            beam_decode(&model, &recs, 1, 12).unwrap(),
            greedy_decode(&model, &recs, 12).unwrap(),
            "seed {seed}"
        );
    }
}

#[test]
fn max_len_one_yields_one_token() {
    let model = tiny_model(8, 12, 1);
    let recs = random_records(&mut rng(2), &tiny_dims(12), 3);
    assert_eq!(beam_decode(&model, &recs, 4, 1).unwrap().len(), 1);
    assert_eq!(greedy_decode(&model, &recs, 1).unwrap().len(), 1);
}

fn score_of(model: &Model, enc: &Encoded, ids: &[u32]) -> f64 {
    let mut prefix = vec![BOS];
    let mut sum = 0.0;
    for &id in ids {
        sum += model.next_log_probs(enc, &prefix).unwrap()[id as usize];
        prefix.push(id);
    }
    sum / ids.len() as f64
}

#[test]
fn beam_four_matches_exhaustive_search_on_random_models() {
    for seed in 0..10 {
        let model = standard_normal_model(8, 12, seed);
        let recs = random_records(&mut rng(seed), &tiny_dims(12), 3);
        let enc = model.encode(&recs).unwrap();
        let (best, _) = exhaustive(&model, &enc, 5);
        assert_eq!(beam_decode(&model, &recs, 4, 5).unwrap(), best, "seed {seed}");
    }
}

#[test]
fn unpruned_beam_is_exact_and_pruned_beam_never_beats_the_optimum() {
    for seed in 0..5 {
        let model = tiny_model(8, 12, 100 + seed);
        let recs = random_records(&mut rng(seed), &tiny_dims(12), 3);
        let enc = model.encode(&recs).unwrap();
        let (best, sum) = exhaustive(&model, &enc, 4);
        assert_eq!(beam_decode(&model, &recs, 10_000, 4).unwrap(), best);
        let beam = beam_decode(&model, &recs, 4, 4).unwrap();
        assert!(score_of(&model, &enc, &beam) <= sum / best.len() as f64 + 1e-12);
    }
}

#[test]
fn decoding_is_deterministic() {
    let model = tiny_model(8, 12, 3);
    let recs = random_records(&mut rng(3), &tiny_dims(12), 4);
    assert_eq!(beam_decode(&model, &recs, 4, 10).unwrap(), beam_decode(&model, &recs, 4, 10).unwrap());
}
