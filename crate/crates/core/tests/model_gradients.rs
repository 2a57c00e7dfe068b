mod common;

use common::{finite_differences, max_relative_error, random_example, rng, tiny_dims, tiny_model};

#[test]
fn analytic_gradients_match_finite_differences() {
    let model = tiny_model(8, 11, 3);
    let mut r = rng(7);
    let dims = tiny_dims(11);
    let batch = vec![random_example(&mut r, &dims, 5, 4), random_example(&mut r, &dims, 3, 6)];
    let mut worst: (f64, String) = (0.0, String::new());
    let groups = finite_differences(&model, &batch, 1e-4);
    assert_eq!(groups.len(), model.params.named().len());
    for (name, a, n) in groups {
        assert!(a.iter().all(|x| x.is_finite()), "{name}");
        let e = max_relative_error(&a, &n);
        if e > worst.0 {
            worst = (e, name);
        }
    }
    eprintln!("worst relative error {:.3e} in {}", worst.0, worst.1);
    assert!(worst.0 < 1e-3, "{worst:?}");
}

#[test]
fn dropout_path_gradients_match_with_fixed_masks() {
    let mut model = tiny_model(8, 9, 4);
    model.config.dropout = 0.3;
    let mut r = rng(8);
    let dims = tiny_dims(9);
    let batch = vec![random_example(&mut r, &dims, 4, 3)];
    let masks = rng(99);
    let (_, grads) = model.loss_and_grad(&batch, Some(&mut masks.clone())).unwrap();
    let mut probe = model.clone();
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for (k, (_, g)) in grads.named().into_iter().enumerate() {
        let g: Vec<f64> = g.iter().copied().collect();
        for (i, &a) in g.iter().enumerate().step_by(3) {
            let orig = probe.params.tensors_mut()[k].as_slice_mut().unwrap()[i];
            probe.params.tensors_mut()[k].as_slice_mut().unwrap()[i] = orig + h;
            let plus = probe.loss_and_grad(&batch, Some(&mut masks.clone())).unwrap().0;
            probe.params.tensors_mut()[k].as_slice_mut().unwrap()[i] = orig - h;
            let minus = probe.loss_and_grad(&batch, Some(&mut masks.clone())).unwrap().0;
            probe.params.tensors_mut()[k].as_slice_mut().unwrap()[i] = orig;
            worst = worst.max(max_relative_error(&[a], &[(plus - minus) / (2.0 * h)]));
        }
    }
    assert!(worst < 1e-3, "{worst}");
}
