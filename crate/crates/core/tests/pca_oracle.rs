use plateau_lab::PcaModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn rank2_data(seed: u64, rows: usize, noise: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Vec<f64>> = (0..2).map(|_| (0..64).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
    let offset: Vec<f64> = (0..64).map(|_| rng.gen_range(0.0..16.0)).collect();
    (0..rows)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let a = 3.0 * a;
            let b: f64 = StandardNormal.sample(&mut rng);
            (0..64)
                .map(|j| {
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    offset[j] + a * dirs[0][j] + b * dirs[1][j] + noise * eps
                })
                .collect()
        })
        .collect()
}

#[test]
fn rank_two_data_is_captured_by_two_components() {
    let rows = rank2_data(5, 300, 1e-6);
    let p = PcaModel::fit(&rows, 2).unwrap();
    assert!(p.explained_ratio() >= 0.999, "ratio {}", p.explained_ratio());
    assert!(p.explained_variances[0] >= p.explained_variances[1]);
}

#[test]
fn components_are_orthonormal_and_sorted() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rows: Vec<Vec<f64>> = (0..200).map(|_| (0..64).map(|j| rng.gen_range(0.0..1.0 + j as f64 / 8.0)).collect()).collect();
    let p = PcaModel::fit(&rows, 12).unwrap();
    for i in 0..12 {
        for j in 0..12 {
            let dot: f64 = p.components[i].iter().zip(&p.components[j]).map(|(a, b)| a * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((dot - want).abs() < 1e-8, "gram[{i}][{j}] = {dot}");
        }
        let c = &p.components[i];
        let big = c.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        assert!(big > 0.0);
    }
    assert!(p.explained_variances.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn projection_matches_dense_product_and_reconstructs() {
    let rows = rank2_data(7, 120, 0.0);
    let p = PcaModel::fit(&rows, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let x: Vec<f64> = (0..64).map(|_| rng.gen_range(-5.0..20.0)).collect();
        let y = p.transform(&x).unwrap();
        for (k, comp) in p.components.iter().enumerate() {
            let mut acc = 0.0;
            for j in 0..64 {
                acc += comp[j] * x[j] - comp[j] * p.mean[j];
            }
            assert!((y[k] - acc).abs() < 1e-10);
        }
    }
    for row in &rows {
        let back = p.inverse_transform(&p.transform(row).unwrap()).unwrap();
        for (a, b) in back.iter().zip(row) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}

#[test]
fn fit_uses_only_the_rows_given() {
    let rows = rank2_data(9, 60, 0.1);
    let (train, test) = rows.split_at(45);
    let p = PcaModel::fit(train, 3).unwrap();
    let again = PcaModel::fit(&rows[..45], 3).unwrap();
    assert_eq!(p, again);
    let all = PcaModel::fit(&rows, 3).unwrap();
    assert_ne!(p.mean, all.mean);
    assert_eq!(p.transform(&test[0]).unwrap().len(), 3);
}
