mod common;

use mio_odometry::model::{ModelParams, Recording, Sample, Tensor, TEMPORAL_HIDDEN};
use mio_odometry::sim::routes;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Looser step than the acceptance run, on a different walk. With a smaller
// step fewer stencils cross a ReLU kink, so nearly everything is compared.
#[test]
fn analytic_gradients_match_small_step_differences() {
    let seq = common::walk(routes::EAST_BEDROOM, 20.0, 7);
    let samples = common::samples(&seq);
    let params = common::toy_model(9);
    for c in common::gradient_check(&params, &samples[30..32], 1e-6, 64, 2) {
        assert!(c.checked > 0, "{}: every element skipped", c.name);
        assert!(c.rel_err < 1e-4, "{}: relative error {:e}", c.name, c.rel_err);
    }
}

#[test]
fn a_broken_gradient_is_caught() {
    let seq = common::walk(routes::LIVING_LOOP, 20.0, 3);
    let samples = common::samples(&seq);
    let params = common::toy_model(4);
    let worst = common::gradient_check_with(&params, &samples[20..22], 1e-5, 32, 1, |name, grad| {
        if name == "fc2.weight" {
            grad.iter_mut().for_each(|g| *g *= 1.01);
        }
    });
    let fc2 = worst.iter().find(|c| c.name == "fc2.weight").unwrap();
    assert!(fc2.rel_err > 1e-3, "tampered gradient passed: {:e}", fc2.rel_err);
}

fn run(params: &ModelParams, window: &[Sample], h0: &Tensor) -> (f64, Vec<bool>, Recording) {
    let mut rec = Recording::new();
    let mut h = h0.clone();
    let mut total = 0.0;
    for s in window {
        let (_, next) = rec.step(params, &s.pair, &s.imu, &h).unwrap();
        total += rec.attach_loss(&s.target, common::LAMBDA, 1.0).unwrap();
        h = next;
    }
    let pattern = rec.relu_pattern();
    (total, pattern, rec)
}

#[derive(Default)]
struct Agreement {
    diff2: f64,
    a2: f64,
    n2: f64,
    checked: usize,
    kinked: usize,
}

impl Agreement {
    fn rel_err(&self) -> f64 {
        let d = self.a2.sqrt().max(self.n2.sqrt());
        if d < 1e-12 {
            0.0
        } else {
            self.diff2.sqrt() / d
        }
    }
}

/// Central difference of the window loss while `poke` moves one input value
/// by the given amount.
fn probe(
    params: &ModelParams,
    window: &mut [Sample],
    h0: &mut Tensor,
    base: &[bool],
    analytic: f64,
    acc: &mut Agreement,
    mut poke: impl FnMut(&mut [Sample], &mut Tensor, f64),
) {
    const STEP: f64 = 1e-5;
    poke(window, h0, STEP);
    let (lp, pp, _) = run(params, window, h0);
    poke(window, h0, -2.0 * STEP);
    let (lm, pm, _) = run(params, window, h0);
    poke(window, h0, STEP);
    if pp != base || pm != base {
        acc.kinked += 1;
        return;
    }
    let numeric = (lp - lm) / (2.0 * STEP);
    acc.diff2 += (analytic - numeric).powi(2);
    acc.a2 += analytic * analytic;
    acc.n2 += numeric * numeric;
    acc.checked += 1;
}

#[test]
fn input_gradients_match_central_differences() {
    for seed in 1..=5u64 {
        let seq = common::walk(routes::LIVING_LOOP, 20.0, 200 + seed);
        let mut window = common::samples(&seq)[40..43].to_vec();
        let params = common::toy_model(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h0 = Tensor::vector((0..TEMPORAL_HIDDEN).map(|_| rng.gen_range(-0.5..0.5)).collect());
        let (_, base, rec) = run(&params, &window, &h0);
        let grads = rec.backward(&mut params.clone()).unwrap();

        let mut pixels = Agreement::default();
        for k in 0..window.len() {
            let g = &grads.pairs[k];
            let mut order: Vec<usize> = (0..g.len()).collect();
            order.sort_by(|&a, &b| g[b].abs().total_cmp(&g[a].abs()));
            let mut pick = order[..16].to_vec();
            pick.extend(order[16..].choose_multiple(&mut rng, 32));
            for j in pick {
                probe(&params, &mut window, &mut h0, &base, g[j], &mut pixels, |w, _, d| {
                    w[k].pair.data_mut()[j] += d
                });
            }
        }

        let mut imu = Agreement::default();
        for k in 0..window.len() {
            for i in 0..window[k].imu.len() {
                for c in 0..6 {
                    probe(&params, &mut window, &mut h0, &base, grads.imu[k][i][c], &mut imu, |w, _, d| {
                        let s = &mut w[k].imu[i];
                        if c < 3 {
                            s.gyro[c] += d
                        } else {
                            s.accel[c - 3] += d
                        }
                    });
                }
            }
        }

        let mut hidden = Agreement::default();
        for j in 0..TEMPORAL_HIDDEN {
            probe(&params, &mut window, &mut h0, &base, grads.initial_hidden[j], &mut hidden, |_, h, d| {
                h.data_mut()[j] += d
            });
        }

        for (name, acc) in [("pair", &pixels), ("imu", &imu), ("initial hidden", &hidden)] {
            assert!(acc.checked > 0, "seed {seed} {name}: nothing checked");
            assert!(acc.a2 > 0.0, "seed {seed} {name}: vanishing gradient");
            assert!(
                acc.rel_err() <= 1e-4,
                "seed {seed} {name}: relative error {:e} ({} kinked)",
                acc.rel_err(),
                acc.kinked
            );
        }
    }
}
