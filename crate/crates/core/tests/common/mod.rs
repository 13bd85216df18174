//! Brute-force point-queue reference, shared by the simulator tests and the
//! acceptance run. It keeps only integer counts per lane and its own copy of
//! the phase machine, stepping the queue recurrence one second at a time.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsc_lab::sim::{FlowProfile, IntersectionLayout, PhasePlan, SimState, NUM_LANES, NUM_PHASES, PHASE_LANES};

/// Scripted demand and decisions for a small deterministic run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub plan: PhasePlan,
    /// (entry clock, lane) of each injected vehicle.
    pub arrivals: Vec<(u64, usize)>,
    /// Consumed in order, one per decision point, cycling when exhausted.
    pub actions: Vec<usize>,
    pub cycles: u64,
}

impl Scenario {
    /// At most 20 vehicles and 3 cycles, random greens and decisions.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plan = PhasePlan {
            default_green_s: std::array::from_fn(|_| rng.random_range(10..=25)),
            ..PhasePlan::default()
        };
        let n = rng.random_range(1..=20);
        let mut arrivals: Vec<(u64, usize)> =
            (0..n).map(|_| (rng.random_range(0..150), rng.random_range(0..NUM_LANES))).collect();
        arrivals.sort();
        let actions = (0..40).map(|_| rng.random_range(0..3)).collect();
        Scenario { plan, arrivals, actions, cycles: rng.random_range(1..=3) }
    }
}

/// Per-tick lane queues from the simulator under the scenario.
pub fn simulator_queues(s: &Scenario) -> Vec<[usize; NUM_LANES]> {
    let mut sim = SimState::new(IntersectionLayout::default(), s.plan.clone(), FlowProfile::zero(), 0).unwrap();
    let mut out = Vec::new();
    let mut next_arrival = 0;
    let mut next_action = 0;
    while sim.cycles_completed() < s.cycles {
        while next_arrival < s.arrivals.len() && s.arrivals[next_arrival].0 == sim.clock() {
            sim.inject_arrival(s.arrivals[next_arrival].1);
            next_arrival += 1;
        }
        if sim.is_decision_point() {
            sim.apply_action(s.actions[next_action % s.actions.len()]).unwrap();
            next_action += 1;
        }
        out.push(sim.step().queues);
    }
    out
}

/// The same run recomputed from first principles.
pub fn brute_force_queues(s: &Scenario) -> Vec<[usize; NUM_LANES]> {
    let layout = IntersectionLayout::default();
    let headway = (layout.saturation_headway_s * 1000.0).round() as u64;
    let travel = layout.travel_time_to_stopline_s as u64;
    let plan = &s.plan;

    let mut queue = [0usize; NUM_LANES];
    let mut credit = [0u64; NUM_LANES];
    let mut phase = 0usize;
    let mut green_elapsed = 0u32;
    let mut yellow: Option<u32> = None;
    let mut greens = plan.default_green_s;
    let mut cycles = 0;
    let mut next_action = 0;
    let mut out = Vec::new();

    let mut t = 0u64;
    while cycles < s.cycles {
        // decisions come before the tick's dynamics
        let at_decision = yellow.is_none()
            && green_elapsed >= plan.g_min_s
            && (green_elapsed - plan.g_min_s).is_multiple_of(plan.delta_time_s);
        if at_decision {
            match s.actions[next_action % s.actions.len()] {
                0 => {
                    greens[phase] = green_elapsed;
                    yellow = Some(0);
                }
                2 => greens[phase] = (greens[phase] + plan.delta_time_s).min(plan.g_max_s),
                _ => {}
            }
            next_action += 1;
        }

        let serving = yellow.is_none() && green_elapsed >= layout.startup_lost_time_s;
        let is_served = |l: usize| serving && PHASE_LANES[phase].contains(&l);
        for l in 0..NUM_LANES {
            if is_served(l) {
                credit[l] += 1000;
            }
            let reaching = s.arrivals.iter().filter(|&&(c, lane)| lane == l && c + travel == t).count();
            for _ in 0..reaching {
                if is_served(l) && queue[l] == 0 && credit[l] >= headway {
                    credit[l] -= headway;
                } else {
                    queue[l] += 1;
                }
            }
        }
        for l in 0..NUM_LANES {
            if is_served(l) {
                while credit[l] >= headway && queue[l] > 0 {
                    credit[l] -= headway;
                    queue[l] -= 1;
                }
                if queue[l] == 0 {
                    credit[l] = credit[l].min(headway);
                }
            }
        }

        match yellow {
            Some(y) if y + 1 >= plan.yellow_s => {
                for &l in &PHASE_LANES[phase] {
                    credit[l] = 0;
                }
                yellow = None;
                green_elapsed = 0;
                phase += 1;
                if phase == NUM_PHASES {
                    phase = 0;
                    cycles += 1;
                    greens = plan.default_green_s;
                }
            }
            Some(y) => yellow = Some(y + 1),
            None => {
                green_elapsed += 1;
                if green_elapsed >= greens[phase] {
                    yellow = Some(0);
                }
            }
        }
        out.push(queue);
        t += 1;
    }
    out
}

pub mod gradcheck {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use tsc_lab::agents::{ppo_surrogate, MiniBatch, PpoConfig};
    use tsc_lab::nn::{actor_critic_sizes, log_softmax, Activation, GradientTape, Mlp, TANH_TRUNK};
    use tsc_lab::repr::EXPANDED_DIM;

    pub const H: f64 = 1e-5;

    /// Relative error with a floor so that two near-zero gradients agree.
    pub fn rel_err(a: f64, n: f64) -> f64 {
        (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
    }

    /// Max relative error between `analytic` and central differences of
    /// `loss` over the parameter indices `which`.
    pub fn max_rel_error(params: &[f64], analytic: &[f64], which: &[usize], loss: impl Fn(&[f64]) -> f64) -> f64 {
        let mut p = params.to_vec();
        let mut worst: f64 = 0.0;
        for &i in which {
            let x = p[i];
            p[i] = x + H;
            let up = loss(&p);
            p[i] = x - H;
            let down = loss(&p);
            p[i] = x;
            worst = worst.max(rel_err(analytic[i], (up - down) / (2.0 * H)));
        }
        worst
    }

    fn with_params(net: &Mlp, p: &[f64]) -> Mlp {
        let mut n = net.clone();
        n.set_params(p).unwrap();
        n
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    /// Linear functional `c . net(x)` of a 2x64 tanh network.
    pub fn actor_critic(seed: u64, outputs: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Mlp::new(&actor_critic_sizes(EXPANDED_DIM, outputs), &TANH_TRUNK, 1.0, seed).unwrap();
        let x = random_vec(&mut rng, EXPANDED_DIM);
        let c = random_vec(&mut rng, outputs);
        let mut tape = GradientTape::for_net(&net);
        net.forward_tape(&x, &mut tape).unwrap();
        net.backward(&mut tape, &c).unwrap();
        let all: Vec<usize> = (0..net.num_params()).collect();
        max_rel_error(net.params(), tape.grads(), &all, |p| {
            with_params(&net, p).forward(&x).unwrap().iter().zip(&c).map(|(o, c)| o * c).sum()
        })
    }

    /// Summed squared reconstruction error of a 19-32-k-32-19 autoencoder,
    /// checked on encoder and decoder parameters.
    pub fn autoencoder(seed: u64, latent: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let acts = [Activation::Relu, Activation::Linear];
        let enc = Mlp::new(&[EXPANDED_DIM, 32, latent], &acts, 1.0, seed).unwrap();
        let dec = Mlp::new(&[latent, 32, EXPANDED_DIM], &acts, 1.0, seed + 1).unwrap();
        let x = random_vec(&mut rng, EXPANDED_DIM);
        let loss = |e: &Mlp, d: &Mlp| {
            let y = d.forward(&e.forward(&x).unwrap()).unwrap();
            y.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        };
        let (mut te, mut td) = (GradientTape::for_net(&enc), GradientTape::for_net(&dec));
        let z = enc.forward_tape(&x, &mut te).unwrap();
        let y = dec.forward_tape(&z, &mut td).unwrap();
        let g: Vec<f64> = y.iter().zip(&x).map(|(a, b)| 2.0 * (a - b)).collect();
        let dz = dec.backward(&mut td, &g).unwrap();
        enc.backward(&mut te, &dz).unwrap();
        let e_all: Vec<usize> = (0..enc.num_params()).collect();
        let d_all: Vec<usize> = (0..dec.num_params()).collect();
        let ee = max_rel_error(enc.params(), te.grads(), &e_all, |p| loss(&with_params(&enc, p), &dec));
        let de = max_rel_error(dec.params(), td.grads(), &d_all, |p| loss(&enc, &with_params(&dec, p)));
        ee.max(de)
    }

    /// Full PPO loss (clipped surrogate, value regression, entropy bonus)
    /// on a random minibatch, checked on `n_checked` random parameters of
    /// each network.
    pub fn ppo_loss(seed: u64, n_checked: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = Mlp::new(&actor_critic_sizes(EXPANDED_DIM, 3), &TANH_TRUNK, 1.0, seed).unwrap();
        let value = Mlp::new(&actor_critic_sizes(EXPANDED_DIM, 1), &TANH_TRUNK, 1.0, seed + 1).unwrap();
        let n = 8;
        let obs: Vec<Vec<f64>> = (0..n).map(|_| random_vec(&mut rng, EXPANDED_DIM)).collect();
        let actions: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        // old policy a small perturbation away, so both clip branches occur
        let old_log_probs = obs
            .iter()
            .zip(&actions)
            .map(|(o, &a)| log_softmax(&policy.forward(o).unwrap())[a] + rng.random_range(-0.3..0.3))
            .collect();
        let batch = MiniBatch {
            obs,
            actions,
            old_log_probs,
            advantages: random_vec(&mut rng, n),
            returns: random_vec(&mut rng, n),
        };
        let cfg = PpoConfig::default();
        let out = ppo_surrogate(&batch, &policy, &value, &cfg).unwrap();
        let pick = |rng: &mut ChaCha8Rng, total: usize| -> Vec<usize> {
            (0..n_checked.min(total)).map(|_| rng.random_range(0..total)).collect()
        };
        let pi = pick(&mut rng, policy.num_params());
        let vi = pick(&mut rng, value.num_params());
        let pe = max_rel_error(policy.params(), &out.policy_grads, &pi, |p| {
            ppo_surrogate(&batch, &with_params(&policy, p), &value, &cfg).unwrap().loss
        });
        let ve = max_rel_error(value.params(), &out.value_grads, &vi, |p| {
            ppo_surrogate(&batch, &policy, &with_params(&value, p), &cfg).unwrap().loss
        });
        pe.max(ve)
    }
}
