use proptest::prelude::*;
use qcmc_core::chirotope::{self, PartialChirotope};
use qcmc_core::entropy::{entropy_rates, kl_discrete, FiniteChain};
use qcmc_core::graph::{center, hooke_potential, Conformation, WeightedGraph};
use qcmc_core::jumpproc::{self, ProcessConfig, ProcessKind};
use qcmc_core::SimRng;

fn normalized(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n)
}

/// A reversible chain: every off-diagonal entry positive, rows scaled so the
/// diagonal absorbs the remainder.
fn chain(states: usize) -> impl Strategy<Value = FiniteChain> {
    (prop::collection::vec(0.01f64..1.0, states * states), weights(states)).prop_map(move |(raw, mu)| {
        let mut p = vec![0.0; states * states];
        for x in 0..states {
            let off: f64 = (0..states).filter(|&y| y != x).map(|y| raw[x * states + y]).sum();
            for y in 0..states {
                if y != x {
                    p[x * states + y] = 0.9 * raw[x * states + y] / off;
                }
            }
            let rest: f64 = (0..states).filter(|&y| y != x).map(|y| p[x * states + y]).sum();
            p[x * states + x] = 1.0 - rest;
        }
        FiniteChain::new(p, normalized(&mu)).unwrap()
    })
}

fn rotation(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

fn apply(r: &[[f64; 3]; 3], shift: &[f64; 3], p: &[f64]) -> Vec<f64> {
    (0..3).map(|i| r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2] + shift[i]).collect()
}

fn moved(conf: &Conformation, r: &[[f64; 3]; 3], shift: &[f64; 3]) -> Conformation {
    let points: Vec<Vec<f64>> = (0..conf.len()).map(|u| apply(r, shift, conf.point(u))).collect();
    Conformation::from_points(3, &points).unwrap()
}

fn random_graph(vertices: usize, lengths: &[f64]) -> WeightedGraph {
    let mut g = WeightedGraph::new(vertices, 3).unwrap();
    let mut k = 0;
    for u in 0..vertices {
        for v in u + 1..vertices {
            if (u + v) % 2 == 1 || v == u + 1 {
                g.add_edge(u, v, lengths[k % lengths.len()], 0.5 + lengths[(k + 1) % lengths.len()]).unwrap();
                k += 1;
            }
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gibbs_inequality(n in 1usize..12, seed in any::<u32>()) {
        let mut rng = SimRng::new(seed);
        let p = normalized(&(0..n).map(|_| rng.next_uniform() + 1e-3).collect::<Vec<_>>());
        let q = normalized(&(0..n).map(|_| rng.next_uniform() + 1e-3).collect::<Vec<_>>());
        prop_assert!(kl_discrete(&p, &q).unwrap() >= 0.0);
        prop_assert!(kl_discrete(&p, &p).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn production_is_nonnegative(c in (2usize..6).prop_flat_map(chain)) {
        prop_assert!(entropy_rates(&c).unwrap().production >= -1e-15);
    }

    #[test]
    fn point_mass_flow_is_local_divergence(c in (2usize..6).prop_flat_map(chain), pick in any::<prop::sample::Index>()) {
        let s = c.states();
        let x = pick.index(s);
        let mut delta = vec![0.0; s];
        delta[x] = 1.0;
        let flow = entropy_rates(&c.with_distribution(delta).unwrap()).unwrap().flow;
        let kl = kl_discrete(c.row(x), &c.column(x)).unwrap();
        prop_assert!((flow - kl * std::f64::consts::LN_2).abs() <= 1e-12 * (1.0 + flow.abs()));
    }

    #[test]
    fn center_is_rigid_motion_equivariant(
        vertices in 2usize..8,
        coords in prop::collection::vec(-3.0f64..3.0, 24),
        lengths in prop::collection::vec(0.5f64..2.0, 8),
        axis in prop::array::uniform3(-1.0f64..1.0).prop_filter("nonzero axis", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-2),
        angle in -3.1f64..3.1,
        shift in prop::array::uniform3(-5.0f64..5.0),
    ) {
        let g = random_graph(vertices, &lengths);
        let conf = Conformation::from_flat(3, coords[..3 * vertices].to_vec()).unwrap();
        let r = rotation(axis, angle);
        let image = moved(&conf, &r, &shift);
        for u in 0..vertices {
            let expected = apply(&r, &shift, &center(&g, &conf, u));
            let got = center(&g, &image, u);
            for k in 0..3 {
                prop_assert!((expected[k] - got[k]).abs() <= 1e-10, "u={u} {expected:?} {got:?}");
            }
        }
        let (e0, e1) = (hooke_potential(&g, &conf), hooke_potential(&g, &image));
        prop_assert!((e0 - e1).abs() <= 1e-10 * (1.0 + e0));
    }

    #[test]
    fn exact_embedding_is_fixed(coords in prop::collection::vec(-3.0f64..3.0, 15)) {
        let conf = Conformation::from_flat(3, coords).unwrap();
        let mut g = WeightedGraph::new(5, 3).unwrap();
        for u in 0..5 {
            for v in u + 1..5 {
                let d = qcmc_core::geom::dist(conf.point(u), conf.point(v));
                prop_assume!(d > 1e-3);
                g.add_edge(u, v, d, 1.0).unwrap();
            }
        }
        for u in 0..5 {
            let c = center(&g, &conf, u);
            for k in 0..3 {
                prop_assert!((c[k] - conf.point(u)[k]).abs() <= 1e-12 * (1.0 + conf.point(u)[k].abs()));
            }
        }
    }

    #[test]
    fn ball_sampler_stays_inside(seed in any::<u32>(), dim in 1usize..6) {
        let mut rng = SimRng::new(seed);
        for _ in 0..200 {
            let v = rng.random_unit_ball_vector(dim);
            prop_assert!(qcmc_core::geom::norm(&v) <= 1.0);
        }
    }

    #[test]
    fn alternating_closure(
        tuple in prop::sample::subsequence((0..12usize).collect::<Vec<_>>(), 4).prop_shuffle(),
        sign in prop::sample::select(vec![-1i8, 1]),
        perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let mut chi = PartialChirotope::new(4);
        chi.insert(&tuple, sign).unwrap();
        let permuted: Vec<usize> = perm.iter().map(|&i| tuple[i]).collect();
        let mut p = perm.clone();
        let parity = chirotope::sort_with_parity(&mut p);
        prop_assert_eq!(chi.query(&permuted), Some(parity * sign));
    }

    #[test]
    fn reflection_flips_orientation(coords in prop::collection::vec(-3.0f64..3.0, 15), axis in 0usize..3) {
        let conf = Conformation::from_flat(3, coords.clone()).unwrap();
        let mirrored: Vec<f64> = coords.iter().enumerate().map(|(i, &x)| if i % 3 == axis { -x } else { x }).collect();
        let mirror = Conformation::from_flat(3, mirrored).unwrap();
        for t in [[0, 1, 2, 3], [0, 1, 2, 4], [1, 2, 3, 4], [4, 2, 0, 3]] {
            let det = chirotope::orientation_det(&conf, &t).unwrap();
            prop_assume!(det.abs() > 1e-6);
            prop_assert_eq!(chirotope::chi_of_points(&mirror, &t).unwrap(), -chirotope::chi_of_points(&conf, &t).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn fully_directed_process_never_flips_backward(seed in any::<u32>(), kind in prop::sample::select(vec![ProcessKind::N, ProcessKind::W])) {
        let stats = jumpproc::run(&ProcessConfig::new(kind, 8, 2, 1.0), 2_000, seed).unwrap();
        prop_assert_eq!(stats.backward_flips, 0);
    }
}
