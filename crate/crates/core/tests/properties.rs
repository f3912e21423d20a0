use chanfsi_core::fields::tensor::{adjugate_defect, cofactor3, max_abs3, Mat3};
use chanfsi_core::fields::{make_cutoff, Deriv};
use chanfsi_core::fsi::{random_member, CoupledProblem, InitialData, LinearData};
use chanfsi_core::geometry::{build_geometry, PlaneKind, Slab};
use chanfsi_core::norms::{slobodeckij_seminorm, spatial_fractional_norm, NormEngine, NormSpec};
use chanfsi_core::spectral::Fft2;
use chanfsi_core::stokes::{solve_stokes, StokesProblem};
use chanfsi_core::wave::{steps_for_cfl, WaveSolver};
use chanfsi_core::{ChannelGeometry, GeometryConfig, Layer, SpaceTimeField};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix() -> impl Strategy<Value = Mat3> {
    prop::array::uniform3(prop::array::uniform3(-2.0f64..2.0))
}

fn small_geometry(nt: usize) -> ChannelGeometry {
    build_geometry(&GeometryConfig::new([1.0, 2.0, 3.0], 8, 4, [6, 6, 6], nt)).unwrap()
}

fn trig_field(geom: &ChannelGeometry, layer: Layer, coeffs: [f64; 4], samples: usize) -> SpaceTimeField {
    SpaceTimeField::from_fn(geom, layer, 1, samples, |t, x, y, z, o| {
        o[0] = coeffs[0] + coeffs[1] * x.sin() * z + coeffs[2] * (2.0 * y).cos() + coeffs[3] * (t + z).sin()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cofactor_is_adjugate(m in matrix()) {
        let a = cofactor3(&m);
        let scale = max_abs3(&m);
        prop_assert!(adjugate_defect(&m, &a) <= 1e-12 * (1.0 + scale * scale));
    }

    #[test]
    fn geometry_tiles_the_channel(
        l1 in 0.5f64..2.0, e in 0.5f64..2.0, u in 0.5f64..2.0,
        nz in prop::array::uniform3(4usize..12),
    ) {
        let g = build_geometry(&GeometryConfig::new([l1, l1 + e, l1 + e + u], 4, 4, nz, 4)).unwrap();
        let mut zs: Vec<(f64, &str)> = (0..g.fluid_nz()).map(|i| (g.fluid_z(i), "fluid")).collect();
        zs.extend((0..g.elastic_nz()).map(|i| (g.elastic_z(i), "elastic")));
        zs.sort_by(|a, b| a.0.total_cmp(&b.0));
        prop_assert_eq!(zs.first().unwrap().0, 0.0);
        prop_assert!((zs.last().unwrap().0 - g.lengths()[2]).abs() < 1e-12);
        let mut shared = 0;
        for w in zs.windows(2) {
            let gap = w[1].0 - w[0].0;
            if gap.abs() < 1e-12 {
                shared += 1;
                prop_assert!(matches!(g.classify_plane(w[0].0), Some(PlaneKind::Interface(_))));
            } else {
                prop_assert!(gap > 0.0);
            }
        }
        prop_assert_eq!(shared, 2);
        for s in [Slab::LowerFluid, Slab::Elastic, Slab::UpperFluid] {
            let (a, b) = g.slab_bounds(s);
            prop_assert!(b > a);
        }
    }

    #[test]
    fn real_fields_round_trip(seed in any::<u64>(), nx_pow in 2u32..5, ny_pow in 2u32..5) {
        let (nx, ny) = (1usize << nx_pow, 1usize << ny_pow);
        let fft = Fft2::new(nx, ny);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<f64> = (0..nx * ny).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); fft.len()];
        fft.forward_real(&samples, &mut coeffs);
        let mut back = vec![0.0; nx * ny];
        fft.inverse_real(&coeffs, &mut back);
        for (a, b) in samples.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn slobodeckij_matches_pairwise_sum(
        f in prop::collection::vec(-1.0f64..1.0, 2..40),
        alpha in 0.05f64..0.95,
    ) {
        let h = 1.0 / (f.len() - 1) as f64;
        let mut oracle = 0.0;
        for i in 0..f.len() {
            for j in 0..f.len() {
                if i != j {
                    let d = ((i as f64 - j as f64).abs() * h).powf(1.0 + 2.0 * alpha);
                    oracle += h * h * (f[i] - f[j]).powi(2) / d;
                }
            }
        }
        let value = slobodeckij_seminorm(&f, h, alpha).unwrap();
        prop_assert!((value - oracle.sqrt()).abs() <= 1e-13 * (1.0 + oracle.sqrt()));
    }

    #[test]
    fn cutoff_profile_bounds(t_tilde in 1e-3f64..0.25, t in 0.0f64..1.0) {
        let psi = make_cutoff(t_tilde, 1.0).unwrap();
        let v = psi.value(t);
        prop_assert!((0.0..=1.0).contains(&v));
        if t <= t_tilde {
            prop_assert_eq!(v, 1.0);
        }
        if t >= 2.0 * t_tilde {
            prop_assert_eq!(v, 0.0);
        }
        prop_assert!(psi.derivative(t).abs() <= psi.derivative_bound() * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn norms_are_homogeneous(coeffs in prop::array::uniform4(-1.0f64..1.0), s in 0.0f64..2.5) {
        let g = small_geometry(8);
        let engine = NormEngine::new(&g);
        let f = trig_field(&g, Layer::Fluid, coeffs, g.nt() + 1);
        let mut f3 = f.clone();
        f3.scale(3.0);
        for spec in [NormSpec::k(s, Layer::Fluid), NormSpec::hrs(0.0, s, Layer::Fluid)] {
            let a = engine.norm(&f, spec).unwrap().value;
            let b = engine.norm(&f3, spec).unwrap().value;
            prop_assert!((b - 3.0 * a).abs() <= 1e-12 * (1.0 + b));
        }
    }

    #[test]
    fn spatial_norm_grows_with_order(coeffs in prop::array::uniform4(-1.0f64..1.0), s in 0.0f64..2.0, ds in 0.0f64..1.0) {
        let g = small_geometry(4);
        let f = trig_field(&g, Layer::Elastic, coeffs, 1);
        let lo = spatial_fractional_norm(&g, &f, s).unwrap();
        let hi = spatial_fractional_norm(&g, &f, s + ds).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-12));
    }

    #[test]
    fn stokes_energy_does_not_grow(amplitude in -1.0f64..1.0) {
        let g = small_geometry(8);
        let mut p = StokesProblem::zero(&g);
        p.u0 = InitialData::single_mode(&g, amplitude).v0;
        let sol = solve_stokes(&p, &g, g.dt()).unwrap();
        let energy: Vec<f64> = (0..=g.nt()).map(|n| sol.u.slice(n).iter().map(|x| x * x).sum()).collect();
        for w in energy.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn wave_march_is_reversible(coeffs in prop::array::uniform4(-1.0f64..1.0)) {
        let probe = small_geometry(4);
        let g = small_geometry(steps_for_cfl(&probe, 0.9));
        let solver = WaveSolver::new(&g, Default::default()).unwrap();
        let bump = |c: f64, k: f64| SpaceTimeField::from_fn(&g, Layer::Elastic, 3, 1, move |_, x, _, z, o| {
            let s = ((z - 1.0) * core::f64::consts::PI * k).sin();
            o.copy_from_slice(&[c * s * x.cos(), c * s, 0.0])
        });
        let prev = bump(coeffs[0], 1.0);
        let mut curr = bump(coeffs[1], 2.0);
        curr.axpy(1.0, &prev);
        let (a, b) = solver.march(prev.slice(0), curr.slice(0), 50);
        let (back_prev, back_curr) = solver.march(&b, &a, 50);
        let err = back_prev.iter().zip(curr.slice(0)).chain(back_curr.iter().zip(prev.slice(0)))
            .map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10, "{}", err);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn coupled_maps_keep_members(seed in any::<u64>(), amplitude in 1e-4f64..1e-2) {
        let probe = small_geometry(4);
        let g = small_geometry(steps_for_cfl(&probe, 0.8).max(8));
        let problem = CoupledProblem::new(&g, InitialData::single_mode(&g, amplitude)).unwrap();
        let params = chanfsi_core::fsi::compute_parameters(&problem.engine, &problem.data, 1.0)
            .unwrap()
            .with_t_tilde(0.25)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random_member(&problem, &mut rng, amplitude);
        let q = chanfsi_core::fsi::initial_pressure_iterate(&problem).unwrap();
        let pi = chanfsi_core::fsi::nonlinear_pi_step(&problem, &v, &q, &params).unwrap();
        prop_assert!(problem.check_member(&pi.v).is_ok());
        let lam = chanfsi_core::fsi::linear_lambda_step(&problem, &v, &LinearData::zero(&g), &params).unwrap();
        prop_assert!(problem.check_member(&lam.v).is_ok());
        let deriv = Deriv::for_layer(&g, Layer::Fluid);
        let psi = params.cutoff().unwrap();
        let flow = chanfsi_core::fields::flow_map(&deriv, &v, &psi).unwrap();
        let frozen = (0..=g.nt()).find(|&n| g.time(n) >= psi.ramp_end()).unwrap();
        for n in frozen..=g.nt() {
            prop_assert_eq!(flow.cofactor(n), flow.cofactor(frozen));
        }
    }
}

