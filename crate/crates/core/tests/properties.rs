use elliptic_nf::diagnostics::{continued_fraction, Slope};
use elliptic_nf::dynamics::{model_iterate, model_nu, rotation_number};
use elliptic_nf::maps::{FoliationMap, Multiplier, OmegaSpec};
use elliptic_nf::normalizer::{solve_homological, verify_conjugacy, Gauge};
use elliptic_nf::precision::Cplx;
use elliptic_nf::series::{BiSeries, RadialSeries, UniSeries};
use elliptic_nf::transforms::gauge::{apply_gauge, GaugeMap};
use proptest::prelude::*;
use rug::Float;

const P: u32 = 128;
const ORDER: usize = 5;

fn coeffs(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

fn bi(values: &[(f64, f64)]) -> BiSeries {
    let mut s = BiSeries::zero(ORDER, P);
    let mut it = values.iter();
    for l in 0..=ORDER {
        for k in 0..=l {
            if let Some(&(re, im)) = it.next() {
                s.set(l - k, k, Cplx::from_f64(re, im, P));
            }
        }
    }
    s
}

const BI_LEN: usize = (ORDER + 1) * (ORDER + 2) / 2;

fn radial(values: &[f64], order: usize) -> RadialSeries {
    let mut s = RadialSeries::zero(order, P);
    for (k, v) in values.iter().enumerate().take(order) {
        s.set(k + 1, Float::with_val(P, *v));
    }
    s
}

fn close(a: &BiSeries, b: &BiSeries) -> f64 {
    a.sub(b).unwrap().max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bi_series_ring_laws(a in coeffs(BI_LEN), b in coeffs(BI_LEN), c in coeffs(BI_LEN)) {
        let (a, b, c) = (bi(&a), bi(&b), bi(&c));
        prop_assert!(close(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()) < 1e-30);
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&left, &right) < 1e-30);
        let dist = a.mul(&b.add(&c).unwrap()).unwrap();
        let split = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&dist, &split) < 1e-30);
        prop_assert!(close(&a.mul(&BiSeries::one(ORDER, P)).unwrap(), &a) == 0.0);
    }

    #[test]
    fn bi_series_eval_is_a_ring_map(a in coeffs(BI_LEN), b in coeffs(BI_LEN), re in -0.3..0.3f64, im in -0.3..0.3f64) {
        // truncation error of the product at |z| < 0.43 stays far below the bound
        let (a, b) = (bi(&a), bi(&b));
        let z = Cplx::from_f64(re, im, P);
        let prod = a.mul(&b).unwrap().eval(&z);
        let direct = &a.eval(&z) * &b.eval(&z);
        let r = (re * re + im * im).sqrt();
        let bound = 4.0 * (ORDER + 1) as f64 * (ORDER + 2) as f64 * r.powi(ORDER as i32 + 1) / (1.0 - r).powi(2);
        prop_assert!((&prod - &direct).abs_f64() <= bound + 1e-30);
    }

    #[test]
    fn conj_transpose_is_an_involution(a in coeffs(BI_LEN)) {
        let a = bi(&a);
        prop_assert!(close(&a.conj_transpose().conj_transpose(), &a) == 0.0);
        let mut s = a.clone();
        s.symmetrize();
        prop_assert!(s.asymmetry() < 1e-35);
        // the symmetric part of a real series is itself
        let mut t = s.clone();
        t.symmetrize();
        prop_assert!(close(&t, &s) < 1e-35);
    }

    #[test]
    fn exp_ln_and_reversion_round_trip(v in prop::collection::vec(-1.0..1.0f64, 6)) {
        let order = 6;
        let mut x = UniSeries::zero(order, P);
        for (k, c) in v.iter().enumerate() {
            x.set(k + 1, Cplx::from_f64(*c, 0.5 * c, P));
        }
        let back = x.exp().unwrap().ln().unwrap();
        prop_assert!(back.sub(&x).unwrap().max_abs() < 1e-30);
        let mut inv_in = x.clone();
        inv_in.set(1, Cplx::one(P));
        let inv = inv_in.reversion().unwrap();
        let id = inv_in.compose(&inv).unwrap();
        prop_assert!(id.sub(&UniSeries::x(order, P)).unwrap().max_abs() < 1e-25);
    }

    #[test]
    fn convergents_bracket_omega(prefix in prop::collection::vec(1i64..40, 1..6)) {
        let mut quotients = vec![0];
        quotients.extend(prefix);
        let spec = OmegaSpec::Cf { quotients };
        let omega = spec.value(256).unwrap();
        let cf = continued_fraction(&spec, 12, 256).unwrap();
        for n in 0..cf.depth() {
            let diff = Float::with_val(256, cf.convergent(n, 256) - &omega).to_f64();
            let q = cf.q[n].to_f64();
            prop_assert!(diff.abs() < 1.0 / (q * q));
            // even convergents from below, odd from above
            let below = diff < 0.0;
            prop_assert_eq!(below, n % 2 == 0);
        }
    }

    #[test]
    fn ladder_monomials_have_the_slope(num in 0u64..20, extra in 1u64..20, k in 1u64..6) {
        let s = Slope::new(num, num + extra);
        if let Some((p, q)) = s.ladder(k) {
            prop_assert_eq!(Slope::new((p - q) as u64, (p + q) as u64), s);
        } else {
            prop_assert!((k * (s.den + s.num)) % 2 == 1);
        }
    }

    #[test]
    fn model_iterates_compose(a in 0.1..5.0f64, r in 0.001..0.5f64, m in 1u64..200, p in 1u32..5) {
        let p = p as f64 * 2.0;
        let mut x = r;
        for _ in 0..m {
            x = model_nu(p, a, x);
        }
        let closed = model_iterate(p, a, r, m);
        prop_assert!((x - closed).abs() <= 1e-12 * r);
        prop_assert!(closed <= r);
    }

    #[test]
    fn rigid_rotation_number(s in 0.0..1.0f64) {
        let rot = rotation_number(|x| x + s, 0.0, 512, 1e-9).unwrap();
        prop_assert!((rot.unwrapped - s).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_maps_are_normalized(f in prop::collection::vec(-0.5..0.5f64, 4), g in coeffs(BI_LEN + 13)) {
        let mult = Multiplier::new(OmegaSpec::Golden, 1.0, 256).unwrap();
        let order = 8;
        let mut gs = BiSeries::zero(order, 256);
        let mut it = g.iter();
        for l in 1..=order {
            for q in 0..=l / 2 {
                let p = l - q;
                let &(re, im) = it.next().unwrap_or(&(0.0, 0.0));
                let c = if p == q { Cplx::from_f64(re, 0.0, 256) } else { Cplx::from_f64(re, im, 256) };
                gs.set(q, p, c.conj());
                gs.set(p, q, c);
            }
        }
        let mut fs = RadialSeries::zero(order / 2, 256);
        for (k, v) in f.iter().enumerate() {
            fs.set(k + 1, Float::with_val(256, *v));
        }
        let map = FoliationMap::custom(mult, fs, gs).unwrap();
        let norm = solve_homological(&map, order, Gauge::Basic).unwrap();
        let res = verify_conjugacy(&map, &norm.phi, &norm.n, order).unwrap();
        prop_assert!(res < 1e-50, "{}", res);
        let other = solve_homological(&map, order, Gauge::CustomDiagonal(vec![0.3, -0.7])).unwrap();
        prop_assert!(verify_conjugacy(&map, &other.phi, &other.n, order).unwrap() < 1e-50);
    }

    #[test]
    fn gauges_keep_the_leading_radial_term(
        lead in -2.0..-0.1f64,
        tail in prop::collection::vec(-1.0..1.0f64, 3),
        n in prop::collection::vec(-1.0..1.0f64, 4),
        a in prop::collection::vec(-1.0..1.0f64, 4),
        b in prop::collection::vec(-1.0..1.0f64, 4),
        r in 1usize..3,
    ) {
        let order = 6;
        let mut f = RadialSeries::zero(order, P);
        f.set(r, Float::with_val(P, lead));
        for (k, v) in tail.iter().enumerate() {
            if r + 1 + k <= order {
                f.set(r + 1 + k, Float::with_val(P, *v));
            }
        }
        let lam = Cplx::exp_2pii(&Float::with_val(P, 0.381966));
        let h = GaugeMap::new(radial(&a, order), radial(&b, order)).unwrap();
        let pair = apply_gauge(&radial(&n, order), &f, &h, &lam, order).unwrap();
        for k in 1..r {
            prop_assert!(pair.alpha.coeff(k).to_f64().abs() < 1e-30);
        }
        prop_assert!((pair.alpha.coeff(r).to_f64() - lead).abs() < 1e-30);
    }
}
