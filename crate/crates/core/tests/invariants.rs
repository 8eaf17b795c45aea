mod common;

use cma_core::arith::fp::small_primes;
use cma_core::arith::{QPoly, ZPoly};
use cma_core::etale::EtaleAlgebra;
use cma_core::galois::{
    cycle_type, cycle_types, decomposition_element, galois_group_small, places_over_p, signature, Place,
};
use cma_core::groups::{
    automorphism_matrix, enumerate_automorphisms, group_sanity, verify_normalization, AutomorphismDatum,
    GeneratorSet, DEFAULT_AUTOMORPHISM_BOX,
};
use cma_core::pipeline::{default_corpus, read_json, run_pipeline, GoldenFile, PipelineOptions, GOLDEN_FILES};
use cma_core::torus::{is_s_ample, Ambient, PlaceSet, TorusDatum, Verdict};
use cma_core::units::{search_unit_system, DEFAULT_BUDGET};
use common::test_fields;
use num_bigint::BigInt;
use num_traits::Zero;

fn quartic() -> EtaleAlgebra {
    EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(&[1, -16, 20, -8, 1])]).unwrap()
}

fn generator_image(e: &EtaleAlgebra, s: &AutomorphismDatum) -> QPoly {
    // power basis: x is the second basis element
    QPoly::new(e.to_power(&s.images[1]))
}

fn good_primes(f: &ZPoly, limit: u64) -> Vec<u64> {
    let d = f.discriminant().unwrap();
    small_primes(limit).into_iter().filter(|&p| !(&d % BigInt::from(p)).is_zero()).collect()
}

#[test]
fn automorphisms_compose_like_polynomials() {
    let e = quartic();
    let f = e.factors()[0].to_q();
    let autos = enumerate_automorphisms(&e, DEFAULT_AUTOMORPHISM_BOX).unwrap();
    assert_eq!(autos.len(), 4);
    assert_eq!(autos[0], AutomorphismDatum::identity(&e));
    for s in &autos {
        for t in &autos {
            let st = s.compose(&e, t);
            let r = generator_image(&e, t).compose(&generator_image(&e, s)).rem(&f).unwrap();
            assert_eq!(st, AutomorphismDatum::from_generator_image(&e, &r).unwrap());
            assert!(autos.contains(&st));
            let m = automorphism_matrix(&e, &st).unwrap();
            let ms = automorphism_matrix(&e, s).unwrap();
            let mt = automorphism_matrix(&e, t).unwrap();
            assert_eq!(m, ms.mul(&mt));
        }
    }
}

#[test]
fn places_at_infinity_match_signature() {
    for f in test_fields() {
        let tag = galois_group_small(&f).unwrap();
        let sig = signature(&f).unwrap();
        let c = decomposition_element(&f, &tag, Place::Infinity).unwrap();
        assert_eq!(cycle_type(&c).len(), sig.r1 + sig.r2, "{f}");
        assert_eq!(sig.r1 + 2 * sig.r2, f.degree().unwrap());
    }
}

#[test]
fn frobenius_orbits_count_factors() {
    for f in test_fields() {
        let tag = galois_group_small(&f).unwrap();
        let allowed = cycle_types(&tag);
        for p in good_primes(&f, 80) {
            let g = decomposition_element(&f, &tag, Place::Prime(p)).unwrap();
            let ct = cycle_type(&g);
            assert_eq!(ct.len(), places_over_p(&f, p).unwrap(), "{f} at {p}");
            assert!(allowed.contains(&ct), "{f} at {p}: {ct:?} not in {:?}", tag.group);
        }
    }
}

#[test]
fn gaussian_split_primes_have_density_one_half() {
    let f = ZPoly::from_i64s(&[1, 0, 1]);
    let primes = good_primes(&f, 500);
    let split = primes.iter().filter(|&&p| places_over_p(&f, p).unwrap() == 2).count();
    let ratio = split as f64 / primes.len() as f64;
    assert!((0.35..=0.65).contains(&ratio), "split ratio {ratio}");
}

#[test]
fn ampleness_grows_with_the_place_set() {
    let e = EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(&[1, 0, 1])]).unwrap();
    let t = TorusDatum::build(&e, Ambient::SL).unwrap();
    let extra = [3u64, 5, 7, 13];
    let sets: Vec<Vec<u64>> =
        (0..16u32).map(|m| extra.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &p)| p).collect()).collect();
    let verdicts: Vec<Verdict> =
        sets.iter().map(|s| is_s_ample(&t, &PlaceSet::with_primes(s)).unwrap().verdict).collect();
    for (i, a) in sets.iter().enumerate() {
        for (j, b) in sets.iter().enumerate() {
            if a.iter().all(|p| b.contains(p)) && verdicts[i] == Verdict::SAmple {
                assert_eq!(verdicts[j], Verdict::SAmple, "{a:?} ample but {b:?} not");
            }
        }
    }
    assert_eq!(verdicts[0], Verdict::NotSAmple);
    assert_eq!(verdicts[2], Verdict::SAmple);
}

fn corpus_requests() -> Vec<cma_core::pipeline::PipelineRequest> {
    let dir = default_corpus();
    GOLDEN_FILES
        .iter()
        .flat_map(|name| read_json::<GoldenFile>(&dir.join(name)).unwrap().cases)
        .map(|c| c.request)
        .collect()
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let opts = PipelineOptions::default();
    for req in corpus_requests() {
        let a = serde_json::to_string(&run_pipeline(&req, &opts).unwrap()).unwrap();
        let b = serde_json::to_string(&run_pipeline(&req, &opts).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn generator_sets_round_trip_and_stay_sane() {
    let opts = PipelineOptions::default();
    for req in corpus_requests() {
        let report = run_pipeline(&req, &opts).unwrap();
        let Some(gs) = report.generators else { continue };
        let text = serde_json::to_string_pretty(&gs).unwrap();
        let back: GeneratorSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, gs);
        let sanity = group_sanity(&back);
        assert!(sanity.passed, "{:?}", sanity.checks);
        assert_eq!(Some(sanity), report.sanity);
    }
}

#[test]
fn units_normalize_with_trivial_automorphism() {
    for f in [[-1i64, 1, 0, 1], [-2, 0, 0, 1]] {
        let e = EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(&f)]).unwrap();
        let sys = search_unit_system(&e, 3, &[], DEFAULT_BUDGET, 256).unwrap();
        for u in &sys.free {
            let check = verify_normalization(&e, &e.regular_rep(u)).unwrap();
            assert!(check.normalizes);
            assert_eq!(check.automorphism.unwrap(), AutomorphismDatum::identity(&e));
        }
    }
}
