use proptest::prelude::*;

use sidecode_core::capacity::blahut_arimoto;
use sidecode_core::channel_code::{code_from_channel, ChannelCodec, PipelineConfig, SearchConfig};
use sidecode_core::ensemble::{EnsembleKind, EnsembleSpec};
use sidecode_core::gf::{FieldSpec, GfVector, LinearMap};
use sidecode_core::seed;
use sidecode_core::source::{Channel, JointSource};
use sidecode_core::stats::Sequential;
use sidecode_core::sw::{DecoderKind, EvalMode, SwCodec};

fn naive_rank(rows: &[Vec<u16>], q: u16) -> usize {
    // textbook elimination on a copy, kept separate from the library's
    let mut m: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|&v| v as u32).collect()).collect();
    let q = q as u32;
    let inv = |a: u32| (1..q).find(|b| a * b % q == 1).unwrap();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, p);
        let s = inv(m[rank][c]);
        for v in m[rank].iter_mut() {
            *v = *v * s % q;
        }
        let pivot = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[c] != 0 {
                let f = row[c];
                for (v, pv) in row.iter_mut().zip(&pivot) {
                    *v = (*v + q * q - f * pv) % q;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn noiseless_side_information_gives_zero_error() {
    let f = FieldSpec::new(2).unwrap();
    let src = JointSource::from_channel(&Channel::noiseless(2).unwrap(), &[0.3, 0.7]).unwrap();
    for l in 0..=4 {
        let a = EnsembleSpec::uniform(f, l, 4).unwrap().sample(l as u64).unwrap();
        let codec = SwCodec::new(a, src.clone(), DecoderKind::MapExact).unwrap();
        assert!(codec.exact_error().unwrap() < 1e-12);
    }
}

#[test]
fn full_rank_syndrome_is_lossless() {
    let f = FieldSpec::new(3).unwrap();
    let src = JointSource::from_channel(&Channel::new(3, 2, vec![0.5, 0.5, 0.2, 0.8, 0.9, 0.1]).unwrap(), &[0.2, 0.3, 0.5]).unwrap();
    let codec = SwCodec::new(LinearMap::identity(f, 3), src, DecoderKind::Stochastic).unwrap();
    assert!(codec.exact_error().unwrap() < 1e-12);
}

#[test]
fn channel_code_round_trip_on_a_noiseless_channel() {
    let f = FieldSpec::new(2).unwrap();
    let ch = Channel::noiseless(2).unwrap();
    let src = JointSource::from_channel(&ch, &[0.5, 0.5]).unwrap();
    let a = LinearMap::from_rows(f, &[&[1, 1, 0, 0, 1, 0]]).unwrap();
    let b = LinearMap::from_rows(f, &[&[1, 0, 1, 0, 0, 0], &[0, 1, 0, 1, 0, 1]]).unwrap();
    let sw = SwCodec::new(a.clone(), src, DecoderKind::MapExact).unwrap();
    let codec = ChannelCodec::build(sw, b.clone(), ch, 5).unwrap();
    for i in 0..4 {
        let m = GfVector::from_index(f, 2, i);
        let x = codec.encode(&m, i).unwrap().expect("nonempty coset");
        assert_eq!(a.matvec(&x).unwrap(), *codec.syndrome());
        assert_eq!(b.matvec(&x).unwrap(), m);
        let y: Vec<usize> = x.entries().iter().map(|&v| v as usize).collect();
        assert_eq!(codec.decode(&y, 0).unwrap(), Some(m));
    }
    assert!(codec.exact_error(1 << 20).unwrap() < 1e-12);
}

#[test]
fn exact_and_monte_carlo_agree_for_a_ternary_code() {
    let f = FieldSpec::new(3).unwrap();
    let ch = Channel::new(3, 3, vec![0.8, 0.1, 0.1, 0.1, 0.8, 0.1, 0.1, 0.1, 0.8]).unwrap();
    let src = JointSource::from_channel(&ch, &[1.0 / 3.0; 3]).unwrap();
    let a = EnsembleSpec::uniform(f, 1, 4).unwrap().sample(3).unwrap();
    let b = EnsembleSpec::uniform(f, 1, 4).unwrap().sample(4).unwrap();
    let codec = ChannelCodec::build(SwCodec::new(a, src, DecoderKind::MapExact).unwrap(), b, ch, 9).unwrap();
    let exact = codec.exact_error(1 << 24).unwrap();
    let mc = codec.error_probability(EvalMode::MonteCarlo { trials: 20_000, seed: 2 }, 0, &Sequential).unwrap();
    assert!((mc.value - exact).abs() <= 4.0 * mc.std_err(), "{} vs {exact}", mc.value);
}

#[test]
fn pipeline_on_a_z_channel_with_its_capacity_input() {
    let ch = Channel::z_channel(0.3).unwrap();
    let cap = blahut_arimoto(&ch, None, 1e-12).unwrap();
    let cfg = PipelineConfig {
        n: 10,
        source_rate: 0.4,
        message_rate: 0.2,
        ensemble_a: EnsembleKind::UniformLinear,
        ensemble_b: EnsembleKind::UniformLinear,
        decoder: DecoderKind::MapExact,
        search: SearchConfig { candidates: 4, trials: 300, exact: false, exact_cap: 1 << 24, seed: 8 },
    };
    let report = code_from_channel(&ch, &cap.input, cap.capacity, FieldSpec::new(2).unwrap(), &cfg, &Sequential).unwrap();
    assert_eq!((report.rows_a, report.rows_b), (4, 2));
    assert!((report.measures.h_x - report.measures.h_x_given_y - cap.capacity).abs() < 1e-9);
    assert_eq!(report.search.candidates.len(), 4);
    let again = code_from_channel(&ch, &cap.input, cap.capacity, FieldSpec::new(2).unwrap(), &cfg, &Sequential).unwrap();
    assert_eq!(report.search.best().estimate, again.search.best().estimate);
}

fn prime() -> impl Strategy<Value = u16> {
    prop::sample::select(vec![2u16, 3, 5, 7])
}

proptest! {
    #[test]
    fn rank_matches_naive_elimination(q in prime(), rows in 0usize..5, cols in 1usize..6, s in any::<u64>()) {
        let f = FieldSpec::new(q).unwrap();
        let a = LinearMap::random(f, rows, cols, &mut seed::rng(s));
        let raw: Vec<Vec<u16>> = (0..rows).map(|i| a.row(i).to_vec()).collect();
        prop_assert_eq!(a.rank(), naive_rank(&raw, q));
        prop_assert_eq!(a.rank() + a.null_basis().len(), cols);
    }

    #[test]
    fn coset_members_solve_the_system(q in prime(), rows in 1usize..4, cols in 1usize..5, s in any::<u64>()) {
        let f = FieldSpec::new(q).unwrap();
        let mut rng = seed::rng(s);
        let a = LinearMap::random(f, rows, cols, &mut rng);
        let x = GfVector::random(f, cols, &mut rng);
        let c = a.matvec(&x).unwrap();
        let sol = a.solve_affine(&c).unwrap();
        let members: Vec<GfVector> = sol.enumerate(1 << 16).unwrap().collect();
        prop_assert_eq!(members.len() as u64, sol.size().unwrap());
        prop_assert!(members.contains(&x));
        for m in &members {
            prop_assert_eq!(&a.matvec(m).unwrap(), &c);
        }
        let mut sorted = members.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), members.len());
    }

    #[test]
    fn decoded_word_lies_in_the_coset(p in 0.01f64..0.4, l in 0usize..6, s in any::<u64>()) {
        let f = FieldSpec::new(2).unwrap();
        let src = JointSource::dsbs(p).unwrap();
        let a = EnsembleSpec::uniform(f, l, 6).unwrap().sample(s).unwrap();
        let codec = SwCodec::new(a.clone(), src, DecoderKind::Stochastic).unwrap();
        let mut rng = seed::rng(s ^ 1);
        let x = GfVector::random(f, 6, &mut rng);
        let c = codec.encode(&x).unwrap();
        let y: Vec<usize> = (0..6).map(|i| (s >> i) as usize & 1).collect();
        let xh = codec.decode_stochastic(&c, &y, s).unwrap();
        prop_assert_eq!(a.matvec(&xh).unwrap(), c);
    }
}
