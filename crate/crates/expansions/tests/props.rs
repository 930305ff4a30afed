use delta_series::{SeriesRing, TruncationPolicy, VarSpec};
use expansions::*;
use newform_coeffs::NewformProfile;
use padic_core::PadicConfig;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn routes_agree_and_slice_is_serre_form(p in prop::sample::select(vec![3u64, 5, 7]), m in 2u32..5, d in 10usize..80) {
        let cfg = PadicConfig::for_order(p, m, 3, 2).unwrap();
        let r = SeriesRing::new(VarSpec::new(&["q"], 2, p).unwrap(), TruncationPolicy::weight(d as i64), cfg);
        let profile = NewformProfile::level11();
        let t = profile.table(d);
        let case = FSharpCase::for_profile(&profile, &t, &r.cfg).unwrap();
        let fs = f_sharp(&t, case, &r, d).unwrap();
        prop_assert_eq!(&fs, &f_sharp_via_phi(&t, case, &r, d).unwrap());
        prop_assert_eq!(q_slice(&fs), f_minus_one(&t, &r, d).unwrap());
    }
}
