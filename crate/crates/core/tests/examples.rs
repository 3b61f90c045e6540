macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));

            #[test]
            fn runs() {
                main().unwrap();
            }
        }
    };
}

example!(acceptance_groupoids);
example!(cohomology_search);
example!(coset_defect);
example!(cylinder_measure);
example!(entropy);
example!(experiment_config);
example!(free_independence);
example!(index_cocycle);
example!(lift_odometer);
example!(scramble_round_trip);
example!(tree_cocycle);
example!(wreath_groupoid);
