use smallness_bench::{families, pipeline_instances, singleton_instances, tr2_instances};

#[test]
fn workloads_are_fixed() {
    assert_eq!(families(3, 8), families(3, 8));
    assert!(families(20, 8).iter().all(|f| f.n() <= 8));
    assert_eq!(singleton_instances(2), singleton_instances(2));
    let t = tr2_instances(1);
    assert!(t[0].conditions().reduced_ok());
    assert!(pipeline_instances(2).iter().all(|p| !p.is_degenerate()));
}
