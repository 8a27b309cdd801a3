use ribe_core::cube::CubeFunction;
use ribe_core::graph::{gen_random_regular, metric_from_graph};
use ribe_core::io::*;
use ribe_core::ramsey::extract_skeleton;
use ribe_core::walk::{laakso_chain, stationary_walk};
use ribe_core::{Error, FiniteMetric, OracleStructure};

#[test]
fn oracle_dump_rebuilds_identically() {
    let m = FiniteMetric::random_cloud(96, 3, 11).unwrap();
    for eps in [0.25, 0.5, 0.9] {
        let o = OracleStructure::build(&m, eps, 5).unwrap();
        let text = write_oracle(&o);
        let back = parse_oracle(&text).unwrap();
        assert_eq!(back, o);
        assert_eq!(write_oracle(&back), text);
        for i in 0..m.len() {
            for j in 0..m.len() {
                assert_eq!(back.query(i, j).unwrap().to_bits(), o.query(i, j).unwrap().to_bits());
            }
        }
    }
}

#[test]
fn oracle_dump_from_graph_metric() {
    let g = gen_random_regular(60, 3, 0, 2).unwrap();
    let m = metric_from_graph(&g).unwrap();
    let o = OracleStructure::build(&m, 0.5, 1).unwrap();
    assert_eq!(parse_oracle(&write_oracle(&o)).unwrap(), o);
}

#[test]
fn tampered_oracle_is_rejected() {
    let m = FiniteMetric::random_cloud(20, 2, 3).unwrap();
    let text = write_oracle(&OracleStructure::build(&m, 0.5, 0).unwrap());
    let wrong_n = text.replacen("RIBE-ORACLE v1 20", "RIBE-ORACLE v1 21", 1);
    assert!(matches!(parse_oracle(&wrong_n), Err(Error::Parse { .. })));
    let truncated: String = text.lines().take(text.lines().count() - 1).collect::<Vec<_>>().join("\n");
    assert!(matches!(parse_oracle(&truncated), Err(Error::Parse { .. })));
}

#[test]
fn skeleton_round_trip() {
    let m = FiniteMetric::random_cloud(50, 2, 7).unwrap();
    let sk = extract_skeleton(&m, 0.5, 3).unwrap();
    let file = SkeletonFile::from(&sk);
    let text = write_skeleton(&file);
    assert!(text.contains("\nS: "));
    assert_eq!(parse_skeleton(&text).unwrap(), file);
}

#[test]
fn chain_round_trip() {
    let c = stationary_walk(&ribe_core::graph::petersen()).unwrap();
    let back = parse_chain(&write_chain(&c)).unwrap();
    assert_eq!(back.dense(), c.dense());
    assert_eq!(back.start(), c.start());
    assert!(back.is_reversible());
    let l = laakso_chain(2).unwrap();
    assert_eq!(parse_chain(&write_chain(&l)).unwrap().dense(), l.dense());
    assert!(matches!(parse_chain("2\n0.5 0.5\n1 0\n"), Err(Error::Parse { line: 3, .. })));
}

#[test]
fn cube_function_round_trip() {
    let f = CubeFunction::random(5, 3, 2).unwrap();
    assert_eq!(parse_cube_function(&write_cube_function(&f)).unwrap(), f);
    assert!(matches!(
        parse_cube_function("1 2\n1 2\n3\n"),
        Err(Error::Parse { line: 3, .. })
    ));
}

#[test]
fn files_on_disk() {
    let dir = std::env::temp_dir().join(format!("ribe-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.txt");
    let m = FiniteMetric::random_cloud(9, 2, 1).unwrap();
    write_file(&path, &write_metric(&m)).unwrap();
    assert_eq!(parse_metric(&read_file(&path).unwrap()).unwrap(), m);
    assert!(matches!(read_file(dir.join("missing")), Err(Error::Io(_))));
    std::fs::remove_dir_all(&dir).unwrap();
}
