use sparse_nerve::generate::{generate, GenSpec, Shape};
use sparse_nerve::greedy::greedy_permutation;
use sparse_nerve::metric::{MetricKind, PointCloud};
use sparse_nerve::neighbor_graph::{construct_edges, construct_edges_bruteforce};
use sparse_nerve::persistence::{barcode_approx_check, compute_barcode, full_cech_filtration_l2, full_rips_filtration};
use sparse_nerve::simplex_enum::{build_filtration, build_filtration_with, BuildOptions, Flavor};
use sparse_nerve::sparse_balls::{BirthMode, SparseParams};

fn cloud(shape: Shape, n: usize, seed: u64, metric: MetricKind) -> PointCloud {
    PointCloud::new(generate(&GenSpec::new(shape, n, seed)).unwrap(), metric).unwrap()
}

#[test]
fn noisy_circle_sparse_approximates_full() {
    let c = cloud(Shape::Circle, 60, 11, MetricKind::L2);
    let gp = greedy_permutation(&c, 0).unwrap();
    let full = compute_barcode(&full_rips_filtration(&c, 2, None).unwrap()).unwrap().below_dim(2);
    for eps in [0.3, 0.5] {
        let p = SparseParams::new(&c, &gp, eps).unwrap();
        let sparse = compute_barcode(&build_filtration(&p, 2, Flavor::Rips).unwrap()).unwrap().below_dim(2);
        let r = barcode_approx_check(&sparse, &full, 1.0 + eps);
        assert!(r.ok, "eps {eps}: worst {}", r.worst_ratio);
        assert!(r.worst_ratio <= 1.0 + eps);
        let long_loops = sparse.in_dim(1).filter(|i| i.persistence_ratio() > 2.0).count();
        assert_eq!(long_loops, 1);
    }
}

#[test]
fn cech_pipeline_on_a_sphere() {
    let c = cloud(Shape::Sphere, 45, 2, MetricKind::L2);
    let gp = greedy_permutation(&c, 0).unwrap();
    let p = SparseParams::new(&c, &gp, 0.5).unwrap();
    let sparse = compute_barcode(&build_filtration(&p, 3, Flavor::Cech).unwrap()).unwrap().below_dim(3);
    let full = compute_barcode(&full_cech_filtration_l2(&c, 3, None).unwrap()).unwrap().below_dim(3);
    assert!(barcode_approx_check(&sparse, &full, 1.5 * (1.0 + 1e-6)).ok);
}

#[test]
fn paper_mode_adds_only_late_edges() {
    for seed in 0..5 {
        let c = cloud(Shape::Clusters, 50, seed, MetricKind::L2);
        let gp = greedy_permutation(&c, 0).unwrap();
        let strict = SparseParams::with_options(&c, &gp, 0.4, BirthMode::Strict).unwrap();
        let paper = SparseParams::with_options(&c, &gp, 0.4, BirthMode::PaperLiteral).unwrap();
        let (gs, gl) = (construct_edges(&strict), construct_edges(&paper));
        for e in gs.edges() {
            assert_eq!(gl.birth(e.src, e.dst), Some(e.birth));
        }
        // neighbor lists only reach pairs whose balls coexist, so the fast
        // construction can miss edges born after the smaller ball is gone
        let all = construct_edges_bruteforce(&paper);
        for e in all.edges() {
            match gl.birth(e.src, e.dst) {
                Some(b) => assert_eq!(b, e.birth),
                None => assert!(e.birth > paper.removal_time(e.src.max(e.dst)), "{e:?}"),
            }
        }
        assert!(gl.edges().all(|e| all.birth(e.src, e.dst).is_some()));
    }
}

#[test]
fn parallel_build_matches_sequential() {
    let c = cloud(Shape::Box, 120, 4, MetricKind::L2);
    let gp = greedy_permutation(&c, 0).unwrap();
    let p = SparseParams::new(&c, &gp, 0.5).unwrap();
    for flavor in [Flavor::Rips, Flavor::Cech] {
        let seq = build_filtration(&p, 3, flavor).unwrap();
        let par = build_filtration_with(&p, 3, flavor, BuildOptions { parallel: true, alpha_cap: None }).unwrap();
        assert_eq!(seq, par);
    }
}

#[test]
fn start_point_changes_order_not_quality() {
    let c = cloud(Shape::Circle, 50, 9, MetricKind::Linf);
    let full = compute_barcode(&full_rips_filtration(&c, 2, None).unwrap()).unwrap().below_dim(2);
    for start in [0, 17, 49] {
        let gp = greedy_permutation(&c, start).unwrap();
        assert_eq!(gp.order[0], start);
        let p = SparseParams::new(&c, &gp, 0.5).unwrap();
        let sparse = compute_barcode(&build_filtration(&p, 2, Flavor::Rips).unwrap()).unwrap().below_dim(2);
        assert!(barcode_approx_check(&sparse, &full, 1.5 * (1.0 + 1e-6)).ok);
    }
}
