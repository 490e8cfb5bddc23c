use std::time::Instant;
use treestar::canon::enumerate_unlabeled_trees_parallel;
use treestar::inject::MapOptions;
use treestar::tree::{RootedTree, Topology};
use treestar::verify::check_injection_sweep;

fn main() {
    let opts = MapOptions::monitored();
    for (r, h) in [(2usize, 4usize), (3, 3), (2, 5)] {
        let t = RootedTree::perfect(r, h).unwrap();
        let started = Instant::now();
        let mut total = 0;
        for &v in &t.leftmost_path(t.root()).unwrap() {
            let verdict = check_injection_sweep(&t, v, &opts).unwrap();
            assert!(verdict.passed);
            total += verdict.checked;
        }
        println!("perfect({r},{h}): {total} maps in {:.2?}", started.elapsed());
    }

    let started = Instant::now();
    let trees = enumerate_unlabeled_trees_parallel(10, 10, 4).unwrap();
    println!("n=10: {} classes in {:.2?}", trees.len(), started.elapsed());
}
