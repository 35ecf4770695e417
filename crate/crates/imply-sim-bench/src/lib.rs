//! Shared fixtures for the criterion benches. Nothing here is part of the
//! simulator; it only builds representative networks and state vectors so
//! the bench file stays focused on the measurements.

use imply_sim::solver::{FactoredNet, MoverId, NetBuilder, NodeId};
use imply_sim::{CrossbarConfig, Placement};

/// Factored n-by-n resistor grid with a driven west edge, grounded east
/// edge, and one mover in the far corner. Resistor values cycle through a
/// small set so the factorization sees varied magnitudes.
pub fn grid_net(n: usize) -> (FactoredNet, MoverId, NodeId) {
    let mut b = NetBuilder::new();
    let src = b.source(1.0);
    let gnd = b.source(0.0);
    let nodes: Vec<NodeId> = (0..n * n).map(|_| b.node()).collect();
    let at = |r: usize, c: usize| nodes[r * n + c];
    let values = [47.0, 330.0, 1.2e3, 10e3, 68e3];
    let mut k = 0;
    let mut next = || {
        k += 1;
        values[k % values.len()]
    };
    for r in 0..n {
        b.resistor(src, at(r, 0), next()).unwrap();
        b.resistor(at(r, n - 1), gnd, next()).unwrap();
        for c in 0..n {
            if c + 1 < n {
                b.resistor(at(r, c), at(r, c + 1), next()).unwrap();
            }
            if r + 1 < n {
                b.resistor(at(r, c), at(r + 1, c), next()).unwrap();
            }
        }
    }
    let mover = b.mover(at(n - 1, n - 1), gnd);
    let probe = at(n / 2, n / 2);
    (b.finalize().unwrap(), mover, probe)
}

/// Crossbar fixture: nominal config resized to n with a zeroed background
/// and the gate placed in the middle of the array.
pub fn crossbar_fixture(n: usize) -> (CrossbarConfig, Placement, Vec<f64>) {
    let mut cfg = CrossbarConfig::nominal();
    cfg.n = n;
    let placement = Placement {
        p: (n / 2, n / 4),
        q: (n / 2, 3 * n / 4),
    };
    (cfg, placement, vec![0.0; n * n])
}
