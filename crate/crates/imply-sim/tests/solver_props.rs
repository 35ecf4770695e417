//! Network-solver properties: charge conservation on randomized meshes,
//! exactness of the mover update against refactorization, and a grid large
//! enough that only the banded elimination path can carry it.

use imply_sim::solver::{NetBuilder, NodeId};
use proptest::prelude::*;

/// Rectangular resistor mesh with a driven west edge and grounded east
/// edge. Returns (net builder, west nodes, east nodes, grid nodes).
fn mesh(
    rows: usize,
    cols: usize,
    r_of: &mut dyn FnMut(usize) -> f64,
    volts: f64,
) -> (NetBuilder, NodeId, NodeId, Vec<NodeId>) {
    let mut b = NetBuilder::new();
    let src = b.source(volts);
    let gnd = b.source(0.0);
    let nodes: Vec<NodeId> = (0..rows * cols).map(|_| b.node()).collect();
    let at = |r: usize, c: usize| nodes[r * cols + c];
    let mut k = 0;
    for r in 0..rows {
        b.resistor(src, at(r, 0), r_of(k)).unwrap();
        k += 1;
        b.resistor(at(r, cols - 1), gnd, r_of(k)).unwrap();
        k += 1;
        for c in 0..cols {
            if c + 1 < cols {
                b.resistor(at(r, c), at(r, c + 1), r_of(k)).unwrap();
                k += 1;
            }
            if r + 1 < rows {
                b.resistor(at(r, c), at(r + 1, c), r_of(k)).unwrap();
                k += 1;
            }
        }
    }
    (b, src, gnd, nodes)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every free node balances its currents, and what the source injects
    /// the ground absorbs.
    #[test]
    fn mesh_solution_conserves_charge(
        rows in 1usize..6,
        cols in 2usize..8,
        seed in 0u64..1_000_000,
        volts in 0.1f64..10.0,
        r_mover in 1e3f64..1e9,
    ) {
        let mut state = seed;
        let mut r_of = move |_| {
            // Small xorshift so each resistor differs; range 1 Ohm .. ~1 MOhm.
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            1.0 + (state % 1_000_000) as f64
        };
        let (mut b, src, gnd, nodes) = mesh(rows, cols, &mut r_of, volts);
        // One mover bridging the far corners exercises the low-rank update.
        let m = b.mover(nodes[0], *nodes.last().unwrap());
        let _ = m;
        let net = b.finalize().unwrap();
        let rs = [r_mover];
        let sol = net.solve_full(&rs).unwrap();

        prop_assert!(sol.kcl_residual(&rs) < 1e-10);
        let i_src = sol.current_into(&[src], &rs);
        let i_gnd = sol.current_into(&[gnd], &rs);
        prop_assert!(i_gnd > 0.0);
        prop_assert!(
            (i_src + i_gnd).abs() <= 1e-9 * i_gnd.abs(),
            "source {i_src} vs ground {i_gnd}"
        );
        // Voltages live between the rails.
        for &n in &nodes {
            let v = sol.voltage(n);
            prop_assert!(v >= -1e-12 && v <= volts + 1e-12);
        }
    }

    /// A mover must behave exactly like a fixed resistor of the same value:
    /// the low-rank update is algebra, not approximation.
    #[test]
    fn mover_matches_refactorized_resistor(
        rows in 1usize..4,
        cols in 2usize..6,
        r_val in 1.0f64..1e8,
    ) {
        let mut flat = |_| 4_700.0;
        let (mut with_mover, _, _, nodes_a) = mesh(rows, cols, &mut flat, 1.0);
        let m = with_mover.mover(nodes_a[0], *nodes_a.last().unwrap());
        let net_a = with_mover.finalize().unwrap();
        let sol_a = net_a.solve_full(&[r_val]).unwrap();

        let (mut with_resistor, _, _, nodes_b) = mesh(rows, cols, &mut flat, 1.0);
        with_resistor
            .resistor(nodes_b[0], *nodes_b.last().unwrap(), r_val)
            .unwrap();
        let net_b = with_resistor.finalize().unwrap();
        let sol_b = net_b.solve_full(&[]).unwrap();

        for (&na, &nb) in nodes_a.iter().zip(&nodes_b) {
            prop_assert!(
                (sol_a.voltage(na) - sol_b.voltage(nb)).abs() < 1e-10,
                "mover {m} diverges from fixed resistor"
            );
        }
    }
}

/// Ties merge nodes into one electrical point.
#[test]
fn tied_nodes_share_a_voltage() {
    let mut b = NetBuilder::new();
    let src = b.source(2.0);
    let gnd = b.source(0.0);
    let a = b.node();
    let c = b.node();
    b.resistor(src, a, 1_000.0).unwrap();
    b.resistor(c, gnd, 1_000.0).unwrap();
    b.tie(a, c).unwrap();
    let net = b.finalize().unwrap();
    let sol = net.solve_full(&[]).unwrap();
    assert_eq!(sol.voltage(a), sol.voltage(c));
    assert!((sol.voltage(a) - 1.0).abs() < 1e-12, "even divider");
}

/// A 128 x 128 interior grid has 16384 unknowns; a dense factorization at
/// that size would need gigabytes, so a solve finishing quickly and
/// balancing currents demonstrates the banded path.
#[test]
fn large_grid_takes_the_banded_path() {
    let n = 128;
    let mut r_of = |k: usize| 10.0 + (k % 97) as f64;
    let (mut b, src, gnd, nodes) = mesh(n, n, &mut r_of, 1.0);
    let m = b.mover(nodes[0], *nodes.last().unwrap());
    let _ = m;
    let net = b.finalize().unwrap();
    assert_eq!(net.num_free(), n * n);
    let rs = [1e6];
    let sol = net.solve_full(&rs).unwrap();
    assert!(sol.kcl_residual(&rs) < 1e-9);
    let i_src = sol.current_into(&[src], &rs);
    let i_gnd = sol.current_into(&[gnd], &rs);
    assert!((i_src + i_gnd).abs() <= 1e-9 * i_gnd.abs());
}
