use berger_flow::mesh::Grid;

// reimplement the mesh check through Grid::from_nodes
fn main() {
    // mirror of the internal tent parameters from the failing flat run
    for &(n, length, peak) in &[
        (128usize, 20.0f64, 0.054f64), (128, 20.0, 0.0), (128, 20.0, 0.94),
        (128, 20.0, 19.9), (128, 20.0, 10.0), (128, 20.0, 1.0),
        (64, 20.0, 0.5), (256, 40.0, 0.5), (2048, 40.0, 0.1),
    ] {
        let nodes = berger_flow::flow::tent_mesh_for_test(n, length, peak, 0.8/64.0);
        match nodes {
            Err(e) => println!("n={n} L={length} p={peak}: tent error {e}"),
            Ok(nodes) => {
                match Grid::from_nodes(nodes.clone(), 1.0) {
                    Ok(_) => println!("n={n} L={length} p={peak}: ok, x0={:.4e} xlast={:.4}", nodes[0], nodes[n-1]),
                    Err(e) => {
                        println!("n={n} L={length} p={peak}: GRID ERR {e}");
                        println!("   first nodes: {:?}", &nodes[..6.min(n)]);
                    }
                }
            }
        }
    }
}
