use torus_gathering::classify::classify;
use torus_gathering::protocol::{enabled_moves, MultKnowledge};
use torus_gathering::torus::{Coord, Grid, TorusDims};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ell: u16 = args[0].parse().unwrap();
    let big_l: u16 = args[1].parse().unwrap();
    let dims = TorusDims::new(ell, big_l, false).unwrap();
    let nodes: Vec<Coord> = args[2..]
        .iter()
        .map(|s| {
            let (r, p) = s.split_once(',').unwrap();
            Coord::new(r.parse().unwrap(), p.parse().unwrap())
        })
        .collect();
    let g = Grid::from_nodes(dims, &nodes);
    println!("label={:?}", classify(&g));
    match enabled_moves(&g, MultKnowledge::Oracle(&|_| false)) {
        Ok(set) => {
            for e in set {
                println!("  {:?} -> {:?}", e.from, e.dests);
            }
        }
        Err(e) => println!("  err: {e}"),
    }
}
