//! Exact rational LP: feasibility, optimization, and the elimination oracle.

use raag_comm::exactlp::{fm_feasible, lp_feasible, lp_maximize, scale_to_integers, Feasibility, LpProblem, Optimum, Rational};

fn main() {
    // x0 = 2 x1, x1 = 3 x2, x2 >= 1.
    let mut p = LpProblem::new(3);
    p.add_int_row(&[(0, 1), (1, -2)]);
    p.add_int_row(&[(1, 1), (2, -3)]);
    p.set_lower(2, 1);
    match lp_feasible(&p) {
        Feasibility::Feasible(x) => {
            let shown: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            println!("feasible point: {}", shown.join(", "));
            println!("integer multiple: {:?}", scale_to_integers(&x));
        }
        Feasibility::Infeasible => println!("infeasible"),
    }
    println!("elimination oracle agrees: {}", fm_feasible(&p).unwrap());

    // Maximize x2 with x0 <= 12.
    p.set_upper(0, 12);
    if let Optimum::Optimal { value, .. } = lp_maximize(&p, &[(2, Rational::from_integer(1.into()))]) {
        println!("max x2 with x0 <= 12: {value}");
    }

    // x0 + x1 = 0 with x0 >= 1 has no nonnegative solution.
    let mut q = LpProblem::new(2);
    q.add_int_row(&[(0, 1), (1, 1)]);
    q.set_lower(0, 1);
    println!("x0 + x1 = 0, x0 >= 1: feasible = {}", lp_feasible(&q).is_feasible());
}
