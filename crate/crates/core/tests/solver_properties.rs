use fracoc::fracops::Order;
use fracoc::problems::{classical_toy, example42, Quadratic};
use fracoc::solver::{fix_horizon, solve, solve_free_time, Route, SolveReport};
use fracoc::model::TerminalMode;

fn half() -> Order {
    Order::new(0.5).unwrap()
}

#[test]
fn rescaled_horizon_gives_the_same_trajectory() {
    // min ∫_0^2 u² + x², ẋ = u, x(0) = 0, x(2) = 1, and the same problem on s ∈ [0, 1]
    let t_final = 2.0;
    let direct = Quadratic { ru: 1.0, rx: 1.0, fu: 1.0, ..Quadratic::default() }.spec(
        half(),
        1.0,
        0.0,
        0.0,
        0.0,
        TerminalMode::FixedBoth { t_final, x_final: 1.0 },
    );
    let scaled = Quadratic { ru: t_final, rx: t_final, fu: t_final, ..Quadratic::default() }.spec(
        half(),
        1.0,
        0.0,
        0.0,
        0.0,
        TerminalMode::FixedBoth { t_final: 1.0, x_final: 1.0 },
    );
    for route in [Route::Fractional, Route::Approximate] {
        let a = solve(&direct, route, 2, 400, 1e-12).unwrap();
        let b = solve(&scaled, route, 2, 400, 1e-12).unwrap();
        for (i, (&t, &s)) in a.x.grid().iter().zip(b.x.grid()).enumerate() {
            assert!((t - t_final * s).abs() < 1e-12);
            assert!((a.x.values()[i] - b.x.values()[i]).abs() < 1e-6);
        }
        assert!((a.cost - b.cost).abs() < 1e-6);
        // exact: x = sinh t / sinh 2
        let exact = |t: f64| t.sinh() / 2f64.sinh();
        assert!(a.x.grid().iter().zip(a.x.values()).all(|(&t, &x)| (x - exact(t)).abs() < 1e-8));
    }
}

fn perturbation_check(spec: &fracoc::model::FocpSpec, report: &SolveReport, route: Route, mesh: usize, tol: f64) {
    for factor in [0.99, 1.01] {
        let fixed = fix_horizon(spec, report.t_final * factor).unwrap();
        let r = solve(&fixed, route, report.k, mesh, tol).unwrap();
        assert!(r.cost >= report.cost - tol, "{factor}: {} < {}", r.cost, report.cost);
    }
}

#[test]
fn free_horizon_is_locally_optimal() {
    for route in [Route::Fractional, Route::Approximate] {
        let toy = classical_toy();
        let r = solve_free_time(&toy, route, 2, 400, 1e-10, 1.5).unwrap();
        perturbation_check(&toy, &r, route, 400, 1e-10);

        let ex = example42(half());
        let r = solve_free_time(&ex, route, 2, 1000, 1e-10, 1.0).unwrap();
        perturbation_check(&ex, &r, route, 1000, 1e-10);
    }
}

#[test]
fn solves_are_deterministic_across_threads() {
    let run = || solve_free_time(&example42(half()), Route::Approximate, 2, 500, 1e-10, 1.0).unwrap();
    let first = run();
    let handles: Vec<_> = (0..3).map(|_| std::thread::spawn(run)).collect();
    for h in handles {
        let r = h.join().unwrap();
        assert_eq!(r.x, first.x);
        assert_eq!(r.u, first.u);
        assert_eq!(r.t_final.to_bits(), first.t_final.to_bits());
    }
}
