use std::sync::Arc;
use arrnet::solve::*;

fn dump(st: &EliminationState, prob: &Problem) {
    for w in 0..prob.nvars() {
        if st.assign.contains_key(&w) || prob.frees.contains(&w) {
            continue;
        }
        let mut opts: Vec<(usize, usize, usize, Vec<usize>)> = Vec::new();
        for c in &st.constraints {
            if c.status != ConstraintStatus::Pending {
                continue;
            }
            let r = st.strip_excluded(&c.current);
            let d = r.degree_in(w);
            if d == 1 {
                let cs = r.coeffs_in(w);
                if cs[&1].is_zero() {
                    continue;
                }
                let score = cs.get(&0).map_or(0, |p| p.terms.len()) + cs[&1].terms.len();
                opts.push((d as usize, score, r.terms.len(), c.label.clone()));
            }
        }
        opts.sort_by_key(|o| o.1);
        eprintln!("var {} linear: {:?}", prob.vars[w], &opts[..opts.len().min(8)]);
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let case = case_spec("quaternion38").unwrap();
    let prob = Arc::new(build_patterns(&case.squares, &case.frees).unwrap());
    let mut st = EliminationState::new(prob.clone());
    st.symbolic_pencil = true;
    st.init_gamma().unwrap();
    let base: Vec<(&str, Vec<usize>)> = vec![
        ("c10", vec![1, 11, 21]),
        ("c9", vec![2, 10, 21]),
        ("c11", vec![3, 12, 21]),
        ("b3", vec![4, 8, 21]),
        ("c8", vec![6, 9, 21]),
        ("u", vec![7, 14, 15]),
        ("c4", vec![5, 14, 20]),
        ("c1", vec![2, 14, 17]),
    ];
    for (var, p) in base {
        let t0 = std::time::Instant::now();
        match st.eliminate(&p, var) {
            Ok(()) => eprintln!("ok {var} via {:?} [{:?}]", p, t0.elapsed()),
            Err(e) => {
                eprintln!("FAIL {var}: {e}");
                return;
            }
        }
        if let Some(c) = &st.contradiction {
            eprintln!("contradiction: {c}");
            return;
        }
    }
    // extra steps from args: var@i,j,k
    for spec in &args {
        let (var, pt) = spec.split_once('@').unwrap();
        let p: Vec<usize> = pt.split(',').map(|s| s.parse().unwrap()).collect();
        let t0 = std::time::Instant::now();
        match st.eliminate(&p, var) {
            Ok(()) => eprintln!("ok {var} via {:?} [{:?}]", p, t0.elapsed()),
            Err(e) => {
                eprintln!("FAIL {var} via {:?}: {e}", p);
                return;
            }
        }
        if let Some(c) = &st.contradiction {
            eprintln!("contradiction: {c}");
            return;
        }
    }
    dump(&st, &prob);
}
