use arrnet::solve::*;
fn main() {
    let t0 = std::time::Instant::now();
    match run_case_id("quaternion38") {
        Ok(SolveOutcome::Family(f)) => {
            let nm = f.prob.names();
            eprintln!(
                "FAMILY [{:?}] params={:?} #constraints={}",
                t0.elapsed(),
                f.params,
                f.constraints.len()
            );
            for v in [
                "a1", "a4", "a8", "a10", "a11", "b1", "b3", "b4", "b5", "b6", "b9",
                "b11", "b12", "t", "u",
            ] {
                let idx = f.prob.var_index(v).unwrap();
                eprintln!("{v} = {}", f.values[idx].to_string_with(&nm));
            }
            for c in &f.constraints {
                eprintln!("constraint: {}", c.to_string_with(&nm));
            }
        }
        Ok(out) => eprintln!("{}", out.trace_text()),
        Err(e) => eprintln!("ERROR [{:?}] {e}", t0.elapsed()),
    }
}
