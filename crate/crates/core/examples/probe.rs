use arrnet::solve::*;
fn main() {
    for id in ["net32","net33","net34_M1","net34_M2","net35_M1","net35_M2",
               "net36_M1","net36_M2","net36_M3","net36_M4","net36_M5","net36_M6",
               "net36_M7","net36_M8","net36_M9","net36_M10","net36_M11","net36_M12",
               "quaternion38","hesse43"] {
        let t0 = std::time::Instant::now();
        match run_case_id(id) {
            Ok(out) => {
                let last = out.trace_text().lines().last().unwrap_or("").to_string();
                println!("{id}: [{:?}] {last}", t0.elapsed());
            }
            Err(e) => println!("{id}: [{:?}] ERROR {e}", t0.elapsed()),
        }
    }
}
