fn main() {
    println!("arrnet");
}
