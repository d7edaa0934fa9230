use std::time::Instant;

fn main() {
    let n: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1_000_000);
    let t = Instant::now();
    let c = sepprob_states::calibrate_quaternion(n, 2024).unwrap();
    println!("{}", serde_json::to_string_pretty(&c).unwrap());
    println!("{:.1}s", t.elapsed().as_secs_f64());
}
