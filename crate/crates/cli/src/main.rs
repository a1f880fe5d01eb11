fn main() {
    println!("sfde: command-line interface not wired up yet");
}
