use dutysim::qtable::{Action, QTable, StateBins};

fn main() {
    let path = std::env::args().nth(1).expect("usage: inspect_qtable <file>");
    let t = QTable::load(std::path::Path::new(&path)).unwrap();
    println!("greedy action grid (rows: battery bin 9..0, cols: count bin 0..9)");
    for b in (0..10usize).rev() {
        let mut row = String::new();
        for c in 0..10usize {
            let s = StateBins { battery_bin: b, count_bin: c };
            row.push(match t.argmax(s) { Action::Retrain => 'R', Action::Continue => '.' });
        }
        println!("b{} {}", b, row);
    }
    println!("\nQ values at battery bin 9:");
    for c in 0..10usize {
        let s = StateBins { battery_bin: 9, count_bin: c };
        println!("  c{}: cont={:10.3} retr={:10.3}", c, t.get(s, Action::Continue), t.get(s, Action::Retrain));
    }
}
