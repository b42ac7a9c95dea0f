//! Random streams addressed by (seed, path). A child stream depends only on
//! its address, never on how much its parent has been used.

use rand::RngCore;
use tiered_review::RngStream;

fn main() {
    let root = RngStream::new(2024);
    let mut used = root.clone();
    for _ in 0..1000 {
        used.next_u64();
    }
    let a = root.child(3).child(7).next_u64();
    let b = used.child(3).child(7).next_u64();
    println!("child (3, 7) from fresh parent:    {a:#018x}");
    println!("child (3, 7) from consumed parent: {b:#018x}");

    let same = RngStream::with_path(2024, vec![3, 7]).next_u64();
    println!("stream addressed directly:         {same:#018x}");

    let sibling = root.child(3).child(8).next_u64();
    println!("sibling (3, 8):                    {sibling:#018x}");
}
