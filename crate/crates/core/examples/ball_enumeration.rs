//! Enumerates B_3(o) in T_2 and prints its spheres, a few distances and a
//! branch relabeling.

use cayley_toeplitz::tree::{ball_size, enumerate_ball, BranchRelabeling};

fn main() -> cayley_toeplitz::Result<()> {
    let (kappa, radius) = (2, 3);
    let ball = enumerate_ball(kappa, radius)?;
    println!("|B_{radius}(o)| = {} (closed form {})", ball.len(), ball_size(kappa, radius)?);
    for l in 0..=radius {
        let words: Vec<String> = ball.sphere(l).map(|i| format!("{:?}", ball.vertex(i).word())).collect();
        println!("S_{l}: {} vertices, first {}", words.len(), words[0]);
    }
    let (x, y) = (ball.sphere(3).start, ball.sphere(3).end - 1);
    println!("d({:?}, {:?}) = {}", ball.vertex(x).word(), ball.vertex(y).word(), ball.distance(x, y));

    let g = BranchRelabeling::new(kappa, vec![2, 0, 1], vec![1, 0])?;
    let perm = g.index_permutation(&ball);
    println!("relabeling sends {:?} to {:?}", ball.vertex(x).word(), ball.vertex(perm[x]).word());
    Ok(())
}
