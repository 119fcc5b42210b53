//! Tour of the hypervector primitives: why random vectors are usable as
//! symbols, what bind/bundle/permute preserve, and how the level value bank
//! turns pixel intensities into gradually drifting vectors.
//!
//! Run with `cargo run --release --example hdc_basics`.

use fsl_hdc::hdc::{
    bind, bipolarize, bundle, cosine_similarity, is_bipolar, permute, random_bipolar, ItemMemory,
    ValueEncoding,
};
use fsl_hdc::rng::{stream_rng, Stream};
use fsl_hdc::Result;

const DIM: usize = 10_000;

fn main() -> Result<()> {
    let mut rng = stream_rng(7, Stream::Diagnostics, &[0]);
    let a = random_bipolar(DIM, &mut rng)?;
    let b = random_bipolar(DIM, &mut rng)?;
    let c = random_bipolar(DIM, &mut rng)?;

    // Independent random directions in 10k dimensions are nearly orthogonal,
    // which is what lets a fixed bank of them act as distinct symbols.
    println!("dimension: {DIM}");
    println!("cos(a, b) = {:+.4}  (independent vectors, near zero)", cosine_similarity(&a, &b)?);

    // Binding produces a vector unlike either input, and binding again with
    // one input recovers the other exactly: x * y * y = x when y is bipolar.
    let ab = bind(&a, &b)?;
    println!("cos(a*b, a) = {:+.4}  (bound pair hides its factors)", cosine_similarity(&ab, &a)?);
    let unbound = bind(&ab, &b)?;
    println!("bind(a*b, b) == a: {}", unbound == a);

    // Bundling keeps the result similar to every input; it is the integer
    // sum, so three inputs give elements in {-3, -1, 1, 3}.
    let abc = bundle(&[a.clone(), b.clone(), c.clone()])?;
    println!(
        "cos(a+b+c, a) = {:+.4}, cos(a+b+c, c) = {:+.4}  (bundle stays close to members)",
        cosine_similarity(&abc, &a)?,
        cosine_similarity(&abc, &c)?
    );
    println!("bundle is bipolar: {}, after sign threshold: {}", is_bipolar(&abc), is_bipolar(&bipolarize(&abc)));

    // A circular shift is a cheap way to mint a new quasi-orthogonal symbol
    // from an old one, and it is exactly invertible.
    let shifted = permute(&a, 1);
    let disagree = a.iter().zip(&shifted).filter(|(x, y)| x != y).count();
    println!(
        "permute by 1: hamming distance {:.4}, cos = {:+.4}",
        disagree as f64 / DIM as f64,
        cosine_similarity(&a, &shifted)?
    );
    println!("permute(permute(a, 3), -3) == a: {}", permute(&permute(&a, 3), -3) == a);

    // The shared item memory: one position vector per pixel, one value vector
    // per intensity. With level encoding, value vectors drift apart linearly
    // in intensity: cos(value[0], value[v]) is about 1 - v/255.
    let im = ItemMemory::generate(DIM, 784, 256, 7, ValueEncoding::Level)?;
    println!("\nlevel value bank, similarity to intensity 0:");
    for v in [0usize, 32, 64, 128, 192, 255] {
        let cos = cosine_similarity(&im.value_hvs()[0], &im.value_hvs()[v])?;
        println!("  cos(value[0], value[{v:3}]) = {cos:+.4}");
    }

    // Random encoding makes every intensity its own unrelated symbol; nearby
    // pixel values then share nothing, which costs accuracy on smooth data.
    let im_rand = ItemMemory::generate(DIM, 784, 256, 7, ValueEncoding::Random)?;
    println!(
        "random value bank:  cos(value[0], value[1]) = {:+.4}",
        cosine_similarity(&im_rand.value_hvs()[0], &im_rand.value_hvs()[1])?
    );
    Ok(())
}
