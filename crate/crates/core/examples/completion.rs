use rog::isomorph::{rank1_complete, rank1_complete_signs, PartialMatrix};

fn main() -> Result<(), rog::error::Error> {
    // three known entries of the rank-one matrix (1, 2)ᵀ(3, 1)
    let a = PartialMatrix::new(2, 2, vec![(0, 0, 3.0), (0, 1, 1.0), (1, 0, 6.0)])?;
    println!("{}", serde_json::to_string(&rank1_complete(&a))?);

    // a 2×2 block with an odd number of minus signs has no sign completion
    let s = PartialMatrix::new(2, 2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)])?;
    println!("{}", serde_json::to_string(&rank1_complete_signs(&s)?)?);
    Ok(())
}
