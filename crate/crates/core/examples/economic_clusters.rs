//! Economic barrier classes: the bundled country table, and k-means over
//! 12-dimensional prosperity profiles.

use barrierlens::barriers::{class_label, kmeans, ProsperityVector, PROSPERITY_DIMS};
use barrierlens::EconomicClusterMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = EconomicClusterMap::bundled();
    let names = barrierlens::barriers::CountryNames::default();
    for country in ["Israel", "Russia", "Algeria", "Jamaica", "USA", "ps", "Atlantis"] {
        let class = table.lookup(country, &names).unwrap_or_else(|| "Unknown".into());
        println!("{country:<10} {class}");
    }
    let present = table.present_classes();
    println!(
        "{} classes present: {}",
        present.len(),
        present.iter().map(|&c| class_label(c)).collect::<Vec<_>>().join(" ")
    );

    // Three synthetic economies: rich, middle and poor, each with noise.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut vectors = Vec::new();
    for (group, level) in [("rich", 80.0), ("middle", 55.0), ("poor", 30.0)] {
        for i in 0..6 {
            let dims = (0..PROSPERITY_DIMS).map(|_| level + rng.random_range(-4.0..4.0)).collect();
            vectors.push(ProsperityVector::new(format!("{group}-{i}"), dims)?);
        }
    }
    let map = kmeans(&vectors, 3, 42, 100)?;
    println!("k-means inertia {:.2}", map.inertia);
    for class in map.present_classes() {
        println!("  {}: {}", class_label(class), map.members(class).join(", "));
    }
    Ok(())
}
