//! Writing and reading the on-disk formats: sample streams, matrices, sign
//! grids, configuration documents and the row map of expanded streams.

use mwc_lab::expander::virtual_rows;
use mwc_lab::frontend::{gen_sign_matrix, MwcConfig, SampleStream, SignMode};
use mwc_lab::io::{
    load_config, load_row_map, load_signs, load_stream, save_config, save_row_map, save_signs, save_stream, RowMap,
    MAGIC,
};
use mwc_lab::seed::SeedTree;
use num_complex::Complex64;

fn main() -> mwc_lab::Result<()> {
    let dir = std::env::temp_dir().join("mwc-lab-file-formats");
    std::fs::create_dir_all(&dir)?;

    let rows: Vec<Vec<Complex64>> =
        (0..3).map(|i| (0..5).map(|n| Complex64::new((i * 5 + n) as f64, -(n as f64))).collect()).collect();
    let stream = SampleStream::from_rows(&rows, 51.28e6, 100)?;
    let path = dir.join("samples.bin");
    save_stream(&stream, &path)?;
    let bytes = std::fs::read(&path)?;
    println!("samples.bin: {} bytes, magic {:?}", bytes.len(), std::str::from_utf8(&bytes[..4]).unwrap_or("?"));
    assert_eq!(&bytes[..4], MAGIC);
    assert_eq!(load_stream(&path)?, stream);

    let signs = gen_sign_matrix(3, 19, &mut SeedTree::new(1).rng(), SignMode::Independent)?;
    save_signs(&signs, &dir.join("signs.txt"))?;
    println!("signs.txt:\n{}", std::fs::read_to_string(dir.join("signs.txt"))?);
    assert_eq!(load_signs(&dir.join("signs.txt"))?, signs);

    let config = MwcConfig::new(signs, 1e9 / 19.0, 3)?;
    save_config(&config, &dir.join("config.json"))?;
    assert_eq!(load_config(&dir.join("config.json"))?, config);

    let map = RowMap { rate_ratio: 3, rows: virtual_rows(3, 3) };
    save_row_map(&map, &dir.join("rowmap.json"))?;
    assert_eq!(load_row_map(&dir.join("rowmap.json"))?, map);
    println!("all files round-tripped in {}", dir.display());
    Ok(())
}
