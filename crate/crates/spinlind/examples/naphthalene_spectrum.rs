//! Stick spectrum of the naphthalene radical anion from the generating
//! polynomial, written as CSV and SVG.

use spinlind::spectrum::{render_svg, stick_spectrum, write_csv, EquivalentGroup, Molecule, SpectrumOptions};

fn main() -> spinlind::Result<()> {
    let gamma_h = 2.675_221_87e4;
    let molecule = Molecule::new(
        "naphthalene anion",
        vec![
            EquivalentGroup::new("e", 1, 1, -1.760_859_63e7).with_lambda("alpha", 4.90).with_lambda("beta", 1.83),
            EquivalentGroup::new("alpha", 1, 4, gamma_h),
            EquivalentGroup::new("beta", 1, 4, gamma_h),
        ],
    )?;
    let spec = stick_spectrum(&molecule, &["e"], SpectrumOptions::default())?;
    println!("{} lines, {} configurations", spec.lines.len(), spec.total_weight());
    for l in &spec.lines {
        let occ = &l.configs[0].occupations;
        println!("{:8.3} G  {:>3}  n = {:?}", l.delta_b, l.weight, occ);
    }

    let dir = std::env::temp_dir();
    write_csv(&spec, std::fs::File::create(dir.join("naphthalene.csv"))?)?;
    std::fs::write(dir.join("naphthalene.svg"), render_svg(&spec, "naphthalene anion"))?;
    println!("wrote {}", dir.join("naphthalene.{csv,svg}").display());
    Ok(())
}
