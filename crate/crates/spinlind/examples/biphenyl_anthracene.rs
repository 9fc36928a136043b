//! Biphenyl and anthracene anions share group sizes (4, 4, 2) and hence the
//! same 75 intensities; only the positions differ.

use spinlind::spectrum::{generating_polynomial, stick_spectrum, EquivalentGroup, Molecule, SpectrumOptions};

fn anion(name: &str, lambdas: [f64; 3]) -> spinlind::Result<Molecule> {
    let counts = [4, 4, 2];
    let mut e = EquivalentGroup::new("e", 1, 1, -1.760_859_63e7);
    let mut groups = Vec::new();
    for (k, (&n, &l)) in counts.iter().zip(&lambdas).enumerate() {
        let label = format!("H{}", k + 1);
        e = e.with_lambda(&label, l);
        groups.push(EquivalentGroup::new(&label, 1, n, 2.675_221_87e4));
    }
    groups.insert(0, e);
    Molecule::new(name, groups)
}

fn main() -> spinlind::Result<()> {
    let biphenyl = anion("biphenyl", [2.675, 0.394, 5.387])?;
    let anthracene = anion("anthracene", [2.73, 1.51, 5.34])?;
    let poly = generating_polynomial(&biphenyl, "e")?;
    println!("P(x) has {} terms; coefficient of x1^4 x2^3 = {}", poly.len(), poly.coefficient(&[4, 3, 0]));

    let b = stick_spectrum(&biphenyl, &["e"], SpectrumOptions::default())?;
    let a = stick_spectrum(&anthracene, &["e"], SpectrumOptions::default())?;
    let mut wb: Vec<_> = b.lines.iter().map(|l| l.weight.clone()).collect();
    let mut wa: Vec<_> = a.lines.iter().map(|l| l.weight.clone()).collect();
    wb.sort();
    wa.sort();
    println!("biphenyl {} lines spanning {:.3} G", b.lines.len(), b.lines.last().unwrap().delta_b);
    println!("anthracene {} lines spanning {:.3} G", a.lines.len(), a.lines.last().unwrap().delta_b);
    println!("same intensity multiset: {}", wa == wb);

    // strongest lines of each
    for (name, s) in [("biphenyl", &b), ("anthracene", &a)] {
        let top = s.lines.iter().max_by(|x, y| x.weight.cmp(&y.weight)).unwrap();
        println!("{name}: strongest {} at {:.3} G", top.weight, top.delta_b);
    }
    Ok(())
}
