//! High-field stick spectra of molecules made of groups of equivalent spins.
//!
//! For a resonance group α the lines are the monomials of
//!   P_α(x) = Π_{α′} (1 + x_{α′} + … + x_{α′}^{2j_{α′}})^{N_{α′}},
//! with the exponent n_{α′} placing the line at ΔB = Σ λ_{αα′} n_{α′} and the
//! coefficient giving its relative intensity.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::master::{pauli_rates, MasterEquationModel};
use crate::spin::SpinSystem;

/// Lines closer than this (Gauss) are merged.
pub const MERGE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EquivalentGroup {
    pub label: String,
    pub twice_j: u32,
    pub count: u32,
    /// rad/s/G.
    pub gamma: f64,
    /// λ_{αα′} in Gauss toward other groups, keyed by their label.
    pub lambdas: BTreeMap<String, f64>,
    pub abundance: f64,
}

impl EquivalentGroup {
    pub fn new(label: &str, twice_j: u32, count: u32, gamma: f64) -> Self {
        Self { label: label.to_string(), twice_j, count, gamma, lambdas: BTreeMap::new(), abundance: 1.0 }
    }

    pub fn with_lambda(mut self, other: &str, lambda: f64) -> Self {
        self.lambdas.insert(other.to_string(), lambda);
        self
    }

    /// J = j·N.
    pub fn total_spin(&self) -> f64 { self.twice_j as f64 * self.count as f64 / 2.0 }

    /// 2J, the largest boson number of the group.
    pub fn max_bosons(&self) -> u32 { self.twice_j * self.count }
}

/// λ_{αα′} = −T_{αα′}/γ_α.
pub fn lambda_from_coupling(t: f64, gamma: f64) -> Result<f64> {
    if gamma == 0.0 {
        return Err(Error::Argument("resonance group has zero gyromagnetic ratio".into()));
    }
    Ok(-t / gamma)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Molecule {
    pub name: String,
    pub groups: Vec<EquivalentGroup>,
}

impl Molecule {
    pub fn new(name: &str, groups: Vec<EquivalentGroup>) -> Result<Self> {
        let m = Self { name: name.to_string(), groups };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::Validation("molecule needs at least one group of equivalent spins".into()));
        }
        for (k, g) in self.groups.iter().enumerate() {
            if g.label.is_empty() {
                return Err(Error::Validation("group label must not be empty".into()));
            }
            if self.groups[..k].iter().any(|h| h.label == g.label) {
                return Err(Error::Validation(format!("duplicate group label '{}'", g.label)));
            }
            if g.count == 0 {
                return Err(Error::Validation(format!("group '{}' has no members", g.label)));
            }
            if !(g.abundance > 0.0 && g.abundance <= 1.0) {
                return Err(Error::Validation(format!("group '{}': abundance must lie in (0, 1]", g.label)));
            }
            if !g.gamma.is_finite() {
                return Err(Error::Validation(format!("group '{}': gyromagnetic ratio is not finite", g.label)));
            }
            for (other, l) in &g.lambdas {
                if other == &g.label {
                    return Err(Error::Validation(format!("group '{}' has a splitting toward itself", g.label)));
                }
                if !self.groups.iter().any(|h| &h.label == other) {
                    return Err(Error::InvalidLabel(format!("group '{}' refers to unknown group '{other}'", g.label)));
                }
                if !l.is_finite() {
                    return Err(Error::Validation(format!("group '{}': splitting toward '{other}' is not finite", g.label)));
                }
            }
        }
        Ok(())
    }

    pub fn group(&self, label: &str) -> Result<&EquivalentGroup> {
        self.groups
            .iter()
            .find(|g| g.label == label)
            .ok_or_else(|| Error::InvalidLabel(format!("no group labelled '{label}'")))
    }

    /// Groups with a nonzero splitting toward the resonance group, in
    /// declaration order.
    pub fn neighbours(&self, resonance: &str) -> Result<Vec<(&EquivalentGroup, f64)>> {
        let res = self.group(resonance)?;
        Ok(self
            .groups
            .iter()
            .filter(|g| g.label != res.label)
            .filter_map(|g| res.lambdas.get(&g.label).filter(|l| **l != 0.0).map(|&l| (g, l)))
            .collect())
    }

    /// B_α(ω₀) = −ω₀/γ_α − Σ λ_{αα′} J_{α′}.
    pub fn reference_field(&self, resonance: &str, omega_o: f64) -> Result<f64> {
        let res = self.group(resonance)?;
        if res.gamma == 0.0 {
            return Err(Error::Argument(format!("group '{resonance}' has zero gyromagnetic ratio")));
        }
        let shift: f64 = self.neighbours(resonance)?.iter().map(|(g, l)| l * g.total_spin()).sum();
        Ok(-omega_o / res.gamma - shift)
    }

    /// D_{α,S}: Π (2j + 1)^N over the resonance group and its neighbours.
    pub fn subspace_dimension(&self, resonance: &str) -> Result<BigUint> {
        let res = self.group(resonance)?;
        let mut d = BigUint::from(res.twice_j + 1).pow(res.count);
        for (g, _) in self.neighbours(resonance)? {
            d *= BigUint::from(g.twice_j + 1).pow(g.count);
        }
        Ok(d)
    }

    /// (γ_α² N_α / D_{α,S}) · binom(2j_α + 2, 3) · f_α.
    pub fn intensity_scale(&self, resonance: &str, with_abundance: bool) -> Result<f64> {
        let g = self.group(resonance)?;
        let d = self.subspace_dimension(resonance)?.to_f64().unwrap_or(f64::INFINITY);
        let f = if with_abundance { g.abundance } else { 1.0 };
        Ok(g.gamma * g.gamma * g.count as f64 / d * tetrahedral(g.twice_j) as f64 * f)
    }

    /// Every member of the resonance group and its neighbours as one spin,
    /// coupled by T_{αα′} = −γ_α λ_{αα′}. Couplings between two neighbour
    /// groups are not known from λ and are left at zero.
    pub fn to_spin_system(&self, resonance: &str) -> Result<SpinSystem> {
        let res = self.group(resonance)?;
        let nb = self.neighbours(resonance)?;
        let mut twice_j = Vec::new();
        let mut gammas = Vec::new();
        let mut owner = Vec::new();
        for _ in 0..res.count {
            twice_j.push(res.twice_j);
            gammas.push(res.gamma);
            owner.push(None);
        }
        for (k, (g, _)) in nb.iter().enumerate() {
            for _ in 0..g.count {
                twice_j.push(g.twice_j);
                gammas.push(g.gamma);
                owner.push(Some(k));
            }
        }
        let n = twice_j.len();
        let t = nalgebra::DMatrix::from_fn(n, n, |a, b| match (owner[a], owner[b]) {
            (None, Some(k)) | (Some(k), None) => -res.gamma * nb[k].1,
            _ => 0.0,
        });
        SpinSystem::new(twice_j, gammas, t)
    }
}

/// binom(2j + 2, 3), the 2j-th tetrahedral number.
pub fn tetrahedral(twice_j: u32) -> u64 {
    let n = twice_j as u64 + 2;
    n * (n - 1) * (n - 2) / 6
}

/// Coefficients of (1 + x + … + x^{2j})^N.
pub fn group_factor(twice_j: u32, count: u32) -> Vec<BigUint> {
    let base = vec![BigUint::one(); twice_j as usize + 1];
    let mut acc = vec![BigUint::one()];
    for _ in 0..count {
        acc = convolve(&acc, &base);
    }
    acc
}

fn convolve(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Multivariate polynomial with exact integer coefficients, keyed by the
/// exponent vector in the order of `variables`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub variables: Vec<String>,
    pub terms: BTreeMap<Vec<u32>, BigUint>,
}

impl Polynomial {
    pub fn coefficient(&self, exponents: &[u32]) -> BigUint {
        self.terms.get(exponents).cloned().unwrap_or_default()
    }

    pub fn coefficient_sum(&self) -> BigUint { self.terms.values().sum() }

    pub fn len(&self) -> usize { self.terms.len() }

    pub fn is_empty(&self) -> bool { self.terms.is_empty() }
}

/// P_α(x) over the groups with a nonzero splitting toward α.
pub fn generating_polynomial(molecule: &Molecule, resonance: &str) -> Result<Polynomial> {
    let nb = molecule.neighbours(resonance)?;
    let mut terms: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
    terms.insert(Vec::new(), BigUint::one());
    for (g, _) in &nb {
        let f = group_factor(g.twice_j, g.count);
        let mut next = BTreeMap::new();
        for (exp, c) in &terms {
            for (n, cf) in f.iter().enumerate() {
                let mut e = exp.clone();
                e.push(n as u32);
                next.insert(e, c * cf);
            }
        }
        terms = next;
    }
    Ok(Polynomial { variables: nb.iter().map(|(g, _)| g.label.clone()).collect(), terms })
}

/// Occupation numbers of one contributing configuration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub struct LineConfig {
    pub resonance: String,
    pub occupations: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct StickLine {
    /// Offset from the reference field (Gauss), or the absolute field when
    /// the spectrum has an absolute axis.
    pub delta_b: f64,
    pub intensity: f64,
    /// Exact sum of the polynomial coefficients merged into this line.
    #[serde(serialize_with = "ser_big")]
    pub weight: BigUint,
    pub configs: Vec<LineConfig>,
}

fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct StickSpectrum {
    pub resonance: Vec<String>,
    /// B_α(ω₀) when one resonance group and ω₀ were given.
    pub reference: Option<f64>,
    /// True when positions are absolute fields rather than offsets.
    pub absolute: bool,
    pub scaled: bool,
    pub lines: Vec<StickLine>,
}

impl StickSpectrum {
    pub fn total_weight(&self) -> BigUint { self.lines.iter().map(|l| &l.weight).sum() }

    pub fn intensities(&self) -> Vec<f64> { self.lines.iter().map(|l| l.intensity).collect() }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SpectrumOptions {
    /// ω₀ in rad/s: fixes B_α(ω₀). Needed to sum several resonance groups.
    pub omega_o: Option<f64>,
    /// Multiply by (γ²N/D)·binom(2j+2, 3).
    pub scaled: bool,
    /// Also multiply by the abundance f_α.
    pub with_abundance: bool,
}

/// Stick spectrum of one or more resonance groups. With one group and no ω₀
/// the axis is ΔB from B_α(ω₀); with ω₀ the axis is the absolute field.
pub fn stick_spectrum(molecule: &Molecule, resonance: &[&str], opts: SpectrumOptions) -> Result<StickSpectrum> {
    molecule.validate()?;
    if resonance.is_empty() {
        return Err(Error::Argument("no resonance group given".into()));
    }
    if resonance.len() > 1 && opts.omega_o.is_none() {
        return Err(Error::Argument("summing several resonance groups needs ω₀ for a common field axis".into()));
    }
    let scaled = opts.scaled || opts.with_abundance || resonance.len() > 1;
    let mut raw = Vec::new();
    for &label in resonance {
        let nb = molecule.neighbours(label)?;
        let poly = generating_polynomial(molecule, label)?;
        let offset = match opts.omega_o {
            Some(w) => molecule.reference_field(label, w)?,
            None => 0.0,
        };
        let scale = if scaled { molecule.intensity_scale(label, opts.with_abundance)? } else { 1.0 };
        for (exp, c) in &poly.terms {
            let db: f64 = exp.iter().zip(&nb).map(|(&n, (_, l))| l * n as f64).sum();
            let cf = c.to_f64().unwrap_or(f64::INFINITY);
            raw.push(StickLine {
                delta_b: offset + db,
                intensity: scale * cf,
                weight: c.clone(),
                configs: vec![LineConfig { resonance: label.to_string(), occupations: exp.clone() }],
            });
        }
    }
    let reference = match (resonance, opts.omega_o) {
        ([one], Some(w)) => Some(molecule.reference_field(one, w)?),
        _ => None,
    };
    Ok(StickSpectrum {
        resonance: resonance.iter().map(|s| s.to_string()).collect(),
        reference,
        absolute: opts.omega_o.is_some(),
        scaled,
        lines: merge_lines(raw),
    })
}

fn merge_lines(mut raw: Vec<StickLine>) -> Vec<StickLine> {
    raw.sort_by(|a, b| a.delta_b.total_cmp(&b.delta_b).then_with(|| a.configs.cmp(&b.configs)));
    let mut out: Vec<StickLine> = Vec::new();
    let mut anchor = f64::NEG_INFINITY;
    for line in raw {
        match out.last_mut() {
            Some(last) if line.delta_b - anchor <= MERGE_TOL => {
                last.intensity += line.intensity;
                last.weight += line.weight;
                last.configs.extend(line.configs);
            }
            _ => {
                anchor = line.delta_b;
                out.push(line);
            }
        }
    }
    out
}

/// Stick lines from the level/rate path: channels of the model whose gap
/// lies within `band` of −γ_res·B₀ are converted to the resonance field for
/// a drive at ω via B = B₀ + (ω − ω₀)/(−γ_res), offset by `reference`.
/// Intensities are Σ|⟨a|ξˣ(+1,ω₀)|b⟩|² over the channel, i.e. the Pauli rate
/// without the 2πB₁²ρ_f factor.
pub fn matrix_stick_spectrum(
    model: &MasterEquationModel,
    resonance_gamma: f64,
    omega: f64,
    band: f64,
    reference: f64,
) -> Result<Vec<(f64, f64)>> {
    if resonance_gamma == 0.0 {
        return Err(Error::Argument("resonance gyromagnetic ratio must be nonzero".into()));
    }
    let b0 = model.field.b0;
    let larmor = -resonance_gamma * b0;
    let table = pauli_rates(model);
    let mut lines: Vec<(f64, f64)> = model
        .channels
        .iter()
        .filter(|c| (c.omega_o - larmor).abs() <= band)
        .map(|c| {
            // Σ Γ over the channel's pairs divided by 2πB₁²[ρ_f(ω₀) + ρ_f(−ω₀)]
            let strength: f64 = if c.rate() > 0.0 {
                table.entries.iter().filter(|e| e.omega_o == c.omega_o).map(|e| e.total()).sum::<f64>() / c.rate()
            } else {
                c.xi.iter().map(|z| z.norm_sqr()).sum()
            };
            let field = b0 + (omega - c.omega_o) / (-resonance_gamma);
            (field - reference, strength)
        })
        .collect();
    lines.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(lines)
}

/// x with 12 significant digits, trailing zeros trimmed.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..=14).contains(&mag) {
        return format!("{x:.11e}");
    }
    let prec = (11 - mag).max(0) as usize;
    let s = format!("{x:.prec$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" { "0".into() } else { s }
}

fn format_config(c: &LineConfig, multi: bool) -> String {
    let occ: Vec<String> = c.occupations.iter().map(|n| n.to_string()).collect();
    if multi { format!("{}:{}", c.resonance, occ.join(";")) } else { occ.join(";") }
}

/// CSV with columns delta_b_gauss, intensity, weight, config. Merged lines
/// list their configurations separated by '|'.
pub fn write_csv<W: Write>(spec: &StickSpectrum, out: W) -> Result<()> {
    let multi = spec.resonance.len() > 1;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delta_b_gauss", "intensity", "weight", "config"])?;
    for l in &spec.lines {
        let cfg: Vec<String> = l.configs.iter().map(|c| format_config(c, multi)).collect();
        w.write_record([format_sig12(l.delta_b), format_sig12(l.intensity), l.weight.to_string(), cfg.join("|")])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads lines written by `write_csv`; the resonance labels fill configs
/// that carry no label.
pub fn read_csv<R: Read>(input: R, resonance: &str) -> Result<Vec<StickLine>> {
    let mut r = csv::Reader::from_reader(input);
    let mut lines = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse { line, msg: format!("missing column {i}") });
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("'{s}': {e}") });
        let delta_b = num(field(0)?)?;
        let intensity = num(field(1)?)?;
        let weight = field(2)?
            .trim()
            .parse::<BigUint>()
            .map_err(|e| Error::Parse { line, msg: format!("weight: {e}") })?;
        let mut configs = Vec::new();
        for part in field(3)?.split('|').filter(|s| !s.is_empty()) {
            let (label, occ) = match part.split_once(':') {
                Some((l, o)) => (l.to_string(), o),
                None => (resonance.to_string(), part),
            };
            let occupations = occ
                .split(';')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u32>().map_err(|e| Error::Parse { line, msg: format!("config '{s}': {e}") }))
                .collect::<Result<Vec<_>>>()?;
            configs.push(LineConfig { resonance: label, occupations });
        }
        lines.push(StickLine { delta_b, intensity, weight, configs });
    }
    Ok(lines)
}

/// Stick plot: one vertical line per stick, height ∝ intensity, labelled
/// with the exact weight when unscaled.
pub fn render_svg(spec: &StickSpectrum, title: &str) -> String {
    let (w, h) = (900.0, 420.0);
    let (left, right, top, bottom) = (60.0, 30.0, 40.0, 60.0);
    let xs: Vec<f64> = spec.lines.iter().map(|l| l.delta_b).collect();
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (lo.min(0.0) - 1.0, lo.max(0.0) + 1.0) };
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let ymax = spec.lines.iter().map(|l| l.intensity).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let px = |x: f64| left + (x - lo) / (hi - lo) * (w - left - right);
    let py = |y: f64| h - bottom - y / ymax * (h - top - bottom);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    let base = h - bottom;
    let _ = writeln!(s, r#"<line x1="{left}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#, w - right);
    // axis ticks
    let step = nice_step((hi - lo) / 8.0);
    let mut t = (lo / step).ceil() * step;
    while t <= hi {
        let x = px(t);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{base}" x2="{x:.2}" y2="{}" stroke="black"/>"#, base + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            base + 18.0,
            format_sig12((t / step).round() * step)
        );
        t += step;
    }
    let axis = if spec.absolute { "B (G)" } else { "ΔB (G)" };
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{axis}</text>"#, w / 2.0, h - 15.0);
    for l in &spec.lines {
        let x = px(l.delta_b);
        let y = py(l.intensity);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{base}" x2="{x:.2}" y2="{y:.2}" stroke="navy" stroke-width="1.5"/>"#);
        let label = if spec.scaled { format!("{:.3}", l.intensity / ymax) } else { l.weight.to_string() };
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="9" text-anchor="middle">{label}</text>"#,
            y - 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn nice_step(raw: f64) -> f64 {
    if !(raw > 0.0) {
        return 1.0;
    }
    let p = 10f64.powf(raw.log10().floor());
    let m = raw / p;
    let k = if m < 1.5 { 1.0 } else if m < 3.5 { 2.0 } else if m < 7.5 { 5.0 } else { 10.0 };
    k * p
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetrahedral_numbers() {
        assert_eq!(tetrahedral(1), 1);
        assert_eq!(tetrahedral(2), 4);
        assert_eq!(tetrahedral(3), 10);
    }

    #[test]
    fn spin_one_factor() {
        let f = group_factor(2, 1);
        assert_eq!(f, vec![BigUint::one(); 3]);
        let f = group_factor(1, 4);
        let want: Vec<BigUint> = [1u32, 4, 6, 4, 1].iter().map(|&x| BigUint::from(x)).collect();
        assert_eq!(f, want);
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(18.36), "18.36");
        assert_eq!(format_sig12(3.0 * 4.9 + 2.0 * 1.83), "18.36");
        assert_eq!(format_sig12(-0.5), "-0.5");
        assert_eq!(format_sig12(24.0), "24");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
    }
}
