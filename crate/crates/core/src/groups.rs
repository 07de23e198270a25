//! Finite groups given by multiplication tables, the circle group U(1), and
//! catalogues of their irreducible unitary representations.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

/// A finite group on the elements `0..L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteGroup {
    name: String,
    mult: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// Validates a multiplication table: Latin square, two-sided identity,
    /// inverses, and associativity on 100 random triples.
    pub fn from_table(name: impl Into<String>, mult: Vec<Vec<usize>>) -> Result<Self> {
        let l = mult.len();
        if l == 0 || mult.iter().any(|r| r.len() != l || r.iter().any(|&x| x >= l)) {
            return Err(Error::Config("multiplication table must be L×L over 0..L".into()));
        }
        for a in 0..l {
            let mut row = vec![false; l];
            let mut col = vec![false; l];
            for b in 0..l {
                row[mult[a][b]] = true;
                col[mult[b][a]] = true;
            }
            if row.iter().chain(&col).any(|s| !s) {
                return Err(Error::Config("multiplication table is not a Latin square".into()));
            }
        }
        let identity = (0..l)
            .find(|&e| (0..l).all(|g| mult[e][g] == g && mult[g][e] == g))
            .ok_or_else(|| Error::Config("table has no identity".into()))?;
        let inverse: Vec<usize> = (0..l)
            .map(|g| (0..l).find(|&h| mult[g][h] == identity && mult[h][g] == identity))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Config("some element has no two-sided inverse".into()))?;
        let mut rng = seeded(l as u64);
        for _ in 0..100 {
            let (a, b, c) = (rng.random_range(0..l), rng.random_range(0..l), rng.random_range(0..l));
            if mult[mult[a][b]][c] != mult[a][mult[b][c]] {
                return Err(Error::Config(format!("table is not associative at ({a}, {b}, {c})")));
            }
        }
        Ok(Self {
            name: name.into(),
            mult,
            inverse,
            identity,
        })
    }

    pub fn cyclic(l: usize) -> Result<Self> {
        if !(1..=256).contains(&l) {
            return Err(Error::InvalidParameter(format!("Z/L needs 1 ≤ L ≤ 256, got {l}")));
        }
        Self::from_table(format!("zl:{l}"), (0..l).map(|a| (0..l).map(|b| (a + b) % l).collect()).collect())
    }

    /// S₃ with elements the permutations of {0,1,2} in lexicographic order;
    /// `(σ·τ)(i) = σ(τ(i))`.
    pub fn s3() -> Self {
        let perms = s3_perms();
        let mult = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| {
                        let c = [s[t[0]], s[t[1]], s[t[2]]];
                        perms.iter().position(|p| *p == c).expect("closed")
                    })
                    .collect()
            })
            .collect();
        Self::from_table("s3", mult).expect("S3 table is valid")
    }

    /// The quaternion group {±1, ±i, ±j, ±k}, in that order.
    pub fn q8() -> Self {
        let els = q8_elements();
        let mult = els
            .iter()
            .map(|a| {
                els.iter()
                    .map(|b| {
                        let c = quat_mul(*a, *b);
                        els.iter().position(|e| *e == c).expect("closed")
                    })
                    .collect()
            })
            .collect();
        Self::from_table("q8", mult).expect("Q8 table is valid")
    }

    /// Reads `L` on the first line, then `L` rows of `L` whitespace-separated
    /// 0-based indices.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_table(&path.display().to_string(), &text)
    }

    pub fn parse_table(name: &str, text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let l: usize = lines
            .next()
            .ok_or_else(|| Error::Config("empty multiplication table".into()))?
            .parse()
            .map_err(|_| Error::Config("first line must be the group order".into()))?;
        let rows: Vec<Vec<usize>> = lines
            .map(|line| {
                line.split_whitespace()
                    .map(|t| t.parse::<usize>().map_err(|_| Error::Config(format!("bad index `{t}`"))))
                    .collect()
            })
            .collect::<Result<_>>()?;
        if rows.len() != l {
            return Err(Error::Config(format!("expected {l} rows, found {}", rows.len())));
        }
        Self::from_table(format!("file:{name}"), rows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.mult.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    /// `a b⁻¹`.
    pub fn relative(&self, a: usize, b: usize) -> usize {
        self.mult[a][self.inverse[b]]
    }
}

fn s3_perms() -> Vec<[usize; 3]> {
    vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
}

type Quat = [i8; 4];

fn q8_elements() -> Vec<Quat> {
    vec![
        [1, 0, 0, 0],
        [-1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, -1, 0, 0],
        [0, 0, 1, 0],
        [0, 0, -1, 0],
        [0, 0, 0, 1],
        [0, 0, 0, -1],
    ]
}

fn quat_mul(p: Quat, q: Quat) -> Quat {
    let [a1, b1, c1, d1] = p;
    let [a2, b2, c2, d2] = q;
    [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ]
}

/// The 2×2 complex block of the quaternion a + bi + cj + dk.
pub fn quaternion_block(a: f64, b: f64, c: f64, d: f64) -> [[Complex64; 2]; 2] {
    [
        [Complex64::new(a, b), Complex64::new(c, d)],
        [Complex64::new(-c, d), Complex64::new(a, -b)],
    ]
}

/// A finite group or the circle group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    Finite(FiniteGroup),
    U1,
}

/// An element of a [`GroupSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Element {
    Finite(usize),
    Angle(f64),
}

impl GroupSpec {
    /// `zl:L`, `s3`, `q8`, `u1` or `file:<path>`.
    pub fn from_id(id: &str) -> Result<Self> {
        let id = id.trim();
        if let Some(l) = id.strip_prefix("zl:") {
            let l: usize = l.parse().map_err(|_| Error::Config(format!("bad group order in `{id}`")))?;
            return Ok(Self::Finite(FiniteGroup::cyclic(l)?));
        }
        if let Some(path) = id.strip_prefix("file:") {
            return Ok(Self::Finite(FiniteGroup::from_file(Path::new(path))?));
        }
        match id {
            "s3" => Ok(Self::Finite(FiniteGroup::s3())),
            "q8" => Ok(Self::Finite(FiniteGroup::q8())),
            "u1" => Ok(Self::U1),
            _ => Err(Error::Config(format!("unknown group `{id}`"))),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Self::Finite(g) => g.name().to_string(),
            Self::U1 => "u1".into(),
        }
    }

    pub fn order(&self) -> Option<usize> {
        match self {
            Self::Finite(g) => Some(g.order()),
            Self::U1 => None,
        }
    }

    pub fn finite(&self) -> Option<&FiniteGroup> {
        match self {
            Self::Finite(g) => Some(g),
            Self::U1 => None,
        }
    }

    /// A Haar-distributed element.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        match self {
            Self::Finite(g) => Element::Finite(rng.random_range(0..g.order())),
            Self::U1 => Element::Angle(rng.random::<f64>() * 2.0 * PI),
        }
    }

    /// `a b⁻¹`.
    pub fn relative(&self, a: Element, b: Element) -> Element {
        match (self, a, b) {
            (Self::Finite(g), Element::Finite(x), Element::Finite(y)) => Element::Finite(g.relative(x, y)),
            (Self::U1, Element::Angle(x), Element::Angle(y)) => Element::Angle((x - y).rem_euclid(2.0 * PI)),
            _ => panic!("element does not belong to group {}", self.id()),
        }
    }

    /// The irreducible representations this crate ships for the group, one
    /// per conjugate pair, in canonical order. U(1) has infinitely many; the
    /// first `u1_max` frequencies are listed.
    pub fn catalog(&self, u1_max: usize) -> Vec<Representation> {
        let mut reps = match self {
            Self::U1 => (1..=u1_max as i64).map(Representation::u1).collect(),
            Self::Finite(g) => match g.name() {
                "s3" => s3_reps(g),
                "q8" => q8_reps(g),
                name if name.starts_with("zl:") => (1..=g.order() / 2).map(|k| zl_rep(g.order(), k)).collect(),
                _ => Vec::new(),
            },
        };
        sort_frequencies(&mut reps);
        reps
    }

    /// Frequencies by catalogue id, validated and sorted canonically.
    pub fn frequencies(&self, ids: &[usize]) -> Result<Vec<Representation>> {
        if ids.is_empty() {
            return Err(Error::Config("at least one frequency is required".into()));
        }
        if ids.contains(&0) {
            return Err(Error::TrivialRepresentation);
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut reps = Vec::new();
        for &k in ids {
            let rep = match self {
                Self::U1 => Representation::u1(k as i64),
                Self::Finite(g) => {
                    let cat = self.catalog(0);
                    if let Some(name) = g.name().strip_prefix("zl:") {
                        let l: usize = name.parse().expect("validated");
                        // k and L−k are conjugate; fold onto the catalogue entry
                        let k = k % l;
                        if k == 0 {
                            return Err(Error::TrivialRepresentation);
                        }
                        zl_rep(l, k.min(l - k))
                    } else {
                        cat.into_iter().find(|r| r.catalog_id == k).ok_or_else(|| {
                            Error::Config(format!("group {} has no frequency {k}", g.name()))
                        })?
                    }
                }
            };
            if !seen.insert(rep.catalog_id) {
                return Err(Error::Config(format!(
                    "frequency {} listed twice (or with its conjugate)",
                    rep.catalog_id
                )));
            }
            reps.push(rep);
        }
        sort_frequencies(&mut reps);
        Ok(reps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepType {
    Real,
    Complex,
    Quaternionic,
}

impl RepType {
    pub fn beta(self) -> usize {
        match self {
            Self::Real => 1,
            Self::Complex => 2,
            Self::Quaternionic => 4,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Self::Real),
            "complex" => Ok(Self::Complex),
            "quaternionic" => Ok(Self::Quaternionic),
            other => Err(Error::Config(format!("unknown representation type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum RepData {
    /// Complex matrices indexed by element; quaternionic ones are stored as
    /// 2d×2d complex embeddings.
    Table(Vec<DMatrix<Complex64>>),
    /// θ ↦ e^{ikθ}.
    Circle(i64),
}

/// An irreducible unitary representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    pub label: String,
    pub rep_type: RepType,
    /// d_ρ; the quaternionic dimension for quaternionic type.
    pub dim: usize,
    pub catalog_id: usize,
    data: RepData,
}

impl Representation {
    fn u1(k: i64) -> Self {
        Self {
            label: format!("e^{{i{k}θ}}"),
            rep_type: RepType::Complex,
            dim: 1,
            catalog_id: k.unsigned_abs() as usize,
            data: RepData::Circle(k),
        }
    }

    pub fn beta(&self) -> usize {
        self.rep_type.beta()
    }

    /// Size of the complex matrices: d, or 2d for quaternionic type.
    pub fn complex_dim(&self) -> usize {
        match self.rep_type {
            RepType::Quaternionic => 2 * self.dim,
            _ => self.dim,
        }
    }

    /// β d².
    pub fn weight(&self) -> usize {
        self.beta() * self.dim * self.dim
    }

    pub fn matrix(&self, g: Element) -> DMatrix<Complex64> {
        match (&self.data, g) {
            (RepData::Table(t), Element::Finite(i)) => t[i].clone(),
            (RepData::Circle(k), Element::Angle(theta)) => {
                DMatrix::from_element(1, 1, Complex64::from_polar(1.0, *k as f64 * theta))
            }
            _ => panic!("element type does not match representation {}", self.label),
        }
    }

    /// The real vector of length β d² obtained by splitting each entry of
    /// ρ(g) into its β real components (quaternion entries read off the
    /// 2×2 blocks).
    pub fn real_components(&self, g: Element) -> Vec<f64> {
        let m = self.matrix(g);
        let d = self.dim;
        let mut out = Vec::with_capacity(self.weight());
        for i in 0..d {
            for j in 0..d {
                match self.rep_type {
                    RepType::Real => out.push(m[(i, j)].re),
                    RepType::Complex => {
                        out.push(m[(i, j)].re);
                        out.push(m[(i, j)].im);
                    }
                    RepType::Quaternionic => {
                        let a = m[(2 * i, 2 * j)];
                        let c = m[(2 * i, 2 * j + 1)];
                        out.extend([a.re, a.im, c.re, c.im]);
                    }
                }
            }
        }
        out
    }

    /// True if ρ(g) is the identity for every g (every g checked for finite
    /// groups; frequency 0 for U(1)).
    pub fn is_trivial(&self, group: &GroupSpec) -> bool {
        match (&self.data, group) {
            (RepData::Circle(k), _) => *k == 0,
            (RepData::Table(t), GroupSpec::Finite(g)) => {
                let cd = self.complex_dim();
                let id = DMatrix::<Complex64>::identity(cd, cd);
                (0..g.order()).all(|a| (&t[a] - &id).norm() < 1e-10)
            }
            (RepData::Table(_), GroupSpec::U1) => false,
        }
    }

    /// Checks homomorphism, unitarity, Frobenius norm and (for quaternionic
    /// type) the block structure, exhaustively over a finite group.
    pub fn validate(&self, group: &FiniteGroup) -> Result<()> {
        const TOL: f64 = 1e-10;
        let l = group.order();
        let cd = self.complex_dim();
        let id = DMatrix::<Complex64>::identity(cd, cd);
        for a in 0..l {
            let ra = self.matrix(Element::Finite(a));
            if (&ra * ra.adjoint() - &id).norm() > TOL {
                return Err(Error::InvalidParameter(format!("{}: ρ({a}) is not unitary", self.label)));
            }
            if (ra.norm_squared() - cd as f64).abs() > TOL {
                return Err(Error::InvalidParameter(format!("{}: wrong Frobenius norm", self.label)));
            }
            if self.rep_type == RepType::Real && ra.iter().any(|z| z.im.abs() > TOL) {
                return Err(Error::InvalidParameter(format!("{}: real type with complex entries", self.label)));
            }
            if self.rep_type == RepType::Quaternionic {
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        let (p, q) = (ra[(2 * i, 2 * j)], ra[(2 * i, 2 * j + 1)]);
                        if (ra[(2 * i + 1, 2 * j)] + q.conj()).norm() > TOL
                            || (ra[(2 * i + 1, 2 * j + 1)] - p.conj()).norm() > TOL
                        {
                            return Err(Error::InvalidParameter(format!(
                                "{}: block ({i},{j}) is not quaternionic",
                                self.label
                            )));
                        }
                    }
                }
            }
            for b in 0..l {
                let prod = &ra * self.matrix(Element::Finite(b));
                if (prod - self.matrix(Element::Finite(group.mul(a, b)))).norm() > TOL {
                    return Err(Error::InvalidParameter(format!(
                        "{}: ρ({a})ρ({b}) ≠ ρ({a}{b})",
                        self.label
                    )));
                }
            }
        }
        let trivial = (0..l).all(|a| (self.matrix(Element::Finite(a)) - &id).norm() < TOL);
        if trivial {
            return Err(Error::TrivialRepresentation);
        }
        Ok(())
    }
}

/// Canonical frequency order: by (type, dimension, catalogue id).
pub fn sort_frequencies(reps: &mut [Representation]) {
    reps.sort_by_key(|r| (r.rep_type, r.dim, r.catalog_id));
}

/// D = Σ β_ρ d_ρ².
pub fn total_weight(reps: &[Representation]) -> usize {
    reps.iter().map(Representation::weight).sum()
}

fn zl_rep(l: usize, k: usize) -> Representation {
    let real = 2 * k == l;
    let table = (0..l)
        .map(|g| {
            let z = Complex64::from_polar(1.0, 2.0 * PI * (k * g) as f64 / l as f64);
            let z = if real { Complex64::new(z.re.round(), 0.0) } else { z };
            DMatrix::from_element(1, 1, z)
        })
        .collect();
    Representation {
        label: format!("zl:{l}/{k}"),
        rep_type: if real { RepType::Real } else { RepType::Complex },
        dim: 1,
        catalog_id: k,
        data: RepData::Table(table),
    }
}

fn s3_reps(g: &FiniteGroup) -> Vec<Representation> {
    let perms = s3_perms();
    debug_assert_eq!(g.order(), perms.len());
    let sign = |p: &[usize; 3]| {
        let inv = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
        if inv % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    // orthonormal basis of the plane x + y + z = 0
    let b = [
        [1.0 / 2f64.sqrt(), 1.0 / 6f64.sqrt()],
        [-1.0 / 2f64.sqrt(), 1.0 / 6f64.sqrt()],
        [0.0, -2.0 / 6f64.sqrt()],
    ];
    let standard = perms
        .iter()
        .map(|p| {
            // permutation matrix P e_i = e_{p(i)}, restricted: Bᵀ P B
            DMatrix::from_fn(2, 2, |r, c| {
                let v: f64 = (0..3).map(|i| b[p[i]][r] * b[i][c]).sum();
                Complex64::new(v, 0.0)
            })
        })
        .collect();
    vec![
        Representation {
            label: "s3/sign".into(),
            rep_type: RepType::Real,
            dim: 1,
            catalog_id: 1,
            data: RepData::Table(perms.iter().map(|p| DMatrix::from_element(1, 1, Complex64::new(sign(p), 0.0))).collect()),
        },
        Representation {
            label: "s3/standard".into(),
            rep_type: RepType::Real,
            dim: 2,
            catalog_id: 2,
            data: RepData::Table(standard),
        },
    ]
}

fn q8_reps(g: &FiniteGroup) -> Vec<Representation> {
    let els = q8_elements();
    debug_assert_eq!(g.order(), els.len());
    let character = |axis: usize| -> Representation {
        let table = els
            .iter()
            .map(|q| {
                // kernel is {±1, ±axis}
                let in_kernel = q[0] != 0 || q[axis] != 0;
                DMatrix::from_element(1, 1, Complex64::new(if in_kernel { 1.0 } else { -1.0 }, 0.0))
            })
            .collect();
        Representation {
            label: format!("q8/chi{}", ["", "i", "j", "k"][axis]),
            rep_type: RepType::Real,
            dim: 1,
            catalog_id: axis,
            data: RepData::Table(table),
        }
    };
    let quaternionic = Representation {
        label: "q8/quaternion".into(),
        rep_type: RepType::Quaternionic,
        dim: 1,
        catalog_id: 4,
        data: RepData::Table(
            els.iter()
                .map(|q| {
                    let blk = quaternion_block(q[0] as f64, q[1] as f64, q[2] as f64, q[3] as f64);
                    DMatrix::from_fn(2, 2, |i, j| blk[i][j])
                })
                .collect(),
        ),
    };
    vec![character(1), character(2), character(3), quaternionic]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_groups_are_valid() {
        for id in ["zl:2", "zl:3", "zl:12", "s3", "q8"] {
            let g = GroupSpec::from_id(id).unwrap();
            let fg = g.finite().unwrap();
            for a in 0..fg.order() {
                assert_eq!(fg.mul(a, fg.inv(a)), fg.identity());
            }
            for rep in g.catalog(0) {
                rep.validate(fg).unwrap_or_else(|e| panic!("{id} {}: {e}", rep.label));
            }
        }
    }

    #[test]
    fn sum_of_squares_rule() {
        for l in 2..=12 {
            let g = GroupSpec::from_id(&format!("zl:{l}")).unwrap();
            assert_eq!(total_weight(&g.catalog(0)), l - 1, "L={l}");
        }
        for id in ["s3", "q8"] {
            let g = GroupSpec::from_id(id).unwrap();
            assert_eq!(total_weight(&g.catalog(0)), g.order().unwrap() - 1);
        }
    }

    #[test]
    fn quaternionic_frobenius_norm() {
        let g = GroupSpec::from_id("q8").unwrap();
        let rep = g.frequencies(&[4]).unwrap().remove(0);
        assert_eq!(rep.rep_type, RepType::Quaternionic);
        for a in 0..8 {
            let m = rep.matrix(Element::Finite(a));
            assert!((m.norm_squared() - 2.0 * rep.dim as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn frequency_validation() {
        let z5 = GroupSpec::from_id("zl:5").unwrap();
        assert!(matches!(z5.frequencies(&[0]), Err(Error::TrivialRepresentation)));
        assert!(z5.frequencies(&[1, 4]).is_err());
        let reps = z5.frequencies(&[2, 1]).unwrap();
        assert_eq!(reps.iter().map(|r| r.catalog_id).collect::<Vec<_>>(), vec![1, 2]);
        let z4 = GroupSpec::from_id("zl:4").unwrap();
        let reps = z4.frequencies(&[1, 2]).unwrap();
        // real before complex
        assert_eq!(reps[0].rep_type, RepType::Real);
    }

    #[test]
    fn table_file_round_trip() {
        let text = "3\n0 1 2\n1 2 0\n2 0 1\n";
        let g = FiniteGroup::parse_table("z3", text).unwrap();
        assert_eq!(g.order(), 3);
        assert_eq!(g.inv(1), 2);
        assert!(FiniteGroup::parse_table("bad", "2\n0 1\n0 1\n").is_err());
    }

    #[test]
    fn z_vectors_have_norm_d() {
        let g = GroupSpec::from_id("q8").unwrap();
        let reps = g.catalog(0);
        for a in 0..8 {
            let n2: f64 = reps
                .iter()
                .map(|r| {
                    let s = (r.beta() * r.dim) as f64;
                    r.real_components(Element::Finite(a)).iter().map(|x| s * x * x).sum::<f64>()
                })
                .sum();
            assert!((n2 - 7.0).abs() < 1e-12);
        }
    }
}
