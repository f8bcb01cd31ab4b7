//! Seeded test functions in the span of a block plan.
//!
//! Generators are named by short strings so configs stay readable:
//!
//! * `decay(α[,len][,shuffle])`: `c_m = ±m^(-α)` for `m = 1..len`; with
//!   `shuffle` the magnitudes land on `len` random indices instead.
//! * `flat_block[(k, ...)]`: `±1` on every index of the listed blocks (one
//!   random block when none are listed).
//! * `lacunary_sign`: `±1` on `m = 1, 2, 4, 8, ...`.
//! * `indicator(d)`: `1_[0, c/2^d)` for a random `c`, restricted to the span.
//! * `bent_sign(d[,δ])`: `(-1)^(x·y)` on `m - 1 = x + 2^(d/2) y`, with the `+1`
//!   terms enlarged by `1 + δ`; flat in the Walsh system, peaky once greedy
//!   keeps only the `+1` terms.
//! * `random_sparse(s)`: `s` random indices with coefficients in `[-1, 1]`.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;

use crate::basis::{BlockPlan, DEFAULT_MATERIALIZATION_CAP};
use crate::error::{Error, Result};
use crate::greedy::{CoefficientList, OrthonormalSystem, PsiSystem};
use crate::walsh::{analyze_dense, DenseDyadic, WalshSpectrum};

use super::config::CorpusSpec;
use super::seed::{derive_seed, rng_for};

const CORPUS_STREAM: u64 = 0xc0;

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Decay {
        alpha: f64,
        len: Option<usize>,
        shuffle: bool,
    },
    FlatBlock(Vec<usize>),
    LacunarySign,
    Indicator(u32),
    BentSign {
        depth: u32,
        boost: f64,
    },
    RandomSparse(usize),
}

fn parse_num<T: FromStr>(name: &str, arg: &str) -> Result<T> {
    arg.trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad argument `{arg}` to generator `{name}`")))
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(open) => {
                let inner = s[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Config(format!("unbalanced parentheses in `{s}`")))?;
                let args: Vec<&str> = inner.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
                (s[..open].trim(), args)
            }
            None => (s, Vec::new()),
        };
        let arity = |lo: usize, hi: usize| {
            if args.len() < lo || args.len() > hi {
                Err(Error::Config(format!(
                    "`{name}` takes {lo}..={hi} arguments, got {}",
                    args.len()
                )))
            } else {
                Ok(())
            }
        };
        match name {
            "decay" => {
                arity(1, 3)?;
                let alpha = parse_num(name, args[0])?;
                let mut len = None;
                let mut shuffle = false;
                for a in &args[1..] {
                    if *a == "shuffle" {
                        shuffle = true;
                    } else {
                        len = Some(parse_num(name, a)?);
                    }
                }
                Ok(Generator::Decay { alpha, len, shuffle })
            }
            "flat_block" => Ok(Generator::FlatBlock(
                args.iter().map(|a| parse_num(name, a)).collect::<Result<_>>()?,
            )),
            "lacunary_sign" => {
                arity(0, 0)?;
                Ok(Generator::LacunarySign)
            }
            "indicator" => {
                arity(1, 1)?;
                Ok(Generator::Indicator(parse_num(name, args[0])?))
            }
            "bent_sign" => {
                arity(1, 2)?;
                let depth = parse_num(name, args[0])?;
                let boost = match args.get(1) {
                    Some(a) => parse_num(name, a)?,
                    None => 0.01,
                };
                Ok(Generator::BentSign { depth, boost })
            }
            "random_sparse" => {
                arity(1, 1)?;
                Ok(Generator::RandomSparse(parse_num(name, args[0])?))
            }
            other => Err(Error::UnknownGenerator(other.to_string())),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Decay { alpha, len, shuffle } => {
                write!(f, "decay({alpha}")?;
                if let Some(l) = len {
                    write!(f, ",{l}")?;
                }
                if *shuffle {
                    f.write_str(",shuffle")?;
                }
                f.write_str(")")
            }
            Generator::FlatBlock(blocks) => {
                let list: Vec<String> = blocks.iter().map(ToString::to_string).collect();
                write!(f, "flat_block({})", list.join(","))
            }
            Generator::LacunarySign => f.write_str("lacunary_sign"),
            Generator::Indicator(d) => write!(f, "indicator({d})"),
            Generator::BentSign { depth, boost } => write!(f, "bent_sign({depth},{boost})"),
            Generator::RandomSparse(s) => write!(f, "random_sparse({s})"),
        }
    }
}

fn sign<R: Rng>(rng: &mut R) -> f64 {
    if rng.gen::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn too_big(what: &str, need: u128, dim: u128) -> Error {
    Error::Config(format!("{what} needs {need} basis elements, plan has {dim}"))
}

fn check_cap(terms: u128) -> Result<()> {
    if terms > DEFAULT_MATERIALIZATION_CAP {
        return Err(Error::MaterializationCap {
            terms,
            cap: DEFAULT_MATERIALIZATION_CAP,
        });
    }
    Ok(())
}

/// `1_[0, cells/2^depth)` as a Walsh series.
pub fn indicator_spectrum(depth: usize, cells: usize) -> Result<WalshSpectrum> {
    let size = 1usize
        .checked_shl(depth as u32)
        .ok_or_else(|| Error::InvalidArgument(format!("indicator depth {depth}")))?;
    if cells > size {
        return Err(Error::InvalidArgument(format!("{cells} cells at depth {depth}")));
    }
    let values = (0..size).map(|c| if c < cells { 1.0 } else { 0.0 }).collect();
    Ok(analyze_dense(&DenseDyadic::new(depth, values)?))
}

impl Generator {
    /// Coefficients `(m, c_m)` in the plan's basis.
    pub fn coefficients(&self, plan: &BlockPlan, seed: u64) -> Result<CoefficientList> {
        let mut rng = rng_for(seed);
        let dim = plan.dimension();
        let dim_usize = usize::try_from(dim).unwrap_or(usize::MAX);
        let entries: Vec<(u128, f64)> = match self {
            Generator::Decay { alpha, len, shuffle } => {
                let len = len.unwrap_or(dim_usize);
                if len as u128 > dim {
                    return Err(too_big("decay", len as u128, dim));
                }
                check_cap(len as u128)?;
                let mags: Vec<f64> = (1..=len).map(|j| (j as f64).powf(-alpha)).collect();
                let indices: Vec<u128> = if *shuffle {
                    sample(&mut rng, dim_usize, len)
                        .into_iter()
                        .map(|i| i as u128 + 1)
                        .collect()
                } else {
                    (1..=len as u128).collect()
                };
                indices
                    .into_iter()
                    .zip(mags)
                    .map(|(m, a)| (m, sign(&mut rng) * a))
                    .collect()
            }
            Generator::FlatBlock(blocks) => {
                let chosen = if blocks.is_empty() {
                    vec![rng.gen_range(1..=plan.horizon())]
                } else {
                    blocks.clone()
                };
                let mut out = Vec::new();
                for k in chosen {
                    if k == 0 || k > plan.horizon() {
                        return Err(Error::Config(format!("flat_block: no block {k} in {plan}")));
                    }
                    check_cap(plan.block_size(k))?;
                    let start = plan.block_start(k);
                    for i in 1..=plan.block_size(k) {
                        out.push((start + i, sign(&mut rng)));
                    }
                }
                out
            }
            Generator::LacunarySign => std::iter::successors(Some(1u128), |m| m.checked_mul(2))
                .take_while(|&m| m <= dim)
                .map(|m| (m, sign(&mut rng)))
                .collect(),
            Generator::Indicator(depth) => {
                let depth = *depth as usize;
                if depth > 20 {
                    return Err(Error::Config(format!("indicator depth {depth} is above 20")));
                }
                let cells = rng.gen_range(1..=1usize << depth);
                let f = indicator_spectrum(depth, cells)?;
                let in_span = f.iter().filter(|(n, _)| plan.locate_frequency(n).is_ok());
                let f = WalshSpectrum::from_terms(in_span.map(|(n, c)| (n.clone(), c)));
                return PsiSystem::new(plan).analyze(&f);
            }
            Generator::BentSign { depth, boost } => {
                if depth % 2 != 0 || *depth > 30 {
                    return Err(Error::Config(format!(
                        "bent_sign depth must be even and <= 30, got {depth}"
                    )));
                }
                let half = depth / 2;
                let n_terms = 1u128 << depth;
                if n_terms > dim {
                    return Err(too_big("bent_sign", n_terms, dim));
                }
                let shift: u64 = rng.gen_range(0..1u64 << half);
                let mask = (1u64 << half) - 1;
                (0..n_terms as u64)
                    .map(|n| {
                        let (x, y) = ((n & mask) ^ shift, n >> half);
                        let c = if (x & y).count_ones() % 2 == 0 {
                            1.0 + boost
                        } else {
                            -1.0
                        };
                        (u128::from(n) + 1, c)
                    })
                    .collect()
            }
            Generator::RandomSparse(s) => {
                if *s as u128 > dim {
                    return Err(too_big("random_sparse", *s as u128, dim));
                }
                let indices = sample(&mut rng, dim_usize, *s);
                indices
                    .into_iter()
                    .map(|i| (i as u128 + 1, rng.gen_range(-1.0..=1.0)))
                    .collect()
            }
        };
        CoefficientList::new(entries)
    }
}

/// One corpus member: where it came from and its basis coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusFunction {
    pub generator: String,
    pub seed: u64,
    pub coeffs: CoefficientList,
}

impl CorpusFunction {
    /// `sum c_m e_m` in an arbitrary system, so the same coefficients can be
    /// compared across systems.
    pub fn synthesize_in<S: OrthonormalSystem + ?Sized>(&self, system: &S) -> Result<WalshSpectrum> {
        system.synthesize(self.coeffs.entries())
    }
}

/// `spec.count` functions, cycling through the generators; function `i` uses
/// seed `derive_seed(seed, [i])`.
pub fn corpus_functions(spec: &CorpusSpec, seed: u64, plan: &BlockPlan) -> Result<Vec<CorpusFunction>> {
    if spec.generators.is_empty() && spec.count > 0 {
        return Err(Error::Config("corpus has no generators".into()));
    }
    let gens = spec
        .generators
        .iter()
        .map(|g| g.parse::<Generator>())
        .collect::<Result<Vec<_>>>()?;
    (0..spec.count)
        .map(|i| {
            let g = &gens[i % gens.len()];
            let s = derive_seed(seed, &[CORPUS_STREAM, i as u64]);
            Ok(CorpusFunction {
                generator: g.to_string(),
                seed: s,
                coeffs: g.coefficients(plan, s)?,
            })
        })
        .collect()
}

/// The corpus as Walsh series in the plan's basis.
pub fn corpus_generate(spec: &CorpusSpec, seed: u64, plan: &BlockPlan) -> Result<Vec<WalshSpectrum>> {
    let system = PsiSystem::new(plan);
    corpus_functions(spec, seed, plan)?
        .iter()
        .map(|f| f.synthesize_in(&system))
        .collect()
}
