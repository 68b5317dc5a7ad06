//! Suite registry. Each suite body turns one sample id (plus its derived
//! seed) into a handful of lhs/rhs comparisons.

use jrt::finite::{self, CoverKind, FinHermSpace, Fq2};
use jrt::hecke;
use jrt::lattice::{intermediate_lattices, intermediate_lattices_brute};
use jrt::linalg::lift_q;
use jrt::orbital::{self, AtomGPrime, AtomS, PhiVariant, TestFunctionS, TestFunctionU, TransferConvention};
use jrt::orbits::{self, Sample, SampleKind, SampleSpec, Side, SpecialSetup};
use jrt::plocal::qi;
use jrt::{Budget, Error, FMatrix, FNumber, FieldConfig, Matrix, Result, Scalar, XLaurent, Q};
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::json;

use crate::config::ScenarioConfig;
use crate::report::{Check, Parameters};

/// Per-run constants shared by every suite body.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub cfg: FieldConfig,
    pub rank: usize,
    pub samples: usize,
    pub budget: Budget,
    pub height: i64,
}

impl Ctx {
    pub fn new(c: &ScenarioConfig) -> std::result::Result<Self, Error> {
        Ok(Ctx {
            cfg: FieldConfig::new(c.prime)?,
            rank: c.rank,
            samples: c.samples,
            budget: Budget { exp: c.budget },
            height: c.height_bound,
        })
    }

    fn q(&self) -> i64 {
        self.cfg.q() as i64
    }

    fn fq2(&self) -> Result<Fq2> {
        Fq2::new(self.cfg.p())
    }
}

pub type Body = fn(&Ctx, usize, u64) -> Result<Vec<Check>>;

#[derive(Debug, Clone, Serialize)]
pub struct Suite {
    pub name: &'static str,
    /// What the suite checks, in one line.
    pub anchor: &'static str,
    pub defaults: &'static str,
    /// Whether a run without explicit --suite includes it.
    pub default_run: bool,
    #[serde(skip)]
    pub items: fn(&Ctx) -> usize,
    #[serde(skip)]
    pub body: Body,
}

fn sampled(c: &Ctx) -> usize {
    c.samples
}

const REGISTRY: &[Suite] = &[
    Suite {
        name: "fl_n1",
        anchor: "unit-level fundamental lemma at n = 1: orbital integral of 1_{S(O)} at s = 0 against the hyperspecial unitary count (0 on the nonsplit side)",
        defaults: "n=1, eps=0, sides alternate",
        default_run: true,
        items: sampled,
        body: fl_n1,
    },
    Suite {
        name: "qcfl_n1",
        anchor: "quasi-canonical fundamental lemma at n = 1 with the corrected u∗1 coefficient q^n − 1",
        defaults: "n=1, eps=1, sides alternate",
        default_run: true,
        items: sampled,
        body: qcfl_n1,
    },
    Suite {
        name: "qcfl_n1_alt",
        anchor: "quasi-canonical fundamental lemma at n = 1 with the alternative u∗1 coefficient q^{2(n+1)} − 1 (expected to fail on split samples)",
        defaults: "n=1, eps=1, sides alternate",
        default_run: false,
        items: sampled,
        body: qcfl_n1_alt,
    },
    Suite {
        name: "qcfl_hom_n1",
        anchor: "homogeneous quasi-canonical fundamental lemma at n = 1: direct GL_1(F) × GL_2(F) integral against its reduction to S_2 and against the unitary count",
        defaults: "n=1, eps=1, sides alternate",
        default_run: true,
        items: sampled,
        body: qcfl_hom_n1,
    },
    Suite {
        name: "qcfl_hom_n1_alt",
        anchor: "homogeneous quasi-canonical fundamental lemma at n = 1 with the alternative coefficient and sign (expected to fail on split samples)",
        defaults: "n=1, eps=1, sides alternate",
        default_run: false,
        items: sampled,
        body: qcfl_hom_n1_alt,
    },
    Suite {
        name: "orb_red",
        anchor: "semi-Lie orbital integral of 1_{K'×Λ'} at (γ, w0) equals the orbital integral of φ'_s, as Laurent polynomials",
        defaults: "n=rank, corrected coefficient",
        default_run: true,
        items: sampled,
        body: orb_red,
    },
    Suite {
        name: "orb_red_alt",
        anchor: "semi-Lie reduction with the alternative u∗1 coefficient (expected to fail)",
        defaults: "n=rank",
        default_run: false,
        items: sampled,
        body: orb_red_alt,
    },
    Suite {
        name: "u_translate",
        anchor: "translating by u' = h0·u multiplies the orbital integral of u∗1 by (−1)^n q^{ns}",
        defaults: "n=rank",
        default_run: true,
        items: sampled,
        body: u_translate,
    },
    Suite {
        name: "g2s",
        anchor: "orbital integrals on GL_n(F) × GL_{n+1}(F) reduce to S_{n+1} through φ ↦ φ^♮ at 2s",
        defaults: "n=1 (direct path)",
        default_run: true,
        items: sampled,
        body: g2s,
    },
    Suite {
        name: "covariance",
        anchor: "transfer factor on S transforms by η(det h)|det h|^s under conjugation by GL_n(F0)",
        defaults: "n=rank",
        default_run: true,
        items: sampled,
        body: covariance,
    },
    Suite {
        name: "semilie_bridge",
        anchor: "unitary orbital integral of 1_{K_{n+1}} equals the semi-Lie one of 1_{K × Λ0} at (g, u0)",
        defaults: "n=rank, eps and side alternate",
        default_run: true,
        items: sampled,
        body: semilie_bridge,
    },
    Suite {
        name: "constants",
        anchor: "volume constants c_1 = 1 and c'_1 = (q²+1)(q²−1) as a mirabolic index in GL_2(F_{q²})",
        defaults: "q=p",
        default_run: true,
        items: |_| 6,
        body: constants,
    },
    Suite {
        name: "finite_counts",
        anchor: "finite hermitian counts: self-dual lattices over a type-2 lattice, isotropic lines orthogonal to an anisotropic line, Witt transitivity",
        defaults: "q=p",
        default_run: true,
        items: |c| if c.cfg.p() <= 5 { 5 } else { 4 },
        body: finite_counts,
    },
    Suite {
        name: "orbits_12",
        anchor: "orbit counts of U(W♭) on vertex lattices (1, 1 or 2 orbits), transitivity on lagrangians, the two-coset decomposition and the n = 1 double coset identity",
        defaults: "q=p, dims ≤ 4",
        default_run: true,
        items: |_| 13,
        body: orbits_12,
    },
    Suite {
        name: "hecke_conv",
        anchor: "rank-2 Hecke identities: convolution value at the identity and the expansion φ₂ = (q+1)·1_K + 1_{Kϖ^{(1,−1)}K}",
        defaults: "n=2, r=2",
        default_run: true,
        items: |_| 6,
        body: hecke_conv,
    },
    Suite {
        name: "satake_mismatch",
        anchor: "Satake transforms of the minuscule GL_2 function and of φ₂ on U(2) are q(X+X⁻¹) and q(X+2+X⁻¹), which differ",
        defaults: "q=p",
        default_run: true,
        items: |_| 4,
        body: satake_mismatch,
    },
    Suite {
        name: "type01_n1",
        anchor: "type (0,1) transfer at n = 1: (−1)^n·1_{K_S(ϖ)} against the almost self-dual unitary count on the nonsplit side",
        defaults: "n=1, eps=1, sides alternate",
        default_run: true,
        items: sampled,
        body: type01_n1,
    },
    Suite {
        name: "type01_n1_alt",
        anchor: "type (0,1) transfer at n = 1 with the alternative sign (−1)^{n−1} (expected to fail on nonsplit samples)",
        defaults: "n=1, eps=1, sides alternate",
        default_run: false,
        items: sampled,
        body: type01_n1_alt,
    },
    Suite {
        name: "window_oracles",
        anchor: "sandwich enumerations agree with brute-force window enumerations (lattice counts, orbital sums, semi-Lie sums, unitary counts)",
        defaults: "n=1",
        default_run: true,
        items: sampled,
        body: window_oracles,
    },
];

pub fn registry() -> &'static [Suite] {
    REGISTRY
}

pub fn find(name: &str) -> Option<&'static Suite> {
    REGISTRY.iter().find(|s| s.name == name)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteEntry {
    pub name: &'static str,
    pub anchor: &'static str,
    pub defaults: &'static str,
    pub default_run: bool,
}

pub fn list_suites() -> Vec<SuiteEntry> {
    REGISTRY
        .iter()
        .map(|s| SuiteEntry { name: s.name, anchor: s.anchor, defaults: s.defaults, default_run: s.default_run })
        .collect()
}

// ---------------------------------------------------------------- helpers

fn params(c: &Ctx, extra: &[(&str, serde_json::Value)]) -> Parameters {
    let mut m = Parameters::new();
    m.insert("p".into(), json!(c.cfg.p()));
    for (k, v) in extra {
        m.insert((*k).into(), v.clone());
    }
    m
}

fn side_for(id: usize) -> Side {
    if id % 2 == 0 {
        Side::Split
    } else {
        Side::Nonsplit
    }
}

fn pair(c: &Ctx, seed: u64, eps: u8, side: Side) -> Result<(FMatrix, FMatrix, SpecialSetup)> {
    let mut spec = SampleSpec::new(SampleKind::PairN1, 1, c.height, eps);
    spec.side = Some(side);
    match orbits::sample_rss(c.cfg, seed, spec)? {
        Sample::Pair { gamma, g, setup } => Ok((gamma, g, setup)),
        _ => Err(Error::Precondition("sampler returned the wrong kind".into())),
    }
}

fn s_sample(c: &Ctx, seed: u64, n: usize) -> Result<FMatrix> {
    match orbits::sample_rss(c.cfg, seed, SampleSpec::new(SampleKind::S, n, c.height, 0))? {
        Sample::S(g) => Ok(g),
        _ => Err(Error::Precondition("sampler returned the wrong kind".into())),
    }
}

fn u_sample(c: &Ctx, seed: u64, n: usize, eps: u8, side: Side) -> Result<(FMatrix, SpecialSetup)> {
    let kind = if side == Side::Split { SampleKind::USplit } else { SampleKind::UNonsplit };
    match orbits::sample_rss(c.cfg, seed, SampleSpec::new(kind, n, c.height, eps))? {
        Sample::U { g, setup } => Ok((g, setup)),
        _ => Err(Error::Precondition("sampler returned the wrong kind".into())),
    }
}

fn delta_val(c: &Ctx, gamma: &FMatrix) -> i64 {
    Scalar::val(&orbits::delta_plus(gamma), c.cfg.p()).unwrap_or(i64::MAX)
}

fn pair_params(c: &Ctx, gamma: &FMatrix, eps: u8, side: Side) -> Parameters {
    let matched = orbits::matching_side(c.cfg, gamma, eps).ok();
    params(
        c,
        &[
            ("n", json!(1)),
            ("eps", json!(eps)),
            ("side", json!(side)),
            ("side_from_invariants", json!(matched)),
            ("delta_val", json!(delta_val(c, gamma))),
        ],
    )
}

fn at_zero(c: &Ctx, gamma: &FMatrix, f: &TestFunctionS) -> Result<Q> {
    Ok(orbital::orb_s_poly(c.cfg, gamma, f, c.budget)?.value_at_one())
}

fn unitary_or_zero(g: &FMatrix, setup: &SpecialSetup, side: Side, on: Side, f: TestFunctionU, c: &Ctx) -> Result<Q> {
    if side == on {
        orbital::orb_u(g, setup, f, c.budget)
    } else {
        Ok(Q::zero())
    }
}

fn variant_name(v: PhiVariant) -> &'static str {
    match v {
        PhiVariant::Alternative => "alternative",
        PhiVariant::Corrected => "corrected",
    }
}

// ---------------------------------------------------------------- bodies

fn fl_n1(c: &Ctx, id: usize, seed: u64) -> Result<Vec<Check>> {
    let side = side_for(id);
    let (gamma, g, setup) = pair(c, seed, 0, side)?;
    let lhs = at_zero(c, &gamma, &TestFunctionS::atom(AtomS::Unit))?;
    let rhs = unitary_or_zero(&g, &setup, side, Side::Split, TestFunctionU::Hyperspecial, c)?;
    Ok(vec![Check::equal("value_at_zero", pair_params(c, &gamma, 0, side), lhs, rhs)])
}

fn qcfl(c: &Ctx, id: usize, seed: u64, variant: PhiVariant) -> Result<Vec<Check>> {
    let side = side_for(id);
    let (gamma, g, setup) = pair(c, seed, 1, side)?;
    let lhs = at_zero(c, &gamma, &orbital::phi_prime_r(c.cfg, 1, 1, variant))?;
    let rhs = unitary_or_zero(&g, &setup, side, Side::Split, TestFunctionU::Hyperspecial, c)?;
    let mut p = pair_params(c, &gamma, 1, side);
    p.insert("variant".into(), json!(variant_name(variant)));
    Ok(vec![Check::equal("value_at_zero", p, lhs, rhs)])
}

fn qcfl_n1(c: &Ctx, id: usize, seed: u64) -> Result<Vec<Check>> {
    qcfl(c, id, seed, PhiVariant::Corrected)
}

fn qcfl_n1_alt(c: &Ctx, id: usize, seed: u64) -> Result<Vec<Check>> {
    qcfl(c, id, seed, PhiVariant::Alternative)
}

/// Direct n = 1 homogeneous integral, widened until the truncation no longer matters.
fn direct_stable(c: &Ctx, g1: &FMatrix, g2: &FMatrix, atom: AtomGPrime) -> Result<XLaurent> {
    let a = orbital::orb_gprime_direct_n1(c.cfg, g1, g2, atom, 12)?;
    let b = orbital::orb_gprime_direct_n1(c.cfg, g1, g2, atom, 16)?;
    if a != b {
        return Err(Error::WindowNotStabilized(16));
    }
    Ok(a)
}

fn direct_combo(c: &Ctx, g1: &FMatrix, g2: &FMatrix, terms: &[(XLaurent, AtomGPrime)]) -> Result<XLaurent> {
    let mut total = XLaurent::zero();
    for (coef, atom) in terms {
        total = total + coef.clone() * direct_stable(c, g1, g2, *atom)?;
    }
    Ok(total)
}

/// (γ1, γ2) with r(γ1^{-1}γ2) = γ; γ1 varies in valuation with the seed.
fn homogeneous_lift(c: &Ctx, gamma: &FMatrix, seed: u64) -> Result<(FMatrix, FMatrix)> {
    let k = (seed % 3) as i64 - 1;
    let z = c.cfg.fi(1, 1) * FNumber::from_q(jrt::plocal::p_pow(c.cfg.p(), k));
    let g1 = Matrix::from_fn(1, 1, |_, _| z.clone());
    let g2 = orbits::block_embed(&g1).mul(&orbits::hilbert90_lift(c.cfg, gamma)?);
    Ok((g1, g2))
}

fn qcfl_hom(c: &Ctx, id: usize, seed: u64, variant: PhiVariant) -> Result<Vec<Check>> {
    let side = side_for(id);
    let (gamma, g, setup) = pair(c, seed, 1, side)?;
    let (g1, g2) = homogeneous_lift(c, &gamma, seed)?;
    let terms = orbital::phi_prime_hom(c.cfg, 1, variant)?;
    let direct = direct_combo(c, &g1, &g2, &terms)?;
    let rhs = unitary_or_zero(&g, &setup, side, Side::Split, TestFunctionU::Hyperspecial, c)?;
    let mut p = pair_params(c, &gamma, 1, side);
    p.insert("variant".into(), json!(variant_name(variant)));
    let mut out = vec![];
    if variant == PhiVariant::Corrected {
        let reduced = orbital::orb_gprime_reduced(c.cfg, &g1, &g2, &terms, c.budget)?;
        out.push(Check::equal("homogeneous_equals_reduced", p.clone(), direct.clone(), reduced));
    }
    out.push(Check::equal("value_at_zero", p, direct.value_at_one(), rhs));
    Ok(out)
}

fn qcfl_hom_n1(c: &Ctx, id: usize, seed: u64) -> Result<Vec<Check>> {
    qcfl_hom(c, id, seed, PhiVariant::Corrected)
}

fn qcfl_hom_n1_alt(c: &Ctx, id: usize, seed: u64) -> Result<Vec<Check>> {
    qcfl_hom(c, id, seed, PhiVariant::Alternative)
}

fn orb_red_with(c: &Ctx, seed: u64, variant: PhiVariant) -> Result<Vec<Check>> {
    let n = c.rank;
    let gamma = s_sample(c, seed, n)?;
    let lhs = orbital::orb_semilie_poly(c.cfg, &gamma, TransferConvention::Normalized, c.budget)?;
    let rhs = orbital::orb_s_poly(c.cfg, &gamma, &orbital::phi_prime_r(c.cfg, n, 1, variant), c.budget)?;
    let p = params(
        c,
        &[
            ("n", json!(n)),
            ("variant", json!(variant_name(variant))),
            ("transfer_convention", json!(TransferConvention::Normalized)),
            ("delta_val", json!(delta_val(c, &gamma))),
        ],
    );
    let mut out = vec![Check::equal("semilie_equals_phi_prime", p.clone(), lhs, rhs)];
    if variant == PhiVariant::Corrected {
        // w0 = (ϖe, ᵗe): the literal factor picks up (−X^{-1})^{n+1} from e' = ϖe
        let w0 = orbital::SemiLieVector::w0(c.cfg, n + 1);
        let omega = orbital::omega_s(c.cfg, &gamma)?;
        let normalized = orbital::omega_semilie(c.cfg, &gamma, &w0, TransferConvention::Normalized)?;
        let literal = orbital::omega_semilie(c.cfg, &gamma, &w0, TransferConvention::Literal)?;
        out.push(Check::equal("transfer_factor_normalized", p.clone(), normalized, omega.clone()));
        out.push(Check::equal("transfer_factor_literal_rescaled", p, literal * orbital::minus_x_pow(n as i64 + 1), omega));
    }
    Ok(out)
}

fn orb_red(c: &Ctx, _id: usize, seed: u64) -> Result<Vec<Check>> {
    orb_red_with(c, seed, PhiVariant::Corrected)
}

fn orb_red_alt(c: &Ctx, _id: usize, seed: u64) -> Result<Vec<Check>> {
    orb_red_with(c, seed, PhiVariant::Alternative)
}

fn u_translate(c: &Ctx, _id: usize, seed: u64) -> Result<Vec<Check>> {
    let n = c.rank;
    let gamma = s_sample(c, seed, n)?;
    let lhs = orbital::orb_s_poly(c.cfg, &gamma, &TestFunctionS::atom(AtomS::UPrime), c.budget)?;
    let u = orbital::orb_s_poly(c.cfg, &gamma, &TestFunctionS::atom(AtomS::U), c.budget)?;
    let sign = if n % 2 == 0 { qi(1) } else { qi(-1) };
    // q^{ns} = X^{-n}
    let rhs = XLaurent::monomial(sign, -(n as i64)) * u;
    let p = params(c, &[("n", json!(n)), ("delta_val", json!(delta_val(c, &gamma)))]);
    Ok(vec![Check::equal("u_prime_vs_u", p, lhs, rhs)])
}

fn g2s(c: &Ctx, _id: usize, seed: u64) -> Result<Vec<Check>> {
    let (g1, g2) = orbits::sample_gprime(c.cfg, seed, 1, c.height.max(2) + 2, 4)?;
    let mut out = vec![];
    for (name, atom) in [("maximal", AtomGPrime::Maximal), ("tilde_level_1", AtomGPrime::TildeOdd { r: 1 })] {
        let direct = direct_stable(c, &g1, &g2, atom)?;
        let reduced = orbital::orb_gprime_reduced(c.cfg, &g1, &g2, &[(XLaurent::one(), atom)], c.budget)?;
        out.push(Check::equal(name, params(c, &[("n", json!(1))]), direct, reduced));
    }
    Ok(out)
}

fn covariance(c: &Ctx, _id: usize, seed: u64) -> Result<Vec<Check>> {
    let n = c.rank;
    let gamma = s_sample(c, seed, n)?;
    let mut rng = orbits::rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let h = orbits::random_gl(&mut rng, c.cfg, n, 3);
    let hf: FMatrix = lift_q(&orbits::block_embed(&h));
    let hinv = hf.inverse().ok_or(Error::Singular)?;
    let conj = hinv.mul(&gamma).mul(&hf);
    let lhs = orbital::omega_s(c.cfg, &conj)?;
    let v = Scalar::val(&h.det(), c.cfg.p()).ok_or(Error::Singular)?;
    let eta = XLaurent::monomial(if v % 2 == 0 { qi(1) } else { qi(-1) }, v);
    let rhs = eta * orbital::omega_s(c.cfg, &gamma)?;
    let p = params(c, &[("n", json!(n)), ("val_det_h", json!(v))]);
    Ok(vec![Check::equal("omega_conjugation", p, lhs, rhs)])
}

fn semilie_bridge(c: &Ctx, id: usize, seed: u64) -> Result<Vec<Check>> {
    let n = c.rank;
    let side = side_for(id);
    let eps = ((id / 2) % 2) as u8;
    let (g, setup) = u_sample(c, seed, n, eps, side)?;
    let lhs = orbital::orb_u(&g, &setup, TestFunctionU::Hyperspecial, c.budget)?;
    let rhs = orbital::orb_u_semilie(&g, &setup.u, &setup, c.budget)?;
    let p = params(c, &[("n", json!(n)), ("eps", json!(eps)), ("side", json!(side))]);
    Ok(vec![Check::equal("group_vs_semilie", p, lhs, rhs)])
}

fn constants(c: &Ctx, id: usize, _seed: u64) -> Result<Vec<Check>> {
    let q = c.q();
    let q2 = q * q;
    let f = c.fq2()?;
    let p = |extra: &[(&str, serde_json::Value)]| params(c, extra);
    let check = match id {
        0 => Check::equal("c_1", p(&[("n", json!(c.rank))]), hecke::c_r(c.cfg, c.rank, 1)?, 1u64),
        1 => Check::equal("c_prime_1_mirabolic_index", p(&[]), finite::mirabolic_index(f).index, ((q2 + 1) * (q2 - 1)) as u64),
        2 => Check::equal("c_prime_1_flag_count", p(&[("n", json!(2))]), hecke::c_prime(c.cfg, 2)?, ((q2 + 1) * (q2 - 1)) as u64),
        3 => Check::equal("gl2_order", p(&[]), finite::mirabolic_index(f).gl2_order, ((q2 * q2 - 1) * (q2 * q2 - q2)) as u64),
        4 => Check::equal("mirabolic_order", p(&[]), finite::mirabolic_index(f).mirabolic_order, (q2 * (q2 - 1)) as u64),
        _ => {
            let n = c.rank as u32;
            Check::equal("c_prime_1_rank_n", p(&[("n", json!(n))]), hecke::c_prime(c.cfg, c.rank)?, (q2.pow(n) - 1) as u64)
        }
    };
    Ok(vec![check])
}

fn finite_counts(c: &Ctx, id: usize, _seed: u64) -> Result<Vec<Check>> {
    let q = c.q();
    let f = c.fq2()?;
    let check = match id {
        0 => Check::equal("type0_over_type2", params(c, &[]), finite::lattice_covers_count(f, CoverKind::Type0OverType2)?, q + 1),
        1 => Check::equal("isotropic_lines_in_perp", params(c, &[]), finite::lattice_covers_count(f, CoverKind::IsotropicInPerp)?, q + 1),
        2 => Check::equal("type0_over_type0", params(c, &[]), finite::lattice_covers_count(f, CoverKind::Type0OverType0)?, 1u64),
        3 => {
            let d = if c.cfg.p() == 3 { 3 } else { 2 };
            let (norms, orbits) = finite::vector_norm_orbits(f, d)?;
            Check::equal("witt_orbits_equal_norm_classes", params(c, &[("dim", json!(d))]), orbits, norms)
        }
        _ => {
            let v = FinHermSpace::standard(f, 2);
            Check::equal(
                "unitary_order_dim2",
                params(c, &[("dim", json!(2))]),
                finite::unitary_order_brute(&v)?,
                finite::unitary_order(2, c.cfg.q()) as u64,
            )
        }
    };
    Ok(vec![check])
}

fn orbits_12(c: &Ctx, id: usize, _seed: u64) -> Result<Vec<Check>> {
    let f = c.fq2()?;
    let two = |n: usize, r: usize, expect: usize, case: &str| -> Result<Check> {
        let rep = finite::stabilizer_orbits(f, n, r)?;
        let p = params(c, &[("n", json!(n)), ("r", json!(r)), ("points", json!(rep.points))]);
        Ok(Check::equal(format!("vertex_lattice_orbits_{case}"), p, rep.orbits, expect))
    };
    let trans = |r: usize| -> Result<Check> {
        let rep = finite::lagrangian_orbits(f, r)?;
        let p = params(c, &[("r", json!(r)), ("points", json!(rep.points))]);
        Ok(Check::equal("lagrangian_orbits", p, rep.orbits, 1usize))
    };
    let coset = |n: usize| -> Result<Check> {
        let cc = finite::coset_decomposition(f, n, 2)?;
        let p = params(c, &[("n", json!(n)), ("r", json!(2)), ("plus", json!(cc.plus)), ("minus", json!(cc.minus)), ("total", json!(cc.total))]);
        Ok(Check::equal("two_coset_decomposition", p, cc.disjoint && cc.covers && cc.criterion_matches, true))
    };
    let check = match id {
        0 => two(2, 1, 1, "odd")?,
        1 => two(2, 0, 1, "zero")?,
        2 => two(1, 2, 1, "maximal_even")?,
        3 => two(3, 4, 1, "maximal_even")?,
        4 => two(2, 2, 2, "even")?,
        5 => two(3, 2, 2, "even")?,
        6 => trans(1)?,
        7 => trans(2)?,
        8 => trans(3)?,
        9 => coset(2)?,
        10 => coset(3)?,
        11 => {
            let s = finite::kfk_n1(f)?;
            Check::equal("double_coset_n1_finite", params(c, &[("left", json!(s.left)), ("right", json!(s.right))]), s.equal, true)
        }
        _ => {
            let (all, orbit, equal) = hecke::kfk_lattices_n1(c.cfg, c.budget)?;
            Check::equal("double_coset_n1_lattices", params(c, &[("left", json!(all)), ("right", json!(orbit))]), equal, true)
        }
    };
    Ok(vec![check])
}

fn hecke_conv(c: &Ctx, id: usize, _seed: u64) -> Result<Vec<Check>> {
    let q = c.q();
    let check = match id {
        0 => {
            let cc = hecke::convolution_at_identity(c.cfg, c.budget)?;
            Check::equal("convolution_vs_volume", params(c, &[("n", json!(2)), ("r", json!(2))]), cc.lhs, cc.rhs)
        }
        1 => {
            let cc = hecke::convolution_at_identity(c.cfg, c.budget)?;
            Check::equal("convolution_value", params(c, &[("n", json!(2)), ("r", json!(2))]), cc.lhs, Q::one() / qi(q + 1))
        }
        a => {
            let a = (a - 2) as i64;
            let coeffs = hecke::phi2_expansion(c.cfg, a, c.budget)?;
            let got = coeffs.last().map(|x| x.1.clone()).unwrap_or_default();
            let expect = match a {
                0 => qi(q + 1),
                1 => qi(1),
                _ => qi(0),
            };
            Check::equal("phi2_coefficient", params(c, &[("a", json!(a))]), got, expect)
        }
    };
    Ok(vec![check])
}

fn laurent(terms: &[(i64, i64)]) -> XLaurent {
    XLaurent::from_terms(terms.iter().map(|&(k, v)| (k, qi(v))))
}

fn satake_mismatch(c: &Ctx, id: usize, _seed: u64) -> Result<Vec<Check>> {
    let q = c.q();
    let check = match id {
        0 => Check::equal("general_linear_minuscule", params(c, &[]), hecke::satake_gl2_minuscule(c.cfg, c.budget)?, laurent(&[(-1, q), (1, q)])),
        1 => Check::equal(
            "unitary_minuscule_double_coset",
            params(c, &[]),
            hecke::satake_u2_double_coset(c.cfg, 1, c.budget)?,
            laurent(&[(-1, q), (0, q - 1), (1, q)]),
        ),
        2 => Check::equal("unitary_phi2", params(c, &[]), hecke::satake_phi2(c.cfg, c.budget)?, laurent(&[(-1, q), (0, 2 * q), (1, q)])),
        _ => Check::differ(
            "general_linear_vs_phi2",
            params(c, &[]),
            hecke::satake_gl2_minuscule(c.cfg, c.budget)?,
            hecke::satake_phi2(c.cfg, c.budget)?,
        ),
    };
    Ok(vec![check])
}

fn type01(c: &Ctx, id: usize, seed: u64, variant: PhiVariant) -> Result<Vec<Check>> {
    let side = side_for(id);
    let (gamma, g, setup) = pair(c, seed, 1, side)?;
    let lhs = at_zero(c, &gamma, &orbital::type01_function(1, variant))?;
    let rhs = unitary_or_zero(&g, &setup, side, Side::Nonsplit, TestFunctionU::Type1Parahoric, c)?;
    let mut p = pair_params(c, &gamma, 1, side);
    p.insert("variant".into(), json!(variant_name(variant)));
    Ok(vec![Check::equal("value_at_zero", p, lhs, rhs)])
}

fn type01_n1(c: &Ctx, id: usize, seed: u64) -> Result<Vec<Check>> {
    type01(c, id, seed, PhiVariant::Corrected)
}

fn type01_n1_alt(c: &Ctx, id: usize, seed: u64) -> Result<Vec<Check>> {
    type01(c, id, seed, PhiVariant::Alternative)
}

fn window_oracles(c: &Ctx, id: usize, seed: u64) -> Result<Vec<Check>> {
    let mut out = vec![];
    let cfg = c.cfg;

    let (lo, hi) = orbits::sample_lattice_pair::<Q>(cfg, seed, 3, 2)?;
    let fast = intermediate_lattices(&lo, &hi, c.budget, |_| true)?;
    let slow = intermediate_lattices_brute(&lo, &hi, c.budget)?;
    let p = params(c, &[("kind", json!("lattices_f0")), ("rank", json!(3)), ("index_exp", json!(hi.colength(&lo))), ("same_sets", json!(fast.len() == slow.len() && fast.iter().all(|l| slow.contains(l))))]);
    out.push(Check::equal("lattice_count", p, fast.len(), slow.len()));

    let (lo, hi) = orbits::sample_lattice_pair::<FNumber>(cfg, seed.wrapping_add(1), 2, 2)?;
    let fast = intermediate_lattices(&lo, &hi, c.budget, |_| true)?;
    let slow = intermediate_lattices_brute(&lo, &hi, c.budget)?;
    let p = params(c, &[("kind", json!("lattices_f")), ("rank", json!(2)), ("index_exp", json!(hi.colength(&lo))), ("same_sets", json!(fast.len() == slow.len() && fast.iter().all(|l| slow.contains(l))))]);
    out.push(Check::equal("lattice_count", p, fast.len(), slow.len()));

    let gamma = s_sample(c, seed, 1)?;
    let atom = match id % 3 {
        0 => AtomS::Unit,
        1 => AtomS::U,
        _ => AtomS::KSPi,
    };
    let f = TestFunctionS::atom(atom.clone());
    let sandwich = orbital::orb_s_poly(cfg, &gamma, &f, c.budget)?;
    let window = orbital::orb_s_window(cfg, &gamma, &f, c.budget, 14)?;
    let p = params(c, &[("kind", json!("orbital_sum")), ("atom", json!(atom)), ("delta_val", json!(delta_val(c, &gamma)))]);
    out.push(Check::equal("orbital_sum", p, sandwich, window));

    let conv = TransferConvention::Normalized;
    let sandwich = orbital::orb_semilie_poly(cfg, &gamma, conv, c.budget)?;
    let window = orbital::orb_semilie_window(cfg, &gamma, conv, c.budget, 14)?;
    let p = params(c, &[("kind", json!("semilie_sum")), ("delta_val", json!(delta_val(c, &gamma)))]);
    out.push(Check::equal("semilie_sum", p, sandwich, window));

    let side = side_for(id);
    let (g, setup) = u_sample(c, seed, 1, 0, side)?;
    let sandwich = orbital::orb_u(&g, &setup, TestFunctionU::Hyperspecial, c.budget)?;
    let window = orbital::orb_u_flat_window(&g, &setup, 6, c.budget)?;
    let p = params(c, &[("kind", json!("unitary_count")), ("side", json!(side))]);
    out.push(Check::equal("unitary_count", p, sandwich, window));
    Ok(out)
}
