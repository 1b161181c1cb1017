//! Verification campaigns: each claim is checked over a finite instance space
//! (exhaustively) or over seeded random instances, and reported as JSON.

use std::cmp::Ordering;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::exactlinalg::{
    all_hyperplanes, hyperplane_restriction_type, jordan_form, jordan_type, maximal_kernel_index,
    restrict, Flag, LinalgError, Matrix, PrimeField, Subspace,
};
use crate::partitions::{
    centraliser_dimension, induced_partition_oracle, mu_sigma, springer_fibre_dimension,
    Composition, LeviDatum, Partition,
};
use crate::springer::{
    blockwise_spaltenstein, build_representative, enumerate_fibre, estimate_fibre_size,
    fibre_first_steps, for_each_fibre_flag, for_each_fibre_flag_from, ls_map, random_fibre_flag,
    representative_flags, spaltenstein_map, FibreOptions, NilpotentRep, SpringerError,
    DEFAULT_FLAG_CEILING,
};
use crate::tableaux::{
    compare, enumerate_standard, random_standard, stack, tableau_from_nested,
    NestedPartitionSequence, StandardTableau, TableauError,
};

/// Counterexamples kept per claim; further failures are only counted.
pub const MAX_RECORDED_COUNTEREXAMPLES: usize = 20;

/// Pluggable stacking operation.
pub type Stacker =
    dyn Fn(&LeviDatum, &[StandardTableau]) -> Result<StandardTableau, TableauError> + Sync;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("max_n must be at least 1")]
    MaxN,
    #[error("no primes given")]
    NoPrimes,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("unknown claim id {0:?}")]
    UnknownClaim(String),
}

/// Every claim the harness knows, with the statement it checks.
pub const CLAIMS: &[(&str, &str)] = &[
    (
        "cor-partitionsigma",
        "the induced partition is the transpose of the sorted concatenation of the block transposes",
    ),
    ("ex-counterexample", "LS of a blockwise fibre class can land strictly above the stacked class"),
    ("fibre-partition", "the classes Φ^{-1}(σ), σ ∈ Std(λ), partition the enumerated fibre"),
    (
        "lem-Xsigmaintersectsclosure",
        "X_σ does not meet the closure of X_τ for τ < σ (Zariski closure)",
    ),
    ("lem-codim", "induction preserves codimension: Σ dim z(μ_i) = dim z(μ^Σ)"),
    ("lem-e-in-orbit", "the representative e = e₀ + e₁ has Jordan type μ^Σ"),
    ("lem-spaltenstein", "restricting e to a stable hyperplane removes the last box of one column"),
    (
        "lem-springer-dimension",
        "dim B_e = dim G/B − ½ dim G·e, with both sides computed from λ",
    ),
    ("lem-transitivity", "inducing in stages through any regrouping of blocks gives μ^Σ"),
    ("prop-LSmap", "Φ(LS(F)) ≥ stk(Φ₀(F)) for every F in the blockwise fibre"),
    ("prop-equivariance", "Φ and LS commute with the parabolic action"),
    ("rem-associativity", "stacking is associative under every bracketing"),
    (
        "thm-components-closure",
        "LS maps the closure of each blockwise class onto the closure of the stacked class",
    ),
    ("thm-stack", "Φ(LS(representative flags of a tuple)) = stk(tuple)"),
];

const CLOSURE_CLAIMS: &[&str] = &["lem-Xsigmaintersectsclosure", "thm-components-closure"];

pub fn claim_anchor(id: &str) -> Option<&'static str> {
    CLAIMS.iter().find(|(c, _)| *c == id).map(|(_, a)| *a)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub max_n: usize,
    pub primes: Vec<u32>,
    pub ceiling: u64,
    pub seed: u64,
    /// Claim ids to run; empty means all.
    pub claims: Vec<String>,
    /// Number of seeded random instances for randomised claims.
    pub random_cases: usize,
    /// Largest N for claims that enumerate fibres.
    pub fibre_max_n: usize,
    /// Largest N for the hyperplane sweep.
    pub hyperplane_max_n: usize,
    /// Largest N for randomised equivariance and associativity instances.
    pub random_max_n: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            max_n: 5,
            primes: vec![2],
            ceiling: DEFAULT_FLAG_CEILING,
            seed: 0,
            claims: Vec::new(),
            random_cases: 1000,
            fibre_max_n: 6,
            hyperplane_max_n: 5,
            random_max_n: 6,
        }
    }
}

impl CampaignConfig {
    fn validate(&self) -> Result<Vec<PrimeField>, HarnessError> {
        if self.max_n == 0 {
            return Err(HarnessError::MaxN);
        }
        if self.primes.is_empty() {
            return Err(HarnessError::NoPrimes);
        }
        for id in &self.claims {
            if claim_anchor(id).is_none() {
                return Err(HarnessError::UnknownClaim(id.clone()));
            }
        }
        Ok(self
            .primes
            .iter()
            .map(|&p| PrimeField::new(p))
            .collect::<Result<_, _>>()?)
    }

    fn selected(&self, id: &str) -> bool {
        self.claims.is_empty() || self.claims.iter().any(|c| c == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Random,
    Example,
    #[serde(rename = "not run")]
    NotRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "out of scope — closure")]
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub id: String,
    pub anchor: String,
    pub mode: Mode,
    pub status: Status,
    pub instances: u64,
    /// Instances skipped because they would exceed the enumeration ceiling.
    pub aborted: u64,
    pub failures: u64,
    pub counterexamples: Vec<Value>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    pub anchors: Vec<Value>,
    pub claims: Vec<ClaimReport>,
    pub passed: usize,
    pub failed: usize,
    pub out_of_scope: usize,
}

impl CampaignReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn claim(&self, id: &str) -> Option<&ClaimReport> {
        self.claims.iter().find(|c| c.id == id)
    }

    /// Zeroes wall times, leaving only the seed-determined content.
    pub fn strip_timings(&mut self) {
        for c in &mut self.claims {
            c.wall_time_ms = 0;
        }
    }
}

/// Running totals for one claim; merged in instance order.
#[derive(Debug, Default, Clone)]
pub struct Tally {
    pub instances: u64,
    pub aborted: u64,
    pub failures: u64,
    pub counterexamples: Vec<Value>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.instances += 1;
        if !ok {
            self.fail(witness());
        }
    }

    fn fail(&mut self, witness: Value) {
        self.failures += 1;
        if self.counterexamples.len() < MAX_RECORDED_COUNTEREXAMPLES {
            self.counterexamples.push(witness);
        }
    }

    fn error(&mut self, context: Value, err: impl std::fmt::Display) {
        self.instances += 1;
        self.fail(json!({ "instance": context, "error": err.to_string() }));
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.instances += other.instances;
        self.aborted += other.aborted;
        self.failures += other.failures;
        let room = MAX_RECORDED_COUNTEREXAMPLES - self.counterexamples.len();
        self.counterexamples
            .extend(other.counterexamples.into_iter().take(room));
        self
    }

    fn merge_all(tallies: impl IntoIterator<Item = Tally>) -> Tally {
        tallies.into_iter().fold(Tally::default(), Tally::merge)
    }

    fn into_report(self, id: &str, mode: Mode, details: Value, started: Instant) -> ClaimReport {
        let status = if self.failures == 0 {
            Status::Pass
        } else {
            Status::Fail
        };
        ClaimReport {
            id: id.to_string(),
            anchor: claim_anchor(id).unwrap_or_default().to_string(),
            mode,
            status,
            instances: self.instances,
            aborted: self.aborted,
            failures: self.failures,
            counterexamples: self.counterexamples,
            details,
            wall_time_ms: started.elapsed().as_millis() as u64,
        }
    }
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport, HarnessError> {
    run_campaign_with(cfg, &stack)
}

/// Runs the selected claims using `stacker` wherever the stacking map appears.
pub fn run_campaign_with(
    cfg: &CampaignConfig,
    stacker: &Stacker,
) -> Result<CampaignReport, HarnessError> {
    let fields = cfg.validate()?;
    let mut claims = Vec::new();
    for (id, _) in CLAIMS {
        if !cfg.selected(id) {
            continue;
        }
        let report = match *id {
            "cor-partitionsigma" => check_partition_sigma(cfg.max_n),
            "ex-counterexample" => verify_counterexample_example(),
            "fibre-partition" => {
                check_fibre_partition(cfg.max_n.min(cfg.fibre_max_n), &fields, cfg.ceiling)
            }
            "lem-codim" => check_codimension(cfg.max_n),
            "lem-e-in-orbit" => check_representative_type(cfg.max_n, &fields),
            "lem-spaltenstein" => {
                check_hyperplane_rule(cfg.max_n.min(cfg.hyperplane_max_n), &fields)
            }
            "lem-springer-dimension" => check_dimension_identity(cfg.max_n),
            "lem-transitivity" => check_transitivity(cfg.max_n),
            "prop-LSmap" => check_ls_order(
                cfg.max_n.min(cfg.fibre_max_n),
                &fields,
                cfg.ceiling,
                stacker,
            ),
            "prop-equivariance" => check_equivariance(
                cfg.max_n.min(cfg.random_max_n),
                &fields,
                cfg.random_cases,
                cfg.seed,
            ),
            "rem-associativity" => check_associativity(
                cfg.max_n.min(cfg.random_max_n.max(cfg.max_n)),
                cfg.random_cases,
                cfg.seed,
                stacker,
            ),
            "thm-stack" => check_stacking_theorem(cfg.max_n, &fields, stacker),
            closure if CLOSURE_CLAIMS.contains(&closure) => out_of_scope(closure),
            _ => unreachable!("claim table and dispatch agree"),
        };
        claims.push(report);
    }
    claims.sort_by(|a, b| a.id.cmp(&b.id));
    let count = |s: Status| claims.iter().filter(|c| c.status == s).count();
    Ok(CampaignReport {
        config: cfg.clone(),
        anchors: CLAIMS
            .iter()
            .map(|(id, anchor)| json!({ "id": id, "anchor": anchor }))
            .collect(),
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        out_of_scope: count(Status::OutOfScope),
        claims,
    })
}

fn out_of_scope(id: &str) -> ClaimReport {
    ClaimReport {
        id: id.to_string(),
        anchor: claim_anchor(id).unwrap_or_default().to_string(),
        mode: Mode::NotRun,
        status: Status::OutOfScope,
        instances: 0,
        aborted: 0,
        failures: 0,
        counterexamples: Vec::new(),
        details: json!({
            "reason": "closures in the Zariski topology cannot be witnessed by finite-field point counts; only disjointness of the classes is checked (fibre-partition)"
        }),
        wall_time_ms: 0,
    }
}

fn levi_data_up_to(max_n: usize) -> Vec<LeviDatum> {
    (1..=max_n).flat_map(LeviDatum::all).collect()
}

fn partitions_up_to(max_n: usize) -> Vec<Partition> {
    (1..=max_n).flat_map(Partition::all).collect()
}

fn datum_json(d: &LeviDatum) -> Value {
    json!({ "lambda": d.levi_shape().parts(), "blocks": d.blocks() })
}

pub fn check_partition_sigma(max_n: usize) -> ClaimReport {
    let started = Instant::now();
    let tally = Tally::merge_all(
        levi_data_up_to(max_n)
            .par_iter()
            .map(|d| {
                let mut t = Tally::default();
                let (fast, oracle) = (mu_sigma(d), induced_partition_oracle(d));
                t.check(
                    fast == oracle,
                    || json!({ "datum": datum_json(d), "mu_sigma": fast, "oracle": oracle }),
                );
                t
            })
            .collect::<Vec<_>>(),
    );
    tally.into_report("cor-partitionsigma", Mode::Exhaustive, Value::Null, started)
}

pub fn check_codimension(max_n: usize) -> ClaimReport {
    let started = Instant::now();
    let mut tally = Tally::default();
    for d in levi_data_up_to(max_n) {
        let levi: usize = d.blocks().iter().map(centraliser_dimension).sum();
        let induced = centraliser_dimension(&mu_sigma(&d));
        tally.check(levi == induced, || {
            json!({ "datum": datum_json(&d), "levi_centraliser": levi, "induced_centraliser": induced })
        });
    }
    tally.into_report("lem-codim", Mode::Exhaustive, Value::Null, started)
}

pub fn check_dimension_identity(max_n: usize) -> ClaimReport {
    let started = Instant::now();
    let mut tally = Tally::default();
    for lambda in partitions_up_to(max_n) {
        let n = lambda.weight();
        // 2·dim B_e = N(N−1) − (N² − dim z(e))
        let lhs = 2 * springer_fibre_dimension(&lambda) + n * n;
        let rhs = n * (n - 1) + centraliser_dimension(&lambda);
        tally.check(lhs == rhs, || json!({ "lambda": lambda }));
    }
    tally.into_report(
        "lem-springer-dimension",
        Mode::Exhaustive,
        Value::Null,
        started,
    )
}

/// Every way of cutting `0..n` into consecutive nonempty groups.
fn consecutive_groupings(n: usize) -> Vec<Vec<std::ops::Range<usize>>> {
    (0u64..1 << n.saturating_sub(1))
        .map(|mask| {
            let mut groups = Vec::new();
            let mut start = 0;
            for cut in 1..n {
                if mask >> (cut - 1) & 1 == 1 {
                    groups.push(start..cut);
                    start = cut;
                }
            }
            groups.push(start..n);
            groups
        })
        .collect()
}

/// Induces within each group, then across the groups.
fn induce_in_stages(d: &LeviDatum, groups: &[std::ops::Range<usize>]) -> Partition {
    let outer: Vec<Partition> = groups
        .iter()
        .map(|g| mu_sigma(&d.sub_datum(g.clone())))
        .collect();
    mu_sigma(&LeviDatum::from_blocks(outer).expect("nonempty groups"))
}

pub fn check_transitivity(max_n: usize) -> ClaimReport {
    let started = Instant::now();
    let tally = Tally::merge_all(
        levi_data_up_to(max_n)
            .par_iter()
            .map(|d| {
                let mut t = Tally::default();
                let direct = mu_sigma(d);
                for groups in consecutive_groupings(d.num_blocks()) {
                    let staged = induce_in_stages(d, &groups);
                    t.check(staged == direct, || {
                json!({
                    "datum": datum_json(d),
                    "groups": groups.iter().map(|g| [g.start + 1, g.end]).collect::<Vec<_>>(),
                    "staged": staged,
                    "direct": direct,
                })
            });
                }
                t
            })
            .collect::<Vec<_>>(),
    );
    tally.into_report("lem-transitivity", Mode::Exhaustive, Value::Null, started)
}

/// Structural checks on one representative.
pub fn representative_defects(rep: &NilpotentRep) -> Result<Vec<String>, LinalgError> {
    let d = rep.datum();
    let mut defects = Vec::new();
    for i in 0..d.num_blocks() {
        let v = rep.block(i);
        if !v.contains(&v.image_under(rep.e0())?) {
            defects.push(format!("e0 does not preserve V_{}", i + 1));
        }
        if !rep.partial_flag(i).contains(&v.image_under(rep.e1())?) {
            defects.push(format!("e1 does not map V_{} below it", i + 1));
        }
        if jordan_type(&restrict(rep.e0(), v)?)? != d.blocks()[i] {
            defects.push(format!("e0 on V_{} has the wrong Jordan type", i + 1));
        }
    }
    if jordan_type(rep.e())? != mu_sigma(d) {
        defects.push("Jordan type of e differs from the induced partition".to_string());
    }
    Ok(defects)
}

pub fn check_representative_type(max_n: usize, fields: &[PrimeField]) -> ClaimReport {
    let started = Instant::now();
    let data = levi_data_up_to(max_n);
    let tally = Tally::merge_all(fields.iter().flat_map(|&field| {
        data.par_iter()
            .map(|d| {
                let mut t = Tally::default();
                let rep = build_representative(d, field);
                match representative_defects(&rep) {
                    Ok(defects) => t.check(defects.is_empty(), || {
                        json!({ "datum": datum_json(d), "p": field.characteristic(), "defects": defects })
                    }),
                    Err(err) => t.error(datum_json(d), err),
                }
                t
            })
            .collect::<Vec<_>>()
    }));
    tally.into_report("lem-e-in-orbit", Mode::Exhaustive, Value::Null, started)
}

pub fn check_hyperplane_rule(max_n: usize, fields: &[PrimeField]) -> ClaimReport {
    let started = Instant::now();
    let shapes = partitions_up_to(max_n);
    let tally = Tally::merge_all(fields.iter().flat_map(|&field| {
        shapes
            .par_iter()
            .map(|lambda| {
                let mut t = Tally::default();
                if let Err(err) = hyperplane_sweep(field, lambda, &mut t) {
                    t.error(
                        json!({ "lambda": lambda, "p": field.characteristic() }),
                        err,
                    );
                }
                t
            })
            .collect::<Vec<_>>()
    }));
    tally.into_report("lem-spaltenstein", Mode::Exhaustive, Value::Null, started)
}

/// Compares the last-box rule with a direct Jordan type on every `e`-stable
/// hyperplane of `F_p^N`, `e` in Jordan form of type `lambda`.
pub fn hyperplane_sweep(
    field: PrimeField,
    lambda: &Partition,
    tally: &mut Tally,
) -> Result<(), LinalgError> {
    let e = jordan_form(field, lambda);
    for h in all_hyperplanes(field, lambda.weight()) {
        if !h.contains(&h.image_under(&e)?) {
            continue;
        }
        let j = maximal_kernel_index(&e, &h)?;
        let direct = jordan_type(&restrict(&e, &h)?)?;
        let rule = hyperplane_restriction_type(lambda, j);
        tally.check(rule.as_ref() == Ok(&direct), || {
            json!({
                "lambda": lambda,
                "p": field.characteristic(),
                "hyperplane": h,
                "column": j,
                "direct": direct,
                "rule": rule.as_ref().map_err(|e| e.to_string()),
            })
        });
    }
    Ok(())
}

/// Every tuple in `Std(μ_1) × … × Std(μ_n)`.
fn tableau_tuples(d: &LeviDatum) -> Result<Vec<Vec<StandardTableau>>, TableauError> {
    let mut tuples = vec![Vec::new()];
    for mu in d.blocks() {
        let choices = enumerate_standard(mu)?;
        tuples = tuples
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |sigma| {
                    let mut next = prefix.clone();
                    next.push(sigma.clone());
                    next
                })
            })
            .collect();
    }
    Ok(tuples)
}

/// `Φ(LS(representative flags))` for one tuple.
pub fn stacked_class_of_representative(
    rep: &NilpotentRep,
    tuple: &[StandardTableau],
) -> Result<StandardTableau, SpringerError> {
    let flags = representative_flags(rep, tuple)?;
    spaltenstein_map(rep.e(), &ls_map(rep.datum(), &flags)?)
}

pub fn check_stacking_theorem(
    max_n: usize,
    fields: &[PrimeField],
    stacker: &Stacker,
) -> ClaimReport {
    let started = Instant::now();
    let data = levi_data_up_to(max_n);
    let tally = Tally::merge_all(fields.iter().flat_map(|&field| {
        data.par_iter()
            .map(|d| {
                let mut t = Tally::default();
                let rep = build_representative(d, field);
                let tuples = match tableau_tuples(d) {
                    Ok(tuples) => tuples,
                    Err(err) => {
                        t.error(datum_json(d), err);
                        return t;
                    }
                };
                for tuple in tuples {
                    let witness = |got: Value, want: Value| {
                        json!({
                            "datum": datum_json(d),
                            "p": field.characteristic(),
                            "tuple": tuple,
                            "phi_of_ls": got,
                            "stacked": want,
                        })
                    };
                    match (
                        stacked_class_of_representative(&rep, &tuple),
                        stacker(d, &tuple),
                    ) {
                        (Ok(got), Ok(want)) => {
                            t.check(got == want, || witness(json!(got), json!(want)))
                        }
                        (got, want) => t.check(false, || {
                            witness(
                                json!(got.map_err(|e| e.to_string())),
                                json!(want.map_err(|e| e.to_string())),
                            )
                        }),
                    }
                }
                t
            })
            .collect::<Vec<_>>()
    }));
    tally.into_report("thm-stack", Mode::Exhaustive, Value::Null, started)
}

/// Checks `Φ(LS(F)) ≥ stk(Φ₀(F))` and `LS(F) ∈ B_e` for every tuple `F` in the
/// blockwise fibre of one representative.
///
/// The fibre of the first block is streamed, sharded by its first line; the
/// remaining blocks are enumerated up front.
pub fn ls_order_instance(rep: &NilpotentRep, ceiling: u64, stacker: &Stacker) -> Tally {
    let d = rep.datum();
    let field = rep.field();
    let mut tally = Tally::default();
    let context = || json!({ "datum": datum_json(d), "p": field.characteristic() });

    let mut later: Vec<Vec<(Flag, StandardTableau)>> = Vec::new();
    let mut product = 1f64;
    for i in 1..d.num_blocks() {
        let opts = FibreOptions {
            ceiling,
            keep_flags: true,
            ..Default::default()
        };
        match enumerate_fibre(rep.block_operator(i), &opts) {
            Ok(fibre) => {
                product *= fibre.total_flags as f64;
                later.push(
                    fibre
                        .classes
                        .into_iter()
                        .flat_map(|c| {
                            let sigma = c.tableau;
                            c.flags.into_iter().map(move |f| (f, sigma.clone()))
                        })
                        .collect(),
                );
            }
            Err(SpringerError::CeilingExceeded { .. }) => {
                tally.aborted += 1;
                return tally;
            }
            Err(err) => {
                tally.error(context(), err);
                return tally;
            }
        }
    }
    let first = rep.block_operator(0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    match estimate_fibre_size(first, 32, &mut rng) {
        Ok(size) if size * product > ceiling as f64 => {
            tally.aborted += 1;
            return tally;
        }
        Ok(_) => {}
        Err(err) => {
            tally.error(context(), err);
            return tally;
        }
    }
    let starts = match fibre_first_steps(first) {
        Ok(starts) => starts,
        Err(err) => {
            tally.error(context(), err);
            return tally;
        }
    };
    let zero = Subspace::zero(field, first.num_rows());
    let shards: Vec<Tally> = starts
        .into_par_iter()
        .map(|line| {
            let mut t = Tally::default();
            let mut tuple_flags: Vec<Flag> = Vec::with_capacity(d.num_blocks());
            let mut tuple_tabs: Vec<StandardTableau> = Vec::with_capacity(d.num_blocks());
            let walked = for_each_fibre_flag_from(
                first,
                vec![zero.clone(), line],
                ceiling,
                |flag, types| {
                    let sigma0 = tableau_from_nested(
                        &NestedPartitionSequence::new(types.to_vec())
                            .expect("Jordan types of a fibre flag nest"),
                    );
                    for_each_tuple(&later, &mut |rest| {
                        tuple_flags.clear();
                        tuple_tabs.clear();
                        tuple_flags.push(flag.clone());
                        tuple_tabs.push(sigma0.clone());
                        for (f, s) in rest {
                            tuple_flags.push(f.clone());
                            tuple_tabs.push(s.clone());
                        }
                        check_ls_tuple(rep, &tuple_flags, &tuple_tabs, stacker, &mut t);
                    });
                },
            );
            if let Err(err) = walked {
                match err {
                    SpringerError::CeilingExceeded { .. } => t.aborted += 1,
                    other => t.error(
                        json!({ "datum": datum_json(d), "p": field.characteristic() }),
                        other,
                    ),
                }
            }
            t
        })
        .collect();
    tally.merge(Tally::merge_all(shards))
}

fn for_each_tuple<'a>(
    lists: &'a [Vec<(Flag, StandardTableau)>],
    visit: &mut impl FnMut(&[&'a (Flag, StandardTableau)]),
) {
    fn rec<'a>(
        lists: &'a [Vec<(Flag, StandardTableau)>],
        chosen: &mut Vec<&'a (Flag, StandardTableau)>,
        visit: &mut impl FnMut(&[&'a (Flag, StandardTableau)]),
    ) {
        match lists.split_first() {
            None => visit(chosen),
            Some((head, tail)) => {
                for item in head {
                    chosen.push(item);
                    rec(tail, chosen, visit);
                    chosen.pop();
                }
            }
        }
    }
    rec(lists, &mut Vec::with_capacity(lists.len()), visit);
}

fn check_ls_tuple(
    rep: &NilpotentRep,
    flags: &[Flag],
    blockwise: &[StandardTableau],
    stacker: &Stacker,
    t: &mut Tally,
) {
    let d = rep.datum();
    let witness = |reason: String| {
        json!({
            "datum": datum_json(d),
            "p": rep.field().characteristic(),
            "flags": flags,
            "blockwise": blockwise,
            "reason": reason,
        })
    };
    let combined = match ls_map(d, flags) {
        Ok(f) => f,
        Err(err) => return t.check(false, || witness(err.to_string())),
    };
    if !combined.is_in_fibre(rep.e()) {
        return t.check(false, || {
            witness("LS image is not in the fibre of e".into())
        });
    }
    let outcome = spaltenstein_map(rep.e(), &combined)
        .map_err(|e| e.to_string())
        .and_then(|tau| {
            let sigma = stacker(d, blockwise).map_err(|e| e.to_string())?;
            let ord = compare(&tau, &sigma).map_err(|e| e.to_string())?;
            Ok((tau, sigma, ord))
        });
    match outcome {
        Ok((tau, sigma, ord)) => t.check(ord != Ordering::Less, || {
            witness(format!("Φ(LS) = {tau:?} is below stk = {sigma:?}"))
        }),
        Err(err) => t.check(false, || witness(err)),
    }
}

pub fn check_ls_order(
    max_n: usize,
    fields: &[PrimeField],
    ceiling: u64,
    stacker: &Stacker,
) -> ClaimReport {
    let started = Instant::now();
    let data = levi_data_up_to(max_n);
    let mut tally = Tally::default();
    for &field in fields {
        let per_datum: Vec<Tally> = data
            .par_iter()
            .map(|d| ls_order_instance(&build_representative(d, field), ceiling, stacker))
            .collect();
        tally = tally.merge(Tally::merge_all(per_datum));
    }
    tally.into_report("prop-LSmap", Mode::Exhaustive, Value::Null, started)
}

/// Enumerates the fibre of each Jordan form, checks that class counts add up,
/// that every flag in a class maps to that class, and, where the full flag
/// variety is small, that the fibre matches a brute-force filter of all flags.
pub fn check_fibre_partition(max_n: usize, fields: &[PrimeField], ceiling: u64) -> ClaimReport {
    const BRUTE_FORCE_LIMIT: u64 = 1_000_000;
    let started = Instant::now();
    let shapes = partitions_up_to(max_n);
    let mut tally = Tally::default();
    let mut empty = Vec::new();
    for &field in fields {
        let results: Vec<(Tally, Vec<Value>)> = shapes
            .par_iter()
            .map(|lambda| {
                let mut t = Tally::default();
                let mut empties = Vec::new();
                let ctx = json!({ "lambda": lambda, "p": field.characteristic() });
                let e = jordan_form(field, lambda);
                let opts = FibreOptions { ceiling, keep_flags: true, ..Default::default() };
                let fibre = match enumerate_fibre(&e, &opts) {
                    Ok(f) => f,
                    Err(SpringerError::CeilingExceeded { .. }) => {
                        t.aborted += 1;
                        return (t, empties);
                    }
                    Err(err) => {
                        t.error(ctx, err);
                        return (t, empties);
                    }
                };
                let sum: u64 = fibre.classes.iter().map(|c| c.count).sum();
                t.check(sum == fibre.total_flags, || json!({ "instance": ctx, "class_sum": sum, "total": fibre.total_flags }));
                for class in &fibre.classes {
                    if class.count == 0 {
                        empties.push(json!({ "lambda": lambda, "p": field.characteristic(), "tableau": class.tableau }));
                    }
                    for flag in &class.flags {
                        let phi = spaltenstein_map(&e, flag);
                        t.check(phi.as_ref() == Ok(&class.tableau), || {
                            json!({ "instance": ctx, "flag": flag, "class": class.tableau })
                        });
                    }
                }
                let all_flags = (1..=lambda.weight() as u64)
                    .map(|k| crate::exactlinalg::line_count(field, k as usize))
                    .product::<u64>();
                if all_flags <= BRUTE_FORCE_LIMIT {
                    let zero = Matrix::zeros(field, lambda.weight(), lambda.weight());
                    let mut brute = 0u64;
                    let walked = for_each_fibre_flag(&zero, BRUTE_FORCE_LIMIT, |flag, _| {
                        if flag.is_in_fibre(&e) {
                            brute += 1;
                        }
                    });
                    match walked {
                        Ok(_) => t.check(brute == fibre.total_flags, || {
                            json!({ "instance": ctx, "brute_force": brute, "enumerated": fibre.total_flags })
                        }),
                        Err(err) => t.error(ctx, err),
                    }
                }
                (t, empties)
            })
            .collect();
        for (t, e) in results {
            tally = tally.merge(t);
            empty.extend(e);
        }
    }
    let details = json!({ "empty_classes": empty });
    tally.into_report("fibre-partition", Mode::Exhaustive, details, started)
}

/// A random composition of `n` with a random partition on each block.
pub fn random_levi_datum<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LeviDatum {
    let shape = random_composition(n, rng);
    let blocks = shape
        .parts()
        .iter()
        .map(|&k| random_composition(k, rng).to_partition())
        .collect();
    LeviDatum::new(shape, blocks).expect("blocks match the shape")
}

fn random_composition<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Composition {
    let mut parts = Vec::new();
    let mut current = 1;
    for _ in 1..n {
        if rng.gen_bool(0.5) {
            parts.push(current);
            current = 1;
        } else {
            current += 1;
        }
    }
    parts.push(current);
    Composition::new(parts).expect("positive parts")
}

fn random_invertible<R: Rng + ?Sized>(
    field: PrimeField,
    n: usize,
    rng: &mut R,
) -> (Matrix, Matrix) {
    let p = field.characteristic();
    loop {
        let rows = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect())
            .collect();
        let m = Matrix::from_rows(field, rows).expect("square");
        if let Some(inv) = m.inverse() {
            return (m, inv);
        }
    }
}

/// A random element `g = g₀·u` of the parabolic preserving `W_1 ⊂ W_2 ⊂ …`:
/// `g₀` block diagonal and invertible, `u` unipotent with identity diagonal
/// blocks. Returns the local blocks of `g₀` and `g`.
pub fn random_parabolic_element<R: Rng + ?Sized>(
    datum: &LeviDatum,
    field: PrimeField,
    rng: &mut R,
) -> (Vec<Matrix>, Matrix) {
    let n = datum.weight();
    let offsets = datum.levi_shape().offsets();
    let p = field.characteristic();
    let blocks: Vec<Matrix> = datum
        .levi_shape()
        .parts()
        .iter()
        .map(|&k| random_invertible(field, k, rng).0)
        .collect();
    let mut g0 = Matrix::zeros(field, n, n);
    for (b, m) in blocks.iter().enumerate() {
        for r in 0..m.num_rows() {
            for c in 0..m.num_cols() {
                g0.set(offsets[b] + r, offsets[b] + c, m.get(r, c));
            }
        }
    }
    let mut u = Matrix::identity(field, n);
    for row_block in 0..datum.num_blocks() {
        for col_block in row_block + 1..datum.num_blocks() {
            for r in offsets[row_block]..offsets[row_block + 1] {
                for c in offsets[col_block]..offsets[col_block + 1] {
                    u.set(r, c, rng.gen_range(0..p));
                }
            }
        }
    }
    (blocks, g0.mul(&u).expect("square"))
}

/// One seeded equivariance instance. Checks
/// `Φ_{geg⁻¹}(gF) = Φ_e(F)` for `F ∈ B_e`,
/// `Φ_{g₀e₀g₀⁻¹}(g₀F_i) = Φ_{e₀}(F_i)` blockwise, and
/// `LS(g₀F) = g·LS(F)` for `F` in the blockwise fibre.
pub fn equivariance_instance(
    d: &LeviDatum,
    field: PrimeField,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<String>, SpringerError> {
    let rep = build_representative(d, field);
    let (g0_blocks, g) = random_parabolic_element(d, field, rng);
    let g_inv = g.inverse().expect("parabolic elements are invertible");
    let e_conj = rep.e().conjugate_by(&g, &g_inv)?;
    let mut defects = Vec::new();

    let f = random_fibre_flag(rep.e(), rng)?;
    let moved = f.image_under(&g)?;
    if spaltenstein_map(&e_conj, &moved)? != spaltenstein_map(rep.e(), &f)? {
        defects.push("Φ is not invariant under conjugation by g".into());
    }

    let block_flags = (0..d.num_blocks())
        .map(|i| random_fibre_flag(rep.block_operator(i), rng))
        .collect::<Result<Vec<_>, _>>()?;
    let moved_blocks = block_flags
        .iter()
        .zip(&g0_blocks)
        .map(|(f, h)| f.image_under(h))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, ((f, h), mf)) in block_flags
        .iter()
        .zip(&g0_blocks)
        .zip(&moved_blocks)
        .enumerate()
    {
        let h_inv = h.inverse().expect("invertible block");
        let local = rep.block_operator(i).conjugate_by(h, &h_inv)?;
        if spaltenstein_map(&local, mf)? != spaltenstein_map(rep.block_operator(i), f)? {
            defects.push(format!("Φ₀ is not invariant on block {}", i + 1));
        }
    }
    let ls = ls_map(d, &block_flags)?;
    if ls_map(d, &moved_blocks)? != ls.image_under(&g)? {
        defects.push("LS(g₀F) differs from g·LS(F)".into());
    }
    if !ls.is_in_fibre(rep.e()) {
        defects.push("LS(F) is not in the fibre of e".into());
    }
    let blockwise = blockwise_spaltenstein(&rep, &block_flags)?;
    let tau = spaltenstein_map(rep.e(), &ls)?;
    if compare(&tau, &stack(d, &blockwise)?)? == Ordering::Less {
        defects.push("Φ(LS(F)) lies below the stacked tableau".into());
    }
    if spaltenstein_map(&e_conj, &ls.image_under(&g)?)? != tau {
        defects.push("Φ of the moved LS flag changed".into());
    }
    Ok(defects)
}

fn case_rng(seed: u64, stream: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ case.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream);
    rng
}

pub fn check_equivariance(
    max_n: usize,
    fields: &[PrimeField],
    cases: usize,
    seed: u64,
) -> ClaimReport {
    let started = Instant::now();
    let tally = Tally::merge_all(
        (0..cases as u64)
            .into_par_iter()
            .map(|case| {
                let mut t = Tally::default();
                let mut rng = case_rng(seed, 1, case);
                let field = fields[case as usize % fields.len()];
                let n = rng.gen_range(1..=max_n);
                let d = random_levi_datum(n, &mut rng);
                let ctx =
                    json!({ "case": case, "datum": datum_json(&d), "p": field.characteristic() });
                match equivariance_instance(&d, field, &mut rng) {
                    Ok(defects) => t.check(
                        defects.is_empty(),
                        || json!({ "instance": ctx, "defects": defects }),
                    ),
                    Err(err) => t.error(ctx, err),
                }
                t
            })
            .collect::<Vec<_>>(),
    );
    tally.into_report("prop-equivariance", Mode::Random, Value::Null, started)
}

/// Checks that every binary bracketing of the blocks stacks to the same
/// tableau. Interval `[i, j)` keeps the set of all values its bracketings
/// produce; the claim holds iff every set is a singleton equal to the flat
/// stack.
pub fn bracketing_defects(
    d: &LeviDatum,
    tuple: &[StandardTableau],
    stacker: &Stacker,
) -> Result<Vec<String>, TableauError> {
    let n = d.num_blocks();
    let flat = stacker(d, tuple)?;
    // values[i][len] for the interval i..i+len
    let mut values: Vec<Vec<Vec<StandardTableau>>> = vec![vec![Vec::new(); n + 1]; n];
    for i in 0..n {
        values[i][1] = vec![tuple[i].clone()];
    }
    for len in 2..=n {
        for i in 0..=n - len {
            let mut outcomes: Vec<StandardTableau> = Vec::new();
            for split in 1..len {
                for left in &values[i][split] {
                    for right in &values[i + split][len - split] {
                        let pair = LeviDatum::from_blocks(vec![
                            left.shape().clone(),
                            right.shape().clone(),
                        ])
                        .expect("nonempty shapes");
                        let joined = stacker(&pair, &[left.clone(), right.clone()])?;
                        if !outcomes.contains(&joined) {
                            outcomes.push(joined);
                        }
                    }
                }
            }
            values[i][len] = outcomes;
        }
    }
    let mut defects = Vec::new();
    for (i, row) in values.iter().enumerate() {
        for (len, vals) in row.iter().enumerate().skip(1) {
            if vals.len() > 1 {
                defects.push(format!(
                    "blocks {}..{} stack to {} different tableaux",
                    i + 1,
                    i + len,
                    vals.len()
                ));
            }
        }
    }
    if values[0][n] != [flat] {
        defects.push("bracketed stacking differs from the flat stack".into());
    }
    Ok(defects)
}

pub fn check_associativity(
    max_n: usize,
    cases: usize,
    seed: u64,
    stacker: &Stacker,
) -> ClaimReport {
    let started = Instant::now();
    let tally = Tally::merge_all(
        (0..cases as u64)
            .into_par_iter()
            .map(|case| {
                let mut t = Tally::default();
                let mut rng = case_rng(seed, 2, case);
                let n = rng.gen_range(1..=max_n);
                let d = random_levi_datum(n, &mut rng);
                let tuple: Vec<StandardTableau> = d
                    .blocks()
                    .iter()
                    .map(|mu| random_standard(mu, &mut rng))
                    .collect();
                let ctx = json!({ "case": case, "datum": datum_json(&d), "tuple": tuple });
                match bracketing_defects(&d, &tuple, stacker) {
                    Ok(defects) => t.check(
                        defects.is_empty(),
                        || json!({ "instance": ctx, "defects": defects }),
                    ),
                    Err(err) => t.error(ctx, err),
                }
                t
            })
            .collect::<Vec<_>>(),
    );
    tally.into_report("rem-associativity", Mode::Random, Value::Null, started)
}

/// Outcome of the five-dimensional example where LS of a blockwise class
/// lands strictly above the stacked class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleOutcome {
    pub stacked: StandardTableau,
    /// Φ(LS(F)) with the representative `e₁ = e₂₄ + e₃₅` and `F^{(2)} = ⟨v₅⟩`.
    pub representative_v5: StandardTableau,
    /// Φ(LS(F)) with `e₁ = e₃₄ + e₂₅` and `F^{(2)} = ⟨v₄⟩`.
    pub swapped_v4: StandardTableau,
    /// Recorded only: `e₁ = e₃₄ + e₂₅` with `F^{(2)} = ⟨v₅⟩`.
    pub swapped_v5: StandardTableau,
    /// Recorded only: the representative with `F^{(2)} = ⟨v₄⟩`.
    pub representative_v4: StandardTableau,
    /// Φ(LS) of the representative flags of the stacked tuple's blocks.
    pub representative_flags: StandardTableau,
}

fn gl5_operator(field: PrimeField, entries: &[(usize, usize)]) -> Matrix {
    let mut m = Matrix::zeros(field, 5, 5);
    for &(a, b) in entries {
        // e_{a,b} sends v_b to v_a
        m.set(a - 1, b - 1, 1);
    }
    m
}

/// `Φ(LS(F^{(1)}, F^{(2)}))` for every `F^{(1)}` in the fibre of `e₀ = e₁₂` on
/// `V_1` with `F^{(1)}_2 = ker e₀`, and `F^{(2)} = (0 ⊂ ⟨v_line⟩ ⊂ V_2)`.
/// Errors unless all choices of `F^{(1)}` agree.
fn counterexample_class(e: &Matrix, line: usize) -> Result<StandardTableau, String> {
    let field = e.field();
    let d = LeviDatum::parse("2,1;1,1", None).map_err(|e| e.to_string())?;
    let e0_local = gl5_operator(field, &[(1, 2)]);
    let v1 = Subspace::coordinate(field, 5, 0..3);
    let e0_v1 = restrict(&e0_local, &v1).map_err(|e| e.to_string())?;
    let kernel = e0_v1.kernel();
    let opts = FibreOptions {
        keep_flags: true,
        probes: 1,
        ..Default::default()
    };
    let fibre = enumerate_fibre(&e0_v1, &opts).map_err(|e| e.to_string())?;
    let mut second = vec![0; 2];
    second[line - 4] = 1;
    let f2 = Flag::from_basis(
        field,
        2,
        &[second, vec![(line == 5) as u32, (line == 4) as u32]],
    )
    .map_err(|e| e.to_string())?;
    let mut seen: Option<StandardTableau> = None;
    for flag in fibre.classes.iter().flat_map(|c| &c.flags) {
        if flag.space(2) != &kernel {
            continue;
        }
        let combined = ls_map(&d, &[flag.clone(), f2.clone()]).map_err(|e| e.to_string())?;
        let tau = spaltenstein_map(e, &combined).map_err(|e| e.to_string())?;
        match &seen {
            Some(prev) if prev != &tau => {
                return Err(format!("choices of F^(1) disagree: {prev:?} vs {tau:?}"))
            }
            _ => seen = Some(tau),
        }
    }
    seen.ok_or_else(|| "no admissible F^(1)".into())
}

pub fn counterexample_outcome() -> Result<CounterexampleOutcome, String> {
    let field = PrimeField::new(2).expect("2 is prime");
    let d = LeviDatum::parse("2,1;1,1", None).map_err(|e| e.to_string())?;
    let rep = build_representative(&d, field);
    let swapped = gl5_operator(field, &[(1, 2), (3, 4), (2, 5)]);
    if rep.e() != &gl5_operator(field, &[(1, 2), (2, 4), (3, 5)]) {
        return Err("unexpected representative for ((2,1),(1,1))".into());
    }
    let blockwise = [
        StandardTableau::new(vec![vec![1, 3], vec![2]]).map_err(|e| e.to_string())?,
        StandardTableau::new(vec![vec![1], vec![2]]).map_err(|e| e.to_string())?,
    ];
    Ok(CounterexampleOutcome {
        stacked: stack(&d, &blockwise).map_err(|e| e.to_string())?,
        representative_v5: counterexample_class(rep.e(), 5)?,
        swapped_v4: counterexample_class(&swapped, 4)?,
        swapped_v5: counterexample_class(&swapped, 5)?,
        representative_v4: counterexample_class(rep.e(), 4)?,
        representative_flags: stacked_class_of_representative(&rep, &blockwise)
            .map_err(|e| e.to_string())?,
    })
}

pub fn verify_counterexample_example() -> ClaimReport {
    let started = Instant::now();
    let mut tally = Tally::default();
    let details = match counterexample_outcome() {
        Ok(out) => {
            let expected_stack =
                StandardTableau::new(vec![vec![1, 3, 4], vec![2, 5]]).expect("standard");
            let tau = StandardTableau::new(vec![vec![1, 3, 5], vec![2, 4]]).expect("standard");
            tally.check(
                out.stacked == expected_stack,
                || json!({ "stacked": out.stacked }),
            );
            for (label, got) in [
                ("representative_v5", &out.representative_v5),
                ("swapped_v4", &out.swapped_v4),
            ] {
                tally.check(
                    got == &tau,
                    || json!({ "case": label, "phi": got, "expected": tau }),
                );
                let strictly_above = compare(got, &out.stacked) == Ok(Ordering::Greater);
                let last = (got.column_word()[4], out.stacked.column_word()[4]);
                tally.check(strictly_above && last == (3, 2), || {
                    json!({ "case": label, "phi": got, "stacked": out.stacked, "last_columns": last })
                });
            }
            tally.check(
                out.representative_flags == out.stacked,
                || json!({ "case": "representative flags", "phi": out.representative_flags }),
            );
            json!(out)
        }
        Err(err) => {
            tally.check(false, || json!({ "error": err }));
            Value::Null
        }
    };
    tally.into_report("ex-counterexample", Mode::Example, details, started)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groupings_of_three() {
        let g = consecutive_groupings(3);
        assert_eq!(g.len(), 4);
        assert!(g.iter().any(|groups| groups.len() == 1 && groups[0] == (0..3)));
        assert!(g.contains(&vec![0..1, 1..2, 2..3]));
        assert_eq!(consecutive_groupings(1), vec![vec![0..1]]);
    }

    #[test]
    fn counterexample_values() {
        let out = counterexample_outcome().unwrap();
        let t = |rows: Vec<Vec<usize>>| StandardTableau::new(rows).unwrap();
        assert_eq!(out.stacked, t(vec![vec![1, 3, 4], vec![2, 5]]));
        assert_eq!(out.representative_v5, t(vec![vec![1, 3, 5], vec![2, 4]]));
        assert_eq!(out.swapped_v4, t(vec![vec![1, 3, 5], vec![2, 4]]));
        assert_eq!(out.swapped_v5, t(vec![vec![1, 3, 4], vec![2, 5]]));
        assert_eq!(out.representative_flags, out.stacked);
        let report = verify_counterexample_example();
        assert_eq!(report.status, Status::Pass, "{report:?}");
    }

    #[test]
    fn tiny_campaign_passes() {
        let cfg = CampaignConfig {
            max_n: 1,
            random_cases: 20,
            ..Default::default()
        };
        let report = run_campaign(&cfg).unwrap();
        assert!(report.all_passed(), "{report:#?}");
        for c in &report.claims {
            if c.status == Status::OutOfScope {
                continue;
            }
            assert!(c.instances >= 1, "{} ran no instances", c.id);
        }
        assert_eq!(report.out_of_scope, 2);
    }

    #[test]
    fn unknown_claim_rejected() {
        let cfg = CampaignConfig {
            claims: vec!["nope".into()],
            ..Default::default()
        };
        assert!(matches!(
            run_campaign(&cfg),
            Err(HarnessError::UnknownClaim(_))
        ));
    }

    #[test]
    fn random_parabolic_preserves_partial_flag() {
        let field = PrimeField::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = LeviDatum::parse("2;1,1;3", None).unwrap();
        let rep = build_representative(&d, field);
        for _ in 0..20 {
            let (_, g) = random_parabolic_element(&d, field, &mut rng);
            for j in 0..=d.num_blocks() {
                let w = rep.partial_flag(j);
                assert_eq!(&w.image_under(&g).unwrap(), w);
            }
        }
    }
}
