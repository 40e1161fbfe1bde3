//! The combined analysis report: one pass over a system producing every
//! structural verdict, serializable to JSON (deterministically: identical
//! input gives byte-identical output) and renderable as text.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::accord;
use crate::catalog::BuiltinSystem;
use crate::error::{Error, Result};
use crate::hypothesis;
use crate::kernel::{build_kernel, classify_kernel, stationary_distribution, support_components};
use crate::ratio::format_rat;
use crate::semigroup;
use crate::system::{serialize_system, RandomMapSystem};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSummary {
    pub states: Vec<String>,
    pub map_count: usize,
    pub maps: Vec<MapSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapSummary {
    pub name: String,
    pub weight: String,
    pub table: Vec<String>,
    pub bijection: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSummary {
    pub irreducible: bool,
    pub aperiodic: bool,
    pub period: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccordSummary {
    /// Symmetric matrix with a true diagonal.
    pub relation: Vec<Vec<bool>>,
    pub accordable_pairs: Vec<(String, String)>,
    /// Maximal pairwise non-accordable count.
    pub m: usize,
    pub witness_set: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinRankSummary {
    pub rank: usize,
    pub witness: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagonalSummary {
    pub holds: bool,
    pub offenders: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeterminationSummary {
    pub determined: bool,
    pub pairwise_accordable: bool,
    pub diagonal_only: bool,
    pub min_rank_one: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisSummary {
    pub feasible: bool,
    pub t_star: Option<String>,
    pub alpha: Option<Vec<(String, String)>>,
    pub n: usize,
    pub mn_product: usize,
    pub mn_equals_states: bool,
    pub m_divides_states: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemigroupSummary {
    pub size: usize,
    pub recurrent_count: usize,
    pub min_image_size: usize,
    pub recurrent_images_ok: bool,
    /// Present when a catalog entry carries a reference element list.
    pub reference_note: Option<String>,
}

/// Full analysis of one system. Every verdict names its theory entry in
/// `theory`, so a report is readable without the code.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub system: SystemSummary,
    pub kernel: KernelSummary,
    /// Stationary law, one rational string per state.
    pub stationary: Vec<String>,
    pub accordability: AccordSummary,
    pub min_rank: MinRankSummary,
    pub diagonal_recurrence: DiagonalSummary,
    pub determination: DeterminationSummary,
    pub hypothesis: HypothesisSummary,
    pub semigroup: Option<SemigroupSummary>,
    pub theory: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    /// Cap for the optional semigroup enumeration; past it the summary is
    /// omitted rather than failing the whole report.
    pub semigroup_cap: usize,
    pub include_semigroup: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            semigroup_cap: 100_000,
            include_semigroup: true,
        }
    }
}

/// Run the full pipeline. Requires an irreducible kernel: the determination
/// equivalence and the stationary law both assume it, so reducible inputs are
/// refused with the offending components.
pub fn analyze(
    system: &RandomMapSystem,
    options: &AnalyzeOptions,
    builtin: Option<&BuiltinSystem>,
) -> Result<Report> {
    let kernel = build_kernel(system);
    let class = classify_kernel(&kernel);
    if !class.irreducible {
        return Err(Error::Reducible {
            components: support_components(&kernel),
        });
    }
    let pi = stationary_distribution(&kernel)?;
    let label = |x: usize| system.states().label(x).to_string();

    let accord_report = accord::max_non_accordable(system);
    let mut accordable_pairs = Vec::new();
    for x in 0..system.d() {
        for y in (x + 1)..system.d() {
            if accord_report.relation[x][y] {
                accordable_pairs.push((label(x), label(y)));
            }
        }
    }
    let rank = accord::min_rank(system);
    let diag = accord::diagonal_recurrence_check(system);
    let determination = accord::innovations_determine(system)?;
    let h = hypothesis::h_report(system);

    let semigroup = if options.include_semigroup {
        match semigroup::check_prop10(system, options.semigroup_cap) {
            Ok(p) => {
                let reference_note = match builtin.and_then(|b| b.semigroup_reference.as_ref()) {
                    Some(reference) => {
                        let table = semigroup::enumerate_semigroup(system, options.semigroup_cap)?;
                        let all_present = reference.iter().all(|m| table.position_of(m).is_some());
                        let mut note = format!(
                            "catalog reference lists {} elements; enumeration found {}",
                            reference.len(),
                            p.semigroup_size
                        );
                        if p.semigroup_size != reference.len() {
                            note.push_str(" (reference list is a strict subset)");
                        }
                        if !all_present {
                            note.push_str("; WARNING: a reference element is missing");
                        }
                        Some(note)
                    }
                    None => None,
                };
                Some(SemigroupSummary {
                    size: p.semigroup_size,
                    recurrent_count: p.recurrent_count,
                    min_image_size: p.min_image_size,
                    recurrent_images_ok: p.ok,
                    reference_note,
                })
            }
            Err(Error::CapExceeded { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    Ok(Report {
        system: SystemSummary {
            states: system.states().labels().to_vec(),
            map_count: system.map_count(),
            maps: system
                .maps()
                .iter()
                .map(|m| MapSummary {
                    name: m.name.clone(),
                    weight: format_rat(&m.weight),
                    table: (0..system.d()).map(|x| label(m.map.apply(x))).collect(),
                    bijection: m.map.is_bijection(),
                })
                .collect(),
        },
        kernel: KernelSummary {
            irreducible: class.irreducible,
            aperiodic: class.aperiodic,
            period: class.period,
        },
        stationary: pi.weights().iter().map(format_rat).collect(),
        accordability: AccordSummary {
            relation: accord_report.relation.clone(),
            accordable_pairs,
            m: accord_report.m,
            witness_set: accord_report
                .witness_set
                .iter()
                .map(|&x| label(x))
                .collect(),
        },
        min_rank: MinRankSummary {
            rank: rank.rank,
            witness: system.word_names(&rank.witness),
        },
        diagonal_recurrence: DiagonalSummary {
            holds: diag.holds,
            offenders: diag
                .offenders
                .iter()
                .map(|&(x, y)| (label(x), label(y)))
                .collect(),
        },
        determination: DeterminationSummary {
            determined: determination.determined,
            pairwise_accordable: determination.pairwise_accordable,
            diagonal_only: determination.diagonal_only,
            min_rank_one: determination.min_rank.rank == 1,
        },
        hypothesis: HypothesisSummary {
            feasible: h.feasible,
            t_star: h.t_star.as_ref().map(format_rat),
            alpha: h.alpha.map(|a| {
                a.into_iter()
                    .map(|(name, w)| (name, format_rat(&w)))
                    .collect()
            }),
            n: h.n,
            mn_product: h.m * h.n,
            mn_equals_states: h.product_check,
            m_divides_states: h.m_divides_states,
        },
        semigroup,
        theory: theory_map(),
    })
}

/// What each verdict means, by descriptive name.
fn theory_map() -> BTreeMap<String, String> {
    let entries = [
        (
            "accordability",
            "two states are accordable when some composite of the maps merges \
             them; computed by reachability of the merged sink in the pair \
             automaton",
        ),
        (
            "determination",
            "equivalence on irreducible chains: all pairs accordable <=> the \
             chain is measurable with respect to its innovations <=> every \
             terminal class of the coupled kernel lies on the diagonal <=> \
             minimal rank 1",
        ),
        (
            "min_rank",
            "minimal image cardinality over the generated semigroup; equals \
             the maximal number of pairwise non-accordable states, and equals \
             the eventual backward-walk image size almost surely",
        ),
        (
            "recurrent_images",
            "every recurrent element of the right-multiplication walk has an \
             image of exactly that minimal cardinality, pairwise non-accordable",
        ),
        (
            "limit_law",
            "the conditional law of the present state given all innovations is \
             uniform on the eventual image set of the backward walk",
        ),
        (
            "uniform_invariance",
            "when a positive reweighting of the maps makes the uniform law \
             invariant, (max non-accordable) x (max simultaneously accordable) \
             equals the state count, and the state space partitions into \
             blocks collapsed by a single composite",
        ),
        (
            "mixing",
            "irreducible aperiodic stationary chains carry no asymptotic \
             information: total variation to the stationary law vanishes",
        ),
    ];
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub fn to_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serialization cannot fail")
}

/// Plain-text rendering.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let r = report;
    out.push_str(&format!(
        "states: {} ({})\n",
        r.system.states.len(),
        r.system.states.join(", ")
    ));
    out.push_str(&format!("maps: {}\n", r.system.map_count));
    for m in &r.system.maps {
        out.push_str(&format!(
            "  {} w={} [{}]{}\n",
            m.name,
            m.weight,
            m.table.join(","),
            if m.bijection { " (bijection)" } else { "" }
        ));
    }
    out.push_str(&format!(
        "kernel: irreducible={} aperiodic={} period={}\n",
        r.kernel.irreducible,
        r.kernel.aperiodic,
        r.kernel
            .period
            .map(|p| p.to_string())
            .unwrap_or_else(|| "-".into())
    ));
    out.push_str(&format!("stationary law: ({})\n", r.stationary.join(", ")));
    out.push_str(&format!(
        "accordable pairs: {}\n",
        if r.accordability.accordable_pairs.is_empty() {
            "none".to_string()
        } else {
            r.accordability
                .accordable_pairs
                .iter()
                .map(|(a, b)| format!("{{{a},{b}}}"))
                .collect::<Vec<_>>()
                .join(" ")
        }
    ));
    out.push_str(&format!(
        "M (max pairwise non-accordable): {} witness {{{}}}\n",
        r.accordability.m,
        r.accordability.witness_set.join(",")
    ));
    out.push_str(&format!(
        "minimal rank: {} witness [{}]\n",
        r.min_rank.rank,
        r.min_rank.witness.join(" ")
    ));
    out.push_str(&format!(
        "coupled kernel diagonal-only: {}{}\n",
        r.diagonal_recurrence.holds,
        if r.diagonal_recurrence.offenders.is_empty() {
            String::new()
        } else {
            format!(
                " offenders {}",
                r.diagonal_recurrence
                    .offenders
                    .iter()
                    .map(|(a, b)| format!("({a},{b})"))
                    .collect::<Vec<_>>()
                    .join(" ")
            )
        }
    ));
    out.push_str(&format!(
        "innovations determine the chain: {}\n",
        r.determination.determined
    ));
    out.push_str(&format!(
        "uniform-invariance hypothesis: {}{}\n",
        if r.hypothesis.feasible {
            "holds"
        } else {
            "fails"
        },
        r.hypothesis
            .t_star
            .as_ref()
            .map(|t| format!(" (margin {t})"))
            .unwrap_or_default()
    ));
    if let Some(alpha) = &r.hypothesis.alpha {
        let parts: Vec<String> = alpha.iter().map(|(n, w)| format!("{n}={w}")).collect();
        out.push_str(&format!("  certificate: {}\n", parts.join(" ")));
    }
    out.push_str(&format!(
        "N (max simultaneously accordable): {}\n",
        r.hypothesis.n
    ));
    out.push_str(&format!(
        "M*N = {} {} |E| = {}{}\n",
        r.hypothesis.mn_product,
        if r.hypothesis.mn_equals_states {
            "="
        } else {
            "!="
        },
        r.system.states.len(),
        if r.hypothesis.m_divides_states {
            String::new()
        } else {
            format!(
                " (M = {} does not divide {})",
                r.accordability.m,
                r.system.states.len()
            )
        }
    ));
    if let Some(sg) = &r.semigroup {
        out.push_str(&format!(
            "semigroup: {} elements, {} recurrent, min image {}, recurrent images ok: {}\n",
            sg.size, sg.recurrent_count, sg.min_image_size, sg.recurrent_images_ok
        ));
        if let Some(note) = &sg.reference_note {
            out.push_str(&format!("  note: {note}\n"));
        }
    }
    out
}

/// The canonical document for a system, re-exported for CLI emission.
pub fn system_document(system: &RandomMapSystem) -> String {
    serialize_system(system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn analyze_non_h_example() {
        let b = catalog::builtin("non-h-example").unwrap();
        let r = analyze(&b.system, &AnalyzeOptions::default(), Some(&b)).unwrap();
        assert_eq!(r.accordability.m, 3);
        assert_eq!(r.hypothesis.n, 2);
        assert!(!r.hypothesis.feasible);
        assert!(!r.determination.determined);
        assert!(!r.hypothesis.m_divides_states);
        let sg = r.semigroup.as_ref().unwrap();
        assert!(sg.reference_note.as_ref().unwrap().contains("5 elements"));
        assert!(sg.size >= 5);
        // verdict internal consistency
        assert_eq!(r.min_rank.rank, r.accordability.m);
        assert_eq!(r.determination.diagonal_only, r.diagonal_recurrence.holds);
    }

    #[test]
    fn analyze_is_byte_deterministic() {
        let b = catalog::builtin("vinokourov").unwrap();
        let r1 = analyze(&b.system, &AnalyzeOptions::default(), Some(&b)).unwrap();
        let r2 = analyze(&b.system, &AnalyzeOptions::default(), Some(&b)).unwrap();
        assert_eq!(to_json(&r1), to_json(&r2));
        // and the JSON round-trips structurally
        let parsed: Report = serde_json::from_str(&to_json(&r1)).unwrap();
        assert_eq!(to_json(&parsed), to_json(&r1));
    }

    #[test]
    fn analyze_refuses_reducible_systems() {
        let text = r#"{"states": ["a", "b"], "maps": [
            {"name": "id", "weight": "1", "table": {"a": "a", "b": "b"}}
        ]}"#;
        let s = crate::system::load_system(text).unwrap();
        let err = analyze(&s, &AnalyzeOptions::default(), None).unwrap_err();
        assert!(matches!(err, Error::Reducible { .. }));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn text_rendering_mentions_the_divisibility_miss() {
        let b = catalog::builtin("non-h-example").unwrap();
        let r = analyze(&b.system, &AnalyzeOptions::default(), Some(&b)).unwrap();
        let text = render_text(&r);
        assert!(text.contains("does not divide"), "{text}");
        assert!(text.contains("M (max pairwise non-accordable): 3"));
    }

    #[test]
    fn semigroup_summary_is_omitted_past_cap() {
        let b = catalog::builtin("non-h-example").unwrap();
        let opts = AnalyzeOptions {
            semigroup_cap: 2,
            include_semigroup: true,
        };
        let r = analyze(&b.system, &opts, Some(&b)).unwrap();
        assert!(r.semigroup.is_none());
    }
}
