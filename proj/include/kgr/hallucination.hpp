#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "kgr/kg.hpp"

namespace kgr {

// Verdicts for one generated hop, checked against the ontology first and the
// fact store second:
//   OntologyHallucination  a domain or range constraint is violated
//   ContentSuspect         constraints hold but the fact is not stored;
//                          only human labeling can settle it
//   ContentHallucinationConfirmed  a label settled a suspect as false
//   Valid                  the fact is stored
enum class ConstraintSide { Domain, Range };

struct Valid {};

struct OntologyHallucination {
    ConstraintSide side;
    Iri required;            // the declared domain/range class
    std::set<Iri> found;     // declared types of the offending endpoint
};

struct ContentSuspect {};

struct ContentHallucinationConfirmed {};

using HopVerdict =
    std::variant<Valid, OntologyHallucination, ContentSuspect, ContentHallucinationConfirmed>;

std::string describe(const HopVerdict& verdict);

bool is_ontology_hallucination(const HopVerdict& verdict);
bool is_content_suspect(const HopVerdict& verdict);
bool is_valid(const HopVerdict& verdict);

// Checks one hop in its written orientation. Domain is checked before range.
// An endpoint with no declared types fails any declared constraint: absence
// of type evidence does not excuse a constrained slot. Head and tail must be
// entities and the relation must live in dbo:/dbp:.
HopVerdict check_ontology(const Ontology& ontology, const KnowledgeGraph& graph,
                          const Triple& hop);

// Fraction of ontology-invalid hops in a path. Zero-hop paths have no hops
// to offend and score 0.
double path_invalid_fraction(const Ontology& ontology, const KnowledgeGraph& graph,
                             const KgPath& path);

std::vector<HopVerdict> check_path(const Ontology& ontology, const KnowledgeGraph& graph,
                                   const KgPath& path);

} // namespace kgr
