#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kgr/kg.hpp"
#include "kgr/path.hpp"

namespace kgr {

// The four benchmark tasks. The first two mask one slot of a stored triple;
// the last two pair entities with a context document.
enum class TaskKind { TailPrediction, RelationPrediction, RelationExtraction, ContextualPathGeneration };

std::string_view to_string(TaskKind kind);
std::optional<TaskKind> task_kind_from_string(std::string_view name);

struct Query {
    std::string id;                       // sha256-derived, stable across runs
    TaskKind kind = TaskKind::TailPrediction;
    Iri head;
    std::optional<Iri> tail;              // absent for tail prediction
    std::optional<Iri> relation;          // the unmasked relation, tail prediction only
    std::string context;                  // RE / CPG
    std::string doc;                      // source document id for per-doc sampling
    std::variant<Iri, KgPath> ground_truth;
    std::vector<std::string> head_aliases;
    std::vector<std::string> tail_aliases;

    const Iri& ground_truth_iri() const;
    const KgPath& ground_truth_path() const;
};

std::string make_query_id(TaskKind kind, const Triple& triple);

// Deterministic sample of n distinct triples: canonical triple order, then a
// seeded partial Fisher-Yates. n larger than the store is a DataError.
std::vector<Triple> sample_triples(const KnowledgeGraph& graph, size_t n, std::uint64_t seed);

// Masks the tail (TailPrediction) or the relation (RelationPrediction) of
// each triple and records the masked slot as ground truth.
std::vector<Query> make_masked_queries(const std::vector<Triple>& triples, TaskKind kind);

// JSON Lines, one query per line. Validation per kind:
//   tail/relation  slots hold well-shaped IRIs
//   re             non-empty context naming both entities (via aliases),
//                  single relation ground truth
//   cpg            ground-truth path connects head to tail, hop count in
//                  [2,6], and every hop passes the ontology check
std::vector<Query> load_tasks(const std::filesystem::path& path, const KnowledgeGraph& graph,
                              const Ontology& ontology);

void write_tasks(const std::filesystem::path& path, const std::vector<Query>& queries);

// Keeps at most per_doc queries from each document, chosen by a sampler
// seeded per document id so adding a document never reshuffles the others.
std::vector<Query> sample_per_document(const std::vector<Query>& queries, size_t per_doc,
                                       std::uint64_t seed);

// The alias a context is searched for when none is given explicitly: the
// local name with underscores as spaces and any trailing "(...)" qualifier
// dropped.
std::string default_alias(const Iri& entity);

} // namespace kgr
