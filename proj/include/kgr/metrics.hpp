#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgr/hallucination.hpp"
#include "kgr/kg.hpp"
#include "kgr/records.hpp"
#include "kgr/tasks.hpp"

namespace kgr {

// ---- graph edit distance --------------------------------------------------

// Substitution is free for identical elements, 0.5 for same-kind elements the
// ontology considers similar (shared type for entities, subproperty kinship
// for relations) and 1.0 otherwise; swapping an entity for a relation is
// always 1.0. Insertions and deletions cost 1.0.
struct EditCostModel {
    const Ontology* ontology = nullptr;
    double insert_cost = 1.0;
    double delete_cost = 1.0;

    double substitution(const Iri& a, const Iri& b) const;
};

// Minimum-cost edit script turning s into the reference s_star.
double geo(std::span<const Iri> s, std::span<const Iri> s_star, const EditCostModel& cost);
double geo(const KgPath& s, const KgPath& s_star, const EditCostModel& cost);

// NGEO(s, s*) = min(GEO(s, s*) / |s*|, 1) with |s*| counted in elements.
// An absent generation scores against the empty sequence, which lands on 1.
double ngeo(std::span<const Iri> s, const KgPath& s_star, const EditCostModel& cost);
double ngeo(const std::optional<KgPath>& s, const KgPath& s_star, const EditCostModel& cost);

// ---- labels -----------------------------------------------------------------

enum class FactLabel { CorrectFact, IncorrectFact };

std::string_view to_string(FactLabel label);

// Human fact labels keyed by (query id, canonical answer). File format is
// three tab-separated columns: query_id, answer, CorrectFact|IncorrectFact.
class LabelStore {
public:
    static LabelStore load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    // Re-adding an identical entry is a no-op; a conflicting label for the
    // same key is a DataError.
    void add(const std::string& query_id, const std::string& answer, FactLabel label);
    void merge(const LabelStore& other);
    std::optional<FactLabel> find(const std::string& query_id, const std::string& answer) const;
    size_t size() const { return entries_.size(); }
    const std::map<std::pair<std::string, std::string>, FactLabel>& entries() const {
        return entries_;
    }

private:
    std::map<std::pair<std::string, std::string>, FactLabel> entries_;
};

// ---- per-generation verdicts -----------------------------------------------

// The answer slot pulled out of a free-form response: the first dbr: mention
// for tail prediction, the first dbo:/dbp: mention for the relation tasks.
// `canonical` is the string a label entry must match: the IRI when one was
// found, the whitespace-collapsed response otherwise.
struct AnswerExtraction {
    std::optional<Iri> iri;
    std::string canonical;
    std::string failure;
};

AnswerExtraction extract_answer(TaskKind kind, std::string_view response);

struct HardResult {
    bool accurate = false;
    std::string reason;
};

// Exact-match accuracy: the completed triple must be stored (tail/relation
// prediction) or the extracted relation must equal the ground truth (RE).
// Unparseable responses are inaccurate with the reason recorded.
HardResult hard_accuracy(const KnowledgeGraph& graph, const Query& query,
                         std::string_view response);

enum class SoftValue { True, False, Unresolved };

std::string_view to_string(SoftValue value);

struct SoftResult {
    SoftValue value = SoftValue::Unresolved;
    std::string reason;
    // The ontology/content verdict of the answer triple when one could be
    // built; lets callers count suspects without re-deriving it.
    std::optional<HopVerdict> verdict;
    std::string canonical_answer;
};

// True when hard-accurate or labeled CorrectFact, False when labeled
// IncorrectFact or the answer violates the ontology, Unresolved otherwise.
SoftResult soft_accuracy(const Snapshot& snapshot, const Query& query,
                         std::string_view response, const LabelStore& labels);

// ---- aggregation -------------------------------------------------------------

struct MetricRow {
    std::string model;
    TaskKind kind = TaskKind::TailPrediction;
    std::optional<double> h_acc;        // percent
    std::optional<double> s_acc;        // percent
    std::optional<double> ngeo_mean;    // fraction
    std::optional<double> pct_if;       // fraction of generations
    std::optional<double> pct_iv;       // mean fraction of invalid hops
    size_t queries = 0;
    size_t generations = 0;
    std::optional<size_t> unresolved;   // label-bearing tasks only
    size_t content_suspects = 0;        // unlabeled suspect answers/hops
};

struct MetricReport {
    std::vector<MetricRow> rows;

    std::string render_text() const;
    std::string render_csv() const;
};

// Groups records by (model, task kind); rows are sorted by model name and
// task order. Every record must reference a known query.
MetricReport aggregate(const std::vector<RunRecord>& records,
                       const std::map<std::string, Query>& queries, const Snapshot& snapshot,
                       const LabelStore& labels);

// (query id, canonical answer) pairs that scoring left Unresolved, sorted
// and de-duplicated: the labeling worklist.
std::vector<std::pair<std::string, std::string>> collect_unresolved(
    const std::vector<RunRecord>& records, const std::map<std::string, Query>& queries,
    const Snapshot& snapshot, const LabelStore& labels);

std::map<std::string, Query> index_queries(const std::vector<Query>& queries);

} // namespace kgr
