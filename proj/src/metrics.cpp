#include "kgr/metrics.hpp"

#include <algorithm>
#include <set>

#include "kgr/errors.hpp"
#include "kgr/path.hpp"
#include "kgr/util.hpp"

namespace kgr {

// ---- graph edit distance ---------------------------------------------------

namespace {

bool entity_like(const Iri& iri) {
    return iri.kind() == IriKind::Entity;
}

} // namespace

double EditCostModel::substitution(const Iri& a, const Iri& b) const {
    if (a == b) {
        return 0.0;
    }
    if (entity_like(a) != entity_like(b)) {
        return 1.0;
    }
    if (ontology == nullptr) {
        return 1.0;
    }
    bool similar = entity_like(a) ? ontology->entities_similar(a, b)
                                  : ontology->relations_similar(a, b);
    return similar ? 0.5 : 1.0;
}

double geo(std::span<const Iri> s, std::span<const Iri> s_star, const EditCostModel& cost) {
    const size_t n = s.size();
    const size_t m = s_star.size();
    std::vector<double> prev(m + 1);
    std::vector<double> cur(m + 1);
    for (size_t j = 0; j <= m; ++j) {
        prev[j] = static_cast<double>(j) * cost.insert_cost;
    }
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<double>(i) * cost.delete_cost;
        for (size_t j = 1; j <= m; ++j) {
            double best = prev[j] + cost.delete_cost;
            best = std::min(best, cur[j - 1] + cost.insert_cost);
            best = std::min(best, prev[j - 1] + cost.substitution(s[i - 1], s_star[j - 1]));
            cur[j] = best;
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double geo(const KgPath& s, const KgPath& s_star, const EditCostModel& cost) {
    return geo(std::span<const Iri>(s.elements()), std::span<const Iri>(s_star.elements()), cost);
}

double ngeo(std::span<const Iri> s, const KgPath& s_star, const EditCostModel& cost) {
    double raw = geo(s, std::span<const Iri>(s_star.elements()), cost);
    double norm = raw / static_cast<double>(s_star.length());
    return std::min(norm, 1.0);
}

double ngeo(const std::optional<KgPath>& s, const KgPath& s_star, const EditCostModel& cost) {
    if (!s) {
        return ngeo(std::span<const Iri>(), s_star, cost);
    }
    return ngeo(std::span<const Iri>(s->elements()), s_star, cost);
}

// ---- labels -----------------------------------------------------------------

std::string_view to_string(FactLabel label) {
    return label == FactLabel::CorrectFact ? "CorrectFact" : "IncorrectFact";
}

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> fields;
    size_t b = 0;
    while (true) {
        size_t e = line.find('\t', b);
        if (e == std::string_view::npos) {
            fields.emplace_back(line.substr(b));
            break;
        }
        fields.emplace_back(line.substr(b, e - b));
        b = e + 1;
    }
    return fields;
}

} // namespace

LabelStore LabelStore::load(const std::filesystem::path& path) {
    LabelStore store;
    std::string content = util::read_file(path);
    size_t line_number = 0;
    for (const std::string& raw : util::split_lines(content)) {
        ++line_number;
        if (util::trim(raw).empty() || raw.front() == '#') {
            continue;
        }
        auto fields = split_tabs(raw);
        if (fields.size() != 3) {
            throw DataError(path.string() + ":" + std::to_string(line_number) +
                            ": expected 3 tab-separated fields, got " +
                            std::to_string(fields.size()));
        }
        FactLabel label;
        if (fields[2] == "CorrectFact") {
            label = FactLabel::CorrectFact;
        } else if (fields[2] == "IncorrectFact") {
            label = FactLabel::IncorrectFact;
        } else {
            throw DataError(path.string() + ":" + std::to_string(line_number) +
                            ": label must be CorrectFact or IncorrectFact, got '" + fields[2] +
                            "'");
        }
        try {
            store.add(fields[0], fields[1], label);
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(line_number) + ": " + e.what());
        }
    }
    return store;
}

void LabelStore::save(const std::filesystem::path& path) const {
    std::string out;
    for (const auto& [key, label] : entries_) {
        out += key.first;
        out += '\t';
        out += key.second;
        out += '\t';
        out += to_string(label);
        out += '\n';
    }
    util::write_file_atomic(path, out);
}

void LabelStore::add(const std::string& query_id, const std::string& answer, FactLabel label) {
    if (query_id.empty()) {
        throw DataError("label entry has an empty query id");
    }
    if (query_id.find_first_of("\t\n") != std::string::npos ||
        answer.find_first_of("\t\n") != std::string::npos) {
        throw DataError("label fields must not contain tabs or newlines");
    }
    auto [it, inserted] = entries_.emplace(std::make_pair(query_id, answer), label);
    if (!inserted && it->second != label) {
        throw DataError("conflicting label for query '" + query_id + "', answer '" + answer +
                        "'");
    }
}

void LabelStore::merge(const LabelStore& other) {
    for (const auto& [key, label] : other.entries_) {
        add(key.first, key.second, label);
    }
}

std::optional<FactLabel> LabelStore::find(const std::string& query_id,
                                          const std::string& answer) const {
    auto it = entries_.find({query_id, answer});
    return it == entries_.end() ? std::nullopt : std::optional<FactLabel>(it->second);
}

// ---- per-generation verdicts -------------------------------------------------

AnswerExtraction extract_answer(TaskKind kind, std::string_view response) {
    AnswerExtraction out;
    if (kind == TaskKind::ContextualPathGeneration) {
        throw UsageError("answer extraction applies to single-relation tasks only");
    }
    bool want_entity = kind == TaskKind::TailPrediction;
    for (const Iri& mention : scan_iri_mentions(response)) {
        bool match = want_entity ? mention.kind() == IriKind::Entity
                                 : mention.in_ontology_namespace();
        if (match) {
            out.iri = mention;
            out.canonical = mention.value();
            return out;
        }
    }
    out.canonical = util::collapse_whitespace(response);
    out.failure = want_entity ? "no dbr: entity in response" : "no dbo:/dbp: relation in response";
    return out;
}

namespace {

// The answer triple implied by one extracted IRI, per task kind.
std::optional<Triple> answer_triple(const Query& query, const Iri& answer) {
    switch (query.kind) {
    case TaskKind::TailPrediction:
        if (answer.kind() != IriKind::Entity) {
            return std::nullopt;
        }
        return Triple{query.head, *query.relation, answer};
    case TaskKind::RelationPrediction:
    case TaskKind::RelationExtraction:
        if (!answer.in_ontology_namespace()) {
            return std::nullopt;
        }
        return Triple{query.head, answer, *query.tail};
    case TaskKind::ContextualPathGeneration:
        return std::nullopt;
    }
    return std::nullopt;
}

} // namespace

HardResult hard_accuracy(const KnowledgeGraph& graph, const Query& query,
                         std::string_view response) {
    if (query.kind == TaskKind::ContextualPathGeneration) {
        throw UsageError("hard accuracy applies to single-relation tasks only");
    }
    AnswerExtraction extraction = extract_answer(query.kind, response);
    if (!extraction.iri) {
        return {false, extraction.failure};
    }
    if (query.kind == TaskKind::RelationExtraction) {
        if (*extraction.iri == query.ground_truth_iri()) {
            return {true, "matches ground-truth relation"};
        }
        return {false, "'" + extraction.iri->value() + "' is not the ground-truth relation"};
    }
    std::optional<Triple> triple = answer_triple(query, *extraction.iri);
    if (triple && graph.has_triple(*triple)) {
        return {true, "completed triple is stored"};
    }
    return {false, "completed triple is not stored"};
}

std::string_view to_string(SoftValue value) {
    switch (value) {
    case SoftValue::True: return "True";
    case SoftValue::False: return "False";
    case SoftValue::Unresolved: return "Unresolved";
    }
    return "?";
}

SoftResult soft_accuracy(const Snapshot& snapshot, const Query& query,
                         std::string_view response, const LabelStore& labels) {
    SoftResult result;
    AnswerExtraction extraction = extract_answer(query.kind, response);
    result.canonical_answer = extraction.canonical;

    std::optional<Triple> triple;
    if (extraction.iri) {
        triple = answer_triple(query, *extraction.iri);
    }
    if (triple) {
        result.verdict = check_ontology(snapshot.ontology, snapshot.graph, *triple);
    }

    HardResult hard = hard_accuracy(snapshot.graph, query, response);
    if (hard.accurate) {
        result.value = SoftValue::True;
        result.reason = hard.reason;
        return result;
    }
    if (auto label = labels.find(query.id, extraction.canonical)) {
        result.value = *label == FactLabel::CorrectFact ? SoftValue::True : SoftValue::False;
        result.reason = std::string("labeled ") + std::string(to_string(*label));
        if (*label == FactLabel::IncorrectFact && result.verdict &&
            is_content_suspect(*result.verdict)) {
            result.verdict = ContentHallucinationConfirmed{};
        }
        return result;
    }
    if (result.verdict && is_ontology_hallucination(*result.verdict)) {
        result.value = SoftValue::False;
        result.reason = describe(*result.verdict);
        return result;
    }
    result.value = SoftValue::Unresolved;
    result.reason = extraction.iri ? "fact not stored and not labeled" : extraction.failure;
    return result;
}

// ---- aggregation ---------------------------------------------------------------

std::map<std::string, Query> index_queries(const std::vector<Query>& queries) {
    std::map<std::string, Query> out;
    for (const Query& q : queries) {
        if (!out.emplace(q.id, q).second) {
            throw DataError("duplicate query id '" + q.id + "'");
        }
    }
    return out;
}

namespace {

struct GroupStats {
    size_t generations = 0;
    size_t hard_true = 0;
    size_t soft_true = 0;
    size_t unresolved = 0;
    size_t content_suspects = 0;
    size_t ill_formatted = 0;
    double ngeo_sum = 0.0;
    double iv_sum = 0.0;
    size_t iv_count = 0;
    std::set<std::string> query_ids;
};

int task_order(TaskKind kind) {
    switch (kind) {
    case TaskKind::TailPrediction: return 0;
    case TaskKind::RelationPrediction: return 1;
    case TaskKind::RelationExtraction: return 2;
    case TaskKind::ContextualPathGeneration: return 3;
    }
    return 4;
}

std::string trials_display(size_t generations, size_t queries) {
    if (queries == 0) {
        return "0";
    }
    if (generations % queries == 0) {
        return std::to_string(generations / queries);
    }
    return util::format_fixed(static_cast<double>(generations) / static_cast<double>(queries), 1);
}

std::string cell(const std::optional<double>& value, int decimals, std::string_view na) {
    return value ? util::format_fixed(*value, decimals) : std::string(na);
}

std::string cell(const std::optional<size_t>& value, std::string_view na) {
    return value ? std::to_string(*value) : std::string(na);
}

} // namespace

MetricReport aggregate(const std::vector<RunRecord>& records,
                       const std::map<std::string, Query>& queries, const Snapshot& snapshot,
                       const LabelStore& labels) {
    std::map<std::pair<std::string, TaskKind>, GroupStats> groups;
    EditCostModel cost{&snapshot.ontology};

    for (const RunRecord& record : records) {
        auto qit = queries.find(record.query_id);
        if (qit == queries.end()) {
            throw DataError("record references unknown query '" + record.query_id + "'");
        }
        const Query& query = qit->second;
        GroupStats& g = groups[{record.model, query.kind}];
        ++g.generations;
        g.query_ids.insert(query.id);

        if (query.kind == TaskKind::ContextualPathGeneration) {
            GenerationJudgment judgment;
            if (!record.error.empty()) {
                judgment.ill_formatted = true;
                judgment.reason = record.error;
            } else {
                judgment = judge_generation_text(record.response_text);
            }
            const KgPath& gt = query.ground_truth_path();
            if (judgment.ill_formatted) {
                ++g.ill_formatted;
                g.ngeo_sum += ngeo(std::nullopt, gt, cost);
            } else {
                g.ngeo_sum += ngeo(judgment.answer, gt, cost);
                g.iv_sum += path_invalid_fraction(snapshot.ontology, snapshot.graph,
                                                  *judgment.answer);
                ++g.iv_count;
                for (const HopVerdict& verdict :
                     check_path(snapshot.ontology, snapshot.graph, *judgment.answer)) {
                    if (is_content_suspect(verdict)) {
                        ++g.content_suspects;
                    }
                }
            }
            continue;
        }

        if (!record.error.empty()) {
            continue;
        }
        HardResult hard = hard_accuracy(snapshot.graph, query, record.response_text);
        if (hard.accurate) {
            ++g.hard_true;
        }
        SoftResult soft = soft_accuracy(snapshot, query, record.response_text, labels);
        if (soft.value == SoftValue::True) {
            ++g.soft_true;
        } else if (soft.value == SoftValue::Unresolved) {
            ++g.unresolved;
        }
        if (soft.verdict && is_content_suspect(*soft.verdict) &&
            !labels.find(query.id, soft.canonical_answer)) {
            ++g.content_suspects;
        }
    }

    MetricReport report;
    for (const auto& [key, g] : groups) {
        MetricRow row;
        row.model = key.first;
        row.kind = key.second;
        row.queries = g.query_ids.size();
        row.generations = g.generations;
        row.content_suspects = g.content_suspects;
        double n = static_cast<double>(g.generations);
        if (key.second == TaskKind::ContextualPathGeneration) {
            if (g.generations > 0) {
                row.ngeo_mean = g.ngeo_sum / n;
                row.pct_if = static_cast<double>(g.ill_formatted) / n;
            }
            if (g.iv_count > 0) {
                row.pct_iv = g.iv_sum / static_cast<double>(g.iv_count);
            }
        } else {
            if (g.generations > 0) {
                row.h_acc = 100.0 * static_cast<double>(g.hard_true) / n;
                row.s_acc = 100.0 * static_cast<double>(g.soft_true) / n;
            }
            row.unresolved = g.unresolved;
        }
        report.rows.push_back(std::move(row));
    }
    std::sort(report.rows.begin(), report.rows.end(), [](const MetricRow& a, const MetricRow& b) {
        if (a.model != b.model) {
            return a.model < b.model;
        }
        return task_order(a.kind) < task_order(b.kind);
    });
    return report;
}

std::vector<std::pair<std::string, std::string>> collect_unresolved(
    const std::vector<RunRecord>& records, const std::map<std::string, Query>& queries,
    const Snapshot& snapshot, const LabelStore& labels) {
    std::set<std::pair<std::string, std::string>> out;
    for (const RunRecord& record : records) {
        auto qit = queries.find(record.query_id);
        if (qit == queries.end()) {
            throw DataError("record references unknown query '" + record.query_id + "'");
        }
        const Query& query = qit->second;
        if (query.kind == TaskKind::ContextualPathGeneration || !record.error.empty()) {
            continue;
        }
        SoftResult soft = soft_accuracy(snapshot, query, record.response_text, labels);
        if (soft.value == SoftValue::Unresolved) {
            out.emplace(query.id, soft.canonical_answer);
        }
    }
    return {out.begin(), out.end()};
}

// ---- rendering --------------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> report_cells(const MetricReport& report,
                                                   std::string_view na) {
    std::vector<std::vector<std::string>> rows;
    for (const MetricRow& row : report.rows) {
        rows.push_back({
            row.model,
            std::string(to_string(row.kind)),
            cell(row.h_acc, 1, na),
            cell(row.s_acc, 1, na),
            cell(row.ngeo_mean, 2, na),
            cell(row.pct_if, 2, na),
            cell(row.pct_iv, 2, na),
            trials_display(row.generations, row.queries),
            cell(row.unresolved, na),
        });
    }
    return rows;
}

const std::vector<std::string> kHeader = {"model",  "task",   "H-ACC", "S-ACC", "NGEO",
                                          "%IF",    "%IV",    "trials", "unresolved"};

} // namespace

std::string MetricReport::render_text() const {
    auto rows = report_cells(*this, "-");
    std::vector<size_t> width(kHeader.size());
    for (size_t c = 0; c < kHeader.size(); ++c) {
        width[c] = kHeader[c].size();
    }
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    auto emit = [&](const std::vector<std::string>& row) {
        std::string line;
        for (size_t c = 0; c < row.size(); ++c) {
            if (c > 0) {
                line += "  ";
            }
            line += row[c];
            if (c + 1 < row.size()) {
                line.append(width[c] - row[c].size(), ' ');
            }
        }
        while (!line.empty() && line.back() == ' ') {
            line.pop_back();
        }
        return line + "\n";
    };
    std::string out = emit(kHeader);
    std::string rule;
    size_t total = 0;
    for (size_t c = 0; c < width.size(); ++c) {
        total += width[c] + (c > 0 ? 2 : 0);
    }
    rule.assign(total, '-');
    out += rule + "\n";
    for (const auto& row : rows) {
        out += emit(row);
    }
    return out;
}

std::string MetricReport::render_csv() const {
    auto rows = report_cells(*this, "");
    std::string out;
    for (size_t c = 0; c < kHeader.size(); ++c) {
        if (c > 0) {
            out += ',';
        }
        out += kHeader[c];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c > 0) {
                out += ',';
            }
            out += row[c];
        }
        out += '\n';
    }
    return out;
}

} // namespace kgr
