#include "kgr/tasks.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>

#include "kgr/errors.hpp"
#include "kgr/hallucination.hpp"
#include "kgr/util.hpp"

namespace kgr {

using nlohmann::json;

std::string_view to_string(TaskKind kind) {
    switch (kind) {
    case TaskKind::TailPrediction: return "tail";
    case TaskKind::RelationPrediction: return "relation";
    case TaskKind::RelationExtraction: return "re";
    case TaskKind::ContextualPathGeneration: return "cpg";
    }
    return "?";
}

std::optional<TaskKind> task_kind_from_string(std::string_view name) {
    if (name == "tail") return TaskKind::TailPrediction;
    if (name == "relation") return TaskKind::RelationPrediction;
    if (name == "re") return TaskKind::RelationExtraction;
    if (name == "cpg") return TaskKind::ContextualPathGeneration;
    return std::nullopt;
}

const Iri& Query::ground_truth_iri() const {
    if (const Iri* iri = std::get_if<Iri>(&ground_truth)) {
        return *iri;
    }
    throw DataError("query " + id + ": ground truth is a path, not an IRI");
}

const KgPath& Query::ground_truth_path() const {
    if (const KgPath* path = std::get_if<KgPath>(&ground_truth)) {
        return *path;
    }
    throw DataError("query " + id + ": ground truth is an IRI, not a path");
}

std::string make_query_id(TaskKind kind, const Triple& triple) {
    std::string key = std::string(to_string(kind)) + "|" + triple.head.value() + "|" +
                      triple.relation.value() + "|" + triple.tail.value();
    return util::sha256_hex16(key);
}

std::vector<Triple> sample_triples(const KnowledgeGraph& graph, size_t n, std::uint64_t seed) {
    if (n > graph.triples().size()) {
        throw DataError("cannot sample " + std::to_string(n) + " triples from a store of " +
                        std::to_string(graph.triples().size()));
    }
    std::vector<Triple> pool(graph.triples().begin(), graph.triples().end());
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < n; ++i) {
        size_t j = i + util::uniform_below(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    return pool;
}

std::vector<Query> make_masked_queries(const std::vector<Triple>& triples, TaskKind kind) {
    if (kind != TaskKind::TailPrediction && kind != TaskKind::RelationPrediction) {
        throw UsageError("masked queries exist only for tail and relation prediction");
    }
    std::vector<Query> queries;
    queries.reserve(triples.size());
    for (const Triple& triple : triples) {
        validate_fact_triple(triple);
        Query q;
        q.id = make_query_id(kind, triple);
        q.kind = kind;
        q.head = triple.head;
        if (kind == TaskKind::TailPrediction) {
            q.relation = triple.relation;
            q.ground_truth = triple.tail;
        } else {
            q.tail = triple.tail;
            q.ground_truth = triple.relation;
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

std::string default_alias(const Iri& entity) {
    std::string name(entity.local_name());
    std::replace(name.begin(), name.end(), '_', ' ');
    if (!name.empty() && name.back() == ')') {
        size_t open = name.rfind(" (");
        if (open != std::string::npos) {
            name.erase(open);
        }
    }
    return std::string(util::trim(name));
}

namespace {

[[noreturn]] void record_error(const std::filesystem::path& path, size_t line,
                               const std::string& what) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": " + what);
}

Iri parse_iri_field(const json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_string()) {
        throw DataError(std::string("missing string field '") + field + "'");
    }
    return Iri::parse(j[field].get<std::string>());
}

std::vector<std::string> parse_alias_field(const json& j, const char* field) {
    std::vector<std::string> out;
    if (!j.contains(field)) {
        return out;
    }
    if (!j[field].is_array()) {
        throw DataError(std::string("field '") + field + "' must be an array of strings");
    }
    for (const auto& item : j[field]) {
        if (!item.is_string()) {
            throw DataError(std::string("field '") + field + "' must be an array of strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

bool alias_in_context(const std::string& context, const std::vector<std::string>& aliases,
                      const Iri& entity) {
    if (aliases.empty()) {
        return context.find(default_alias(entity)) != std::string::npos;
    }
    for (const std::string& alias : aliases) {
        if (!alias.empty() && context.find(alias) != std::string::npos) {
            return true;
        }
    }
    return false;
}

void validate_query(const Query& q, const KnowledgeGraph& graph, const Ontology& ontology) {
    if (q.head.kind() != IriKind::Entity) {
        throw DataError("head must be a dbr: entity");
    }
    switch (q.kind) {
    case TaskKind::TailPrediction: {
        if (!q.relation) {
            throw DataError("tail prediction needs a relation");
        }
        validate_fact_triple(Triple{q.head, *q.relation, std::get<Iri>(q.ground_truth)});
        break;
    }
    case TaskKind::RelationPrediction: {
        if (!q.tail) {
            throw DataError("relation prediction needs a tail entity");
        }
        validate_fact_triple(Triple{q.head, std::get<Iri>(q.ground_truth), *q.tail});
        break;
    }
    case TaskKind::RelationExtraction: {
        if (!q.tail) {
            throw DataError("relation extraction needs a tail entity");
        }
        if (q.context.empty()) {
            throw DataError("relation extraction needs a context");
        }
        const Iri& gt = std::get<Iri>(q.ground_truth);
        if (gt.kind() != IriKind::Relation || !gt.in_ontology_namespace()) {
            throw DataError("ground truth must be a single dbo:/dbp: relation");
        }
        if (!alias_in_context(q.context, q.head_aliases, q.head)) {
            throw DataError("context does not mention head entity '" + q.head.value() + "'");
        }
        if (!alias_in_context(q.context, q.tail_aliases, *q.tail)) {
            throw DataError("context does not mention tail entity '" + q.tail->value() + "'");
        }
        break;
    }
    case TaskKind::ContextualPathGeneration: {
        if (!q.tail) {
            throw DataError("path generation needs a tail entity");
        }
        if (q.context.empty()) {
            throw DataError("path generation needs a context");
        }
        const KgPath& gt = std::get<KgPath>(q.ground_truth);
        if (gt.hop_count() < 2 || gt.hop_count() > 6) {
            throw DataError("ground-truth path must have 2..6 hops, got " +
                            std::to_string(gt.hop_count()));
        }
        if (!(gt.source() == q.head) || !(gt.target() == *q.tail)) {
            throw DataError("ground-truth path endpoints must match head and tail");
        }
        for (size_t i = 0; i < gt.hop_count(); ++i) {
            HopVerdict verdict = check_ontology(ontology, graph, gt.hop(i));
            if (is_ontology_hallucination(verdict)) {
                throw DataError("ground-truth hop " + std::to_string(i) +
                                " violates the ontology: " + describe(verdict));
            }
        }
        break;
    }
    }
}

Query query_from_json(const json& j) {
    Query q;
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
        throw DataError("missing string field 'id'");
    }
    q.id = j["id"].get<std::string>();
    if (!j.contains("kind") || !j["kind"].is_string()) {
        throw DataError("missing string field 'kind'");
    }
    auto kind = task_kind_from_string(j["kind"].get<std::string>());
    if (!kind) {
        throw DataError("unknown task kind '" + j["kind"].get<std::string>() + "'");
    }
    q.kind = *kind;
    q.head = parse_iri_field(j, "head");
    if (j.contains("tail")) {
        q.tail = parse_iri_field(j, "tail");
    }
    if (j.contains("relation")) {
        q.relation = parse_iri_field(j, "relation");
    }
    if (j.contains("context")) {
        if (!j["context"].is_string()) {
            throw DataError("field 'context' must be a string");
        }
        q.context = j["context"].get<std::string>();
    }
    if (j.contains("doc")) {
        if (!j["doc"].is_string()) {
            throw DataError("field 'doc' must be a string");
        }
        q.doc = j["doc"].get<std::string>();
    }
    if (!j.contains("ground_truth") || !j["ground_truth"].is_string()) {
        throw DataError("missing string field 'ground_truth'");
    }
    std::string gt = j["ground_truth"].get<std::string>();
    if (q.kind == TaskKind::ContextualPathGeneration) {
        ParseOutcome outcome = parse_path(gt);
        if (!outcome.well_formed_path()) {
            throw DataError("ground-truth path does not parse: " + outcome.detail);
        }
        q.ground_truth = *outcome.path;
    } else {
        q.ground_truth = Iri::parse(gt);
    }
    q.head_aliases = parse_alias_field(j, "head_aliases");
    q.tail_aliases = parse_alias_field(j, "tail_aliases");
    return q;
}

json query_to_json(const Query& q) {
    json j;
    j["id"] = q.id;
    j["kind"] = std::string(to_string(q.kind));
    j["head"] = q.head.value();
    if (q.tail) {
        j["tail"] = q.tail->value();
    }
    if (q.relation) {
        j["relation"] = q.relation->value();
    }
    if (!q.context.empty()) {
        j["context"] = q.context;
    }
    if (!q.doc.empty()) {
        j["doc"] = q.doc;
    }
    if (const Iri* iri = std::get_if<Iri>(&q.ground_truth)) {
        j["ground_truth"] = iri->value();
    } else {
        j["ground_truth"] = render_path(std::get<KgPath>(q.ground_truth));
    }
    if (!q.head_aliases.empty()) {
        j["head_aliases"] = q.head_aliases;
    }
    if (!q.tail_aliases.empty()) {
        j["tail_aliases"] = q.tail_aliases;
    }
    return j;
}

} // namespace

std::vector<Query> load_tasks(const std::filesystem::path& path, const KnowledgeGraph& graph,
                              const Ontology& ontology) {
    std::string content = util::read_file(path);
    std::vector<Query> queries;
    std::set<std::string> seen_ids;
    size_t line_number = 0;
    for (const std::string& raw : util::split_lines(content)) {
        ++line_number;
        auto line = util::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            record_error(path, line_number, "invalid JSON");
        }
        try {
            Query q = query_from_json(j);
            validate_query(q, graph, ontology);
            if (!seen_ids.insert(q.id).second) {
                throw DataError("duplicate query id '" + q.id + "'");
            }
            queries.push_back(std::move(q));
        } catch (const DataError& e) {
            record_error(path, line_number, e.what());
        }
    }
    return queries;
}

void write_tasks(const std::filesystem::path& path, const std::vector<Query>& queries) {
    std::string out;
    for (const Query& q : queries) {
        out += query_to_json(q).dump();
        out += "\n";
    }
    util::write_file_atomic(path, out);
}

std::vector<Query> sample_per_document(const std::vector<Query>& queries, size_t per_doc,
                                       std::uint64_t seed) {
    std::map<std::string, std::vector<size_t>> by_doc;
    for (size_t i = 0; i < queries.size(); ++i) {
        by_doc[queries[i].doc.empty() ? queries[i].id : queries[i].doc].push_back(i);
    }
    std::vector<size_t> keep;
    for (auto& [doc, indices] : by_doc) {
        // A per-document stream keeps the selection stable when other
        // documents come and go.
        std::mt19937_64 rng(seed ^ std::stoull(util::sha256_hex16(doc), nullptr, 16));
        for (size_t i = 0; i < indices.size() && i < per_doc; ++i) {
            size_t j = i + util::uniform_below(rng, indices.size() - i);
            std::swap(indices[i], indices[j]);
        }
        for (size_t i = 0; i < indices.size() && i < per_doc; ++i) {
            keep.push_back(indices[i]);
        }
    }
    std::sort(keep.begin(), keep.end());
    std::vector<Query> out;
    out.reserve(keep.size());
    for (size_t i : keep) {
        out.push_back(queries[i]);
    }
    return out;
}

} // namespace kgr
