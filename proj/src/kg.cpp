#include "kgr/kg.hpp"

#include <algorithm>
#include <deque>

#include "kgr/errors.hpp"
#include "kgr/util.hpp"

namespace kgr {

namespace {

const std::set<Iri> kEmptyIriSet;
const std::vector<Edge> kEmptyEdges;

bool reserved_relation(const Iri& iri) {
    auto p = iri.prefix();
    return p == "rdf" || p == "rdfs";
}

} // namespace

void validate_fact_triple(const Triple& triple) {
    if (triple.head.kind() != IriKind::Entity) {
        throw DataError("triple head must be a dbr: entity: '" + triple.head.value() + "'");
    }
    if (triple.tail.kind() != IriKind::Entity) {
        throw DataError("triple tail must be a dbr: entity: '" + triple.tail.value() + "'");
    }
    if (triple.relation.kind() != IriKind::Relation || !triple.relation.in_ontology_namespace()) {
        throw DataError("triple relation must be a dbo:/dbp: property: '" +
                        triple.relation.value() + "'");
    }
}

// ---- KnowledgeGraph ------------------------------------------------------

void KnowledgeGraph::add(const Triple& triple) {
    validate_fact_triple(triple);
    if (!triples_.insert(triple).second) {
        return;
    }
    entities_.insert(triple.head);
    entities_.insert(triple.tail);
    relations_.insert(triple.relation);
    by_pair_[{triple.head, triple.tail}].insert(triple.relation);

    auto insert_edge = [](std::vector<Edge>& edges, Edge edge) {
        auto it = std::lower_bound(edges.begin(), edges.end(), edge);
        if (it == edges.end() || *it != edge) {
            edges.insert(it, std::move(edge));
        }
    };
    insert_edge(adjacency_[triple.head], Edge{triple.relation, triple.tail, true});
    insert_edge(adjacency_[triple.tail], Edge{triple.relation, triple.head, false});
    adjacency_.try_emplace(triple.head);
    adjacency_.try_emplace(triple.tail);
}

bool KnowledgeGraph::has_triple(const Triple& triple) const {
    return triples_.count(triple) > 0;
}

std::set<Iri> KnowledgeGraph::relations_between(const Iri& head, const Iri& tail) const {
    auto it = by_pair_.find({head, tail});
    return it == by_pair_.end() ? std::set<Iri>{} : it->second;
}

bool KnowledgeGraph::has_entity(const Iri& entity) const {
    return entities_.count(entity) > 0;
}

const std::vector<Edge>& KnowledgeGraph::neighbors(const Iri& entity) const {
    auto it = adjacency_.find(entity);
    return it == adjacency_.end() ? kEmptyEdges : it->second;
}

std::optional<KgPath> KnowledgeGraph::shortest_path(const Iri& from, const Iri& to) const {
    if (!has_entity(from)) {
        throw DataError("shortest_path: unknown entity '" + from.value() + "'");
    }
    if (!has_entity(to)) {
        throw DataError("shortest_path: unknown entity '" + to.value() + "'");
    }
    if (from == to) {
        return KgPath::make({from});
    }

    // Hop distances to `to`, then a greedy descent from `from`; the sorted
    // adjacency lists make the lexicographic tie-break automatic.
    std::map<Iri, size_t> dist;
    dist[to] = 0;
    std::deque<Iri> queue{to};
    while (!queue.empty()) {
        Iri cur = queue.front();
        queue.pop_front();
        size_t d = dist[cur];
        for (const Edge& edge : neighbors(cur)) {
            if (dist.emplace(edge.neighbor, d + 1).second) {
                queue.push_back(edge.neighbor);
            }
        }
    }

    auto it = dist.find(from);
    if (it == dist.end()) {
        return std::nullopt;
    }

    std::vector<Iri> elements{from};
    Iri cur = from;
    size_t remaining = it->second;
    while (remaining > 0) {
        const Edge* chosen = nullptr;
        for (const Edge& edge : neighbors(cur)) {
            auto dit = dist.find(edge.neighbor);
            if (dit != dist.end() && dit->second == remaining - 1) {
                chosen = &edge;
                break;
            }
        }
        if (chosen == nullptr) {
            throw DataError("shortest_path: internal descent failed at '" + cur.value() + "'");
        }
        elements.push_back(chosen->relation);
        elements.push_back(chosen->neighbor);
        cur = chosen->neighbor;
        --remaining;
    }
    return KgPath::make(std::move(elements));
}

// ---- Ontology ------------------------------------------------------------

namespace {

void require_class(const Iri& iri, const char* role) {
    if (iri.kind() != IriKind::Class) {
        throw DataError(std::string(role) + " must be a capitalized dbo:/dbp: class: '" +
                        iri.value() + "'");
    }
}

void require_relation(const Iri& iri, const char* role) {
    if (iri.kind() != IriKind::Relation || !iri.in_ontology_namespace()) {
        throw DataError(std::string(role) + " must be a dbo:/dbp: property: '" + iri.value() + "'");
    }
}

void require_entity(const Iri& iri, const char* role) {
    if (iri.kind() != IriKind::Entity) {
        throw DataError(std::string(role) + " must be a dbr: entity: '" + iri.value() + "'");
    }
}

} // namespace

void Ontology::declare_class(const Iri& cls) {
    require_class(cls, "class");
    classes_.insert(cls);
}

void Ontology::declare_relation(const Iri& relation) {
    require_relation(relation, "relation");
    relations_.insert(relation);
}

void Ontology::add_subclass(const Iri& cls, const Iri& super) {
    declare_class(cls);
    declare_class(super);
    subclass_of_[cls].insert(super);
}

void Ontology::add_subproperty(const Iri& relation, const Iri& super) {
    declare_relation(relation);
    declare_relation(super);
    subproperty_of_[relation].insert(super);
}

void Ontology::set_domain(const Iri& relation, const Iri& cls) {
    declare_relation(relation);
    declare_class(cls);
    auto [it, inserted] = domain_of_.emplace(relation, cls);
    if (!inserted && it->second != cls) {
        throw DataError("conflicting domain for '" + relation.value() + "': '" +
                        it->second.value() + "' vs '" + cls.value() + "'");
    }
}

void Ontology::set_range(const Iri& relation, const Iri& cls) {
    declare_relation(relation);
    declare_class(cls);
    auto [it, inserted] = range_of_.emplace(relation, cls);
    if (!inserted && it->second != cls) {
        throw DataError("conflicting range for '" + relation.value() + "': '" +
                        it->second.value() + "' vs '" + cls.value() + "'");
    }
}

void Ontology::add_type(const Iri& entity, const Iri& cls) {
    require_entity(entity, "typed subject");
    declare_class(cls);
    types_of_[entity].insert(cls);
}

bool Ontology::is_declared_class(const Iri& cls) const {
    return classes_.count(cls) > 0;
}

bool Ontology::is_declared_relation(const Iri& relation) const {
    return relations_.count(relation) > 0;
}

std::optional<Iri> Ontology::domain_of(const Iri& relation) const {
    auto it = domain_of_.find(relation);
    return it == domain_of_.end() ? std::nullopt : std::optional<Iri>(it->second);
}

std::optional<Iri> Ontology::range_of(const Iri& relation) const {
    auto it = range_of_.find(relation);
    return it == range_of_.end() ? std::nullopt : std::optional<Iri>(it->second);
}

const std::set<Iri>& Ontology::types_of(const Iri& entity) const {
    auto it = types_of_.find(entity);
    return it == types_of_.end() ? kEmptyIriSet : it->second;
}

const std::set<Iri>& Ontology::direct_superclasses(const Iri& cls) const {
    auto it = subclass_of_.find(cls);
    return it == subclass_of_.end() ? kEmptyIriSet : it->second;
}

const std::set<Iri>& Ontology::direct_superproperties(const Iri& relation) const {
    auto it = subproperty_of_.find(relation);
    return it == subproperty_of_.end() ? kEmptyIriSet : it->second;
}

bool Ontology::is_subclass_or_equal(const Iri& cls, const Iri& ancestor) const {
    if (!is_declared_class(cls)) {
        throw DataError("undeclared class: '" + cls.value() + "'");
    }
    if (!is_declared_class(ancestor)) {
        throw DataError("undeclared class: '" + ancestor.value() + "'");
    }
    if (cls == ancestor) {
        return true;
    }
    std::set<Iri> seen{cls};
    std::deque<Iri> queue{cls};
    while (!queue.empty()) {
        Iri cur = queue.front();
        queue.pop_front();
        for (const Iri& super : direct_superclasses(cur)) {
            if (super == ancestor) {
                return true;
            }
            if (seen.insert(super).second) {
                queue.push_back(super);
            }
        }
    }
    return false;
}

namespace {

bool subproperty_reaches(const Ontology& o, const Iri& from, const Iri& target) {
    std::set<Iri> seen{from};
    std::deque<Iri> queue{from};
    while (!queue.empty()) {
        Iri cur = queue.front();
        queue.pop_front();
        for (const Iri& super : o.direct_superproperties(cur)) {
            if (super == target) {
                return true;
            }
            if (seen.insert(super).second) {
                queue.push_back(super);
            }
        }
    }
    return false;
}

} // namespace

bool Ontology::relations_similar(const Iri& a, const Iri& b) const {
    if (a == b) {
        return true;
    }
    if (subproperty_reaches(*this, a, b) || subproperty_reaches(*this, b, a)) {
        return true;
    }
    const auto& sa = direct_superproperties(a);
    const auto& sb = direct_superproperties(b);
    for (const Iri& super : sa) {
        if (sb.count(super) > 0) {
            return true;
        }
    }
    return false;
}

bool Ontology::entities_similar(const Iri& a, const Iri& b) const {
    if (a == b) {
        return true;
    }
    const auto& ta = types_of(a);
    const auto& tb = types_of(b);
    for (const Iri& cls : ta) {
        if (tb.count(cls) > 0) {
            return true;
        }
    }
    return false;
}

namespace {

void check_acyclic(const std::map<Iri, std::set<Iri>>& edges, const char* what) {
    // Colors: 0 unseen, 1 on stack, 2 done.
    std::map<Iri, int> color;
    for (const auto& [start, _] : edges) {
        if (color[start] != 0) {
            continue;
        }
        std::vector<std::pair<Iri, bool>> stack{{start, false}};
        while (!stack.empty()) {
            auto [node, expanded] = stack.back();
            stack.pop_back();
            if (expanded) {
                color[node] = 2;
                continue;
            }
            if (color[node] == 2) {
                continue;
            }
            if (color[node] == 1) {
                continue;
            }
            color[node] = 1;
            stack.push_back({node, true});
            auto it = edges.find(node);
            if (it == edges.end()) {
                color[node] = 2;
                stack.pop_back();
                continue;
            }
            for (const Iri& next : it->second) {
                if (color[next] == 1) {
                    throw DataError(std::string(what) + " hierarchy contains a cycle through '" +
                                    next.value() + "'");
                }
                if (color[next] == 0) {
                    stack.push_back({next, false});
                }
            }
        }
    }
}

} // namespace

void Ontology::validate() const {
    check_acyclic(subclass_of_, "subclass");
    check_acyclic(subproperty_of_, "subproperty");
}

// ---- loading ---------------------------------------------------------------

namespace {

struct Line {
    size_t number;
    std::vector<std::string> fields;
};

std::vector<Line> read_statement_lines(const std::filesystem::path& path) {
    std::string content = util::read_file(path);
    std::vector<Line> out;
    size_t number = 0;
    for (const std::string& raw : util::split_lines(content)) {
        ++number;
        auto line = util::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        out.push_back({number, util::split_whitespace(line)});
    }
    return out;
}

[[noreturn]] void line_error(const std::filesystem::path& path, size_t number,
                             const std::string& what) {
    throw DataError(path.string() + ":" + std::to_string(number) + ": " + what);
}

} // namespace

KnowledgeGraph load_triples_file(const std::filesystem::path& path) {
    KnowledgeGraph graph;
    for (const Line& line : read_statement_lines(path)) {
        if (line.fields.size() != 3) {
            line_error(path, line.number,
                       "expected 3 fields (head relation tail), got " +
                           std::to_string(line.fields.size()));
        }
        Iri head, relation, tail;
        try {
            head = Iri::parse(line.fields[0]);
            relation = Iri::parse(line.fields[1]);
            tail = Iri::parse(line.fields[2]);
            if (reserved_relation(relation)) {
                throw DataError("reserved relation '" + relation.value() +
                                "' belongs in the ontology file");
            }
            graph.add(Triple{head, relation, tail});
        } catch (const DataError& e) {
            line_error(path, line.number, e.what());
        }
    }
    return graph;
}

Ontology load_ontology_file(const std::filesystem::path& path, size_t* statement_count) {
    Ontology ontology;
    size_t statements = 0;
    for (const Line& line : read_statement_lines(path)) {
        if (line.fields.size() != 3) {
            line_error(path, line.number,
                       "expected 3 fields (subject relation object), got " +
                           std::to_string(line.fields.size()));
        }
        try {
            Iri subject = Iri::parse(line.fields[0]);
            Iri relation = Iri::parse(line.fields[1]);
            Iri object = Iri::parse(line.fields[2]);
            if (relation.value() == "rdf:type") {
                ontology.add_type(subject, object);
            } else if (relation.value() == "rdfs:subClassOf") {
                ontology.add_subclass(subject, object);
            } else if (relation.value() == "rdfs:subPropertyOf") {
                ontology.add_subproperty(subject, object);
            } else if (relation.value() == "rdfs:domain") {
                ontology.set_domain(subject, object);
            } else if (relation.value() == "rdfs:range") {
                ontology.set_range(subject, object);
            } else {
                throw DataError("unknown ontology relation '" + relation.value() +
                                "'; expected rdf:type, rdfs:subClassOf, rdfs:subPropertyOf, "
                                "rdfs:domain or rdfs:range");
            }
            ++statements;
        } catch (const DataError& e) {
            line_error(path, line.number, e.what());
        }
    }
    ontology.validate();
    if (statement_count != nullptr) {
        *statement_count = statements;
    }
    return ontology;
}

Snapshot load_snapshot(const std::filesystem::path& triples_path,
                       const std::filesystem::path& ontology_path) {
    Snapshot snapshot;
    snapshot.graph = load_triples_file(triples_path);
    size_t statements = 0;
    snapshot.ontology = load_ontology_file(ontology_path, &statements);
    snapshot.stats.triple_count = snapshot.graph.triples().size();
    snapshot.stats.entity_count = snapshot.graph.entities().size();
    snapshot.stats.relation_count = snapshot.graph.relations().size();
    snapshot.stats.ontology_statement_count = statements;
    snapshot.stats.class_count = snapshot.ontology.classes().size();
    size_t typed = 0;
    for (const Iri& entity : snapshot.graph.entities()) {
        if (!snapshot.ontology.types_of(entity).empty()) {
            ++typed;
        }
    }
    snapshot.stats.typed_entity_count = typed;
    return snapshot;
}

} // namespace kgr
