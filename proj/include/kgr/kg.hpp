#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgr/iri.hpp"
#include "kgr/path.hpp"

namespace kgr {

struct Triple {
    Iri head;
    Iri relation;
    Iri tail;

    friend bool operator==(const Triple&, const Triple&) = default;
    friend std::strong_ordering operator<=>(const Triple& a, const Triple& b) {
        if (auto c = a.head <=> b.head; c != 0) return c;
        if (auto c = a.relation <=> b.relation; c != 0) return c;
        return a.tail <=> b.tail;
    }
};

// Strict shape for stored facts: dbr: head/tail, lowercase dbo:/dbp: relation.
void validate_fact_triple(const Triple& triple);

struct Edge {
    Iri relation;
    Iri neighbor;
    bool forward;  // true when the stored triple reads (owner, relation, neighbor)

    friend bool operator==(const Edge&, const Edge&) = default;
    friend std::strong_ordering operator<=>(const Edge& a, const Edge& b) {
        if (auto c = a.relation <=> b.relation; c != 0) return c;
        if (auto c = a.neighbor <=> b.neighbor; c != 0) return c;
        return (a.forward ? 0 : 1) <=> (b.forward ? 0 : 1);
    }
};

// In-memory fact store. Facts are directed triples; traversal treats every
// edge as bidirectional because a reasoning path may walk a fact either way.
// All iteration surfaces are sorted so downstream output never depends on
// hash ordering.
class KnowledgeGraph {
public:
    void add(const Triple& triple);

    bool has_triple(const Triple& triple) const;
    std::set<Iri> relations_between(const Iri& head, const Iri& tail) const;

    bool has_entity(const Iri& entity) const;
    const std::set<Triple>& triples() const { return triples_; }
    const std::set<Iri>& entities() const { return entities_; }
    const std::set<Iri>& relations() const { return relations_; }

    const std::vector<Edge>& neighbors(const Iri& entity) const;

    // Minimum-hop path over the undirected view. Ties are broken by the
    // lexicographically least (relation, neighbor) pair at every step, so the
    // result is a pure function of the graph content. Unknown endpoints are a
    // DataError; nullopt means the endpoints are disconnected.
    std::optional<KgPath> shortest_path(const Iri& from, const Iri& to) const;

private:
    std::set<Triple> triples_;
    std::set<Iri> entities_;
    std::set<Iri> relations_;
    std::map<std::pair<Iri, Iri>, std::set<Iri>> by_pair_;
    std::map<Iri, std::vector<Edge>> adjacency_;
};

// Class hierarchy, property hierarchy and domain/range/type assertions.
// Referencing a class or relation from any statement declares it.
class Ontology {
public:
    void declare_class(const Iri& cls);
    void declare_relation(const Iri& relation);
    void add_subclass(const Iri& cls, const Iri& super);
    void add_subproperty(const Iri& relation, const Iri& super);
    void set_domain(const Iri& relation, const Iri& cls);
    void set_range(const Iri& relation, const Iri& cls);
    void add_type(const Iri& entity, const Iri& cls);

    bool is_declared_class(const Iri& cls) const;
    bool is_declared_relation(const Iri& relation) const;

    std::optional<Iri> domain_of(const Iri& relation) const;
    std::optional<Iri> range_of(const Iri& relation) const;
    const std::set<Iri>& types_of(const Iri& entity) const;
    const std::set<Iri>& direct_superclasses(const Iri& cls) const;
    const std::set<Iri>& direct_superproperties(const Iri& relation) const;

    // Reflexive-transitive subclass test. Both classes must be declared.
    bool is_subclass_or_equal(const Iri& cls, const Iri& ancestor) const;

    // True when one relation reaches the other through rdfs:subPropertyOf
    // (either direction) or both share a direct superproperty.
    bool relations_similar(const Iri& a, const Iri& b) const;

    // True when the declared type sets intersect.
    bool entities_similar(const Iri& a, const Iri& b) const;

    const std::set<Iri>& classes() const { return classes_; }

    // Rejects cycles in the subclass and subproperty hierarchies.
    void validate() const;

private:
    std::set<Iri> classes_;
    std::set<Iri> relations_;
    std::map<Iri, std::set<Iri>> subclass_of_;
    std::map<Iri, std::set<Iri>> subproperty_of_;
    std::map<Iri, Iri> domain_of_;
    std::map<Iri, Iri> range_of_;
    std::map<Iri, std::set<Iri>> types_of_;
};

struct LoadStats {
    size_t triple_count = 0;
    size_t entity_count = 0;
    size_t relation_count = 0;
    size_t ontology_statement_count = 0;
    size_t class_count = 0;
    size_t typed_entity_count = 0;
};

struct Snapshot {
    KnowledgeGraph graph;
    Ontology ontology;
    LoadStats stats;
};

// Line formats: three whitespace-separated prefixed IRIs per line, blank
// lines and full-line # comments ignored. The ontology file uses the
// reserved relations rdf:type, rdfs:subClassOf, rdfs:subPropertyOf,
// rdfs:domain and rdfs:range; anything else there is an error, as is a
// reserved relation inside the triples file. Errors carry the line number.
Snapshot load_snapshot(const std::filesystem::path& triples_path,
                       const std::filesystem::path& ontology_path);

KnowledgeGraph load_triples_file(const std::filesystem::path& path);
Ontology load_ontology_file(const std::filesystem::path& path, size_t* statement_count = nullptr);

} // namespace kgr
