#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgr/iri.hpp"

namespace kgr {

struct Triple;

// A reasoning path is an odd-length alternating sequence
//   entity, relation, entity, relation, ..., entity
// where entity slots hold dbr: IRIs and relation slots hold dbo:/dbp: IRIs.
// A single entity is the degenerate zero-hop path.
class KgPath {
public:
    KgPath() = default;

    // Validates the alternation invariant; throws DataError on violation.
    static KgPath make(std::vector<Iri> elements);

    const std::vector<Iri>& elements() const { return elements_; }
    size_t length() const { return elements_.size(); }
    size_t hop_count() const { return elements_.empty() ? 0 : (elements_.size() - 1) / 2; }

    const Iri& source() const { return elements_.front(); }
    const Iri& target() const { return elements_.back(); }

    // The i-th hop as a (head, relation, tail) triple in written orientation.
    Triple hop(size_t i) const;

    friend bool operator==(const KgPath& a, const KgPath& b) {
        return a.elements_ == b.elements_;
    }

private:
    std::vector<Iri> elements_;
};

// Canonical surface form: elements joined by ", ".
std::string render_path(const KgPath& path);

enum class ReasonCode { BadPrefix, NotAlternating, EvenLength, EmptyInput };

std::string_view to_string(ReasonCode reason);

struct ParseOutcome {
    enum class Status { WellFormed, IllFormatted, MultiplePaths };

    Status status = Status::IllFormatted;
    std::optional<KgPath> path;          // set iff WellFormed
    std::optional<ReasonCode> reason;    // set iff IllFormatted
    std::string detail;                  // human-readable location of the fault
    int candidate_count = 0;             // set iff MultiplePaths

    static ParseOutcome well_formed(KgPath path);
    static ParseOutcome ill_formatted(ReasonCode reason, std::string detail);
    static ParseOutcome multiple_paths(int count);

    bool well_formed_path() const { return status == Status::WellFormed; }
};

// Strict grammar over one candidate string. Tokens are split on the
// separators ',' and '-'; a ',' or '-' only separates when it touches
// whitespace or sits directly before a dbr:/dbo:/dbp: prefix, so names like
// dbr:Spider-Man and dbr:Reading,_Berkshire survive intact.
ParseOutcome parse_path(std::string_view text);

// Scans free-running model output for candidate path spans (IRI tokens
// chained by separators) and classifies each span with the strict grammar.
// Trailing sentence punctuation on a token is dropped.
std::vector<ParseOutcome> extract_paths(std::string_view text);

// Every dbr:/dbo:/dbp: mention in the text, in order of appearance.
std::vector<Iri> scan_iri_mentions(std::string_view text);

// Collapses the candidate spans of one generation into the judgment the
// scorer needs: exactly one well-formed span with at least one hop counts as
// the answer; zero-hop spans are treated as entity mentions, not answers.
struct GenerationJudgment {
    bool ill_formatted = true;
    std::optional<KgPath> answer;
    std::string reason;
    std::vector<std::string> warnings;
};

GenerationJudgment judge_generation(const std::vector<ParseOutcome>& outcomes);
GenerationJudgment judge_generation_text(std::string_view text);

} // namespace kgr
