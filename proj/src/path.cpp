#include "kgr/path.hpp"

#include <algorithm>

#include "kgr/errors.hpp"
#include "kgr/kg.hpp"
#include "kgr/util.hpp"

namespace kgr {

namespace {

bool relation_slot_ok(const Iri& iri) {
    // Relation slots are checked by namespace, not capitalization, so a model
    // that emits a class name like dbo:Location still parses; the ontology
    // check decides whether the hop makes sense.
    return iri.in_ontology_namespace();
}

bool path_token_prefix_ok(const Iri& iri) {
    return iri.kind() == IriKind::Entity || iri.in_ontology_namespace();
}

bool is_prefix_head(std::string_view rest) {
    return rest.starts_with("dbr:") || rest.starts_with("dbo:") || rest.starts_with("dbp:");
}

ParseOutcome classify_tokens(const std::vector<std::string>& tokens) {
    if (tokens.empty()) {
        return ParseOutcome::ill_formatted(ReasonCode::EmptyInput, "no path tokens");
    }
    std::vector<Iri> elements;
    elements.reserve(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) {
        auto iri = Iri::try_parse(tokens[i]);
        if (!iri || !path_token_prefix_ok(*iri)) {
            return ParseOutcome::ill_formatted(
                ReasonCode::BadPrefix,
                "BadPrefix at position " + std::to_string(i) + ": '" + tokens[i] + "'");
        }
        bool entity_slot = i % 2 == 0;
        if (entity_slot && iri->kind() != IriKind::Entity) {
            if (i == 0) {
                return ParseOutcome::ill_formatted(
                    ReasonCode::BadPrefix,
                    "BadPrefix at position 0: path must start with a dbr: entity, got '" +
                        tokens[i] + "'");
            }
            return ParseOutcome::ill_formatted(
                ReasonCode::NotAlternating,
                "NotAlternating at position " + std::to_string(i) + ": expected entity, got '" +
                    tokens[i] + "'");
        }
        if (!entity_slot && !relation_slot_ok(*iri)) {
            return ParseOutcome::ill_formatted(
                ReasonCode::NotAlternating,
                "NotAlternating at position " + std::to_string(i) + ": expected relation, got '" +
                    tokens[i] + "'");
        }
        elements.push_back(std::move(*iri));
    }
    if (elements.size() % 2 == 0) {
        return ParseOutcome::ill_formatted(
            ReasonCode::EvenLength,
            "EvenLength: " + std::to_string(elements.size()) + " tokens, path must end with an entity");
    }
    return ParseOutcome::well_formed(KgPath::make(std::move(elements)));
}

std::vector<std::string> split_separated_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        auto t = util::trim(current);
        if (!t.empty()) {
            tokens.emplace_back(t);
        }
        current.clear();
    };
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == ',' || c == '-') {
            bool ws_before = i > 0 && util::is_space(text[i - 1]);
            bool ws_after = i + 1 < text.size() && util::is_space(text[i + 1]);
            bool at_end = i + 1 == text.size();
            bool prefix_next = is_prefix_head(text.substr(i + 1));
            if (ws_before || ws_after || at_end || prefix_next) {
                flush();
                continue;
            }
        }
        current.push_back(c);
    }
    flush();
    return tokens;
}

// ---- free-text scanning -------------------------------------------------

bool scan_stop_char(char c) {
    switch (c) {
    case '"': case '`': case '<': case '>': case '|': case '\\':
    case '[': case ']': case '{': case '}': case ';':
        return true;
    default:
        return util::is_space(c);
    }
}

bool token_can_start_at(std::string_view text, size_t pos) {
    if (!is_prefix_head(text.substr(pos))) {
        return false;
    }
    if (pos == 0) {
        return true;
    }
    char prev = text[pos - 1];
    return !(std::isalnum(static_cast<unsigned char>(prev)) || prev == '_' || prev == ':');
}

struct ScannedToken {
    std::string value;
    size_t end;  // position just past the consumed characters
};

ScannedToken read_token(std::string_view text, size_t start) {
    size_t i = start;
    while (i < text.size()) {
        char c = text[i];
        if (scan_stop_char(c)) {
            break;
        }
        if (c == ',' || c == '-') {
            bool ws_after = i + 1 == text.size() || util::is_space(text[i + 1]);
            bool prefix_next = i + 1 < text.size() && is_prefix_head(text.substr(i + 1));
            if (ws_after || prefix_next || (i + 1 < text.size() && scan_stop_char(text[i + 1]))) {
                break;
            }
        }
        ++i;
    }
    std::string value(text.substr(start, i - start));
    bool stripped = true;
    while (stripped && !value.empty()) {
        stripped = false;
        char back = value.back();
        if (back == '.' || back == '!' || back == '?' || back == ':' || back == '\'') {
            value.pop_back();
            stripped = true;
        } else if (back == ')') {
            // Only shed a closer that has no opener in the token, so
            // dbr:Moneyball_(film) keeps its qualifier.
            auto opens = std::count(value.begin(), value.end(), '(');
            auto closes = std::count(value.begin(), value.end(), ')');
            if (closes > opens) {
                value.pop_back();
                stripped = true;
            }
        }
    }
    return {std::move(value), i};
}

size_t skip_ws(std::string_view text, size_t pos) {
    while (pos < text.size() && util::is_space(text[pos])) ++pos;
    return pos;
}

} // namespace

KgPath KgPath::make(std::vector<Iri> elements) {
    if (elements.empty()) {
        throw DataError("path must contain at least one element");
    }
    if (elements.size() % 2 == 0) {
        throw DataError("path must have odd length, got " + std::to_string(elements.size()));
    }
    for (size_t i = 0; i < elements.size(); ++i) {
        bool entity_slot = i % 2 == 0;
        if (entity_slot && elements[i].kind() != IriKind::Entity) {
            throw DataError("path element " + std::to_string(i) + " must be an entity: '" +
                            elements[i].value() + "'");
        }
        if (!entity_slot && !elements[i].in_ontology_namespace()) {
            throw DataError("path element " + std::to_string(i) + " must be a dbo:/dbp: relation: '" +
                            elements[i].value() + "'");
        }
    }
    KgPath path;
    path.elements_ = std::move(elements);
    return path;
}

Triple KgPath::hop(size_t i) const {
    if (i >= hop_count()) {
        throw DataError("hop index out of range: " + std::to_string(i));
    }
    return Triple{elements_[2 * i], elements_[2 * i + 1], elements_[2 * i + 2]};
}

std::string render_path(const KgPath& path) {
    std::string out;
    for (size_t i = 0; i < path.elements().size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += path.elements()[i].value();
    }
    return out;
}

std::string_view to_string(ReasonCode reason) {
    switch (reason) {
    case ReasonCode::BadPrefix: return "BadPrefix";
    case ReasonCode::NotAlternating: return "NotAlternating";
    case ReasonCode::EvenLength: return "EvenLength";
    case ReasonCode::EmptyInput: return "EmptyInput";
    }
    return "?";
}

ParseOutcome ParseOutcome::well_formed(KgPath path) {
    ParseOutcome out;
    out.status = Status::WellFormed;
    out.path = std::move(path);
    return out;
}

ParseOutcome ParseOutcome::ill_formatted(ReasonCode reason, std::string detail) {
    ParseOutcome out;
    out.status = Status::IllFormatted;
    out.reason = reason;
    out.detail = std::move(detail);
    return out;
}

ParseOutcome ParseOutcome::multiple_paths(int count) {
    ParseOutcome out;
    out.status = Status::MultiplePaths;
    out.candidate_count = count;
    out.detail = std::to_string(count) + " candidate paths";
    return out;
}

ParseOutcome parse_path(std::string_view text) {
    return classify_tokens(split_separated_tokens(text));
}

std::vector<ParseOutcome> extract_paths(std::string_view text) {
    std::vector<ParseOutcome> outcomes;
    size_t i = 0;
    while (i < text.size()) {
        if (!token_can_start_at(text, i)) {
            ++i;
            continue;
        }
        std::vector<std::string> tokens;
        ScannedToken tok = read_token(text, i);
        size_t pos = tok.end;
        if (!tok.value.empty()) {
            tokens.push_back(std::move(tok.value));
        }
        while (!tokens.empty()) {
            size_t k = skip_ws(text, pos);
            if (k >= text.size() || (text[k] != ',' && text[k] != '-')) {
                break;
            }
            size_t k2 = skip_ws(text, k + 1);
            if (k2 >= text.size() || !token_can_start_at(text, k2)) {
                break;
            }
            ScannedToken next = read_token(text, k2);
            if (next.value.empty()) {
                break;
            }
            tokens.push_back(std::move(next.value));
            pos = next.end;
        }
        if (!tokens.empty()) {
            outcomes.push_back(classify_tokens(tokens));
        }
        i = std::max(pos, i + 1);
    }
    return outcomes;
}

std::vector<Iri> scan_iri_mentions(std::string_view text) {
    std::vector<Iri> mentions;
    size_t i = 0;
    while (i < text.size()) {
        if (!token_can_start_at(text, i)) {
            ++i;
            continue;
        }
        ScannedToken tok = read_token(text, i);
        if (auto iri = Iri::try_parse(tok.value); iri && path_token_prefix_ok(*iri)) {
            mentions.push_back(std::move(*iri));
        }
        i = std::max(tok.end, i + 1);
    }
    return mentions;
}

GenerationJudgment judge_generation(const std::vector<ParseOutcome>& outcomes) {
    GenerationJudgment judgment;
    std::vector<const ParseOutcome*> answers;
    int mention_count = 0;
    int broken_count = 0;
    for (const auto& outcome : outcomes) {
        if (outcome.well_formed_path()) {
            if (outcome.path->hop_count() >= 1) {
                answers.push_back(&outcome);
            } else {
                ++mention_count;
            }
        } else {
            ++broken_count;
        }
    }
    if (answers.empty()) {
        judgment.ill_formatted = true;
        if (outcomes.empty()) {
            judgment.reason = "no path candidates in output";
        } else if (broken_count > 0) {
            judgment.reason = "no well-formed path among " + std::to_string(outcomes.size()) +
                              " candidates";
            for (const auto& outcome : outcomes) {
                if (!outcome.well_formed_path() && !outcome.detail.empty()) {
                    judgment.reason += "; " + outcome.detail;
                    break;
                }
            }
        } else {
            judgment.reason = "only entity mentions, no multi-hop path";
        }
        return judgment;
    }
    if (answers.size() > 1) {
        judgment.ill_formatted = true;
        judgment.reason = "multiple paths: " + std::to_string(answers.size()) +
                          " well-formed candidates in one generation";
        return judgment;
    }
    judgment.ill_formatted = false;
    judgment.answer = *answers.front()->path;
    if (broken_count > 0) {
        judgment.warnings.push_back("ignored " + std::to_string(broken_count) +
                                    " malformed candidate span(s)");
    }
    if (mention_count > 0) {
        judgment.warnings.push_back("ignored " + std::to_string(mention_count) +
                                    " bare entity mention(s)");
    }
    return judgment;
}

GenerationJudgment judge_generation_text(std::string_view text) {
    return judge_generation(extract_paths(text));
}

} // namespace kgr
