#pragma once

#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

#include "proofpilot/claims/claims.hpp"
#include "proofpilot/tla/parser.hpp"

namespace proofpilot::llm {

// Outcome of parsing one decomposition response. On failure the per-claim
// reasons become the next attempt's feedback.
struct DecompositionParse {
    std::vector<claims::NormalizedClaim> claims;
    std::vector<std::string> errors;

    bool ok() const { return errors.empty() && !claims.empty(); }
    std::string error_text() const { return support::join(errors, "\n"); }
};

namespace detail {

// Models routinely emit "NEW x \in Nat" with a lone backslash, which is not
// valid JSON. Double every backslash that does not begin a JSON escape.
inline std::string repair_json_backslashes(const std::string& text) {
    static const std::string valid = "\"\\/bfnrtu";
    std::string out;
    out.reserve(text.size());
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\\') {
            char next = i + 1 < text.size() ? text[i + 1] : '\0';
            if (valid.find(next) == std::string::npos) {
                out += "\\\\";
            } else {
                out += text[i];
                out += next;
                ++i;
            }
            continue;
        }
        out += text[i];
    }
    return out;
}

// Candidate JSON slices: fenced code blocks first, then any bracket-balanced
// array in the raw text.
inline std::vector<std::string> json_candidates(const std::string& text) {
    std::vector<std::string> candidates;
    size_t pos = 0;
    while ((pos = text.find("```", pos)) != std::string::npos) {
        size_t body_start = text.find('\n', pos);
        if (body_start == std::string::npos) break;
        size_t close = text.find("```", body_start);
        if (close == std::string::npos) break;
        candidates.push_back(text.substr(body_start + 1, close - body_start - 1));
        pos = close + 3;
    }
    size_t open = text.find('[');
    if (open != std::string::npos) {
        int depth = 0;
        bool in_string = false;
        for (size_t i = open; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (c == '\\')
                    ++i;
                else if (c == '"')
                    in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            if (c == '[') ++depth;
            if (c == ']' && --depth == 0) {
                candidates.push_back(text.substr(open, i - open + 1));
                break;
            }
        }
    }
    return candidates;
}

inline bool parse_assumption(const std::string& raw, const std::set<std::string>& context_names,
                             claims::Assumption& out, std::string& error) {
    std::string text = support::trim(raw);
    if (text.empty()) {
        error = "empty assumption";
        return false;
    }
    try {
        if (support::starts_with(text, "NEW ")) {
            tla::AssumeItem item = tla::parse_assume_item(text);
            const auto* d = std::get_if<tla::NewDecl>(&item);
            if (!d) {
                error = "malformed NEW declaration: '" + text + "'";
                return false;
            }
            if (d->domain->kind != tla::ExprKind::Ident ||
                (d->domain->text != "Nat" && d->domain->text != "Int")) {
                error = "NEW domain must be Nat or Int in '" + text + "'";
                return false;
            }
            out = claims::NewDecl{d->var,
                                  d->domain->text == "Nat" ? claims::Domain::Nat
                                                           : claims::Domain::Int};
            return true;
        }
        if (claims::is_valid_identifier(text) && context_names.count(text)) {
            out = claims::DefRef{text};
            return true;
        }
        out = claims::ExprAssumption{tla::parse_expression(text)};
        return true;
    } catch (const tla::SyntaxError& e) {
        error = std::string("cannot parse assumption '") + text + "': " + e.what();
        return false;
    }
}

}  // namespace detail

// Extracts the structured sub-claim records from a model response and
// validates each against the normalized-claim invariants. Claims that come
// back never violate those invariants; everything else is an error with a
// reason.
inline DecompositionParse parse_decomposition_response(
    const std::string& response, const std::set<std::string>& context_names = {}) {
    DecompositionParse result;

    nlohmann::json records;
    bool parsed = false;
    for (const auto& candidate : detail::json_candidates(response)) {
        try {
            nlohmann::json j = nlohmann::json::parse(detail::repair_json_backslashes(candidate));
            if (j.is_array()) {
                records = std::move(j);
                parsed = true;
                break;
            }
        } catch (const nlohmann::json::exception&) {
            continue;
        }
    }
    if (!parsed) {
        result.errors.push_back(
            "no claims found: the response contains no JSON array of "
            "{name, assumptions, hypothesis} records");
        return result;
    }
    if (records.empty()) {
        result.errors.push_back("no claims found: the JSON array is empty");
        return result;
    }

    std::set<std::string> names_seen;
    for (const auto& rec : records) {
        if (!rec.is_object() || !rec.contains("name") || !rec.contains("assumptions") ||
            !rec.contains("hypothesis") || !rec["name"].is_string() ||
            !rec["assumptions"].is_array() || !rec["hypothesis"].is_string()) {
            result.errors.push_back(
                "record is not an object with string 'name', array 'assumptions', and string "
                "'hypothesis': " +
                rec.dump());
            continue;
        }
        claims::NormalizedClaim c;
        c.name = rec["name"].get<std::string>();
        if (names_seen.count(c.name))
            result.errors.push_back("duplicate sub-claim name '" + c.name + "'");
        names_seen.insert(c.name);

        bool record_ok = true;
        for (const auto& a : rec["assumptions"]) {
            if (!a.is_string()) {
                result.errors.push_back("claim '" + c.name + "': assumption is not a string");
                record_ok = false;
                continue;
            }
            claims::Assumption assumption;
            std::string error;
            if (!detail::parse_assumption(a.get<std::string>(), context_names, assumption, error)) {
                result.errors.push_back("claim '" + c.name + "': " + error);
                record_ok = false;
                continue;
            }
            c.assumptions.push_back(std::move(assumption));
        }
        try {
            c.hypothesis = tla::parse_expression(rec["hypothesis"].get<std::string>());
        } catch (const tla::SyntaxError& e) {
            result.errors.push_back("claim '" + c.name + "': cannot parse hypothesis '" +
                                    rec["hypothesis"].get<std::string>() + "': " + e.what());
            record_ok = false;
        }
        if (!record_ok) continue;

        auto problems = claims::validate_claim(c, context_names);
        for (const auto& problem : problems) result.errors.push_back(problem);
        if (problems.empty()) result.claims.push_back(std::move(c));
    }

    if (!result.errors.empty()) result.claims.clear();
    return result;
}

}  // namespace proofpilot::llm
