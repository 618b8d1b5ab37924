#pragma once

#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "proofpilot/support/strings.hpp"
#include "proofpilot/tla/ast.hpp"
#include "proofpilot/tla/parser.hpp"
#include "proofpilot/tla/printer.hpp"
#include "proofpilot/tla/symbols.hpp"

namespace proofpilot::claims {

// ---------------------------------------------------------------------------
// Normalized sub-claims
// ---------------------------------------------------------------------------

class ClaimError : public std::runtime_error {
public:
    enum class Kind { InvalidIdentifier, UnboundVariable, EmptyDecomposition, RootUnproved };

    ClaimError(Kind kind, const std::string& detail)
        : std::runtime_error(message_for(kind, detail)), kind_(kind), detail_(detail) {}

    Kind kind() const { return kind_; }
    const std::string& detail() const { return detail_; }

private:
    static std::string message_for(Kind kind, const std::string& detail) {
        switch (kind) {
            case Kind::InvalidIdentifier:
                return "invalid TLA+ identifier: " + detail;
            case Kind::UnboundVariable:
                return "unbound variable: " + detail;
            case Kind::EmptyDecomposition:
                return "decomposition has no sub-claims";
            case Kind::RootUnproved:
                return "root claim is unproved: " + detail;
        }
        return detail;
    }

    Kind kind_;
    std::string detail_;
};

enum class Domain { Nat, Int };

inline std::string domain_name(Domain d) { return d == Domain::Nat ? "Nat" : "Int"; }

// NEW x \in Nat / NEW x \in Int
struct NewDecl {
    std::string var;
    Domain domain = Domain::Nat;
};

struct ExprAssumption {
    tla::ExprPtr expr;
};

// Names a context definition to cite; rendered into the BY clause of the
// verification step, never into the ASSUME list.
struct DefRef {
    std::string name;
};

using Assumption = std::variant<ExprAssumption, NewDecl, DefRef>;

struct NormalizedClaim {
    std::string name;
    std::vector<Assumption> assumptions;
    tla::ExprPtr hypothesis;
};

inline bool is_valid_identifier(const std::string& name) {
    if (name.empty()) return false;
    bool has_letter = false;
    for (size_t i = 0; i < name.size(); ++i) {
        char c = name[i];
        if (std::isalpha(static_cast<unsigned char>(c))) has_letter = true;
        bool ok = (i == 0) ? (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
                           : (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
        if (!ok) return false;
    }
    return has_letter && !tla::detail::reserved_words().count(name);
}

// Problems that make a claim unusable, reported as feedback text. A claim is
// self-contained when every free variable is introduced by a NEW declaration;
// operators must resolve in the surrounding context.
inline std::vector<std::string> validate_claim(const NormalizedClaim& c,
                                               const std::set<std::string>& context_names = {}) {
    std::vector<std::string> problems;
    if (!is_valid_identifier(c.name))
        problems.push_back("claim name '" + c.name + "' is not a valid TLA+ identifier");

    std::set<std::string> declared;
    for (const auto& a : c.assumptions) {
        if (const auto* d = std::get_if<NewDecl>(&a)) {
            if (!is_valid_identifier(d->var))
                problems.push_back("claim '" + c.name + "': NEW variable '" + d->var +
                                   "' is not a valid identifier");
            if (declared.count(d->var))
                problems.push_back("claim '" + c.name + "': variable '" + d->var +
                                   "' declared twice");
            declared.insert(d->var);
        } else if (const auto* r = std::get_if<DefRef>(&a)) {
            if (!context_names.count(r->name))
                problems.push_back("claim '" + c.name + "': definition reference '" + r->name +
                                   "' does not name a context definition");
        }
    }

    auto check_expr = [&](const tla::ExprPtr& e, const std::string& where) {
        if (!e) {
            problems.push_back("claim '" + c.name + "': missing " + where);
            return;
        }
        for (const auto& sym : tla::free_symbols(e, declared))
            if (!context_names.count(sym))
                problems.push_back("claim '" + c.name + "': unbound variable '" + sym + "' in " +
                                   where + " (add a NEW declaration or cite a context definition)");
    };
    for (const auto& a : c.assumptions)
        if (const auto* ea = std::get_if<ExprAssumption>(&a)) check_expr(ea->expr, "assumption");
    check_expr(c.hypothesis, "hypothesis");
    return problems;
}

// Converts a normalized claim into a THEOREM unit with an ASSUME-PROVE
// statement (or a plain statement when no assumptions remain after dropping
// definition references). The result always parses.
inline tla::Theorem render_assume_prove(const NormalizedClaim& c,
                                        const std::set<std::string>& context_names = {}) {
    if (!is_valid_identifier(c.name))
        throw ClaimError(ClaimError::Kind::InvalidIdentifier, c.name);

    std::set<std::string> declared;
    for (const auto& a : c.assumptions)
        if (const auto* d = std::get_if<NewDecl>(&a)) declared.insert(d->var);

    auto require_bound = [&](const tla::ExprPtr& e) {
        for (const auto& sym : tla::free_symbols(e, declared))
            if (!context_names.count(sym)) throw ClaimError(ClaimError::Kind::UnboundVariable, sym);
    };

    std::vector<tla::AssumeItem> items;
    for (const auto& a : c.assumptions) {
        if (const auto* d = std::get_if<NewDecl>(&a)) {
            items.push_back(tla::NewDecl{d->var, tla::make_ident(domain_name(d->domain))});
        } else if (const auto* ea = std::get_if<ExprAssumption>(&a)) {
            require_bound(ea->expr);
            items.push_back(ea->expr);
        }
        // DefRefs render into the verification BY clause, not the ASSUME list
    }
    require_bound(c.hypothesis);

    tla::Theorem t;
    t.name = c.name;
    if (items.empty())
        t.statement = tla::make_plain_claim(c.hypothesis);
    else
        t.statement = tla::make_assume_prove(std::move(items), c.hypothesis);
    return t;
}

// Definition names the claim explicitly cites.
inline std::vector<std::string> def_refs(const NormalizedClaim& c) {
    std::vector<std::string> out;
    for (const auto& a : c.assumptions)
        if (const auto* r = std::get_if<DefRef>(&a)) tla::detail::push_unique(out, r->name);
    return out;
}

// Sub-claim names must not collide with context symbols or each other;
// collisions get numeric suffixes (_1, _2, ...).
inline std::vector<NormalizedClaim> resolve_name_collisions(std::vector<NormalizedClaim> subs,
                                                            std::set<std::string> taken) {
    for (auto& c : subs) {
        std::string name = c.name;
        int suffix = 0;
        while (taken.count(name)) {
            ++suffix;
            name = c.name + "_" + std::to_string(suffix);
        }
        c.name = name;
        taken.insert(name);
    }
    return subs;
}

// ---------------------------------------------------------------------------
// Proof obligations
// ---------------------------------------------------------------------------

// A (context, goal) pair. Context carries imported modules, definitions, and
// named facts (theorems assumed provable or already proved).
struct ProofObligation {
    std::vector<std::string> imports;
    std::vector<tla::Unit> context;
    std::string goal_name;
    tla::ClaimStatement goal;
};

inline std::set<std::string> context_symbol_names(const ProofObligation& ob) {
    std::set<std::string> names;
    for (const auto& u : ob.context) {
        if (const auto* d = std::get_if<tla::Definition>(&u)) names.insert(d->name);
        if (const auto* t = std::get_if<tla::Theorem>(&u))
            if (t->name) names.insert(*t->name);
    }
    return names;
}

// Builds the obligation for a named theorem of a module: everything else in
// the module is context, proved theorems become citable facts.
inline ProofObligation obligation_for_theorem(const tla::TlaModule& m,
                                              const std::string& theorem_name) {
    const tla::Theorem* goal = tla::find_theorem(m, theorem_name);
    if (!goal) throw std::invalid_argument("no theorem named '" + theorem_name + "'");
    ProofObligation ob;
    ob.imports = m.extends;
    for (const auto& u : m.units) {
        if (const auto* t = std::get_if<tla::Theorem>(&u)) {
            if (t == goal) continue;
            if (t->name && t->proof) ob.context.push_back(u);  // a provable fact
            continue;
        }
        if (std::holds_alternative<tla::Comment>(u)) continue;
        ob.context.push_back(u);
    }
    ob.goal_name = theorem_name;
    ob.goal = goal->statement;
    return ob;
}

// The obligation establishing that sub-claims collectively imply the parent:
// the context gains each sub-claim as an assumed fact, the goal is the parent.
inline ProofObligation decomposition_obligation(const ProofObligation& parent,
                                                const std::vector<NormalizedClaim>& subs) {
    if (subs.empty()) throw ClaimError(ClaimError::Kind::EmptyDecomposition, parent.goal_name);
    ProofObligation ob = parent;
    auto names = context_symbol_names(parent);
    for (const auto& c : subs) {
        tla::Theorem t = render_assume_prove(c, names);
        t.proof = tla::omitted_proof();
        ob.context.push_back(std::move(t));
    }
    return ob;
}

// ---------------------------------------------------------------------------
// Proof trees
// ---------------------------------------------------------------------------

enum class Status { Proved, Unproved };

struct AutoProof {
    enum class Kind { Obvious, ByDef };
    Kind kind = Kind::Obvious;
    std::vector<std::string> facts;
    std::vector<std::string> defs;
};

inline bool auto_proof_well_formed(const AutoProof& p) {
    if (p.kind == AutoProof::Kind::Obvious) return p.facts.empty() && p.defs.empty();
    auto dup_free = [](const std::vector<std::string>& v) {
        std::set<std::string> seen(v.begin(), v.end());
        return seen.size() == v.size();
    };
    return (!p.facts.empty() || !p.defs.empty()) && dup_free(p.facts) && dup_free(p.defs);
}

inline tla::Proof to_tla_proof(const AutoProof& p) {
    if (p.kind == AutoProof::Kind::Obvious) return tla::obvious_proof();
    return tla::by_proof(p.facts, p.defs);
}

// One decomposition attempt, kept for reports and feedback loops.
struct AttemptRecord {
    int attempt = 0;
    std::vector<std::string> proposed;  // sub-claim names, empty on parse failure
    std::string verdict;  // accepted | rejected | parse_failure | falsified | timeout |
                          // duplicate | budget_exhausted | transport_error
    std::string feedback;
};

// A claim with its attached proof and verification verdicts. `status` is what
// the engine recorded; claim_status recomputes it from the verdicts.
struct ProofNode {
    enum class Form { Auto, BySubClaims, Opaque, None };

    std::string name;
    tla::ClaimStatement claim;
    Form form = Form::None;

    AutoProof auto_proof;  // Form::Auto
    bool auto_accepted = false;

    std::vector<ProofNode> children;  // Form::BySubClaims
    bool decomposition_verified = false;
    std::vector<std::string> by_defs;  // DEF names on the decomposition step

    std::string opaque_proof;  // Form::Opaque (direct generation output)
    bool opaque_accepted = false;

    Status status = Status::Unproved;
    std::vector<AttemptRecord> attempts;
};

// The recursive proved/unproved definition: a claim is proved iff its auto
// proof was accepted, or all sub-claims are proved and the prover confirmed
// they collectively establish it.
inline Status claim_status(const ProofNode& n) {
    switch (n.form) {
        case ProofNode::Form::Auto:
            return n.auto_accepted ? Status::Proved : Status::Unproved;
        case ProofNode::Form::Opaque:
            return n.opaque_accepted ? Status::Proved : Status::Unproved;
        case ProofNode::Form::BySubClaims: {
            if (!n.decomposition_verified || n.children.empty()) return Status::Unproved;
            for (const auto& c : n.children)
                if (claim_status(c) == Status::Unproved) return Status::Unproved;
            return Status::Proved;
        }
        case ProofNode::Form::None:
            return Status::Unproved;
    }
    return Status::Unproved;
}

inline const char* form_name(ProofNode::Form f) {
    switch (f) {
        case ProofNode::Form::Auto:
            return "auto";
        case ProofNode::Form::BySubClaims:
            return "by_sub_claims";
        case ProofNode::Form::Opaque:
            return "opaque";
        case ProofNode::Form::None:
            return "none";
    }
    return "none";
}

inline nlohmann::json proof_tree_to_json(const ProofNode& n) {
    nlohmann::json j;
    j["name"] = n.name;
    j["proof"] = form_name(n.form);
    j["status"] = n.status == Status::Proved ? "proved" : "unproved";
    if (n.form == ProofNode::Form::Auto)
        j["auto_proof"] = tla::render_proof(to_tla_proof(n.auto_proof));
    if (!n.attempts.empty()) {
        nlohmann::json attempts = nlohmann::json::array();
        for (const auto& a : n.attempts) {
            attempts.push_back({{"attempt", a.attempt},
                                {"proposed", a.proposed},
                                {"verdict", a.verdict},
                                {"feedback", a.feedback}});
        }
        j["attempts"] = std::move(attempts);
    }
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : n.children) children.push_back(proof_tree_to_json(c));
    j["children"] = std::move(children);
    return j;
}

// Structural fingerprint of a decomposition, used to skip re-verifying a
// decomposition the model already proposed in an earlier attempt.
inline std::string decomposition_fingerprint(const std::vector<NormalizedClaim>& subs) {
    std::string acc;
    for (const auto& c : subs) {
        acc += c.name;
        acc += '\x1f';
        for (const auto& a : c.assumptions) {
            if (const auto* d = std::get_if<NewDecl>(&a))
                acc += "NEW " + d->var + " \\in " + domain_name(d->domain);
            else if (const auto* ea = std::get_if<ExprAssumption>(&a))
                acc += tla::render_expr(ea->expr);
            else
                acc += "DEF " + std::get<DefRef>(a).name;
            acc += '\x1e';
        }
        acc += c.hypothesis ? tla::render_expr(c.hypothesis) : "";
        acc += '\x1d';
    }
    return support::fnv1a64_hex(acc);
}

}  // namespace proofpilot::claims
