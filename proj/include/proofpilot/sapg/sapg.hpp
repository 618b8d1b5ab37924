#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "proofpilot/claims/claims.hpp"
#include "proofpilot/tla/symbols.hpp"

namespace proofpilot::sapg {

class UnknownSymbol : public std::runtime_error {
public:
    explicit UnknownSymbol(const std::string& name)
        : std::runtime_error("goal references '" + name + "', which is absent from the context"),
          name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

// An auto proof candidate produced by syntax analysis alone.
struct AutoProofPlan {
    claims::AutoProof proof;
    std::vector<std::string> unfolded;  // definition names chosen
    std::vector<std::string> cited;     // fact names chosen
};

namespace detail {

inline void push_seed(std::vector<std::string>& seed, const std::string& sym) {
    for (const auto& s : seed)
        if (s == sym) return;
    seed.push_back(sym);
}

struct ContextIndex {
    std::map<std::string, const tla::Definition*> definitions;
    std::vector<std::string> fact_names;  // named theorems, context order
    std::set<std::string> declared;       // every name resolvable in context
};

inline ContextIndex index_context(const claims::ProofObligation& ob) {
    ContextIndex idx;
    for (const auto& u : ob.context) {
        if (const auto* d = std::get_if<tla::Definition>(&u)) {
            idx.definitions.emplace(d->name, d);
            idx.declared.insert(d->name);
        } else if (const auto* t = std::get_if<tla::Theorem>(&u)) {
            if (t->name) {
                idx.fact_names.push_back(*t->name);
                idx.declared.insert(*t->name);
            }
        }
    }
    return idx;
}

// Transitive closure of context definitions reachable from the seed symbols,
// in first-occurrence order: a definition whose body mentions another
// definition pulls it in. `strict` raises UnknownSymbol for unresolvable
// identifiers.
inline std::vector<std::string> unfold_closure(const ContextIndex& idx,
                                               std::vector<std::string> queue, bool strict) {
    std::vector<std::string> result;
    std::set<std::string> seen;
    for (size_t i = 0; i < queue.size(); ++i) {
        const std::string& sym = queue[i];
        if (seen.count(sym)) continue;
        seen.insert(sym);
        auto it = idx.definitions.find(sym);
        if (it == idx.definitions.end()) {
            if (strict && !idx.declared.count(sym)) throw UnknownSymbol(sym);
            continue;
        }
        result.push_back(sym);
        std::set<std::string> params(it->second->params.begin(), it->second->params.end());
        for (const auto& inner : tla::free_symbols(it->second->body, params))
            queue.push_back(inner);
    }
    return result;
}

}  // namespace detail

// Definitions that must be explicitly unfolded for the goal to be checked.
inline std::vector<std::string> definitions_to_unfold(const claims::ProofObligation& ob) {
    return detail::unfold_closure(detail::index_context(ob), tla::claim_free_symbols(ob.goal),
                                  /*strict=*/true);
}

inline std::vector<std::string> definitions_to_unfold(const claims::ProofObligation& ob,
                                                      const tla::ClaimStatement& goal) {
    return detail::unfold_closure(detail::index_context(ob), tla::claim_free_symbols(goal),
                                  /*strict=*/true);
}

// DEF names for a decomposition step: definitions reachable from the parent
// goal or any sub-claim statement, parent first.
inline std::vector<std::string> decomposition_defs(
    const claims::ProofObligation& ob, const std::vector<tla::Theorem>& sub_theorems) {
    std::vector<std::string> seed = tla::claim_free_symbols(ob.goal);
    for (const auto& t : sub_theorems)
        for (const auto& sym : tla::claim_free_symbols(t.statement))
            detail::push_seed(seed, sym);
    return detail::unfold_closure(detail::index_context(ob), std::move(seed), /*strict=*/false);
}

// The §3.5 heuristic: cite every named fact in scope, unfold the definitions
// reachable from the goal; with nothing to cite or unfold, OBVIOUS. No LLM is
// involved anywhere on this path.
inline AutoProofPlan generate_auto_proof(const claims::ProofObligation& ob) {
    auto idx = detail::index_context(ob);
    AutoProofPlan plan;
    plan.unfolded = detail::unfold_closure(idx, tla::claim_free_symbols(ob.goal),
                                           /*strict=*/false);
    plan.cited = idx.fact_names;
    if (plan.unfolded.empty() && plan.cited.empty()) {
        plan.proof.kind = claims::AutoProof::Kind::Obvious;
    } else {
        plan.proof.kind = claims::AutoProof::Kind::ByDef;
        plan.proof.facts = plan.cited;
        plan.proof.defs = plan.unfolded;
    }
    return plan;
}

}  // namespace proofpilot::sapg
