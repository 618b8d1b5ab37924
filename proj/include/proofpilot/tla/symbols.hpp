#pragma once

#include <set>
#include <string>
#include <vector>

#include "proofpilot/tla/ast.hpp"

namespace proofpilot::tla {

namespace detail {

inline void push_unique(std::vector<std::string>& out, const std::string& name) {
    for (const auto& s : out)
        if (s == name) return;
    out.push_back(name);
}

inline void collect_symbols(const ExprPtr& e, std::vector<std::string>& out,
                            const std::set<std::string>* bound) {
    switch (e->kind) {
        case ExprKind::Ident:
            if (!is_builtin_symbol(e->text) && (!bound || !bound->count(e->text)))
                push_unique(out, e->text);
            return;
        case ExprKind::Number:
            return;
        case ExprKind::Apply:
            if (!is_builtin_symbol(e->text) && (!bound || !bound->count(e->text)))
                push_unique(out, e->text);
            for (const auto& a : e->children) collect_symbols(a, out, bound);
            return;
        case ExprKind::Quant: {
            collect_symbols(e->children[0], out, bound);  // domain
            if (bound) {
                std::set<std::string> inner(*bound);
                inner.insert(e->bound.begin(), e->bound.end());
                collect_symbols(e->children[1], out, &inner);
            } else {
                collect_symbols(e->children[1], out, nullptr);
            }
            return;
        }
        default:
            for (const auto& a : e->children) collect_symbols(a, out, bound);
            return;
    }
}

}  // namespace detail

// Every non-builtin identifier occurring in e, in first-occurrence order.
// Purely syntactic: quantifier-bound occurrences count, so the result is
// closed under subexpressions.
inline std::vector<std::string> referenced_symbols(const ExprPtr& e) {
    std::vector<std::string> out;
    detail::collect_symbols(e, out, nullptr);
    return out;
}

// Like referenced_symbols but quantifier-bound occurrences are skipped and an
// initial environment of bound names can be supplied (NEW declarations).
inline std::vector<std::string> free_symbols(const ExprPtr& e,
                                             const std::set<std::string>& bound = {}) {
    std::vector<std::string> out;
    detail::collect_symbols(e, out, &bound);
    return out;
}

// Free symbols of a whole claim statement, assumptions before the goal.
// NEW-declared variables are bound for every later item and the goal.
inline std::vector<std::string> claim_free_symbols(const ClaimStatement& c,
                                                   const std::set<std::string>& bound = {}) {
    std::vector<std::string> out;
    std::set<std::string> env(bound);
    if (c.is_assume_prove()) {
        for (const auto& item : c.assume_prove().assumptions) {
            if (const auto* d = std::get_if<NewDecl>(&item)) {
                detail::collect_symbols(d->domain, out, &env);
                env.insert(d->var);
            } else {
                detail::collect_symbols(std::get<ExprPtr>(item), out, &env);
            }
        }
        detail::collect_symbols(c.assume_prove().goal, out, &env);
    } else {
        detail::collect_symbols(c.plain(), out, &env);
    }
    return out;
}

}  // namespace proofpilot::tla
