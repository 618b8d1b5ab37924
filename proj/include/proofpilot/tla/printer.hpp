#pragma once

#include <string>

#include "proofpilot/support/strings.hpp"
#include "proofpilot/tla/ast.hpp"
#include "proofpilot/tla/parser.hpp"

namespace proofpilot::tla {

namespace detail {

inline int expr_prec(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Binary:
            return binary_prec(e->text);
        case ExprKind::Unary:
            return e->text == "~" ? 35 : 68;
        case ExprKind::Quant:
            return 5;
        default:
            return 100;
    }
}

inline bool needs_parens(const ExprPtr& child, int parent_prec, const std::string& parent_op,
                         bool right_side) {
    int cp = expr_prec(child);
    if (cp > parent_prec) return false;
    if (cp < parent_prec) return true;
    // equal precedence
    if (parent_prec == 40) return true;  // comparisons are non-associative
    bool same_op = child->kind == ExprKind::Binary && child->text == parent_op;
    if (right_assoc(parent_prec)) return !right_side || !same_op;
    return right_side || !same_op;
}

}  // namespace detail

inline std::string render_expr(const ExprPtr& e) {
    switch (e->kind) {
        case ExprKind::Ident:
        case ExprKind::Number:
            return e->text;
        case ExprKind::Apply: {
            std::vector<std::string> args;
            for (const auto& a : e->children) args.push_back(render_expr(a));
            return e->text + "(" + support::join(args, ", ") + ")";
        }
        case ExprKind::SetEnum: {
            std::vector<std::string> elems;
            for (const auto& a : e->children) elems.push_back(render_expr(a));
            return "{" + support::join(elems, ", ") + "}";
        }
        case ExprKind::Unary: {
            const auto& operand = e->children[0];
            bool wrap = operand->kind == ExprKind::Binary || operand->kind == ExprKind::Quant ||
                        operand->kind == ExprKind::Unary;
            std::string inner = render_expr(operand);
            return e->text + (wrap ? "(" + inner + ")" : inner);
        }
        case ExprKind::Binary: {
            int prec = detail::binary_prec(e->text);
            auto side = [&](const ExprPtr& child, bool right) {
                std::string s = render_expr(child);
                return detail::needs_parens(child, prec, e->text, right) ? "(" + s + ")" : s;
            };
            return side(e->children[0], false) + " " + e->text + " " + side(e->children[1], true);
        }
        case ExprKind::Quant: {
            const auto& domain = e->children[0];
            const auto& body = e->children[1];
            std::string d = render_expr(domain);
            if (detail::expr_prec(domain) < 50) d = "(" + d + ")";
            return e->text + " " + support::join(e->bound, ", ") + " \\in " + d + " : " +
                   render_expr(body);
        }
    }
    return "";
}

inline std::string render_assume_item(const AssumeItem& item) {
    if (const auto* d = std::get_if<NewDecl>(&item)) {
        std::string dom = render_expr(d->domain);
        if (detail::expr_prec(d->domain) < 50) dom = "(" + dom + ")";
        return "NEW " + d->var + " \\in " + dom;
    }
    return render_expr(std::get<ExprPtr>(item));
}

// Single-line form, used in prompts and BY-step assembly.
inline std::string render_claim(const ClaimStatement& c) {
    if (!c.is_assume_prove()) return render_expr(c.plain());
    const auto& ap = c.assume_prove();
    std::vector<std::string> items;
    for (const auto& a : ap.assumptions) items.push_back(render_assume_item(a));
    return "ASSUME " + support::join(items, ", ") + " PROVE " + render_expr(ap.goal);
}

inline std::string render_proof(const Proof& p) {
    switch (p.kind) {
        case ProofKind::Obvious:
            return "OBVIOUS";
        case ProofKind::Omitted:
            return "OMITTED";
        case ProofKind::Opaque:
            return p.opaque_text;
        case ProofKind::By: {
            std::string out = "BY";
            if (!p.facts.empty()) out += " " + support::join(p.facts, ", ");
            if (!p.defs.empty()) out += " DEF " + support::join(p.defs, ", ");
            return out;
        }
    }
    return "";
}

inline std::string render_theorem(const Theorem& t) {
    std::string out = "THEOREM";
    if (t.name) out += " " + *t.name + " ==";
    if (t.statement.is_assume_prove()) {
        const auto& ap = t.statement.assume_prove();
        out += "\n  ASSUME ";
        std::vector<std::string> items;
        for (const auto& a : ap.assumptions) items.push_back(render_assume_item(a));
        out += support::join(items, ",\n         ");
        out += "\n  PROVE " + render_expr(ap.goal);
    } else {
        out += " " + render_expr(t.statement.plain());
    }
    if (t.proof) out += "\n" + render_proof(*t.proof);
    return out;
}

inline std::string render_unit(const Unit& u) {
    if (const auto* d = std::get_if<Definition>(&u)) {
        std::string out = d->name;
        if (!d->params.empty()) out += "(" + support::join(d->params, ", ") + ")";
        out += " == " + render_expr(d->body);
        return out;
    }
    if (const auto* t = std::get_if<Theorem>(&u)) return render_theorem(*t);
    return std::get<Comment>(u).text;
}

// Emits a parseable module; parse_module(render_module(m)) is structurally
// equal to m. Header and '====' terminator are always present.
inline std::string render_module(const TlaModule& m) {
    std::string out = "---- MODULE " + m.name + " ----\n";
    if (!m.extends.empty()) out += "EXTENDS " + support::join(m.extends, ", ") + "\n";
    for (const auto& u : m.units) {
        out += "\n";
        out += render_unit(u);
        out += "\n";
    }
    out += "====\n";
    return out;
}

}  // namespace proofpilot::tla
