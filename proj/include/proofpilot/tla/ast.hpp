#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace proofpilot::tla {

// ---------------------------------------------------------------------------
// Expressions
//
// The expression language is the closed ASCII subset the system reads and
// emits: first-order logic over integers with quantifiers, arithmetic,
// comparisons, set enumeration and set difference, and operator application.
// Nodes are immutable and shared.
// ---------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind {
    Ident,    // identifier or builtin constant (Nat, Int, TRUE, ...)
    Number,   // numeral literal, kept as text
    Apply,    // F(e1, ..., en)
    Unary,    // ~e, -e
    Binary,   // e1 op e2
    Quant,    // \A / \E vars \in domain : body
    SetEnum,  // {e1, ..., en}
};

struct Expr {
    ExprKind kind;
    std::string text;                // ident name, numeral, or operator symbol
    std::vector<std::string> bound;  // Quant only: bound variable names
    std::vector<ExprPtr> children;   // Apply args; Unary operand; Binary lhs/rhs;
                                     // Quant domain,body; SetEnum elements
};

inline ExprPtr make_ident(std::string name) {
    return std::make_shared<Expr>(Expr{ExprKind::Ident, std::move(name), {}, {}});
}
inline ExprPtr make_number(std::string literal) {
    return std::make_shared<Expr>(Expr{ExprKind::Number, std::move(literal), {}, {}});
}
inline ExprPtr make_number(long long n) { return make_number(std::to_string(n)); }
inline ExprPtr make_apply(std::string op, std::vector<ExprPtr> args) {
    return std::make_shared<Expr>(Expr{ExprKind::Apply, std::move(op), {}, std::move(args)});
}
inline ExprPtr make_unary(std::string op, ExprPtr operand) {
    return std::make_shared<Expr>(Expr{ExprKind::Unary, std::move(op), {}, {std::move(operand)}});
}
inline ExprPtr make_binary(std::string op, ExprPtr lhs, ExprPtr rhs) {
    return std::make_shared<Expr>(
        Expr{ExprKind::Binary, std::move(op), {}, {std::move(lhs), std::move(rhs)}});
}
inline ExprPtr make_quant(std::string quantifier, std::vector<std::string> vars, ExprPtr domain,
                          ExprPtr body) {
    return std::make_shared<Expr>(Expr{ExprKind::Quant, std::move(quantifier), std::move(vars),
                                       {std::move(domain), std::move(body)}});
}
inline ExprPtr make_set_enum(std::vector<ExprPtr> elems) {
    return std::make_shared<Expr>(Expr{ExprKind::SetEnum, "", {}, std::move(elems)});
}

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->text != b->text || a->bound != b->bound ||
        a->children.size() != b->children.size())
        return false;
    for (size_t i = 0; i < a->children.size(); ++i)
        if (!expr_equal(a->children[i], b->children[i])) return false;
    return true;
}

// Builtin symbols never count as user definitions and are never unfolded.
inline bool is_builtin_symbol(const std::string& name) {
    return name == "Nat" || name == "Int" || name == "BOOLEAN" || name == "TRUE" ||
           name == "FALSE";
}

// Standard modules whose operators come from the prover's library.
inline bool is_builtin_module(const std::string& name) {
    return name == "Integers" || name == "Naturals" || name == "TLAPS" || name == "FiniteSets" ||
           name == "Sequences";
}

// ---------------------------------------------------------------------------
// Claim statements
// ---------------------------------------------------------------------------

// NEW x \in <domain> declaration inside an ASSUME list.
struct NewDecl {
    std::string var;
    ExprPtr domain;
};

using AssumeItem = std::variant<NewDecl, ExprPtr>;

struct AssumeProve {
    std::vector<AssumeItem> assumptions;  // at least one
    ExprPtr goal;
};

// Either a plain boolean expression or an ASSUME ... PROVE ... structure.
struct ClaimStatement {
    std::variant<ExprPtr, AssumeProve> body;

    bool is_assume_prove() const { return std::holds_alternative<AssumeProve>(body); }
    const AssumeProve& assume_prove() const { return std::get<AssumeProve>(body); }
    const ExprPtr& plain() const { return std::get<ExprPtr>(body); }

    // The expression being established: the whole claim, or the PROVE part.
    const ExprPtr& goal_expr() const {
        if (is_assume_prove()) return assume_prove().goal;
        return plain();
    }
};

inline ClaimStatement make_plain_claim(ExprPtr e) { return ClaimStatement{std::move(e)}; }
inline ClaimStatement make_assume_prove(std::vector<AssumeItem> assumptions, ExprPtr goal) {
    return ClaimStatement{AssumeProve{std::move(assumptions), std::move(goal)}};
}

inline bool assume_item_equal(const AssumeItem& a, const AssumeItem& b) {
    if (a.index() != b.index()) return false;
    if (std::holds_alternative<NewDecl>(a)) {
        const auto& da = std::get<NewDecl>(a);
        const auto& db = std::get<NewDecl>(b);
        return da.var == db.var && expr_equal(da.domain, db.domain);
    }
    return expr_equal(std::get<ExprPtr>(a), std::get<ExprPtr>(b));
}

inline bool claim_equal(const ClaimStatement& a, const ClaimStatement& b) {
    if (a.is_assume_prove() != b.is_assume_prove()) return false;
    if (!a.is_assume_prove()) return expr_equal(a.plain(), b.plain());
    const auto& pa = a.assume_prove();
    const auto& pb = b.assume_prove();
    if (pa.assumptions.size() != pb.assumptions.size()) return false;
    for (size_t i = 0; i < pa.assumptions.size(); ++i)
        if (!assume_item_equal(pa.assumptions[i], pb.assumptions[i])) return false;
    return expr_equal(pa.goal, pb.goal);
}

// ---------------------------------------------------------------------------
// Proofs and units
// ---------------------------------------------------------------------------

enum class ProofKind {
    Obvious,
    Omitted,
    By,      // BY facts [DEF definitions]
    Opaque,  // unparsed proof text (constructs the system did not generate)
};

struct Proof {
    ProofKind kind = ProofKind::Obvious;
    std::vector<std::string> facts;  // By only
    std::vector<std::string> defs;   // By only
    std::string opaque_text;         // Opaque only, verbatim source slice
};

inline Proof obvious_proof() { return Proof{ProofKind::Obvious, {}, {}, ""}; }
inline Proof omitted_proof() { return Proof{ProofKind::Omitted, {}, {}, ""}; }
inline Proof by_proof(std::vector<std::string> facts, std::vector<std::string> defs) {
    return Proof{ProofKind::By, std::move(facts), std::move(defs), ""};
}
inline Proof opaque_proof(std::string text) {
    return Proof{ProofKind::Opaque, {}, {}, std::move(text)};
}

inline bool proof_equal(const Proof& a, const Proof& b) {
    return a.kind == b.kind && a.facts == b.facts && a.defs == b.defs &&
           a.opaque_text == b.opaque_text;
}

struct Definition {
    std::string name;
    std::vector<std::string> params;
    ExprPtr body;
    int line_begin = 0;
    int line_end = 0;
};

struct Theorem {
    std::optional<std::string> name;
    ClaimStatement statement;
    std::optional<Proof> proof;  // nullopt: an unproved claim
    int line_begin = 0;
    int line_end = 0;
};

struct Comment {
    std::string text;  // verbatim, including delimiters
};

using Unit = std::variant<Definition, Theorem, Comment>;

struct TlaModule {
    std::string name;
    std::vector<std::string> extends;
    std::vector<Unit> units;
    std::string source;  // original text, newline-normalized; empty if synthesized
};

inline bool unit_equal(const Unit& a, const Unit& b) {
    if (a.index() != b.index()) return false;
    if (std::holds_alternative<Definition>(a)) {
        const auto& da = std::get<Definition>(a);
        const auto& db = std::get<Definition>(b);
        return da.name == db.name && da.params == db.params && expr_equal(da.body, db.body);
    }
    if (std::holds_alternative<Theorem>(a)) {
        const auto& ta = std::get<Theorem>(a);
        const auto& tb = std::get<Theorem>(b);
        if (ta.name != tb.name || !claim_equal(ta.statement, tb.statement)) return false;
        if (ta.proof.has_value() != tb.proof.has_value()) return false;
        return !ta.proof || proof_equal(*ta.proof, *tb.proof);
    }
    return true;  // comments compare equal: dropped from semantic comparisons
}

// Structural equality: spans, source text, and comments are ignored.
inline bool module_equal(const TlaModule& a, const TlaModule& b) {
    if (a.name != b.name || a.extends != b.extends) return false;
    auto semantic = [](const TlaModule& m) {
        std::vector<const Unit*> out;
        for (const auto& u : m.units)
            if (!std::holds_alternative<Comment>(u)) out.push_back(&u);
        return out;
    };
    auto ua = semantic(a);
    auto ub = semantic(b);
    if (ua.size() != ub.size()) return false;
    for (size_t i = 0; i < ua.size(); ++i)
        if (!unit_equal(*ua[i], *ub[i])) return false;
    return true;
}

// Convenience queries used across the system.

inline const Theorem* find_theorem(const TlaModule& m, const std::string& name) {
    for (const auto& u : m.units)
        if (const auto* t = std::get_if<Theorem>(&u))
            if (t->name && *t->name == name) return t;
    return nullptr;
}

inline const Definition* find_definition(const TlaModule& m, const std::string& name) {
    for (const auto& u : m.units)
        if (const auto* d = std::get_if<Definition>(&u))
            if (d->name == name) return d;
    return nullptr;
}

inline std::vector<const Theorem*> unproved_theorems(const TlaModule& m) {
    std::vector<const Theorem*> out;
    for (const auto& u : m.units)
        if (const auto* t = std::get_if<Theorem>(&u))
            if (!t->proof) out.push_back(t);
    return out;
}

}  // namespace proofpilot::tla
