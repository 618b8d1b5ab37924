#pragma once

#include <deque>
#include <regex>
#include <set>
#include <string>
#include <string_view>

#include "proofpilot/support/strings.hpp"
#include "proofpilot/tla/ast.hpp"
#include "proofpilot/tla/lexer.hpp"

namespace proofpilot::tla {

namespace detail {

inline const std::set<std::string>& reserved_words() {
    static const std::set<std::string> words = {
        "MODULE", "EXTENDS", "THEOREM", "LEMMA",   "ASSUME", "PROVE", "NEW",
        "BY",     "DEF",     "OBVIOUS", "OMITTED", "PROOF",  "QED",
    };
    return words;
}

// Binary operator precedence. Higher binds tighter. Comparisons are
// non-associative; /\ and \/ share a level and may not be mixed unparenthesized.
inline int binary_prec(const std::string& op) {
    if (op == "=>") return 10;
    if (op == "<=>") return 20;
    if (op == "/\\" || op == "\\/") return 30;
    if (op == "=" || op == "/=" || op == "#" || op == "<" || op == "<=" || op == ">" ||
        op == ">=" || op == "\\in")
        return 40;
    if (op == "\\") return 50;
    if (op == "+" || op == "-") return 60;
    if (op == "%") return 65;
    if (op == "*") return 70;
    return -1;
}

inline bool right_assoc(int prec) { return prec == 10 || prec == 20; }

}  // namespace detail

class Parser {
public:
    explicit Parser(std::string_view normalized_text) : lexer_(normalized_text) {}

    TlaModule parse_module() {
        TlaModule m;
        m.source = std::string(lexer_.text());

        expect_kind(TokenKind::ModuleDash, "module header '----'");
        expect_ident("MODULE");
        m.name = expect_kind(TokenKind::Ident, "module name").text;
        expect_kind(TokenKind::ModuleDash, "'----' closing the module header");

        while (true) {
            for (auto& c : pending_comments_) m.units.push_back(Comment{c.text});
            pending_comments_.clear();
            Token t = peek();
            if (t.kind == TokenKind::ModuleEnd) {
                next();
                break;
            }
            if (t.kind == TokenKind::End)
                throw SyntaxError(t.line, t.col, "'====' terminating the module");
            if (t.kind == TokenKind::Comment) {
                next();
                m.units.push_back(Comment{t.text});
                continue;
            }
            if (t.kind == TokenKind::Ident && t.text == "EXTENDS") {
                next();
                parse_extends(m);
                continue;
            }
            if (t.kind == TokenKind::Ident && (t.text == "THEOREM" || t.text == "LEMMA")) {
                m.units.push_back(parse_theorem());
                continue;
            }
            if (t.kind == TokenKind::Ident && !detail::reserved_words().count(t.text)) {
                m.units.push_back(parse_definition(m));
                continue;
            }
            throw SyntaxError(t.line, t.col,
                              "a unit (EXTENDS, THEOREM, or a definition), got '" + t.text + "'");
        }
        return m;
    }

    ExprPtr parse_expression_only() {
        ExprPtr e = parse_expr(0);
        Token t = peek();
        if (t.kind != TokenKind::End)
            throw SyntaxError(t.line, t.col, "end of expression, got '" + t.text + "'");
        return e;
    }

    AssumeItem parse_assume_item_only() {
        AssumeItem item = parse_assume_item();
        Token t = peek();
        if (t.kind != TokenKind::End)
            throw SyntaxError(t.line, t.col, "end of assumption, got '" + t.text + "'");
        return item;
    }

private:
    // ---- token buffer -------------------------------------------------

    const Token& peek(size_t k = 0) {
        while (buf_.size() <= k) buf_.push_back(lexer_.next());
        return buf_[k];
    }

    Token next() {
        Token t = peek();
        buf_.pop_front();
        if (t.kind != TokenKind::End) last_line_ = t.line;
        return t;
    }

    // Skips over comments inside declarations; they are queued and surface as
    // Comment units at the next unit boundary (and always stay in source).
    const Token& peek_sem(size_t k = 0) {
        while (true) {
            const Token& t = peek(k);
            if (t.kind != TokenKind::Comment) {
                bool removed = false;
                for (size_t i = 0; i < k && i < buf_.size(); ++i) {
                    if (buf_[i].kind == TokenKind::Comment) {
                        pending_comments_.push_back(buf_[i]);
                        buf_.erase(buf_.begin() + static_cast<long>(i));
                        removed = true;
                        break;
                    }
                }
                if (!removed) return t;
            } else {
                pending_comments_.push_back(t);
                if (k == 0)
                    buf_.pop_front();
                else
                    buf_.erase(buf_.begin() + static_cast<long>(k));
            }
        }
    }

    Token next_sem() {
        peek_sem();
        return next();
    }

    Token expect_kind(TokenKind kind, const std::string& what) {
        const Token& t = peek_sem();
        if (t.kind != kind) throw SyntaxError(t.line, t.col, "expected " + what);
        return next();
    }

    Token expect_op(const std::string& sym) {
        const Token& t = peek_sem();
        if (t.kind != TokenKind::Op || t.text != sym)
            throw SyntaxError(t.line, t.col, "expected '" + sym + "', got '" + t.text + "'");
        return next();
    }

    Token expect_ident(const std::string& word) {
        const Token& t = peek_sem();
        if (t.kind != TokenKind::Ident || t.text != word)
            throw SyntaxError(t.line, t.col, "expected '" + word + "', got '" + t.text + "'");
        return next();
    }

    bool at_op(const std::string& sym, size_t k = 0) {
        const Token& t = peek_sem(k);
        return t.kind == TokenKind::Op && t.text == sym;
    }

    bool at_ident(const std::string& word, size_t k = 0) {
        const Token& t = peek_sem(k);
        return t.kind == TokenKind::Ident && t.text == word;
    }

    // ---- units ---------------------------------------------------------

    void parse_extends(TlaModule& m) {
        while (true) {
            Token name = expect_kind(TokenKind::Ident, "module name after EXTENDS");
            m.extends.push_back(name.text);
            if (at_op(",")) {
                next();
                continue;
            }
            break;
        }
    }

    Unit parse_definition(TlaModule& m) {
        Definition d;
        Token name = next_sem();
        d.name = name.text;
        d.line_begin = name.line;
        if (find_definition(m, d.name))
            throw SyntaxError(name.line, name.col, "duplicate definition of '" + d.name + "'");
        if (at_op("(")) {
            next();
            while (true) {
                d.params.push_back(expect_kind(TokenKind::Ident, "parameter name").text);
                if (at_op(",")) {
                    next();
                    continue;
                }
                break;
            }
            expect_op(")");
        }
        expect_kind(TokenKind::DefEq, "'==' in definition");
        d.body = parse_expr(0);
        d.line_end = last_line_;
        return d;
    }

    Unit parse_theorem() {
        Theorem t;
        Token kw = next_sem();  // THEOREM or LEMMA
        t.line_begin = kw.line;

        if (peek_sem().kind == TokenKind::Ident &&
            !detail::reserved_words().count(peek_sem().text) &&
            peek_sem(1).kind == TokenKind::DefEq) {
            t.name = next_sem().text;
            next_sem();  // ==
        }

        if (at_ident("ASSUME")) {
            next();
            std::vector<AssumeItem> items;
            items.push_back(parse_assume_item());
            while (at_op(",")) {
                next();
                items.push_back(parse_assume_item());
            }
            expect_ident("PROVE");
            ExprPtr goal = parse_expr(0);
            if (items.empty()) {
                Token p = peek_sem();
                throw SyntaxError(p.line, p.col, "ASSUME needs at least one assumption");
            }
            t.statement = make_assume_prove(std::move(items), std::move(goal));
        } else {
            t.statement = make_plain_claim(parse_expr(0));
        }
        t.line_end = last_line_;

        t.proof = parse_optional_proof();
        if (t.proof) t.line_end = last_line_;
        return t;
    }

    AssumeItem parse_assume_item() {
        if (at_ident("NEW")) {
            next();
            Token var = expect_kind(TokenKind::Ident, "variable name after NEW");
            expect_op("\\in");
            // the domain may be an expression like Nat \ {0}
            ExprPtr domain = parse_expr(50);
            return NewDecl{var.text, std::move(domain)};
        }
        return parse_expr(0);
    }

    std::optional<Proof> parse_optional_proof() {
        const Token& t = peek_sem();
        if (t.kind == TokenKind::StepMarker) return parse_opaque_proof();
        if (t.kind != TokenKind::Ident) return std::nullopt;

        if (t.text == "OBVIOUS") {
            next();
            return obvious_proof();
        }
        if (t.text == "OMITTED") {
            next();
            return omitted_proof();
        }
        if (t.text == "BY") {
            next();
            return parse_by_proof();
        }
        if (t.text == "PROOF") {
            // PROOF followed by a leaf directive stays structured; anything
            // else (numbered steps etc.) is preserved as an opaque span
            if (at_ident("OBVIOUS", 1) || at_ident("OMITTED", 1) || at_ident("BY", 1)) {
                next();
                return parse_optional_proof();
            }
            return parse_opaque_proof();
        }
        return std::nullopt;
    }

    Proof parse_by_proof() {
        std::vector<std::string> facts;
        std::vector<std::string> defs;
        if (!at_ident("DEF")) {
            while (true) {
                facts.push_back(expect_kind(TokenKind::Ident, "fact name in BY").text);
                if (at_op(",")) {
                    next();
                    continue;
                }
                break;
            }
        }
        if (at_ident("DEF")) {
            next();
            while (true) {
                defs.push_back(expect_kind(TokenKind::Ident, "definition name in BY DEF").text);
                if (at_op(",")) {
                    next();
                    continue;
                }
                break;
            }
        }
        if (facts.empty() && defs.empty()) {
            Token t = peek_sem();
            throw SyntaxError(t.line, t.col, "BY needs at least one fact or DEF clause");
        }
        return by_proof(std::move(facts), std::move(defs));
    }

    // Proof structures the system never generates (numbered steps and proof
    // constructs beyond the leaf directives) are kept verbatim. The non-TLA+
    // constructs the language simply does not have are still rejected here.
    Proof parse_opaque_proof() {
        const Token& first = peek_sem();
        size_t start = first.offset;
        int start_line = first.line;

        std::string_view text = lexer_.text();
        size_t line_start = text.rfind('\n', start);
        line_start = (line_start == std::string_view::npos) ? 0 : line_start + 1;

        size_t pos = line_start;
        size_t end = text.size();
        int line_no = start_line;
        static const std::regex unit_start_re(
            R"(^[ \t]*(THEOREM\b|LEMMA\b|EXTENDS\b|====|----|[A-Za-z_][A-Za-z0-9_]*[ \t]*(\([^)]*\))?[ \t]*==([^=>]|$)))");
        bool first_line = true;
        while (pos < text.size()) {
            size_t eol = text.find('\n', pos);
            if (eol == std::string_view::npos) eol = text.size();
            std::string line(text.substr(pos, eol - pos));
            if (!first_line && std::regex_search(line, unit_start_re)) {
                end = pos;
                break;
            }
            check_opaque_line(line, line_no);
            first_line = false;
            pos = eol + 1;
            ++line_no;
            end = pos;
        }

        std::string body = support::trim(std::string(text.substr(line_start, end - line_start)));

        // rewind the lexer to the boundary and drop stale lookahead
        int boundary_line = 1;
        for (size_t i = 0; i < end && i < text.size(); ++i)
            if (text[i] == '\n') ++boundary_line;
        buf_.clear();
        lexer_.reset(LexState{end, boundary_line, 1, true});
        last_line_ = boundary_line - 1;
        return opaque_proof(std::move(body));
    }

    void check_opaque_line(const std::string& line, int line_no) {
        static const std::regex fix_re(R"(\bFIX\b)");
        static const std::regex arith_re(R"(\bINT_ARITH\b)");
        static const std::regex step_re(R"(^[ \t]*<\d+>)");
        if (std::regex_search(line, fix_re))
            throw SyntaxError(line_no, 1, "keyword FIX does not exist in the TLA+ proof language");
        if (std::regex_search(line, arith_re))
            throw SyntaxError(line_no, 1, "INT_ARITH is not a TLA+ proof directive");
        std::string trimmed = support::trim(line);
        if (!trimmed.empty() && trimmed.back() == '.' && std::regex_search(line, step_re))
            throw SyntaxError(line_no, 1, "proof steps must not end with '.'");
    }

    // ---- expressions ---------------------------------------------------

    ExprPtr parse_expr(int min_prec) {
        ExprPtr lhs = parse_prefix();
        std::string logic_chain_op;  // first /\ or \/ consumed at this level
        bool had_comparison = false;

        while (true) {
            const Token& t = peek_sem();
            if (t.kind != TokenKind::Op) break;
            int prec = detail::binary_prec(t.text);
            if (prec < 0 || prec < min_prec) break;

            std::string op = t.text;
            if (op == "#") op = "/=";  // # is an alias

            if (prec == 30) {
                if (logic_chain_op.empty())
                    logic_chain_op = op;
                else if (logic_chain_op != op)
                    throw SyntaxError(t.line, t.col,
                                      "cannot mix /\\ and \\/ without parentheses");
            }
            if (prec == 40) {
                if (had_comparison)
                    throw SyntaxError(t.line, t.col,
                                      "chained comparison requires parentheses");
                had_comparison = true;
            }

            next();
            int rhs_min = detail::right_assoc(prec) ? prec : prec + 1;
            ExprPtr rhs = parse_expr(rhs_min);
            lhs = make_binary(op, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr parse_prefix() {
        const Token& t = peek_sem();
        if (t.kind == TokenKind::Op) {
            if (t.text == "~") {
                next();
                return make_unary("~", parse_expr(36));
            }
            if (t.text == "-") {
                next();
                return make_unary("-", parse_expr(69));
            }
            if (t.text == "\\A" || t.text == "\\E") return parse_quantifier();
            if (t.text == "(") {
                next();
                ExprPtr e = parse_expr(0);
                expect_op(")");
                return e;
            }
            if (t.text == "{") {
                next();
                std::vector<ExprPtr> elems;
                if (!at_op("}")) {
                    elems.push_back(parse_expr(0));
                    while (at_op(",")) {
                        next();
                        elems.push_back(parse_expr(0));
                    }
                }
                expect_op("}");
                return make_set_enum(std::move(elems));
            }
        }
        if (t.kind == TokenKind::Number) return make_number(next().text);
        if (t.kind == TokenKind::Ident) {
            if (detail::reserved_words().count(t.text))
                throw SyntaxError(t.line, t.col, "expected an expression, got '" + t.text + "'");
            std::string name = next().text;
            if (at_op("(")) {
                next();
                std::vector<ExprPtr> args;
                args.push_back(parse_expr(0));
                while (at_op(",")) {
                    next();
                    args.push_back(parse_expr(0));
                }
                expect_op(")");
                return make_apply(std::move(name), std::move(args));
            }
            return make_ident(std::move(name));
        }
        throw SyntaxError(t.line, t.col, "expected an expression, got '" + t.text + "'");
    }

    // \A x, y \in S : body   (multiple binding groups fold into nested nodes)
    ExprPtr parse_quantifier() {
        Token q = next_sem();
        struct Group {
            std::vector<std::string> vars;
            ExprPtr domain;
        };
        std::vector<Group> groups;
        while (true) {
            Group g;
            while (true) {
                g.vars.push_back(expect_kind(TokenKind::Ident, "bound variable name").text);
                if (at_op(",") && peek_sem(1).kind == TokenKind::Ident &&
                    (at_op("\\in", 2) || at_op(",", 2))) {
                    // lookahead: comma belongs to this variable group
                    next();
                    continue;
                }
                break;
            }
            expect_op("\\in");
            g.domain = parse_expr(50);
            groups.push_back(std::move(g));
            if (at_op(",")) {
                next();
                continue;
            }
            break;
        }
        expect_op(":");
        ExprPtr body = parse_expr(0);
        for (auto it = groups.rbegin(); it != groups.rend(); ++it)
            body = make_quant(q.text, std::move(it->vars), std::move(it->domain), std::move(body));
        return body;
    }

    Lexer lexer_;
    std::deque<Token> buf_;
    std::vector<Token> pending_comments_;
    int last_line_ = 1;
};

// ---- entry points -------------------------------------------------------

// Line endings are normalized to '\n' before parsing.
inline TlaModule parse_module(std::string_view text) {
    std::string normalized = support::normalize_newlines(text);
    Parser p(normalized);
    TlaModule m = p.parse_module();
    m.source = std::move(normalized);
    return m;
}

inline ExprPtr parse_expression(std::string_view text) {
    std::string normalized = support::normalize_newlines(text);
    Parser p(normalized);
    return p.parse_expression_only();
}

// Parses "NEW x \in Nat" style declarations or a plain expression.
inline AssumeItem parse_assume_item(std::string_view text) {
    std::string normalized = support::normalize_newlines(text);
    Parser p(normalized);
    return p.parse_assume_item_only();
}

}  // namespace proofpilot::tla
